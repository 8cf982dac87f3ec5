#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "mlz/errors.hpp"

namespace mlz {

using Complex = std::complex<double>;

/// Matrix-valued polynomial H(u) = sum_q u^q C_q with Hermitian coefficients.
///
/// Degree-1 pencils are Landau-Zener Hamiltonians H(t) = A + B t; degree-2
/// pencils appear as quadratic commuting partners. The coefficient list fixes
/// the degree explicitly, so a zero leading coefficient is legal.
class MatrixPencil {
 public:
  static constexpr double kHermitianTol = 1e-13;

  explicit MatrixPencil(std::vector<Eigen::MatrixXcd> coeffs);

  Eigen::Index dim() const { return coeffs_.front().rows(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  const Eigen::MatrixXcd& coeff(int q) const { return coeffs_.at(static_cast<size_t>(q)); }
  const std::vector<Eigen::MatrixXcd>& coeffs() const { return coeffs_; }

  /// Evaluate the pencil at parameter value u (Horner form).
  Eigen::MatrixXcd operator()(double u) const;

  /// Largest |imag part| over all coefficient entries.
  double max_imag() const;

  bool is_real_symmetric(double tol = 1e-12) const { return max_imag() <= tol; }

 private:
  std::vector<Eigen::MatrixXcd> coeffs_;
};

/// max |C - C^dagger| entry for a square matrix.
template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& c) {
  return (c - c.adjoint()).cwiseAbs().maxCoeff();
}

/// Frobenius norm of [A, B].
inline double commutator_norm_fro(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a * b - b * a).norm();
}

/// Sorted eigenvalues of a Hermitian matrix.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& h);

/// a + b scaled pencil sums and scalar multiples, used to combine family members.
MatrixPencil pencil_sum(const MatrixPencil& a, const MatrixPencil& b);
MatrixPencil pencil_scale(const MatrixPencil& a, double factor);

/// The constant pencil c * Id of a given degree (higher coefficients zero).
MatrixPencil identity_pencil(Eigen::Index dim, int degree, double constant = 1.0);

}  // namespace mlz
