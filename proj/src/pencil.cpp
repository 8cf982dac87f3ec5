#include "mlz/pencil.hpp"

#include <Eigen/Eigenvalues>

namespace mlz {

MatrixPencil::MatrixPencil(std::vector<Eigen::MatrixXcd> coeffs) : coeffs_(std::move(coeffs)) {
  require(!coeffs_.empty(), errc::validation, "pencil needs at least one coefficient");
  const Eigen::Index n = coeffs_.front().rows();
  require(n > 0, errc::validation, "pencil dimension must be positive");
  for (const auto& c : coeffs_) {
    require(c.rows() == n && c.cols() == n, errc::dimension_mismatch,
            "pencil coefficients must be square and of equal size");
    const double scale = c.cwiseAbs().maxCoeff();
    require(hermiticity_defect(c) <= kHermitianTol * std::max(1.0, scale), errc::validation,
            "pencil coefficient is not Hermitian");
  }
}

Eigen::MatrixXcd MatrixPencil::operator()(double u) const {
  Eigen::MatrixXcd h = coeffs_.back();
  for (int q = degree() - 1; q >= 0; --q) h = u * h + coeffs_[static_cast<size_t>(q)];
  return h;
}

double MatrixPencil::max_imag() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, c.imag().cwiseAbs().maxCoeff());
  return m;
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, errc::numerical, "eigendecomposition failed");
  return es.eigenvalues();
}

MatrixPencil pencil_sum(const MatrixPencil& a, const MatrixPencil& b) {
  require(a.dim() == b.dim(), errc::dimension_mismatch, "pencil_sum: dimension mismatch");
  const int deg = std::max(a.degree(), b.degree());
  std::vector<Eigen::MatrixXcd> coeffs(static_cast<size_t>(deg) + 1,
                                       Eigen::MatrixXcd::Zero(a.dim(), a.dim()));
  for (int q = 0; q <= a.degree(); ++q) coeffs[static_cast<size_t>(q)] += a.coeff(q);
  for (int q = 0; q <= b.degree(); ++q) coeffs[static_cast<size_t>(q)] += b.coeff(q);
  return MatrixPencil(std::move(coeffs));
}

MatrixPencil pencil_scale(const MatrixPencil& a, double factor) {
  std::vector<Eigen::MatrixXcd> coeffs = a.coeffs();
  for (auto& c : coeffs) c *= factor;
  return MatrixPencil(std::move(coeffs));
}

MatrixPencil identity_pencil(Eigen::Index dim, int degree, double constant) {
  std::vector<Eigen::MatrixXcd> coeffs(static_cast<size_t>(degree) + 1,
                                       Eigen::MatrixXcd::Zero(dim, dim));
  coeffs[0] = constant * Eigen::MatrixXcd::Identity(dim, dim);
  return MatrixPencil(std::move(coeffs));
}

}  // namespace mlz
