#pragma once

#include <functional>
#include <vector>

#include "mlz/pencil.hpp"

namespace mlz::spectra {

enum class SecularKind { EqualSlopeX, BowTieE, GbtE };

/// Pole-sum secular equation: the roots of
///   E = extra/E + sum_k weights[k] / (E - pole_k(u))
/// are the eigenvalues of the matching bordered Hamiltonian. For BowTieE and
/// GbtE the poles scale with u; for EqualSlopeX they are the fixed offsets and
/// the secular variable is the embedding shift x.
struct SecularSpec {
  SecularKind kind = SecularKind::BowTieE;
  Eigen::VectorXd poles;
  Eigen::VectorXd weights;  // p_k^2, all > 0
  double extra = 0.0;       // eps^2/4 pole-at-zero weight (GbtE only)
};

SecularSpec secular_from_equal_slope(const Eigen::VectorXd& p, const Eigen::VectorXd& a);
SecularSpec secular_from_bowtie(const Eigen::VectorXd& p, const Eigen::VectorXd& r);
SecularSpec secular_from_gbt(const Eigen::VectorXd& p, const Eigen::VectorXd& r, double epsilon);

/// All real roots of the secular equation at parameter u, sorted ascending.
/// One root is bracketed between each pair of consecutive poles plus the two
/// outer intervals. Throws DegeneratePoles at u = 0 for the u-scaled kinds.
std::vector<double> char_roots(const SecularSpec& spec, double u);

/// Eigenvalues of h clustered within tol: (cluster mean, multiplicity),
/// ascending. tol <= 0 selects the default 1e-9 * ||h||; crossing scans on
/// coarse u grids want looser values.
std::vector<std::pair<double, int>> cluster_eigenvalues(const Eigen::MatrixXcd& h,
                                                        double tol = 0.0);

std::vector<std::pair<double, int>> degeneracy_profile(const MatrixPencil& pencil, double u,
                                                       double tol = 0.0);

/// Brent-style bracketed root solve of a strictly monotone function; the
/// bracket endpoints may be poles (handled by geometric shrinking).
double solve_bracketed(const std::function<double(double)>& f, double lo, double hi);

}  // namespace mlz::spectra
