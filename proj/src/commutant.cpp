#include "mlz/commutant.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "mlz/models.hpp"
#include "mlz/spectra.hpp"

namespace mlz::commutant {

namespace {

void check_params(const FamilyParams& params) {
  require(params.gamma.size() == params.xi.size() && params.gamma.size() >= 2, errc::validation,
          "family params: need len(gamma) == len(xi) >= 2");
  for (Eigen::Index i = 0; i < params.gamma.size(); ++i)
    require(params.gamma[i] != 0.0, errc::validation, "family params: gamma must be nonzero");
  for (Eigen::Index i = 0; i < params.xi.size(); ++i)
    for (Eigen::Index l = i + 1; l < params.xi.size(); ++l)
      require(params.xi[i] != params.xi[l], errc::degenerate_xi,
              "family params: xi must be mutually distinct");
}

// Hermitian matrices are parametrized by n^2 reals: the diagonal first, then
// (re, im) pairs of the upper triangle.
Eigen::MatrixXcd hermitian_from_params(const Eigen::VectorXd& theta, Eigen::Index n) {
  Eigen::MatrixXcd omega = Eigen::MatrixXcd::Zero(n, n);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < n; ++i) omega(i, i) = theta[pos++];
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index l = i + 1; l < n; ++l) {
      const Complex v(theta[pos], theta[pos + 1]);
      pos += 2;
      omega(i, l) = v;
      omega(l, i) = std::conj(v);
    }
  return omega;
}

void flatten_into(const Eigen::MatrixXcd& m, Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index n2 = m.size();
  out.head(n2) = Eigen::Map<const Eigen::MatrixXd>(
                     reinterpret_cast<const double*>(m.data()), 2, n2)
                     .row(0);
  out.tail(n2) = Eigen::Map<const Eigen::MatrixXd>(
                     reinterpret_cast<const double*>(m.data()), 2, n2)
                     .row(1);
}

// The real-linear map theta -> [Omega(theta), C] stacked as (Re, Im); one
// column per Hermitian parameter.
Eigen::MatrixXd commutation_superoperator(const Eigen::MatrixXcd& c) {
  const Eigen::Index n = c.rows();
  const Eigen::Index params = n * n;
  Eigen::MatrixXd super(2 * n * n, params);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(params);
  for (Eigen::Index b = 0; b < params; ++b) {
    theta[b] = 1.0;
    const Eigen::MatrixXcd omega = hermitian_from_params(theta, n);
    theta[b] = 0.0;
    flatten_into(omega * c - c * omega, super.col(b));
  }
  return super;
}

int nullity(const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return static_cast<int>(m.cols());
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * sv[0]) ++rank;
  return static_cast<int>(m.cols()) - rank;
}

Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[0] > 0.0 && sv[i] > rel_tol * sv[0]) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

std::vector<double> chebyshev_grid(int count, double half_width) {
  std::vector<double> grid(static_cast<size_t>(count));
  for (int s = 0; s < count; ++s)
    grid[static_cast<size_t>(s)] =
        half_width * std::cos(M_PI * (2.0 * s + 1.0) / (2.0 * count));
  return grid;
}

}  // namespace

std::string to_string(Construction c) {
  switch (c) {
    case Construction::MaximalLinear: return "maximal_linear";
    case Construction::BowTieQuadratic: return "bowtie_quadratic";
    case Construction::GbtMinimal: return "gbt_minimal";
  }
  fail(errc::validation, "unknown construction");
}

MatrixPencil maximal_family_member(const FamilyParams& params, Eigen::Index i) {
  check_params(params);
  const Eigen::Index n = params.gamma.size();
  require(i >= 0 && i < n, errc::validation, "family member index out of range");
  const auto& g = params.gamma;
  const auto& xi = params.xi;

  Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
  c1(i, i) = 1.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    if (l == i) continue;
    const double denom = xi[i] - xi[l];
    c0(i, l) = g[i] * g[l] / denom;
    c0(l, i) = c0(i, l);
    c0(l, l) = -g[i] * g[i] / denom;
    c0(i, i) -= g[l] * g[l] / denom;
  }
  return MatrixPencil({std::move(c0), std::move(c1)});
}

CommutingFamily maximal_linear_family(const FamilyParams& params) {
  check_params(params);
  CommutingFamily family;
  family.construction = Construction::MaximalLinear;
  for (Eigen::Index i = 0; i < params.gamma.size(); ++i) {
    family.members.push_back(maximal_family_member(params, i));
    family.labels.push_back("H" + std::to_string(i + 1));
  }
  return family;
}

EmbeddingResult embed_equal_slope(const Eigen::VectorXd& p, const Eigen::VectorXd& a) {
  require(p.size() == a.size() && p.size() >= 1, errc::validation,
          "embedding: need len(p) == len(a) >= 1");
  const Eigen::Index n = p.size() + 1;
  const MatrixPencil h = models::build_equal_slope(p, a, 1.0);

  const spectra::SecularSpec spec = spectra::secular_from_equal_slope(p, a);
  EmbeddingResult result;
  result.roots = spectra::char_roots(spec, 0.0);

  for (const double x : result.roots) {
    FamilyParams params;
    params.gamma.resize(n);
    params.xi.resize(n);
    params.x = x;
    params.gamma[0] = 1.0;
    params.xi[0] = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) {
      params.gamma[i] = p[i - 1] / (x - a[i - 1]);
      params.xi[i] = 1.0 / (a[i - 1] - x);
    }
    const MatrixPencil h1 = maximal_family_member(params, 0);
    double err = 0.0;
    err = std::max(err, (h1.coeff(0) + x * Eigen::MatrixXcd::Identity(n, n) - h.coeff(0))
                            .cwiseAbs()
                            .maxCoeff());
    err = std::max(err, (h1.coeff(1) - h.coeff(1)).cwiseAbs().maxCoeff());
    result.params_per_root.push_back(std::move(params));
    result.reconstruction_errors.push_back(err);
  }
  return result;
}

CommutingFamily bowtie_quadratic_family(const Eigen::VectorXd& p, const Eigen::VectorXd& r) {
  models::build_bowtie(p, r);  // validates the bow-tie preconditions
  for (Eigen::Index i = 0; i < r.size(); ++i)
    require(r[i] != 0.0, errc::zero_slope_entry,
            "bow-tie quadratic family: slopes must be nonzero (1/r weights)");

  const Eigen::Index n = p.size() + 1;
  CommutingFamily family;
  family.construction = Construction::BowTieQuadratic;

  {  // I_1: the 1/r-weighted member attached to the bordered level
    Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd c2 = Eigen::MatrixXcd::Zero(n, n);
    c2(0, 0) = 1.0;
    double wsum = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) wsum += p[i - 1] * p[i - 1] / r[i - 1];
    for (Eigen::Index i = 1; i < n; ++i) {
      c1(0, i) = -p[i - 1] / r[i - 1];
      c1(i, 0) = c1(0, i);
      c0(i, i) = -(wsum - p[i - 1] * p[i - 1] / r[i - 1]) / r[i - 1];
      for (Eigen::Index l = i + 1; l < n; ++l) {
        c0(i, l) = p[i - 1] * p[l - 1] / (r[i - 1] * r[l - 1]);
        c0(l, i) = c0(i, l);
      }
    }
    family.members.emplace_back(
        std::vector<Eigen::MatrixXcd>{std::move(c0), std::move(c1), std::move(c2)});
    family.labels.push_back("I1");
  }

  for (Eigen::Index k = 1; k < n; ++k) {  // I_k, k >= 2
    Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd c2 = Eigen::MatrixXcd::Zero(n, n);
    c2(k, k) = r[k - 1];
    c1(0, k) = p[k - 1];
    c1(k, 0) = p[k - 1];
    for (Eigen::Index i = 1; i < n; ++i) {
      if (i == k) continue;
      const double denom = r[i - 1] - r[k - 1];
      c0(i, i) = p[k - 1] * p[k - 1] / denom;
      c0(k, k) += p[i - 1] * p[i - 1] / denom;
      c0(k, i) = -p[k - 1] * p[i - 1] / denom;
      c0(i, k) = c0(k, i);
    }
    family.members.emplace_back(
        std::vector<Eigen::MatrixXcd>{std::move(c0), std::move(c1), std::move(c2)});
    family.labels.push_back("I" + std::to_string(k + 1));
  }
  return family;
}

MatrixPencil gbt_linear_partner(const Eigen::VectorXd& p, const Eigen::VectorXd& r,
                                double epsilon) {
  require(epsilon != 0.0, errc::zero_detuning,
          "gbt partner: detuning must be nonzero (formula divides by epsilon)");
  models::build_generalized_bowtie(p, r, epsilon);  // validates preconditions

  const Eigen::Index n = p.size() + 2;
  double s = 0.0;
  for (Eigen::Index m = 0; m < p.size(); ++m) s += p[m] * p[m] / r[m];

  // Simplified partner in the v = 1, v_2 = 1, v_1 = 0 gauge, with the
  // constant (t_11 + t_12 - v eps/2) Id removed.
  Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
  c1(1, 1) = 1.0;
  c0(0, 0) = 0.5 * epsilon - s / epsilon;
  c0(1, 1) = -s / epsilon;
  c0(0, 1) = s / epsilon;
  c0(1, 0) = c0(0, 1);
  for (Eigen::Index i = 2; i < n; ++i) {
    const double ri = r[i - 2];
    const double pi = p[i - 2];
    c1(i, i) = 0.5 * (ri + 1.0);
    c0(i, i) = 0.25 * epsilon * (1.0 - 1.0 / ri);
    c0(0, i) = 0.5 * pi * (ri + 1.0) / ri;
    c0(i, 0) = c0(0, i);
    c0(1, i) = 0.5 * pi * (ri - 1.0) / ri;
    c0(i, 1) = c0(1, i);
  }
  return MatrixPencil({std::move(c0), std::move(c1)});
}

CommutingFamily gbt_minimal_family(const Eigen::VectorXd& p, const Eigen::VectorXd& r,
                                   double epsilon) {
  CommutingFamily family;
  family.construction = Construction::GbtMinimal;
  family.members.push_back(models::build_generalized_bowtie(p, r, epsilon));
  family.labels.push_back("H");
  family.members.push_back(gbt_linear_partner(p, r, epsilon));
  family.labels.push_back("I");
  return family;
}

double commutator_norm(const MatrixPencil& a, const MatrixPencil& b,
                       const std::vector<double>& u_samples) {
  require(a.dim() == b.dim(), errc::dimension_mismatch, "commutator_norm: dimension mismatch");
  require(!u_samples.empty(), errc::validation, "commutator_norm: need at least one u sample");
  double worst = 0.0;
  for (const double u : u_samples) {
    const Eigen::MatrixXcd au = a(u);
    const Eigen::MatrixXcd bu = b(u);
    const double denom = std::max(1.0, au.norm() * bu.norm());
    worst = std::max(worst, commutator_norm_fro(au, bu) / denom);
  }
  return worst;
}

double max_pairwise_commutator(const CommutingFamily& family,
                               const std::vector<double>& u_samples) {
  double worst = 0.0;
  for (size_t i = 0; i < family.members.size(); ++i)
    for (size_t l = i + 1; l < family.members.size(); ++l)
      worst = std::max(worst, commutator_norm(family.members[i], family.members[l], u_samples));
  return worst;
}

TrivialityReport triviality_residual(const MatrixPencil& partner, const MatrixPencil& h) {
  require(h.degree() == 1, errc::validation, "triviality fit: H must be degree 1");
  require(partner.dim() == h.dim(), errc::dimension_mismatch, "triviality fit: dimension mismatch");
  const int p = partner.degree();
  const Eigen::Index n = h.dim();

  const std::vector<double> grid = chebyshev_grid(2 * p + 5, 3.0);
  require(commutator_norm(partner, h, grid) <= kTrivialityTol, errc::not_a_commuting_partner,
          "triviality fit: pencils do not commute");

  // basis c_{k,q} u^q H^k(u) with q <= p - k
  std::vector<std::pair<int, int>> basis;
  for (int k = 0; k <= p; ++k)
    for (int q = 0; q <= p - k; ++q) basis.emplace_back(k, q);

  const Eigen::Index block = 2 * n * n;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(grid.size()) * block,
                    static_cast<Eigen::Index>(basis.size()));
  Eigen::VectorXd b(a.rows());
  for (size_t s = 0; s < grid.size(); ++s) {
    const double u = grid[s];
    const Eigen::MatrixXcd hu = h(u);
    std::vector<Eigen::MatrixXcd> powers(static_cast<size_t>(p) + 1);
    powers[0] = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 1; k <= p; ++k) powers[static_cast<size_t>(k)] = powers[static_cast<size_t>(k - 1)] * hu;
    const Eigen::Index row0 = static_cast<Eigen::Index>(s) * block;
    for (size_t col = 0; col < basis.size(); ++col) {
      const auto [k, q] = basis[col];
      flatten_into(std::pow(u, q) * powers[static_cast<size_t>(k)],
                   a.block(row0, static_cast<Eigen::Index>(col), block, 1));
    }
    flatten_into(partner(u), b.segment(row0, block));
  }

  TrivialityReport report;
  const double bnorm = b.norm();
  report.coefficients = Eigen::MatrixXd::Zero(p + 1, p + 1);
  if (bnorm == 0.0) {
    report.residual = 0.0;
    report.verdict = Verdict::Trivial;
    return report;
  }

  const Eigen::VectorXd scale = a.colwise().norm().cwiseMax(1e-300);
  Eigen::MatrixXd a_scaled = a * scale.cwiseInverse().asDiagonal();
  const Eigen::VectorXd c = a_scaled.colPivHouseholderQr().solve(b).cwiseQuotient(scale);
  report.residual = (a * c - b).norm() / bnorm;
  for (size_t col = 0; col < basis.size(); ++col) {
    const auto [k, q] = basis[col];
    report.coefficients(k, q) = c[static_cast<Eigen::Index>(col)];
  }
  report.verdict = report.residual <= kTrivialityTol ? Verdict::Trivial : Verdict::Nontrivial;
  return report;
}

int shared_symmetry_dim(const std::vector<MatrixPencil>& pencils) {
  require(!pencils.empty(), errc::validation, "shared_symmetry_dim: need at least one pencil");
  const Eigen::Index n = pencils.front().dim();
  Eigen::Index rows = 0;
  for (const auto& pencil : pencils) {
    require(pencil.dim() == n, errc::dimension_mismatch, "shared_symmetry_dim: dimension mismatch");
    rows += (pencil.degree() + 1) * 2 * n * n;
  }
  Eigen::MatrixXd stacked(rows, n * n);
  Eigen::Index row0 = 0;
  for (const auto& pencil : pencils)
    for (const auto& c : pencil.coeffs()) {
      stacked.middleRows(row0, 2 * n * n) = commutation_superoperator(c);
      row0 += 2 * n * n;
    }
  return nullity(stacked, 1e-9);
}

std::vector<MatrixPencil> commuting_partner_basis(const MatrixPencil& h, int degree) {
  require(h.degree() == 1, errc::validation, "partner search: H must be degree 1");
  require(degree >= 0, errc::validation, "partner search: degree must be >= 0");
  const Eigen::Index n = h.dim();
  const Eigen::Index params_per = n * n;
  const Eigen::Index cols = (degree + 1) * params_per;
  const Eigen::Index block = 2 * n * n;

  // [I(u), H(u)] = 0 identically: per power m of u,
  // [X_m, T] + [X_{m-1}, V] = 0 with X_{-1} = X_{degree+1} = 0.
  const Eigen::MatrixXd super_t = commutation_superoperator(h.coeff(0));
  const Eigen::MatrixXd super_v = commutation_superoperator(h.coeff(1));
  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero((degree + 2) * block, cols);
  for (int m = 0; m <= degree + 1; ++m) {
    if (m <= degree) stacked.block(m * block, m * params_per, block, params_per) = super_t;
    if (m >= 1) stacked.block(m * block, (m - 1) * params_per, block, params_per) = super_v;
  }

  const Eigen::MatrixXd null_basis = nullspace_basis(stacked, 1e-9);
  std::vector<MatrixPencil> result;
  for (Eigen::Index v = 0; v < null_basis.cols(); ++v) {
    std::vector<Eigen::MatrixXcd> coeffs;
    for (int q = 0; q <= degree; ++q)
      coeffs.push_back(hermitian_from_params(null_basis.col(v).segment(q * params_per, params_per), n));
    result.emplace_back(std::move(coeffs));
  }
  return result;
}

int pencil_span_rank(const std::vector<MatrixPencil>& pencils, double rel_tol) {
  require(!pencils.empty(), errc::validation, "pencil_span_rank: need at least one pencil");
  const Eigen::Index n = pencils.front().dim();
  int max_degree = 0;
  for (const auto& pencil : pencils) {
    require(pencil.dim() == n, errc::dimension_mismatch, "pencil_span_rank: dimension mismatch");
    max_degree = std::max(max_degree, pencil.degree());
  }
  const Eigen::Index block = 2 * n * n;
  Eigen::MatrixXd stacked =
      Eigen::MatrixXd::Zero((max_degree + 1) * block, static_cast<Eigen::Index>(pencils.size()));
  for (size_t col = 0; col < pencils.size(); ++col)
    for (int q = 0; q <= pencils[col].degree(); ++q)
      flatten_into(pencils[col].coeff(q),
                   stacked.block(q * block, static_cast<Eigen::Index>(col), block, 1));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[0] > 0.0 && sv[i] > rel_tol * sv[0]) ++rank;
  return rank;
}

}  // namespace mlz::commutant
