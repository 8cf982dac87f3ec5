#include "mlz/models.hpp"

#include <cmath>

namespace mlz::models {

namespace {

void check_couplings_nonzero(const Eigen::VectorXcd& p) {
  for (Eigen::Index i = 0; i < p.size(); ++i)
    require(std::abs(p[i]) != 0.0, errc::zero_coupling, "coupling p must be nonzero");
}

void check_slopes_distinct(const Eigen::VectorXd& r) {
  for (Eigen::Index i = 0; i < r.size(); ++i)
    for (Eigen::Index l = i + 1; l < r.size(); ++l)
      require(r[i] != r[l], errc::duplicate_slope, "slopes r must be mutually distinct");
}

bool is_half_integer(double x) { return std::abs(2.0 * x - std::round(2.0 * x)) < 1e-12; }

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::EqualSlope: return "equal_slope";
    case ModelKind::BowTie: return "bowtie";
    case ModelKind::GeneralizedBowTie: return "generalized_bowtie";
    case ModelKind::Su2Spin: return "su2_spin";
    case ModelKind::Oscillator: return "oscillator";
    case ModelKind::LinearChain: return "linear_chain";
    case ModelKind::Su11Sector: return "su11_sector";
  }
  fail(errc::validation, "unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "equal_slope") return ModelKind::EqualSlope;
  if (name == "bowtie") return ModelKind::BowTie;
  if (name == "generalized_bowtie") return ModelKind::GeneralizedBowTie;
  if (name == "su2_spin") return ModelKind::Su2Spin;
  if (name == "oscillator") return ModelKind::Oscillator;
  if (name == "linear_chain") return ModelKind::LinearChain;
  if (name == "su11_sector") return ModelKind::Su11Sector;
  fail(errc::validation, "unknown model kind '" + name + "'");
}

Eigen::Index ModelSpec::dim() const {
  switch (kind) {
    case ModelKind::EqualSlope: return p.size() + 1;
    case ModelKind::BowTie: return p.size() + 1;
    case ModelKind::GeneralizedBowTie: return p.size() + 2;
    case ModelKind::Su2Spin: return static_cast<Eigen::Index>(std::lround(2.0 * j)) + 1;
    case ModelKind::Oscillator: return cutoff + 1;
    case ModelKind::LinearChain: return n_max - n_min + 1;
    case ModelKind::Su11Sector: return cutoff + 1;
  }
  fail(errc::validation, "unknown model kind");
}

MatrixPencil build_equal_slope(const Eigen::VectorXcd& p, const Eigen::VectorXd& a, double b) {
  require(p.size() == a.size() && p.size() >= 1, errc::validation,
          "equal slope: need len(p) == len(a) >= 1");
  check_couplings_nonzero(p);
  require(b != 0.0, errc::zero_slope, "equal slope: b must be nonzero");

  const Eigen::Index n = p.size() + 1;
  Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) {
    c0(0, i) = p[i - 1];
    c0(i, 0) = std::conj(p[i - 1]);
    c0(i, i) = a[i - 1];
  }
  c1(0, 0) = b;
  return MatrixPencil({std::move(c0), std::move(c1)});
}

MatrixPencil build_equal_slope(const Eigen::VectorXd& p, const Eigen::VectorXd& a, double b) {
  return build_equal_slope(Eigen::VectorXcd(p.cast<Complex>()), a, b);
}

MatrixPencil build_bowtie(const Eigen::VectorXcd& p, const Eigen::VectorXd& r) {
  require(p.size() == r.size() && p.size() >= 1, errc::validation,
          "bow-tie: need len(p) == len(r) >= 1");
  check_couplings_nonzero(p);
  check_slopes_distinct(r);

  const Eigen::Index n = p.size() + 1;
  Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) {
    c0(0, i) = p[i - 1];
    c0(i, 0) = std::conj(p[i - 1]);
    c1(i, i) = r[i - 1];
  }
  return MatrixPencil({std::move(c0), std::move(c1)});
}

MatrixPencil build_bowtie(const Eigen::VectorXd& p, const Eigen::VectorXd& r) {
  return build_bowtie(Eigen::VectorXcd(p.cast<Complex>()), r);
}

MatrixPencil build_generalized_bowtie(const Eigen::VectorXcd& p, const Eigen::VectorXd& r,
                                      double epsilon) {
  require(p.size() == r.size() && p.size() >= 1, errc::validation,
          "generalized bow-tie: need len(p) == len(r) >= 1");
  check_couplings_nonzero(p);
  check_slopes_distinct(r);
  for (Eigen::Index i = 0; i < r.size(); ++i)
    require(r[i] != 0.0, errc::zero_slope_entry, "generalized bow-tie: slopes must be nonzero");

  const Eigen::Index n = p.size() + 2;
  Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
  c0(0, 0) = 0.5 * epsilon;
  c0(1, 1) = -0.5 * epsilon;
  for (Eigen::Index i = 2; i < n; ++i) {
    c0(0, i) = p[i - 2];
    c0(i, 0) = std::conj(p[i - 2]);
    c0(1, i) = p[i - 2];
    c0(i, 1) = std::conj(p[i - 2]);
    c1(i, i) = r[i - 2];
  }
  return MatrixPencil({std::move(c0), std::move(c1)});
}

MatrixPencil build_generalized_bowtie(const Eigen::VectorXd& p, const Eigen::VectorXd& r,
                                      double epsilon) {
  return build_generalized_bowtie(Eigen::VectorXcd(p.cast<Complex>()), r, epsilon);
}

MatrixPencil build_su2_spin(double g, double j) {
  require(j >= 0.5 && is_half_integer(j), errc::invalid_spin,
          "su2: j must be a positive half-integer");
  const Eigen::Index n = static_cast<Eigen::Index>(std::lround(2.0 * j)) + 1;

  // Basis ordered by descending m = j, j-1, ..., -j.
  Eigen::MatrixXcd sx = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = j - static_cast<double>(i);
    sz(i, i) = m;
    if (i + 1 < n) {
      // <m|S_+|m-1> = sqrt(j(j+1) - m(m-1))
      const double splus = std::sqrt(j * (j + 1.0) - m * (m - 1.0));
      sx(i, i + 1) = 0.5 * splus;
      sx(i + 1, i) = 0.5 * splus;
    }
  }
  return MatrixPencil({g * sx, std::move(sz)});
}

MatrixPencil build_oscillator(double g_o, int cutoff) {
  require(cutoff >= 4, errc::cutoff_too_small, "oscillator: cutoff must be >= 4");
  const Eigen::Index n = cutoff + 1;
  Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c1(i, i) = static_cast<double>(i);
    if (i + 1 < n) {
      const double amp = g_o * std::sqrt(static_cast<double>(i + 1));
      c0(i, i + 1) = amp;
      c0(i + 1, i) = amp;
    }
  }
  return MatrixPencil({std::move(c0), std::move(c1)});
}

MatrixPencil build_linear_chain(double g_lc, int n_min, int n_max) {
  require(n_max - n_min >= 4, errc::window_too_small, "linear chain: window must span >= 4 sites");
  const Eigen::Index n = n_max - n_min + 1;
  Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c1(i, i) = static_cast<double>(n_min + i);
    if (i + 1 < n) {
      c0(i, i + 1) = g_lc;
      c0(i + 1, i) = g_lc;
    }
  }
  return MatrixPencil({std::move(c0), std::move(c1)});
}

MatrixPencil build_su11_sector(double g_tilde, double k, int cutoff) {
  require(k > 0.0, errc::invalid_bargmann_index, "su11: Bargmann index k must be positive");
  require(cutoff >= 4, errc::cutoff_too_small, "su11: cutoff must be >= 4");
  const Eigen::Index n = cutoff + 1;
  Eigen::MatrixXcd c0 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = k + static_cast<double>(i);
    c1(i, i) = mu;
    if (i + 1 < n) {
      // <k,mu+1|K_+|k,mu> = sqrt((mu+k)(mu-k+1))
      const double amp = g_tilde * std::sqrt((mu + k) * (mu - k + 1.0));
      c0(i, i + 1) = amp;
      c0(i + 1, i) = amp;
    }
  }
  return MatrixPencil({std::move(c0), std::move(c1)});
}

MatrixPencil build_pencil(const ModelSpec& spec) {
  if (spec.kind == ModelKind::Su11Sector) {
    // D_k^+ sectors realized by the one- and two-mode constructions:
    // k in {1/4, 3/4} or a positive half-integer
    const bool quarter = spec.k == 0.25 || spec.k == 0.75;
    const bool half = spec.k > 0.0 && is_half_integer(spec.k);
    require(quarter || half, errc::invalid_bargmann_index,
            "su11: k must be 1/4, 3/4, or a positive half-integer");
  }
  switch (spec.kind) {
    case ModelKind::EqualSlope: return build_equal_slope(spec.p, spec.a, spec.b);
    case ModelKind::BowTie: return build_bowtie(spec.p, spec.r);
    case ModelKind::GeneralizedBowTie: return build_generalized_bowtie(spec.p, spec.r, spec.epsilon);
    case ModelKind::Su2Spin: return build_su2_spin(spec.g, spec.j);
    case ModelKind::Oscillator: return build_oscillator(spec.g_o, spec.cutoff);
    case ModelKind::LinearChain: return build_linear_chain(spec.g_lc, spec.n_min, spec.n_max);
    case ModelKind::Su11Sector: return build_su11_sector(spec.g_tilde, spec.k, spec.cutoff);
  }
  fail(errc::validation, "unknown model kind");
}

std::pair<MatrixPencil, GaugePhases> degauge(const MatrixPencil& pencil, ModelKind kind) {
  const Eigen::Index n = pencil.dim();
  require(pencil.degree() == 1, errc::not_gaugeable, "degauge: expected a degree-1 pencil");
  const Eigen::MatrixXcd& c0 = pencil.coeff(0);
  const Eigen::MatrixXcd& c1 = pencil.coeff(1);
  const double scale = std::max(1.0, c0.cwiseAbs().maxCoeff());
  const double ztol = 1e-14 * scale;

  const Eigen::Index border = (kind == ModelKind::GeneralizedBowTie) ? 2 : 1;
  require(kind == ModelKind::EqualSlope || kind == ModelKind::BowTie ||
              kind == ModelKind::GeneralizedBowTie,
          errc::not_gaugeable, "degauge supports the three bordered models only");
  require(n > border, errc::not_gaugeable, "degauge: pencil too small for the claimed model");

  // The nonzero pattern must be bordered: uncoupled levels may not interact,
  // the split pair of the generalized model may not interact, and slopes are
  // diagonal.
  require((c1 - Eigen::MatrixXcd(c1.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <= ztol,
          errc::not_gaugeable, "degauge: slope matrix must be diagonal");
  for (Eigen::Index i = border; i < n; ++i)
    for (Eigen::Index l = i + 1; l < n; ++l)
      require(std::abs(c0(i, l)) <= ztol, errc::not_gaugeable,
              "degauge: uncoupled levels must not interact");
  if (kind == ModelKind::GeneralizedBowTie)
    require(std::abs(c0(0, 1)) <= ztol, errc::not_gaugeable,
            "degauge: split pair must not interact");

  // Convention p_k = |p_k| e^{-i theta_k} with theta on the border level(s)
  // fixed to zero, so theta_k = -arg p_k.
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = border; i < n; ++i) {
    const Complex p = c0(0, i);
    theta[i] = (std::abs(p) > 0.0) ? -std::arg(p) : 0.0;
  }

  Eigen::VectorXcd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = std::polar(1.0, theta[i]);
  Eigen::MatrixXcd d0 = u.asDiagonal().inverse() * c0 * Eigen::MatrixXcd(u.asDiagonal());
  Eigen::MatrixXcd d1 = u.asDiagonal().inverse() * c1 * Eigen::MatrixXcd(u.asDiagonal());

  require(d0.imag().cwiseAbs().maxCoeff() <= 1e-12 * scale &&
              d1.imag().cwiseAbs().maxCoeff() <= 1e-12 * scale,
          errc::not_gaugeable, "degauge: phases are not removable by a diagonal unitary");
  d0 = d0.real().cast<Complex>();
  d1 = d1.real().cast<Complex>();
  return {MatrixPencil({std::move(d0), std::move(d1)}), GaugePhases{std::move(theta)}};
}

std::pair<double, double> su11_one_mode_state(int n) {
  require(n >= 0, errc::invalid_sector_state, "one-mode state label must be >= 0");
  if (n % 2 == 0) return {0.25, n / 2 + 0.25};
  return {0.75, (n - 1) / 2 + 0.75};
}

std::pair<double, double> su11_two_mode_state(int n_a, int n_b) {
  require(n_a >= 0 && n_b >= 0, errc::invalid_sector_state, "two-mode occupations must be >= 0");
  return {(std::abs(n_a - n_b) + 1) / 2.0, (n_a + n_b + 1) / 2.0};
}

}  // namespace mlz::models
