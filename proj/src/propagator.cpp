#include "mlz/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>
#include <tuple>

namespace mlz::propagator {

namespace {

using Eigen::Index;
using Eigen::VectorXcd;

/// Right-hand side of i b' = W~(t) b after stripping the diagonal phases
/// phi_n(t) = d_n t + s_n t^2/2:
///   b_n' = -i sum_{m != n} W_nm(t) exp(i(phi_n - phi_m)) b_m,
/// with W(t) the off-diagonal part of H(t). Without stripping it is the plain
/// Schroedinger right-hand side.
class Rhs {
 public:
  Rhs(const MatrixPencil& pencil, bool strip) : strip_(strip) {
    const Index n = pencil.dim();
    const Eigen::MatrixXcd& c0 = pencil.coeff(0);
    const Eigen::MatrixXcd& c1 = pencil.coeff(1);
    if (!strip_) {
      dense0_ = c0;
      dense1_ = c1;
      return;
    }
    d_ = c0.diagonal().real();
    s_ = c1.diagonal().real();
    // ladder models carry exact arithmetic diagonal progressions; their phase
    // vectors are geometric sequences needing two exponentials per evaluation
    if (n >= 3) {
      geometric_ = true;
      dd_ = d_[1] - d_[0];
      ds_ = s_[1] - s_[0];
      for (Index i = 1; i + 1 < n; ++i)
        if (d_[i + 1] - d_[i] != dd_ || s_[i + 1] - s_[i] != ds_) {
          geometric_ = false;
          break;
        }
    }
    std::vector<Eigen::Triplet<Complex>> t0, t1;
    for (Index i = 0; i < n; ++i)
      for (Index l = 0; l < n; ++l) {
        if (i == l) continue;
        if (c0(i, l) != 0.0) t0.emplace_back(i, l, c0(i, l));
        if (c1(i, l) != 0.0) t1.emplace_back(i, l, c1(i, l));
      }
    w0_.resize(n, n);
    w1_.resize(n, n);
    w0_.setFromTriplets(t0.begin(), t0.end());
    w1_.setFromTriplets(t1.begin(), t1.end());
    ang_.resize(n);
    phase_.resize(n);
    tmp_.resize(n);
    ww_.resize(n);
  }

  void operator()(double t, const VectorXcd& y, VectorXcd& dy) {
    const Complex mi(0.0, -1.0);
    if (!strip_) {
      dy.noalias() = dense0_ * y;
      dy.noalias() += t * (dense1_ * y);
      dy *= mi;
      return;
    }
    if (geometric_) {
      Complex w = std::polar(1.0, (d_[0] + 0.5 * t * s_[0]) * t);
      const Complex ratio = std::polar(1.0, (dd_ + 0.5 * t * ds_) * t);
      for (Index i = 0; i < phase_.size(); ++i) {
        phase_[i] = w;
        w *= ratio;
      }
    } else {
      ang_ = (d_ + 0.5 * t * s_) * t;
      phase_.real() = ang_.array().cos();
      phase_.imag() = ang_.array().sin();  // e^{+i phi}
    }
    tmp_.array() = y.array() * phase_.conjugate().array();
    ww_.noalias() = w0_ * tmp_;
    if (w1_.nonZeros() > 0) ww_.noalias() += t * (w1_ * tmp_);
    dy.array() = mi * phase_.array() * ww_.array();
  }

  /// b_n(t) = exp(+i phi_n(t)) psi_n(t)
  VectorXcd to_stripped(double t, const VectorXcd& psi) const {
    if (!strip_) return psi;
    VectorXcd b(psi.size());
    for (Index i = 0; i < psi.size(); ++i)
      b[i] = std::polar(1.0, (d_[i] + 0.5 * t * s_[i]) * t) * psi[i];
    return b;
  }

  VectorXcd to_physical(double t, const VectorXcd& b) const {
    if (!strip_) return b;
    VectorXcd psi(b.size());
    for (Index i = 0; i < b.size(); ++i)
      psi[i] = std::polar(1.0, -(d_[i] + 0.5 * t * s_[i]) * t) * b[i];
    return psi;
  }

 private:
  bool strip_;
  bool geometric_ = false;
  double dd_ = 0.0, ds_ = 0.0;
  Eigen::ArrayXd d_, s_, ang_;
  Eigen::ArrayXcd phase_;
  VectorXcd tmp_, ww_;
  Eigen::SparseMatrix<Complex> w0_, w1_;
  Eigen::MatrixXcd dense0_, dense1_;
};

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192, kB5 = -2187.0 / 6784,
                 kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;

VectorXcd integrate(Rhs& rhs, VectorXcd y, double t0, double t1, const PropagationConfig& cfg) {
  const double span = t1 - t0;
  require(span != 0.0, errc::validation, "integrate: empty time interval");
  const double dir = span > 0 ? 1.0 : -1.0;
  const Index n = y.size();

  VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n), err(n);
  rhs(t0, y, k1);

  double t = t0;
  double h = dir * std::min(1e-3 * std::abs(span), 1e-2 / (k1.norm() / std::sqrt(double(n)) + 1e-8));
  long steps = 0;
  while (dir * (t1 - t) > 0.0) {
    require(++steps <= cfg.max_steps, errc::step_limit_exceeded,
            "integrate: step limit exceeded");
    require(std::abs(h) > 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0),
            errc::tolerance_unreachable, "integrate: step size underflow");
    bool last = false;
    double hs = h;
    if (dir * (t + hs - t1) >= 0.0) {
      hs = t1 - t;
      last = true;
    }

    ytmp = y + hs * (kA21 * k1);
    rhs(t + kC2 * hs, ytmp, k2);
    ytmp = y + hs * (kA31 * k1 + kA32 * k2);
    rhs(t + kC3 * hs, ytmp, k3);
    ytmp = y + hs * (kA41 * k1 + kA42 * k2 + kA43 * k3);
    rhs(t + kC4 * hs, ytmp, k4);
    ytmp = y + hs * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
    rhs(t + kC5 * hs, ytmp, k5);
    ytmp = y + hs * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
    rhs(t + hs, ytmp, k6);
    y5 = y + hs * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    rhs(t + hs, y5, k7);  // FSAL
    err = hs * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const double q = std::abs(err[i]) / sc;
      acc += q * q;
    }
    const double enorm = std::sqrt(acc / static_cast<double>(n));

    if (enorm <= 1.0) {
      t = last ? t1 : t + hs;
      y.swap(y5);
      k1.swap(k7);
    }
    const double factor = (enorm == 0.0)
                              ? 5.0
                              : std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
    h = hs * factor;
  }
  return y;
}

// Instantaneous eigenvectors labeled by diabatic index: column perm[i] of the
// eigenvector matrix is the channel asymptotically connected to basis state i.
// Greedy global assignment on |v_k(i)|^2, largest overlaps first.
Eigen::MatrixXcd labeled_channels(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  require(es.info() == Eigen::Success, errc::numerical, "channel eigendecomposition failed");
  const Eigen::MatrixXcd& vecs = es.eigenvectors();
  const Index n = vecs.cols();

  std::vector<std::tuple<double, Index, Index>> overlaps;  // (-|v_k(i)|^2, k, i)
  overlaps.reserve(static_cast<size_t>(n * n));
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i) overlaps.emplace_back(-std::norm(vecs(i, k)), k, i);
  std::sort(overlaps.begin(), overlaps.end());

  std::vector<Index> channel_of(static_cast<size_t>(n), -1);
  std::vector<bool> channel_used(static_cast<size_t>(n), false);
  Index assigned = 0;
  for (const auto& [neg, k, i] : overlaps) {
    (void)neg;
    if (channel_used[static_cast<size_t>(k)] || channel_of[static_cast<size_t>(i)] >= 0) continue;
    channel_used[static_cast<size_t>(k)] = true;
    channel_of[static_cast<size_t>(i)] = k;
    if (++assigned == n) break;
  }

  Eigen::MatrixXcd channels(n, n);
  for (Index i = 0; i < n; ++i) channels.col(i) = vecs.col(channel_of[static_cast<size_t>(i)]);
  return channels;
}

void parallel_over(Index count, int threads, const std::function<void(Index)>& body) {
  int worker_count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  worker_count = std::clamp<int>(worker_count, 1, static_cast<int>(count));
  if (worker_count == 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<Index> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(worker_count));
  for (int w = 0; w < worker_count; ++w)
    pool.emplace_back([&, w] {
      try {
        for (Index i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void PropagationConfig::validate() const {
  require(horizon > 0.0, errc::validation, "propagation: horizon must be positive");
  require(rel_tol >= 1e-14 && rel_tol <= 1e-3, errc::validation,
          "propagation: rel_tol must lie in [1e-14, 1e-3]");
  require(abs_tol >= 1e-14 && abs_tol <= 1e-3, errc::validation,
          "propagation: abs_tol must lie in [1e-14, 1e-3]");
  require(max_steps > 0, errc::validation, "propagation: max_steps must be positive");
}

TransitionMatrix TransitionMatrix::from_probabilities(Eigen::MatrixXd p, double entry_tol) {
  require(p.rows() == p.cols(), errc::dimension_mismatch, "transition matrix must be square");
  require(p.allFinite(), errc::validation, "transition matrix entries must be finite");
  require(p.minCoeff() >= -entry_tol && p.maxCoeff() <= 1.0 + entry_tol, errc::validation,
          "transition matrix entries must lie in [0, 1]");
  TransitionMatrix tm;
  tm.row_defect = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
  tm.col_defect = (p.colwise().sum().array() - 1.0).abs().maxCoeff();
  tm.p = std::move(p);
  return tm;
}

Eigen::VectorXcd propagate(const MatrixPencil& pencil, const Eigen::VectorXcd& psi0, double t0,
                           double t1, const PropagationConfig& cfg) {
  cfg.validate();
  require(pencil.degree() == 1, errc::validation, "propagate: pencil must be degree 1");
  require(psi0.size() == pencil.dim(), errc::dimension_mismatch, "propagate: state size mismatch");
  require(std::abs(psi0.norm() - 1.0) <= 1e-9, errc::validation,
          "propagate: initial state must be normalized");
  Rhs rhs(pencil, cfg.phase_stripping);
  const VectorXcd b1 = integrate(rhs, rhs.to_stripped(t0, psi0), t0, t1, cfg);
  return rhs.to_physical(t1, b1);
}

Eigen::MatrixXd propagate_rows(const MatrixPencil& pencil, const PropagationConfig& cfg,
                               const std::vector<Eigen::Index>& initial_states) {
  cfg.validate();
  require(pencil.degree() == 1, errc::validation, "propagate_rows: pencil must be degree 1");
  const Index n = pencil.dim();

  Eigen::MatrixXcd in_channels, out_channels;
  if (cfg.asymptotic_projection) {
    in_channels = labeled_channels(pencil(-cfg.horizon));
    out_channels = labeled_channels(pencil(cfg.horizon));
  }

  Eigen::MatrixXd rows(static_cast<Index>(initial_states.size()), n);
  parallel_over(static_cast<Index>(initial_states.size()), cfg.threads, [&](Index idx) {
    const Index start = initial_states[static_cast<size_t>(idx)];
    require(start >= 0 && start < n, errc::validation, "propagate_rows: state index out of range");
    Rhs rhs(pencil, cfg.phase_stripping);
    VectorXcd psi0;
    if (cfg.asymptotic_projection) {
      psi0 = in_channels.col(start);
    } else {
      psi0 = VectorXcd::Zero(n);
      psi0[start] = 1.0;
    }
    const VectorXcd b = integrate(rhs, rhs.to_stripped(-cfg.horizon, psi0), -cfg.horizon,
                                  cfg.horizon, cfg);
    if (cfg.asymptotic_projection) {
      const VectorXcd psi = rhs.to_physical(cfg.horizon, b);
      rows.row(idx) = (out_channels.adjoint() * psi).cwiseAbs2().transpose();
    } else {
      rows.row(idx) = b.cwiseAbs2().transpose();
    }
  });
  return rows;
}

TransitionMatrix transition_matrix(const MatrixPencil& pencil, const PropagationConfig& cfg) {
  std::vector<Index> all(static_cast<size_t>(pencil.dim()));
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  return TransitionMatrix::from_probabilities(propagate_rows(pencil, cfg, all));
}

ExtrapolationResult horizon_extrapolation(const MatrixPencil& pencil,
                                          const PropagationConfig& cfg,
                                          const std::vector<double>& horizons) {
  require(horizons.size() >= 3, errc::validation, "extrapolation: need >= 3 horizons");
  for (size_t i = 1; i < horizons.size(); ++i)
    require(horizons[i] > horizons[i - 1] && horizons[i - 1] > 0.0, errc::validation,
            "extrapolation: horizons must be positive and increasing");

  ExtrapolationResult result;
  for (const double tmax : horizons) {
    PropagationConfig run = cfg;
    run.horizon = tmax;
    result.per_horizon.push_back(transition_matrix(pencil, run).p);
  }

  std::vector<double> diffs;
  for (size_t k = 1; k < horizons.size(); ++k)
    diffs.push_back(
        (result.per_horizon[k] - result.per_horizon[k - 1]).cwiseAbs().maxCoeff());
  require(diffs.back() <= diffs.front() + 1e-12, errc::non_convergent_tail,
          "extrapolation: successive horizon differences do not shrink");

  // least squares in 1/T per entry
  const Index rows = static_cast<Index>(horizons.size());
  Eigen::MatrixXd design(rows, 2);
  for (Index k = 0; k < rows; ++k) {
    design(k, 0) = 1.0;
    design(k, 1) = 1.0 / horizons[static_cast<size_t>(k)];
  }
  const auto qr = design.colPivHouseholderQr();
  const Index n = pencil.dim();
  Eigen::MatrixXd pinf(n, n);
  Eigen::VectorXd samples(rows);
  for (Index i = 0; i < n; ++i)
    for (Index l = 0; l < n; ++l) {
      for (Index k = 0; k < rows; ++k) samples[k] = result.per_horizon[static_cast<size_t>(k)](i, l);
      pinf(i, l) = std::clamp(qr.solve(samples)[0], 0.0, 1.0);
    }
  result.tail_estimate = (result.per_horizon.back() - pinf).cwiseAbs().maxCoeff();
  result.extrapolated = TransitionMatrix::from_probabilities(
      std::move(pinf), std::max(1e-9, result.tail_estimate));
  return result;
}

ConvergenceTable cutoff_convergence(const models::ModelSpec& spec, const std::vector<int>& cutoffs,
                                    const std::vector<std::pair<int, int>>& probes,
                                    const PropagationConfig& cfg) {
  require(cutoffs.size() >= 3, errc::validation, "convergence study: need >= 3 cutoffs");
  for (size_t i = 1; i < cutoffs.size(); ++i)
    require(cutoffs[i] > cutoffs[i - 1], errc::validation,
            "convergence study: cutoffs must be increasing");
  require(!probes.empty(), errc::validation, "convergence study: need at least one probe");
  using models::ModelKind;
  require(spec.kind == ModelKind::Oscillator || spec.kind == ModelKind::LinearChain ||
              spec.kind == ModelKind::Su11Sector,
          errc::validation, "convergence study applies to truncated models only");

  const int chain_center = (spec.n_min + spec.n_max) / 2;
  auto probe_index = [&](int label, int cutoff) -> Index {
    int idx = 0;
    int margin = 0;
    if (spec.kind == ModelKind::LinearChain) {
      idx = label - (chain_center - cutoff);
      margin = std::abs(label - chain_center);
    } else {
      idx = label;
      margin = label;
    }
    require(margin >= 0 && 2 * margin <= cutoff, errc::probe_outside_cutoff,
            "probe state must lie well inside the smallest cutoff");
    return idx;
  };

  ConvergenceTable table;
  table.cutoffs = cutoffs;
  table.probes = probes;
  for (const int cutoff : cutoffs) {
    models::ModelSpec run = spec;
    if (spec.kind == ModelKind::LinearChain) {
      run.n_min = chain_center - cutoff;
      run.n_max = chain_center + cutoff;
    } else {
      run.cutoff = cutoff;
    }
    const MatrixPencil pencil = models::build_pencil(run);

    std::vector<Index> initial;
    for (const auto& [from, to] : probes) {
      (void)to;
      const Index idx = probe_index(from, cutoff);
      if (std::find(initial.begin(), initial.end(), idx) == initial.end()) initial.push_back(idx);
    }
    const Eigen::MatrixXd rows = propagate_rows(pencil, cfg, initial);

    std::vector<double> values;
    for (const auto& [from, to] : probes) {
      const Index row = static_cast<Index>(
          std::find(initial.begin(), initial.end(), probe_index(from, cutoff)) - initial.begin());
      values.push_back(rows(row, probe_index(to, cutoff)));
    }
    table.values.push_back(std::move(values));
  }

  for (size_t k = 1; k < table.values.size(); ++k) {
    double d = 0.0;
    for (size_t q = 0; q < probes.size(); ++q)
      d = std::max(d, std::abs(table.values[k][q] - table.values[k - 1][q]));
    table.diffs.push_back(d);
  }
  table.converged = table.diffs.back() <= 1e-4;
  return table;
}

}  // namespace mlz::propagator
