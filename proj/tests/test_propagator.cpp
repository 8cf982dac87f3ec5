#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mlz/closedform.hpp"
#include "mlz/models.hpp"
#include "mlz/propagator.hpp"

using namespace mlz;
using namespace mlz::propagator;

namespace {

PropagationConfig suite_config(double horizon = 200.0) {
  PropagationConfig cfg;
  cfg.horizon = horizon;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  return cfg;
}

}  // namespace

TEST_CASE("decoupled diagonal evolution stays put") {
  const auto pencil = models::build_oscillator(0.0, 5);
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(6);
  psi0[2] = 1.0;
  const auto cfg = suite_config(50.0);
  const Eigen::VectorXcd psi = propagate(pencil, psi0, -cfg.horizon, cfg.horizon, cfg);
  CHECK(std::abs(std::abs(psi[2]) - 1.0) <= 1e-12);
}

TEST_CASE("2x2 Landau-Zener survival against the closed form") {
  const auto pencil = models::build_su2_spin(1.0, 0.5);
  const auto cfg = suite_config();
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(2);
  psi0[0] = 1.0;
  const Eigen::VectorXcd psi = propagate(pencil, psi0, -cfg.horizon, cfg.horizon, cfg);
  // the raw diabatic component carries an O(g/T) basis-mixing tail; the
  // channel-projected readout (transition_matrix) removes it
  CHECK(std::abs(std::norm(psi[0]) - std::exp(-std::numbers::pi / 2.0)) <= 5e-3);
  CHECK(std::abs(psi.norm() - 1.0) <= 1e-9);

  auto projected = suite_config();
  const auto tm = transition_matrix(pencil, projected);
  CHECK(std::abs(tm.p(0, 0) - std::exp(-std::numbers::pi / 2.0)) <= 1e-5);
}

TEST_CASE("transition matrix of the 2x2 sweep") {
  const auto pencil = models::build_su2_spin(1.0, 0.5);
  const auto tm = transition_matrix(pencil, suite_config());
  const double q = std::exp(-std::numbers::pi / 2.0);
  CHECK(std::abs(tm.p(0, 0) - q) <= 1e-3);
  CHECK(std::abs(tm.p(0, 1) - (1.0 - q)) <= 1e-3);
  CHECK(std::abs(tm.p(1, 0) - (1.0 - q)) <= 1e-3);
  CHECK(std::abs(tm.p(1, 1) - q) <= 1e-3);
  CHECK(std::abs(tm.p(0, 1) - tm.p(1, 0)) <= 1e-9);
  CHECK(tm.row_defect <= 1e-9);
  CHECK(tm.col_defect <= 1e-9);
}

TEST_CASE("norm is conserved along the trajectory") {
  const auto pencil = models::build_su2_spin(0.9, 1.5);
  const auto cfg = suite_config(120.0);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
  psi[1] = 1.0;
  double t = -cfg.horizon;
  for (const double next : {-60.0, -5.0, 0.0, 13.0, 60.0, 120.0}) {
    psi = propagate(pencil, psi / psi.norm(), t, next, cfg);
    t = next;
    CHECK(std::abs(psi.norm() - 1.0) <= 1e-9);
  }
}

TEST_CASE("phase stripping changes nothing physical") {
  const auto pencil = models::build_su2_spin(0.8, 1.0);
  auto cfg = suite_config(40.0);
  const auto stripped = transition_matrix(pencil, cfg);
  cfg.phase_stripping = false;
  cfg.rel_tol = 1e-11;
  const auto raw = transition_matrix(pencil, cfg);
  CHECK((stripped.p - raw.p).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("su2 j=1 matches the Hioe formula") {
  const double g = 0.8;
  const auto pencil = models::build_su2_spin(g, 1.0);
  const auto tm = transition_matrix(pencil, suite_config());
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 3; ++l)
      CHECK(std::abs(tm.p(i, l) -
                     closedform::su2_transition(1.0, 1.0 - i, 1.0 - l, g)) <= 1e-3);
}

TEST_CASE("gauge invariance of the transition probabilities") {
  Eigen::VectorXcd p(3);
  p << std::polar(1.0, 0.7), std::polar(0.8, -2.1), std::polar(1.2, 1.9);
  Eigen::VectorXd r(3);
  r << 1.0, -0.7, 2.1;
  const auto pencil = models::build_bowtie(p, r);
  const auto [real_pencil, phases] = models::degauge(pencil, models::ModelKind::BowTie);

  PropagationConfig cfg;
  cfg.horizon = 20.0;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  const auto before = transition_matrix(pencil, cfg);
  const auto after = transition_matrix(real_pencil, cfg);
  CHECK((before.p - after.p).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("horizon extrapolation") {
  const auto pencil = models::build_su2_spin(1.0, 0.5);
  const auto result = horizon_extrapolation(pencil, suite_config(), {50.0, 100.0, 200.0});
  CHECK(result.tail_estimate <= 1e-3);
  CHECK(std::abs(result.extrapolated.p(0, 0) - std::exp(-std::numbers::pi / 2.0)) <= 1e-3);

  // diagonal pencil: zero tail
  const auto diag = models::build_oscillator(0.0, 5);
  const auto flat = horizon_extrapolation(diag, suite_config(), {10.0, 20.0, 40.0});
  CHECK(flat.tail_estimate <= 1e-11);

  try {
    horizon_extrapolation(pencil, suite_config(), {50.0, 100.0});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::validation);
  }

  // raw diabatic read-out oscillates at short horizons: the tail check trips
  auto raw = suite_config();
  raw.asymptotic_projection = false;
  try {
    horizon_extrapolation(pencil, raw, {5.0, 6.0, 8.0});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::non_convergent_tail);
  }
}

TEST_CASE("cutoff convergence of the chain window reaches the Bessel value") {
  models::ModelSpec spec;
  spec.kind = models::ModelKind::LinearChain;
  spec.g_lc = 0.5;
  spec.n_min = -8;
  spec.n_max = 8;
  auto cfg = suite_config();
  cfg.rel_tol = 1e-9;
  const auto table = cutoff_convergence(spec, {8, 12, 16}, {{0, 0}}, cfg);
  CHECK(table.converged);
  const double j0 = closedform::bessel_j(0, 2.0 * std::sqrt(2.0 * std::numbers::pi) * 0.5);
  CHECK(std::abs(table.values.back()[0] - j0 * j0) <= 5e-3);
}

TEST_CASE("bow-tie transition matrix is doubly stochastic") {
  Eigen::VectorXd p(3), r(3);
  p << 1.0, 0.6, 0.9;
  r << 1.0, -0.8, 2.2;
  const auto pencil = models::build_bowtie(p, r);
  const auto tm = transition_matrix(pencil, suite_config(120.0));
  CHECK(tm.row_defect <= 1e-6);
  CHECK(tm.col_defect <= 1e-6);
  CHECK(tm.p.minCoeff() >= 0.0);
}

TEST_CASE("cutoff convergence of the oscillator reaches the Laguerre value") {
  models::ModelSpec spec;
  spec.kind = models::ModelKind::Oscillator;
  spec.g_o = 0.4;
  spec.cutoff = 20;
  const auto table = cutoff_convergence(spec, {20, 40, 60}, {{0, 0}}, suite_config());
  CHECK(table.converged);
  const double limit = table.values.back()[0];
  CHECK(std::abs(limit - std::exp(-0.32 * std::numbers::pi)) <= 5e-3);

  try {
    cutoff_convergence(spec, {20, 40, 60}, {{30, 0}}, suite_config());
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::probe_outside_cutoff);
  }

  // g = 0 keeps every probability pinned at the identity
  models::ModelSpec off = spec;
  off.g_o = 0.0;
  const auto id_table = cutoff_convergence(off, {8, 12, 16}, {{0, 0}, {1, 1}, {2, 1}},
                                           suite_config(30.0));
  CHECK(id_table.converged);
  CHECK(id_table.values.back()[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(id_table.values.back()[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(id_table.values.back()[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("step limit and validation errors") {
  const auto pencil = models::build_su2_spin(1.0, 0.5);
  auto cfg = suite_config();
  cfg.max_steps = 10;
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(2);
  psi0[0] = 1.0;
  try {
    propagate(pencil, psi0, -cfg.horizon, cfg.horizon, cfg);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::step_limit_exceeded);
  }

  auto bad = suite_config();
  bad.rel_tol = 1.0;  // outside [1e-14, 1e-3]
  try {
    propagate(pencil, psi0, -1.0, 1.0, bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::validation);
  }

  try {
    propagate(pencil, 2.0 * psi0, -1.0, 1.0, suite_config());
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::validation);
  }
}
