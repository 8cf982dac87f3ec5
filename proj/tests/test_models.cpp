#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mlz/models.hpp"
#include "mlz/spectra.hpp"

using namespace mlz;
using namespace mlz::models;

namespace {

bool near(Complex a, Complex b, double tol = 1e-14) { return std::abs(a - b) <= tol; }

void check_hermitian(const MatrixPencil& pencil) {
  for (const auto& c : pencil.coeffs()) CHECK(hermiticity_defect(c) <= 1e-13);
}

}  // namespace

TEST_CASE("equal slope pencil structure") {
  Eigen::VectorXd p(1), a(1);
  p << 1.0;
  a << 0.0;
  const auto pencil = build_equal_slope(p, a, 1.0);
  CHECK(pencil.dim() == 2);
  CHECK(near(pencil.coeff(0)(0, 1), 1.0));
  CHECK(near(pencil.coeff(0)(1, 0), 1.0));
  CHECK(near(pencil.coeff(0)(0, 0), 0.0));
  CHECK(near(pencil.coeff(1)(0, 0), 1.0));
  CHECK(near(pencil.coeff(1)(1, 1), 0.0));
  check_hermitian(pencil);

  Eigen::VectorXd p3(2), a3(2);
  p3 << 1.0, 1.0;
  a3 << 1.0, -1.0;
  const auto big = build_equal_slope(p3, a3, 2.0);
  CHECK(near(big.coeff(1)(0, 0), 2.0));
  CHECK(big.coeff(1).cwiseAbs().sum() == doctest::Approx(2.0));
  CHECK(near(big.coeff(0)(1, 1), 1.0));
  CHECK(near(big.coeff(0)(2, 2), -1.0));
  check_hermitian(big);

  try {
    build_equal_slope(Eigen::VectorXd(Eigen::VectorXd::Zero(1)), a, 1.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::zero_coupling);
  }
  try {
    build_equal_slope(p, a, 0.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::zero_slope);
  }
}

TEST_CASE("bow-tie pencil structure") {
  Eigen::VectorXd p(2), r(2);
  p << 1.0, 1.0;
  r << 1.0, -1.0;
  const auto pencil = build_bowtie(p, r);
  Eigen::MatrixXcd c0_ref(3, 3);
  c0_ref << 0, 1, 1, 1, 0, 0, 1, 0, 0;
  CHECK((pencil.coeff(0) - c0_ref).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(near(pencil.coeff(1)(0, 0), 0.0));
  CHECK(near(pencil.coeff(1)(1, 1), 1.0));
  CHECK(near(pencil.coeff(1)(2, 2), -1.0));
  check_hermitian(pencil);

  // N=2 border reduces to a plain two-level crossing
  const auto two = build_bowtie(Eigen::VectorXd(Eigen::VectorXd::Constant(1, 0.5)), Eigen::VectorXd(Eigen::VectorXd::Constant(1, 1.0)));
  CHECK(two.dim() == 2);

  Eigen::VectorXd rdup(2);
  rdup << 1.0, 1.0;
  try {
    build_bowtie(p, rdup);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::duplicate_slope);
  }
}

TEST_CASE("generalized bow-tie pencil structure") {
  Eigen::VectorXd p(2), r(2);
  p << 1.0, 1.0;
  r << 1.0, -1.0;
  const auto pencil = build_generalized_bowtie(p, r, 2.0);
  CHECK(pencil.dim() == 4);
  CHECK(near(pencil.coeff(0)(0, 0), 1.0));
  CHECK(near(pencil.coeff(0)(1, 1), -1.0));
  CHECK(near(pencil.coeff(0)(0, 1), 0.0));  // the split pair never interacts
  CHECK(near(pencil.coeff(0)(0, 2), 1.0));
  CHECK(near(pencil.coeff(0)(1, 2), 1.0));
  CHECK(near(pencil.coeff(0)(1, 3), 1.0));
  CHECK(near(pencil.coeff(1)(2, 2), 1.0));
  CHECK(near(pencil.coeff(1)(3, 3), -1.0));
  CHECK(near(pencil.coeff(1)(0, 0), 0.0));
  check_hermitian(pencil);

  const auto flat = build_generalized_bowtie(Eigen::VectorXd(Eigen::VectorXd::Constant(1, 1.0)),
                                             Eigen::VectorXd(Eigen::VectorXd::Constant(1, 2.0)), 0.0);
  CHECK(flat.dim() == 3);
  CHECK(near(flat.coeff(0)(0, 0), 0.0));

  Eigen::VectorXd rz(2);
  rz << 1.0, 0.0;
  try {
    build_generalized_bowtie(p, rz, 1.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::zero_slope_entry);
  }
}

TEST_CASE("su2 spin pencils") {
  const auto half = build_su2_spin(1.0, 0.5);
  CHECK(near(half.coeff(0)(0, 1), 0.5));  // g sigma_x / 2
  CHECK(near(half.coeff(1)(0, 0), 0.5));
  CHECK(near(half.coeff(1)(1, 1), -0.5));

  const auto one = build_su2_spin(0.8, 1.0);
  CHECK(near(one.coeff(1)(0, 0), 1.0));
  CHECK(near(one.coeff(1)(1, 1), 0.0));
  CHECK(near(one.coeff(1)(2, 2), -1.0));
  CHECK(std::abs(one.coeff(0).trace()) <= 1e-14);
  CHECK(std::abs(one.coeff(1).trace()) <= 1e-14);
  // <m=1|S_+|m=0> = sqrt(2), scaled by g/2
  CHECK(near(one.coeff(0)(0, 1), 0.8 * std::sqrt(2.0) / 2.0));
  check_hermitian(one);

  try {
    build_su2_spin(1.0, 0.7);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::invalid_spin);
  }
}

TEST_CASE("oscillator pencil") {
  const auto pencil = build_oscillator(0.4, 5);
  CHECK(pencil.dim() == 6);
  CHECK(near(pencil.coeff(0)(0, 1), 0.4));
  CHECK(near(pencil.coeff(0)(1, 2), 0.4 * std::sqrt(2.0)));
  CHECK(near(pencil.coeff(1)(3, 3), 3.0));
  // tridiagonal: bandwidth one
  CHECK(near(pencil.coeff(0)(0, 2), 0.0));
  check_hermitian(pencil);

  const auto off = build_oscillator(0.0, 5);
  CHECK(off.coeff(0).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  try {
    build_oscillator(0.4, 3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::cutoff_too_small);
  }
}

TEST_CASE("linear chain pencil") {
  const auto pencil = build_linear_chain(0.5, -2, 2);
  CHECK(pencil.dim() == 5);
  CHECK(near(pencil.coeff(0)(0, 1), 0.5));
  CHECK(near(pencil.coeff(0)(3, 4), 0.5));
  CHECK(near(pencil.coeff(1)(0, 0), -2.0));
  CHECK(near(pencil.coeff(1)(4, 4), 2.0));
  check_hermitian(pencil);

  try {
    build_linear_chain(0.5, 0, 3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::window_too_small);
  }
}

TEST_CASE("su11 sector pencil: ladder elements, commutators, Casimir") {
  const double k = 0.25;
  const double gt = 0.3;
  const auto pencil = build_su11_sector(gt, k, 8);
  CHECK(near(pencil.coeff(0)(0, 1), gt * std::sqrt(0.5)));
  CHECK(near(pencil.coeff(1)(0, 0), 0.25));
  check_hermitian(pencil);

  // Rebuild the bare generators on the truncated sector and check the algebra
  // away from the cutoff edge.
  const Eigen::Index n = pencil.dim();
  Eigen::MatrixXd k0 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd kp = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = k + static_cast<double>(i);
    k0(i, i) = mu;
    if (i + 1 < n) kp(i + 1, i) = std::sqrt((mu + k) * (mu - k + 1.0));
  }
  const Eigen::MatrixXd km = kp.transpose();
  const Eigen::Index inner = n - 2;
  auto block = [&](const Eigen::MatrixXd& m) { return m.topLeftCorner(inner, inner); };
  CHECK(block(k0 * kp - kp * k0 - kp).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(block(k0 * km - km * k0 + km).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(block(kp * km - km * kp + 2.0 * k0).cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::MatrixXd casimir = k0 * k0 - 0.5 * (kp * km + km * kp);
  CHECK(block(casimir - k * (k - 1.0) * Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <=
        1e-12);

  try {
    build_su11_sector(0.3, -0.5, 8);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::invalid_bargmann_index);
  }
}

TEST_CASE("su11 sector correspondences") {
  CHECK(su11_one_mode_state(0) == std::pair{0.25, 0.25});
  CHECK(su11_one_mode_state(4) == std::pair{0.25, 2.25});
  CHECK(su11_one_mode_state(1) == std::pair{0.75, 0.75});
  CHECK(su11_one_mode_state(5) == std::pair{0.75, 2.75});
  CHECK(su11_two_mode_state(2, 0) == std::pair{1.5, 1.5});
  CHECK(su11_two_mode_state(3, 3) == std::pair{0.5, 3.5});
}

TEST_CASE("degauge strips coupling phases") {
  Eigen::VectorXcd p(2);
  p << std::polar(1.0, M_PI / 3.0), Complex(2.0, 0.0);
  Eigen::VectorXd r(2);
  r << 1.0, -1.0;
  const auto pencil = build_bowtie(p, r);
  const auto [real_pencil, phases] = degauge(pencil, ModelKind::BowTie);

  CHECK(real_pencil.max_imag() <= 1e-14);
  CHECK(near(real_pencil.coeff(0)(0, 1), 1.0));
  CHECK(phases.theta[0] == 0.0);
  CHECK(phases.theta[1] == doctest::Approx(-M_PI / 3.0));
  CHECK(phases.theta[2] == doctest::Approx(0.0));

  // spectra are gauge invariant
  for (const double u : {-2.0, 0.0, 0.5, 3.0}) {
    const Eigen::VectorXd before = hermitian_eigenvalues(pencil(u));
    const Eigen::VectorXd after = hermitian_eigenvalues(real_pencil(u));
    CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, before.cwiseAbs().maxCoeff()));
  }

  // already-real pencil: identity phases
  const auto [same, none] = degauge(build_bowtie(Eigen::VectorXd(r.cwiseAbs()), r),
                                    ModelKind::BowTie);
  CHECK(none.theta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(same.max_imag() == 0.0);

  // a pencil violating the bordered pattern is rejected
  try {
    degauge(build_oscillator(0.4, 5), ModelKind::BowTie);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::not_gaugeable);
  }
}

TEST_CASE("degauge of a generalized bow-tie with phases") {
  Eigen::VectorXcd p(2);
  p << std::polar(0.7, -1.1), std::polar(1.3, 2.4);
  Eigen::VectorXd r(2);
  r << 0.8, -1.3;
  const auto pencil = build_generalized_bowtie(p, r, 1.5);
  const auto [real_pencil, phases] = degauge(pencil, ModelKind::GeneralizedBowTie);
  CHECK(real_pencil.max_imag() <= 1e-14);
  CHECK(phases.theta[0] == 0.0);
  CHECK(phases.theta[1] == 0.0);
  CHECK(near(real_pencil.coeff(0)(0, 2), 0.7, 1e-12));
  CHECK(near(real_pencil.coeff(0)(1, 3), 1.3, 1e-12));
}
