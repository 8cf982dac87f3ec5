#include <doctest.h>

#include <cmath>
#include <random>

#include "mlz/models.hpp"
#include "mlz/spectra.hpp"

using namespace mlz;
using namespace mlz::spectra;

namespace {

Eigen::VectorXd random_distinct(std::mt19937_64& rng, Eigen::Index count, double lo, double hi,
                                double min_gap, bool nonzero) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd values(count);
  for (Eigen::Index i = 0; i < count;) {
    const double v = dist(rng);
    if (nonzero && std::abs(v) < min_gap) continue;
    bool ok = true;
    for (Eigen::Index l = 0; l < i; ++l)
      if (std::abs(values[l] - v) < min_gap) ok = false;
    if (!ok) continue;
    values[i++] = v;
  }
  return values;
}

Eigen::VectorXd random_couplings(std::mt19937_64& rng, Eigen::Index count) {
  std::uniform_real_distribution<double> dist(0.3, 1.5);
  std::bernoulli_distribution flip(0.5);
  Eigen::VectorXd p(count);
  for (Eigen::Index i = 0; i < count; ++i) p[i] = flip(rng) ? -dist(rng) : dist(rng);
  return p;
}

}  // namespace

TEST_CASE("bow-tie cubic secular roots at u = 1") {
  Eigen::VectorXd p(2), r(2);
  p << 1.0, 1.0;
  r << 1.0, -1.0;
  // E = 1/(E-1) + 1/(E+1) reduces to E^3 = 3E
  const auto roots = char_roots(secular_from_bowtie(p, r), 1.0);
  REQUIRE(roots.size() == 3);
  CHECK(roots[0] == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-13));
  CHECK(roots[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
  CHECK(roots[2] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));
}

TEST_CASE("secular roots match the dense eigensolver") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 60; ++rep) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rep % 8);  // dims 3..10
    const Eigen::VectorXd p = random_couplings(rng, n - 1);
    const Eigen::VectorXd r = random_distinct(rng, n - 1, -2.0, 2.0, 0.15, false);
    const auto pencil = models::build_bowtie(p, r);
    const auto spec = secular_from_bowtie(p, r);
    for (const double u : {-3.0, -1.0, 0.5, 1.0, 3.0}) {
      const auto roots = char_roots(spec, u);
      const Eigen::VectorXd dense = hermitian_eigenvalues(pencil(u));
      REQUIRE(static_cast<Eigen::Index>(roots.size()) == n);
      const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < n; ++i)
        CHECK(std::abs(roots[static_cast<size_t>(i)] - dense[i]) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("generalized bow-tie secular roots match the dense eigensolver") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 40; ++rep) {
    const Eigen::Index n = 4 + static_cast<Eigen::Index>(rep % 7);  // dims 4..10
    const Eigen::VectorXd p = random_couplings(rng, n - 2);
    const Eigen::VectorXd r = random_distinct(rng, n - 2, -2.0, 2.0, 0.2, true);
    const double epsilon = 0.5 + 0.2 * (rep % 5);
    const auto pencil = models::build_generalized_bowtie(p, r, epsilon);
    const auto spec = secular_from_gbt(p, r, epsilon);
    for (const double u : {-2.0, 0.7, 1.5}) {
      const auto roots = char_roots(spec, u);
      const Eigen::VectorXd dense = hermitian_eigenvalues(pencil(u));
      REQUIRE(static_cast<Eigen::Index>(roots.size()) == n);
      const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < n; ++i)
        CHECK(std::abs(roots[static_cast<size_t>(i)] - dense[i]) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("gbt secular equation at zero detuning keeps the decoupled level") {
  Eigen::VectorXd p(3), r(3);
  p << 1.0, 0.8, 1.2;
  r << 1.0, -1.0, 2.0;
  const auto pencil = models::build_generalized_bowtie(p, r, 0.0);
  const auto roots = char_roots(secular_from_gbt(p, r, 0.0), 1.3);
  const Eigen::VectorXd dense = hermitian_eigenvalues(pencil(1.3));
  REQUIRE(static_cast<Eigen::Index>(roots.size()) == dense.size());
  for (Eigen::Index i = 0; i < dense.size(); ++i)
    CHECK(std::abs(roots[static_cast<size_t>(i)] - dense[i]) <= 1e-10);
}

TEST_CASE("roots interlace the poles") {
  Eigen::VectorXd p(4), r(4);
  p << 1.0, 0.5, 0.7, 1.1;
  r << -1.5, -0.3, 0.8, 2.0;
  const double u = 1.7;
  const auto roots = char_roots(secular_from_bowtie(p, r), u);
  Eigen::VectorXd poles = u * r;
  std::sort(poles.begin(), poles.end());
  REQUIRE(roots.size() == 5);
  CHECK(roots[0] < poles[0]);
  for (int i = 0; i < 4; ++i) {
    CHECK(roots[static_cast<size_t>(i) + 1] > poles[i]);
    if (i + 1 < 4) CHECK(roots[static_cast<size_t>(i) + 1] < poles[i + 1]);
  }
  CHECK(roots[4] > poles[3]);
}

TEST_CASE("char_roots refuses u = 0") {
  Eigen::VectorXd p(2), r(2);
  p << 1.0, 1.0;
  r << 1.0, -1.0;
  try {
    char_roots(secular_from_bowtie(p, r), 0.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::degenerate_poles);
  }
}

TEST_CASE("degeneracy profiles at the crossing point") {
  Eigen::VectorXd p(4), r(4);
  p << 1.0, 0.5, 0.7, 1.1;
  r << -1.5, -0.3, 0.8, 2.0;
  const auto bowtie5 = models::build_bowtie(p, r);
  const auto profile = degeneracy_profile(bowtie5, 0.0, 1e-10);
  int zero_mult = 0;
  for (const auto& [value, mult] : profile)
    if (std::abs(value) < 1e-10) zero_mult = mult;
  CHECK(zero_mult == 3);  // N - 2

  Eigen::VectorXd pg(3), rg(3);
  pg << 1.0, 0.5, 0.7;
  rg << -1.5, 0.8, 2.0;
  const auto gbt5 = models::build_generalized_bowtie(pg, rg, 1.2);
  int zero_mult_g = 0;
  for (const auto& [value, mult] : degeneracy_profile(gbt5, 0.0, 1e-10))
    if (std::abs(value) < 1e-10) zero_mult_g = mult;
  CHECK(zero_mult_g == 3);
}

TEST_CASE("equal slope has an apparent (N-1)-fold degeneracy of H(t)/t at large t") {
  Eigen::VectorXd p(3), a(3);
  p << 1.0, 0.6, 1.3;
  a << -1.0, 0.4, 2.0;
  const double b = 0.7;
  const auto pencil = models::build_equal_slope(p, a, b);
  const double u = 1e6;
  const auto profile = cluster_eigenvalues(pencil(u) / u, 1e-3);
  REQUIRE(profile.size() == 2);
  CHECK(profile[0].first == doctest::Approx(0.0).scale(1.0).epsilon(1e-3));
  CHECK(profile[0].second == 3);  // N - 1
  CHECK(profile[1].first == doctest::Approx(b).epsilon(1e-3));
  CHECK(profile[1].second == 1);
}

TEST_CASE("gap scan finds the exact crossing at u = 0 for the bow-tie") {
  Eigen::VectorXd p(3), r(3);
  p << 1.0, 0.5, 0.7;
  r << -1.5, 0.8, 2.0;
  const auto pencil = models::build_bowtie(p, r);
  double best_gap = 1e300;
  double best_u = -1.0;
  for (double u = -1.0; u <= 1.0; u += 0.05) {
    const Eigen::VectorXd evals = hermitian_eigenvalues(pencil(u));
    double gap = 1e300;
    for (Eigen::Index i = 1; i < evals.size(); ++i)
      gap = std::min(gap, evals[i] - evals[i - 1]);
    if (gap < best_gap) {
      best_gap = gap;
      best_u = u;
    }
  }
  CHECK(std::abs(best_u) <= 1e-12);
  CHECK(best_gap <= 1e-10);
}
