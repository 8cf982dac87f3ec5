#include "mlz/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace mlz::spectra {

namespace {

void check_spec(const SecularSpec& spec) {
  require(spec.poles.size() == spec.weights.size(), errc::dimension_mismatch,
          "secular spec: poles and weights must align");
  require(spec.poles.size() >= 1, errc::validation, "secular spec: need at least one pole");
  for (Eigen::Index i = 0; i < spec.weights.size(); ++i)
    require(spec.weights[i] > 0.0, errc::validation, "secular spec: weights must be positive");
  for (Eigen::Index i = 0; i < spec.poles.size(); ++i) {
    if (spec.kind == SecularKind::GbtE)
      require(spec.poles[i] != 0.0, errc::validation, "gbt secular spec: poles must be nonzero");
    for (Eigen::Index l = i + 1; l < spec.poles.size(); ++l)
      require(spec.poles[i] != spec.poles[l], errc::degenerate_poles,
              "secular spec: poles must be distinct");
  }
  require(spec.extra >= 0.0, errc::validation, "secular spec: extra weight must be >= 0");
}

// Brent's method on a bracket with f(a) f(b) < 0.
double brent(const std::function<double(double)>& f, double a, double b, double fa, double fb) {
  double c = a, fc = fa;
  double d = b - a, e = d;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 1e-300;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // inverse quadratic / secant step
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      e = d = b - a;
    }
  }
  fail(errc::root_bracket_failure, "brent: no convergence");
}

}  // namespace

double solve_bracketed(const std::function<double(double)>& f, double lo, double hi) {
  // Shrink toward the pole endpoints until the signs bracket (f is monotone
  // increasing from -inf to +inf on the open interval).
  double width = hi - lo;
  double a = 0.0, fa = 0.0;
  bool ok = false;
  for (double frac = 0.25; frac > 1e-17; frac *= 0.25) {
    a = lo + frac * width;
    fa = f(a);
    if (fa < 0.0) { ok = true; break; }
  }
  require(ok, errc::root_bracket_failure, "no sign change near lower bracket endpoint");
  double b = 0.0, fb = 0.0;
  ok = false;
  for (double frac = 0.25; frac > 1e-17; frac *= 0.25) {
    b = hi - frac * width;
    fb = f(b);
    if (fb > 0.0) { ok = true; break; }
  }
  require(ok, errc::root_bracket_failure, "no sign change near upper bracket endpoint");
  return brent(f, a, b, fa, fb);
}

SecularSpec secular_from_equal_slope(const Eigen::VectorXd& p, const Eigen::VectorXd& a) {
  SecularSpec spec;
  spec.kind = SecularKind::EqualSlopeX;
  spec.poles = a;
  spec.weights = p.array().square();
  check_spec(spec);
  return spec;
}

SecularSpec secular_from_bowtie(const Eigen::VectorXd& p, const Eigen::VectorXd& r) {
  SecularSpec spec;
  spec.kind = SecularKind::BowTieE;
  spec.poles = r;
  spec.weights = p.array().square();
  check_spec(spec);
  return spec;
}

SecularSpec secular_from_gbt(const Eigen::VectorXd& p, const Eigen::VectorXd& r, double epsilon) {
  SecularSpec spec;
  spec.kind = SecularKind::GbtE;
  spec.poles = r;
  // both special levels couple to state k with the same p_k, so the effective
  // pole weight is 2 p_k^2
  spec.weights = 2.0 * p.array().square();
  spec.extra = 0.25 * epsilon * epsilon;
  check_spec(spec);
  return spec;
}

std::vector<double> char_roots(const SecularSpec& spec, double u) {
  check_spec(spec);
  const bool scaled = spec.kind != SecularKind::EqualSlopeX;
  if (scaled)
    require(u != 0.0, errc::degenerate_poles,
            "char_roots: poles coincide at u = 0, use degeneracy_profile");

  std::vector<double> poles;
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < spec.poles.size(); ++i) {
    poles.push_back(scaled ? u * spec.poles[i] : spec.poles[i]);
    weights.push_back(spec.weights[i]);
  }
  const bool zero_is_exact_root = spec.kind == SecularKind::GbtE && spec.extra == 0.0;
  if (spec.kind == SecularKind::GbtE && spec.extra > 0.0) {
    poles.push_back(0.0);
    weights.push_back(spec.extra);
  }

  // sort poles, keep weights attached
  std::vector<size_t> order(poles.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return poles[x] < poles[y]; });
  std::vector<double> sp(poles.size()), sw(poles.size());
  for (size_t i = 0; i < order.size(); ++i) {
    sp[i] = poles[order[i]];
    sw[i] = weights[order[i]];
  }

  auto f = [&](double e) {
    double acc = e;
    for (size_t i = 0; i < sp.size(); ++i) acc -= sw[i] / (e - sp[i]);
    return acc;
  };
  auto fprime = [&](double e) {
    double acc = 1.0;
    for (size_t i = 0; i < sp.size(); ++i) {
      const double d = e - sp[i];
      acc += sw[i] / (d * d);
    }
    return acc;
  };
  auto polish = [&](double e, double lo, double hi) {
    for (int it = 0; it < 2; ++it) {
      const double step = f(e) / fprime(e);
      const double next = e - step;
      if (next <= lo || next >= hi) break;
      e = next;
    }
    return e;
  };

  std::vector<double> roots;
  const double wsum = std::accumulate(sw.begin(), sw.end(), 0.0);
  // outer intervals: widen geometrically until the sign flips
  {
    double off = 1.0 + wsum;
    double lo = sp.front() - off;
    int tries = 0;
    while (f(lo) >= 0.0) {
      off *= 2.0;
      lo = sp.front() - off;
      require(++tries < 120, errc::root_bracket_failure, "left outer bracket failed");
    }
    roots.push_back(polish(solve_bracketed(f, lo, sp.front()), lo, sp.front()));
  }
  for (size_t i = 0; i + 1 < sp.size(); ++i)
    roots.push_back(polish(solve_bracketed(f, sp[i], sp[i + 1]), sp[i], sp[i + 1]));
  {
    double off = 1.0 + wsum;
    double hi = sp.back() + off;
    int tries = 0;
    while (f(hi) <= 0.0) {
      off *= 2.0;
      hi = sp.back() + off;
      require(++tries < 120, errc::root_bracket_failure, "right outer bracket failed");
    }
    roots.push_back(polish(solve_bracketed(f, sp.back(), hi), sp.back(), hi));
  }

  if (zero_is_exact_root) roots.push_back(0.0);  // decoupled antisymmetric level at eps = 0
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<std::pair<double, int>> cluster_eigenvalues(const Eigen::MatrixXcd& h, double tol) {
  if (tol <= 0.0) tol = 1e-9 * std::max(1.0, h.norm());
  const Eigen::VectorXd evals = hermitian_eigenvalues(h);
  std::vector<std::pair<double, int>> clusters;
  double sum = evals[0];
  int count = 1;
  for (Eigen::Index i = 1; i < evals.size(); ++i) {
    if (evals[i] - evals[i - 1] <= tol) {
      sum += evals[i];
      ++count;
    } else {
      clusters.emplace_back(sum / count, count);
      sum = evals[i];
      count = 1;
    }
  }
  clusters.emplace_back(sum / count, count);
  return clusters;
}

std::vector<std::pair<double, int>> degeneracy_profile(const MatrixPencil& pencil, double u,
                                                       double tol) {
  return cluster_eigenvalues(pencil(u), tol);
}

}  // namespace mlz::spectra
