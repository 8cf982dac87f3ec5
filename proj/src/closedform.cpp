#include "mlz/closedform.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace mlz::closedform {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_nonpositive_integer(double x) {
  return x <= 1e-9 && std::abs(x - std::round(x)) < 1e-9;
}

int checked_int(double x, errc code, const char* what) {
  require(std::abs(x - std::round(x)) < 1e-9, code, what);
  return static_cast<int>(std::lround(x));
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

double lz2_survival(double g) { return std::exp(-0.5 * kPi * g * g); }

double su2_transition(double j, double m, double m_prime, double g) {
  require(j > 0 && std::abs(2 * j - std::round(2 * j)) < 1e-9, errc::invalid_magnetic_quantum,
          "su2_transition: j must be a positive half-integer");
  const int jm = checked_int(j + m, errc::invalid_magnetic_quantum, "j+m must be an integer");
  const int jmm = checked_int(j - m, errc::invalid_magnetic_quantum, "j-m must be an integer");
  const int jp = checked_int(j + m_prime, errc::invalid_magnetic_quantum, "j+m' must be an integer");
  const int jpp = checked_int(j - m_prime, errc::invalid_magnetic_quantum, "j-m' must be an integer");
  require(jm >= 0 && jmm >= 0 && jp >= 0 && jpp >= 0, errc::invalid_magnetic_quantum,
          "su2_transition: need |m|, |m'| <= j");

  const double q = euler_q(g);
  const double c = std::sqrt(q);        // cos(beta/2)
  const double s = std::sqrt(1.0 - q);  // sin(beta/2)
  // Degenerate rotations: only the exponent-zero power survives 0^0 = 1.
  if (s == 0.0) return (m == m_prime) ? 1.0 : 0.0;
  if (c == 0.0) return (m == -m_prime) ? 1.0 : 0.0;

  const double lroot =
      0.5 * (log_factorial(jm) + log_factorial(jmm) + log_factorial(jp) + log_factorial(jpp));
  const double lc = std::log(c);
  const double ls = std::log(s);

  // One sum per index order, matching the two printed branches.
  double sum = 0.0;
  if (m_prime >= m) {
    const int delta = checked_int(m_prime - m, errc::invalid_magnetic_quantum, "m'-m integer");
    const int mu_max = std::min(jm, jpp);
    for (int mu = 0; mu <= mu_max; ++mu) {
      const double lden = log_factorial(jm - mu) + log_factorial(mu) +
                          log_factorial(jpp - mu) + log_factorial(delta + mu);
      const double lpow = (jm + jpp - 2 * mu) * lc + (delta + 2 * mu) * ls;
      sum += ((mu % 2 == 0) ? 1.0 : -1.0) * std::exp(lroot - lden + lpow);
    }
  } else {
    const int delta = checked_int(m - m_prime, errc::invalid_magnetic_quantum, "m-m' integer");
    const int mu_max = std::min(jp, jmm);
    for (int mu = 0; mu <= mu_max; ++mu) {
      const double lden = log_factorial(jp - mu) + log_factorial(delta + mu) +
                          log_factorial(jmm - mu) + log_factorial(mu);
      const double lpow = (jp + jmm - 2 * mu) * lc + (delta + 2 * mu) * ls;
      sum += ((mu % 2 == 0) ? 1.0 : -1.0) * std::exp(lroot - lden + lpow);
    }
  }
  return sum * sum;
}

double oscillator_transition(int n, int n_prime, double g_o) {
  require(n >= 0 && n_prime >= 0, errc::validation, "oscillator_transition: states must be >= 0");
  if (g_o == 0.0) return (n == n_prime) ? 1.0 : 0.0;
  const int hi = std::max(n, n_prime);
  const int lo = std::min(n, n_prime);
  const double x = 2.0 * kPi * g_o * g_o;
  const double lag = laguerre_assoc(lo, hi - lo, x);
  const double lp = log_factorial(lo) - log_factorial(hi) + (hi - lo) * std::log(x) - x;
  return std::exp(lp) * lag * lag;
}

double chain_transition(int n, int n_prime, double g_lc) {
  const double jn = bessel_j(n - n_prime, 2.0 * std::sqrt(2.0 * kPi) * g_lc);
  return jn * jn;
}

double su11_z(double g_tilde) { return 1.0 - std::exp(2.0 * kPi * g_tilde * g_tilde); }

std::pair<double, double> su11_theta_log(double k, double mu, double mu_prime) {
  require(k > 0, errc::invalid_bargmann_index, "su11_theta_log: k must be positive");
  const double off = mu - k;
  const double offp = mu_prime - k;
  require(off >= -1e-9 && std::abs(off - std::round(off)) < 1e-9, errc::invalid_sector_state,
          "mu must lie in {k, k+1, ...}");
  require(offp >= -1e-9 && std::abs(offp - std::round(offp)) < 1e-9, errc::invalid_sector_state,
          "mu' must lie in {k, k+1, ...}");
  if (mu >= mu_prime) {
    const int delta = static_cast<int>(std::lround(mu - mu_prime));
    const double lg = 0.5 * (log_gamma(mu + 1.0 - k) + log_gamma(mu + k) -
                             log_gamma(mu_prime + 1.0 - k) - log_gamma(mu_prime + k)) -
                      log_factorial(delta);
    return {lg, 1.0};
  }
  auto [lg, sign] = su11_theta_log(k, mu_prime, mu);
  const int delta = static_cast<int>(std::lround(mu_prime - mu));
  return {lg, (delta % 2 == 0) ? sign : -sign};
}

double su11_transition(double k, double mu, double mu_prime, double g_tilde) {
  auto [ltheta, sign] = su11_theta_log(k, mu, mu_prime);  // validates sector membership
  (void)sign;
  const double z = su11_z(g_tilde);
  const double hi = std::max(mu, mu_prime);
  const double lo = std::min(mu, mu_prime);
  const int delta = static_cast<int>(std::lround(hi - lo));

  if (z == 0.0) return (delta == 0) ? 1.0 : 0.0;

  const double f = hyp2f1_terminating(k - lo, 1.0 - lo - k, 1.0 + delta, z);
  // |1-z|^{-(mu+mu')} = exp(-2 pi g~^2 (mu+mu'))
  const double lp = 2.0 * ltheta + delta * std::log(std::abs(z)) -
                    2.0 * kPi * g_tilde * g_tilde * (mu + mu_prime);
  return std::exp(lp) * f * f;
}

double laguerre_assoc(int n, int alpha, double x) {
  require(n >= 0, errc::validation, "laguerre_assoc: n must be >= 0");
  require(n + alpha >= 0, errc::validation, "laguerre_assoc: n + alpha must be >= 0");
  const double a = static_cast<double>(alpha);
  double lkm1 = 1.0;  // L_0
  if (n == 0) return lkm1;
  double lk = 1.0 + a - x;  // L_1
  for (int m = 1; m < n; ++m) {
    const double lkp1 = ((2.0 * m + 1.0 + a - x) * lk - (m + a) * lkm1) / (m + 1.0);
    lkm1 = lk;
    lk = lkp1;
  }
  return lk;
}

double bessel_j(int order, double x) {
  if (x < 0.0) return ((order % 2 == 0) ? 1.0 : -1.0) * bessel_j(order, -x);
  if (order < 0) return ((order % 2 == 0) ? 1.0 : -1.0) * bessel_j(-order, x);
  if (x == 0.0) return (order == 0) ? 1.0 : 0.0;

  // Miller's algorithm: downward recurrence from well above max(order, x),
  // normalized with J_0 + 2 sum_{k even} J_k = 1.
  const double top = std::max(static_cast<double>(order), x);
  int m = static_cast<int>(top + 16.0 + 12.0 * std::sqrt(top));
  if (m % 2 == 1) ++m;

  double fkp1 = 0.0;
  double fk = 1e-30;
  double norm = 0.0;
  double result = (order == m) ? fk : 0.0;
  for (int k = m; k >= 1; --k) {
    double fkm1 = (2.0 * k / x) * fk - fkp1;
    fkp1 = fk;
    fk = fkm1;
    if (k - 1 == order) result = fk;
    if ((k - 1) % 2 == 0) norm += (k - 1 == 0) ? fk : 2.0 * fk;
    if (std::abs(fk) > 1e100) {
      fk *= 1e-100;
      fkp1 *= 1e-100;
      norm *= 1e-100;
      result *= 1e-100;
    }
  }
  return result / norm;
}

double hyp2f1_terminating(double a, double b, double c, double z) {
  const bool a_term = is_nonpositive_integer(a);
  const bool b_term = is_nonpositive_integer(b);
  require(a_term || b_term, errc::non_terminating,
          "hyp2f1_terminating: a or b must be a non-positive integer");
  int n_terms;
  if (a_term && b_term)
    n_terms = static_cast<int>(std::lround(-std::max(a, b)));
  else
    n_terms = static_cast<int>(std::lround(a_term ? -a : -b));

  if (is_nonpositive_integer(c)) {
    const int pole_at = static_cast<int>(std::lround(-c));
    require(pole_at >= n_terms, errc::pole_passed,
            "hyp2f1_terminating: c reaches a non-positive integer before the series terminates");
  }

  double term = 1.0;
  double sum = 1.0;
  for (int s = 0; s < n_terms; ++s) {
    term *= (a + s) * (b + s) * z / ((c + s) * (s + 1.0));
    sum += term;
  }
  return sum;
}

double log_gamma(double x) {
  require(x > 0.0, errc::non_positive_argument, "log_gamma: argument must be positive");
  return std::lgamma(x);
}

}  // namespace mlz::closedform
