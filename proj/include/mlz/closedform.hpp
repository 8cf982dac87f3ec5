#pragma once

#include <Eigen/Dense>

#include "mlz/errors.hpp"

namespace mlz::closedform {

/// Survival probability of the 2x2 Landau-Zener sweep, |a(inf)|^2 = exp(-pi g^2 / 2).
double lz2_survival(double g);

/// cos^2(beta/2) of the asymptotic Euler rotation for coupling g; equals the
/// 2x2 survival probability.
inline double euler_q(double g) { return lz2_survival(g); }

/// Hioe transition probability P_{m -> m'} for the spin-j sweep g S_x + t S_z.
double su2_transition(double j, double m, double m_prime, double g);

/// Driven-oscillator transition probability between Fock states n and n'
/// (Laguerre form, symmetric in n <-> n').
double oscillator_transition(int n, int n_prime, double g_o);

/// Time-dependent linear chain: P = J_{n-n'}^2(2 sqrt(2 pi) g_lc).
double chain_transition(int n, int n_prime, double g_lc);

/// z parameter of the SU(1,1) sweep, z = 1 - exp(2 pi g~^2) <= 0.
double su11_z(double g_tilde);

/// Wigner-Bargmann transition probability within the D_k^+ sector between
/// states mu and mu' (both in {k, k+1, ...}).
double su11_transition(double k, double mu, double mu_prime, double g_tilde);

/// log|Theta_{mu mu'}(k)| and its sign; defined for mu >= mu' by gamma ratios
/// and extended to mu < mu' by Theta_{mu' mu} = (-1)^{mu - mu'} Theta_{mu mu'}.
std::pair<double, double> su11_theta_log(double k, double mu, double mu_prime);

// Special-function kernel.

/// Associated Laguerre polynomial L_n^{(alpha)}(x) by three-term recurrence.
double laguerre_assoc(int n, int alpha, double x);

/// Integer-order Bessel J via Miller's downward recurrence with the
/// sum-normalization identity.
double bessel_j(int order, double x);

/// Terminating Gauss hypergeometric series F(a, b; c; z); a or b must be a
/// non-positive integer.
double hyp2f1_terminating(double a, double b, double c, double z);

/// log Gamma(x) for x > 0.
double log_gamma(double x);

}  // namespace mlz::closedform
