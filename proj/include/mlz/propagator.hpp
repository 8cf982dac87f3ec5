#pragma once

#include <vector>

#include "mlz/models.hpp"
#include "mlz/pencil.hpp"

namespace mlz::propagator {

struct PropagationConfig {
  double horizon = 200.0;  // integrate -T .. +T
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  bool phase_stripping = true;
  // Prepare/read out states in the instantaneous eigenbasis at -T/+T (labeled
  // by dominant diabatic component). The eigenbasis tends to the diabatic one
  // as T grows; projecting onto it removes the O(1/T) basis-mixing tail from
  // the asymptotic probabilities.
  bool asymptotic_projection = true;
  long max_steps = 80'000'000;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// Asymptotic transition probabilities P[i][j] = |<j|U|i>|^2 between diabatic
/// states, with unitarity defects of the row/column sums.
struct TransitionMatrix {
  Eigen::MatrixXd p;
  double row_defect = 0.0;
  double col_defect = 0.0;

  static TransitionMatrix from_probabilities(Eigen::MatrixXd p, double entry_tol = 1e-9);
};

/// Integrate i psi' = H(t) psi from t0 to t1. With phase stripping the
/// diagonal secular phases exp(-i(C0_nn t + C1_nn t^2/2)) are removed
/// analytically and only the residual couplings are integrated.
Eigen::VectorXcd propagate(const MatrixPencil& pencil, const Eigen::VectorXcd& psi0, double t0,
                           double t1, const PropagationConfig& cfg);

/// Probability rows for the selected initial basis states, propagated from
/// -T to +T (columns = all final states). Rows run data-parallel.
Eigen::MatrixXd propagate_rows(const MatrixPencil& pencil, const PropagationConfig& cfg,
                               const std::vector<Eigen::Index>& initial_states);

TransitionMatrix transition_matrix(const MatrixPencil& pencil, const PropagationConfig& cfg);

struct ExtrapolationResult {
  TransitionMatrix extrapolated;
  double tail_estimate = 0.0;
  std::vector<Eigen::MatrixXd> per_horizon;
};

/// Fit P(T) = P_inf + c/T over the given horizons (>= 3, increasing) and
/// report the extrapolated matrix plus max |P(T_max) - P_inf|.
ExtrapolationResult horizon_extrapolation(const MatrixPencil& pencil, const PropagationConfig& cfg,
                                          const std::vector<double>& horizons);

struct ConvergenceTable {
  std::vector<int> cutoffs;
  std::vector<std::pair<int, int>> probes;  // physical state labels
  std::vector<std::vector<double>> values;  // values[cutoff_idx][probe_idx]
  std::vector<double> diffs;                // max over probes per successive cutoff pair
  bool converged = false;
};

/// Rebuild the truncated model at each cutoff and track the probed transition
/// probabilities; convergence is flagged when the last difference <= 1e-4.
/// Probes use physical labels: Fock n (oscillator), site n (chain), or the
/// sector offset mu - k (su11).
ConvergenceTable cutoff_convergence(const models::ModelSpec& spec, const std::vector<int>& cutoffs,
                                    const std::vector<std::pair<int, int>>& probes,
                                    const PropagationConfig& cfg);

}  // namespace mlz::propagator
