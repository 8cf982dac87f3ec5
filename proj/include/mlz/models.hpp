#pragma once

#include <optional>
#include <string>
#include <utility>

#include "mlz/pencil.hpp"

namespace mlz::models {

enum class ModelKind {
  EqualSlope,
  BowTie,
  GeneralizedBowTie,
  Su2Spin,
  Oscillator,
  LinearChain,
  Su11Sector,
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Tagged parameter record for every named model. Only the fields relevant to
/// `kind` are read; validation happens in the builders.
struct ModelSpec {
  ModelKind kind = ModelKind::BowTie;
  Eigen::VectorXd p;       // couplings (equal slope / bow-tie: states 2..N; gbt: 3..N)
  Eigen::VectorXd a;       // equal-slope offsets a_2..a_N
  double b = 1.0;          // equal-slope slope
  Eigen::VectorXd r;       // slopes (bow-tie: 2..N; gbt: 3..N)
  double epsilon = 0.0;    // gbt detuning
  double g = 1.0;          // su2 coupling
  double g_o = 0.0;        // oscillator coupling
  double g_lc = 0.0;       // linear-chain coupling
  double g_tilde = 0.0;    // su11 coupling
  double j = 0.5;          // spin (half-integer)
  double k = 0.5;          // Bargmann index, {1/4, 3/4} or positive half-integers
  int cutoff = 20;         // truncation cutoff (oscillator / su11)
  int n_min = -10;         // chain window
  int n_max = 10;

  Eigen::Index dim() const;
};

/// Diagonal gauge phases theta_i; the pencil transforms as U^dag H U with
/// U = diag(exp(i theta_i)).
struct GaugePhases {
  Eigen::VectorXd theta;
};

// Bordered models. The complex overloads accept couplings with phases; use
// degauge() to reduce them to the real-symmetric representative.
MatrixPencil build_equal_slope(const Eigen::VectorXcd& p, const Eigen::VectorXd& a, double b);
MatrixPencil build_equal_slope(const Eigen::VectorXd& p, const Eigen::VectorXd& a, double b);
MatrixPencil build_bowtie(const Eigen::VectorXcd& p, const Eigen::VectorXd& r);
MatrixPencil build_bowtie(const Eigen::VectorXd& p, const Eigen::VectorXd& r);
MatrixPencil build_generalized_bowtie(const Eigen::VectorXcd& p, const Eigen::VectorXd& r,
                                      double epsilon);
MatrixPencil build_generalized_bowtie(const Eigen::VectorXd& p, const Eigen::VectorXd& r,
                                      double epsilon);

// Lie-algebra descendants on truncated bases.
MatrixPencil build_su2_spin(double g, double j);
MatrixPencil build_oscillator(double g_o, int cutoff);
MatrixPencil build_linear_chain(double g_lc, int n_min, int n_max);
MatrixPencil build_su11_sector(double g_tilde, double k, int cutoff);

MatrixPencil build_pencil(const ModelSpec& spec);

/// Strip coupling phases via the diagonal unitary, returning the
/// real-symmetric pencil and the phases theta_i (convention
/// p_k = |p_k| exp(-i theta_k), theta of the special level(s) fixed to 0).
std::pair<MatrixPencil, GaugePhases> degauge(const MatrixPencil& pencil, ModelKind kind);

/// One-mode realization: Fock state |n> lives in sector k = 1/4 (n even) or
/// 3/4 (n odd); returns (k, mu).
std::pair<double, double> su11_one_mode_state(int n);

/// Two-mode realization: |n_a, n_b> maps to k = (|n_a-n_b|+1)/2,
/// mu = (n_a+n_b+1)/2.
std::pair<double, double> su11_two_mode_state(int n_a, int n_b);

}  // namespace mlz::models
