#pragma once

#include <string>
#include <vector>

#include "mlz/pencil.hpp"

namespace mlz::commutant {

/// Parameters (gamma_i, xi_i) of the maximal linear commuting family plus the
/// identity shift x produced by the equal-slope embedding.
struct FamilyParams {
  Eigen::VectorXd gamma;
  Eigen::VectorXd xi;
  double x = 0.0;
};

enum class Construction { MaximalLinear, BowTieQuadratic, GbtMinimal };

std::string to_string(Construction c);

struct CommutingFamily {
  std::vector<MatrixPencil> members;
  std::vector<std::string> labels;
  Construction construction = Construction::MaximalLinear;
};

enum class Verdict { Trivial, Nontrivial };

/// Result of the least-squares fit of I(u) onto sum_k c_k(u) H^k(u).
struct TrivialityReport {
  double residual = 0.0;             // normalized, in [0, 1]
  Eigen::MatrixXd coefficients;      // c_{k,q}: row k, column q (power of u), deg c_k <= p-k
  Verdict verdict = Verdict::Trivial;
};

inline constexpr double kTrivialityTol = 1e-8;

/// All N members H_i(u) of the maximal linear family for the given parameters.
CommutingFamily maximal_linear_family(const FamilyParams& params);

/// Single member H_i(u) (0-based index).
MatrixPencil maximal_family_member(const FamilyParams& params, Eigen::Index i);

struct EmbeddingResult {
  std::vector<double> roots;                  // all N real roots of the shift equation
  std::vector<FamilyParams> params_per_root;  // gauge gamma_1 = 1, xi_1 = 0
  std::vector<double> reconstruction_errors;  // entrywise, H(u) = H_1(u) + x Id
};

/// Embed the equal-slope model into the maximal linear family by solving
/// x = sum_i p_i^2 / (x - a_i) between consecutive poles.
EmbeddingResult embed_equal_slope(const Eigen::VectorXd& p, const Eigen::VectorXd& a);

/// The N quadratic members I_1..I_N commuting with the bow-tie Hamiltonian
/// and each other. Requires all r_i nonzero.
CommutingFamily bowtie_quadratic_family(const Eigen::VectorXd& p, const Eigen::VectorXd& r);

/// The simplified nontrivial linear partner of the generalized bow-tie model
/// (v = 1, v_2 = 1, v_1 = 0 gauge).
MatrixPencil gbt_linear_partner(const Eigen::VectorXd& p, const Eigen::VectorXd& r, double epsilon);

/// Family {H, I} of the generalized bow-tie model.
CommutingFamily gbt_minimal_family(const Eigen::VectorXd& p, const Eigen::VectorXd& r,
                                   double epsilon);

/// max over u samples of ||[A(u), B(u)]||_F / max(1, ||A(u)||_F ||B(u)||_F).
double commutator_norm(const MatrixPencil& a, const MatrixPencil& b,
                       const std::vector<double>& u_samples);

/// Largest pairwise commutator_norm over all member pairs.
double max_pairwise_commutator(const CommutingFamily& family, const std::vector<double>& u_samples);

/// Least-squares triviality classification of a commuting partner.
TrivialityReport triviality_residual(const MatrixPencil& partner, const MatrixPencil& h);

/// Real dimension of the space of Hermitian Omega commuting with every
/// coefficient of every pencil; 1 means multiples of the identity only.
int shared_symmetry_dim(const std::vector<MatrixPencil>& pencils);

/// Basis of the space of Hermitian pencils of the given degree commuting with
/// h at all u (nullspace of the stacked commutation superoperator).
std::vector<MatrixPencil> commuting_partner_basis(const MatrixPencil& h, int degree);

/// Rank of the span of the given pencils (vectorized over coefficients).
int pencil_span_rank(const std::vector<MatrixPencil>& pencils, double rel_tol = 1e-9);

}  // namespace mlz::commutant
