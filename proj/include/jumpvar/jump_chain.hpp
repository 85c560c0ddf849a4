#pragma once

// Holding-probability / jump-kernel decomposition
//   P(x, .) = rho(x) Ptilde(x, .) + (1 - rho(x)) delta_x,
// path reconstruction from geometric holding times, the variance identity
// linking var(f, P) to var(f / rho, Ptilde), and the weighted jump-chain
// estimators of pi(f).

#include "jumpvar/finite_chain.hpp"
#include "jumpvar/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace jumpvar {

class JumpDecomposition {
 public:
  /// Canonical maximal decomposition: rho(x) = 1 - P(x,x), zero-diagonal
  /// jump kernel. Throws AbsorbingState if some P(x,x) == 1.
  static JumpDecomposition canonical(const FiniteReversibleKernel& kernel);

  /// Explicit (rho, Ptilde) pair, e.g. the acceptance-probability split of
  /// a Metropolis kernel whose proposal has an atom at the current state.
  /// Reassembly must reproduce P within 1e-12.
  static JumpDecomposition from_parts(const FiniteReversibleKernel& kernel, Vector rho,
                                      Matrix jump_matrix);

  const FiniteReversibleKernel& kernel() const { return kernel_; }
  const FiniteReversibleKernel& jump_kernel() const { return jump_; }
  const Vector& rho() const { return rho_; }
  /// pi(rho)
  double pi_rho() const { return pi_rho_; }
  /// Invariant law of the jump chain, pi * rho / pi(rho).
  const Vector& jump_pi() const { return jump_.pi(); }

  /// rho(x) Ptilde(x,y) + (1 - rho(x)) 1{x = y}
  Matrix reassemble() const;

 private:
  JumpDecomposition(FiniteReversibleKernel kernel, Vector rho, FiniteReversibleKernel jump, double pi_rho);

  FiniteReversibleKernel kernel_;
  Vector rho_;
  FiniteReversibleKernel jump_;
  double pi_rho_;
};

inline JumpDecomposition decompose(const FiniteReversibleKernel& kernel) {
  return JumpDecomposition::canonical(kernel);
}

/// Jump-chain states with their holding times.
struct JumpPath {
  std::vector<std::size_t> states;
  std::vector<std::uint64_t> taus;

  std::size_t size() const { return states.size(); }
  /// Sum of the holding times, i.e. the length of the reconstructed path.
  std::uint64_t total_time() const;
  void validate() const;
  void write_csv(std::ostream& os) const;
};

/// X_n = Xtilde_{S_n} with S_n = inf{k : tau_1 + ... + tau_k >= n}.
std::vector<std::size_t> reconstruct_path(const JumpPath& jump);

struct JumpSimulationOptions {
  std::size_t burn_in = 0;
  /// Starting jump state; drawn from the jump invariant law when empty.
  std::optional<std::size_t> start;
};

JumpPath simulate_jump_path(const JumpDecomposition& decomp, std::size_t n_jumps, Rng& rng,
                            const JumpSimulationOptions& options = {});
JumpPath simulate_jump_path(const JumpDecomposition& decomp, std::size_t n_jumps, std::uint64_t seed,
                            const JumpSimulationOptions& options = {});

/// Both sides of var(f,P) = pi(f^2/rho) - pi(f^2) + pi(rho) var(f/rho, Ptilde).
struct VarianceIdentity {
  double lhs = 0.0;            // var(f, P)
  double pi_f2_over_rho = 0.0; // pi(f^2 / rho)
  double pi_f2 = 0.0;          // pi(f^2)
  double jump_avar = 0.0;      // var(f / rho, Ptilde)
  double jump_mean = 0.0;      // jump-invariant mean of f / rho, zero for centered f
  double rhs = 0.0;
  double residual = 0.0;       // |lhs - rhs|
  double relative_residual = 0.0;
};

VarianceIdentity variance_identity(const JumpDecomposition& decomp, const StateFunction& f);
double theorem1_residual(const FiniteReversibleKernel& kernel, const StateFunction& f);

struct GapInheritance {
  double gap_kernel = 0.0;
  double gap_jump = 0.0;
  bool ok = false;
};

GapInheritance gap_inheritance_check(const JumpDecomposition& decomp);
GapInheritance gap_inheritance_check(const FiniteReversibleKernel& kernel);

/// sum f(X_i)/rho(X_i) / sum 1/rho(X_i)
double rb_estimate(const JumpPath& jump, std::span<const double> rho, std::span<const double> f);
/// sum tau_i f(X_i) / sum tau_i
double geo_estimate(const JumpPath& jump, std::span<const double> rho, std::span<const double> f);

struct EstimatorVariances {
  double sigma2_rb = 0.0;
  double sigma2_geo = 0.0;
  /// var(Ptilde, fbar/rho) >= jump-invariant mean of fbar^2/rho^2; when it
  /// holds, sigma2_geo <= 2 sigma2_rb.
  bool positive_jump_condition = false;
};

EstimatorVariances estimator_variances_exact(const JumpDecomposition& decomp, const StateFunction& f);
EstimatorVariances estimator_variances_exact(const FiniteReversibleKernel& kernel, const StateFunction& f);

}  // namespace jumpvar
