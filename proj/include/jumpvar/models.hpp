#pragma once

// Built-in finite kernels used by tests, experiments and the CLI.

#include "jumpvar/finite_chain.hpp"
#include "jumpvar/jump_chain.hpp"
#include "jumpvar/rng.hpp"

#include <cstddef>
#include <functional>

namespace jumpvar::models {

/// [[1-a, a], [b, 1-b]]
FiniteReversibleKernel two_state(double a, double b);

/// Every row equal to pi.
FiniteReversibleKernel iid_kernel(const Vector& pi);

/// P = W / rowsum(W) for a random symmetric positive weight matrix W with a
/// random diagonal, so holding probabilities vary across states.
FiniteReversibleKernel random_reversible(std::size_t n, Rng& rng);

/// Same, but with zero diagonal.
FiniteReversibleKernel random_zero_diagonal(std::size_t n, Rng& rng);

/// Function values uniform on [-1, 1] scaled by a random factor.
StateFunction random_function(std::size_t n, Rng& rng);

/// Birth-death chain on {1..N}: away from the edges it holds with
/// probability 1 - rho(x) and otherwise steps up with probability p and down
/// with 1 - p. At x = 1 the down move is replaced by a hold, at x = N the up
/// move. The jump chain is the reflected simple random walk.
struct BirthDeath {
  FiniteReversibleKernel kernel;
  /// Decomposition with the supplied rho and the reflected random walk as
  /// jump kernel (self-loops at the two edges).
  JumpDecomposition walk;
};

BirthDeath birth_death(double p, const std::function<double(std::size_t)>& rho, std::size_t n_states);

/// rho(x) = 1 / (x + 1)
double inverse_rho(std::size_t x);

}  // namespace jumpvar::models
