#pragma once

#include "jumpvar/finite_chain.hpp"
#include "jumpvar/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace jumpvar {

/// Inversion sampler for a finite probability vector.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> probs);

  std::size_t operator()(Rng& rng) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

/// Row-wise samplers for simulating paths of a finite kernel.
class ChainSampler {
 public:
  explicit ChainSampler(const Matrix& matrix);

  std::size_t step(std::size_t from, Rng& rng) const { return rows_[from](rng); }

 private:
  std::vector<DiscreteSampler> rows_;
};

/// Geometric on {1, 2, ...} with success probability p, by inversion.
std::uint64_t sample_geometric(double p, Rng& rng);

/// Stationary path of length n: X_1 ~ pi, then n - 1 transitions.
std::vector<std::size_t> simulate_chain(const FiniteReversibleKernel& kernel, std::size_t n, Rng& rng);

}  // namespace jumpvar
