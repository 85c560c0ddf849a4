#pragma once

// Empirical asymptotic variance by non-overlapping batch means, and a scan
// that looks for estimates growing without bound as the path lengthens.

#include "jumpvar/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace jumpvar {

struct PathSample {
  std::vector<double> values;
  std::string model;
  std::string function;
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
};

struct AvarEstimate {
  double value = 0.0;
  std::size_t batch_len = 0;
  std::size_t n_batches = 0;
  double stderr = 0.0;
};

/// batch_len times the sample variance of the batch averages. Trailing values
/// that do not fill a batch are dropped. Throws PathTooShort when the path is
/// shorter than two batches, EmptyPath when empty.
AvarEstimate batch_means(const std::vector<double>& values, std::size_t batch_len);
AvarEstimate batch_means(const PathSample& path, std::size_t batch_len);
/// batch_len = floor(sqrt(n))
AvarEstimate batch_means(const PathSample& path);
std::size_t default_batch_len(std::size_t n);
/// n / 100, used for chains that do not start in stationarity.
std::size_t default_burn_in(std::size_t n);

/// Produces the f-values of a fresh path of length n for the given seed.
using PathGenerator = std::function<std::vector<double>(std::size_t n, std::uint64_t seed)>;

struct DivergenceScan {
  std::vector<std::size_t> n_grid;
  std::vector<std::uint64_t> seeds;
  /// estimates[s][k]: seed s, grid point k
  std::vector<std::vector<AvarEstimate>> estimates;
  double monotone_fraction = 0.0;
};

/// Fraction of seeds whose estimates strictly increase along n_grid.
/// Seeds are stream_seed(master_seed, s) for s = 0..n_seeds-1.
DivergenceScan divergence_scan(const PathGenerator& generator, std::vector<std::size_t> n_grid,
                               std::size_t n_seeds, std::uint64_t master_seed);

/// Rows: model,f,n,batch_len,value,stderr,seed
void write_estimate_header(std::ostream& os);
void write_estimate_row(std::ostream& os, const std::string& model, const std::string& f, std::size_t n,
                        const AvarEstimate& e, std::uint64_t seed);

}  // namespace jumpvar
