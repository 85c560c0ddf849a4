#include "jumpvar/sampling.hpp"

#include "jumpvar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace jumpvar {

DiscreteSampler::DiscreteSampler(std::span<const double> probs) {
  cdf_.reserve(probs.size());
  double acc = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InvalidModel("negative probability in discrete sampler");
    acc += p;
    cdf_.push_back(acc);
  }
  if (cdf_.empty() || !(acc > 0.0)) throw InvalidModel("discrete sampler needs positive mass");
  for (double& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::size_t DiscreteSampler::operator()(Rng& rng) const {
  const double u = uniform_open(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  // zero-probability trailing entries share the final cdf value of 1
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                           static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
}

ChainSampler::ChainSampler(const Matrix& matrix) {
  rows_.reserve(static_cast<std::size_t>(matrix.rows()));
  std::vector<double> row(static_cast<std::size_t>(matrix.cols()));
  for (Eigen::Index x = 0; x < matrix.rows(); ++x) {
    for (Eigen::Index y = 0; y < matrix.cols(); ++y) row[static_cast<std::size_t>(y)] = matrix(x, y);
    rows_.emplace_back(row);
  }
}

std::uint64_t sample_geometric(double p, Rng& rng) {
  if (p >= 1.0) return 1;
  const double u = uniform_open(rng);
  const double t = std::ceil(std::log(u) / std::log1p(-p));
  return t < 1.0 ? 1 : static_cast<std::uint64_t>(t);
}

std::vector<std::size_t> simulate_chain(const FiniteReversibleKernel& kernel, std::size_t n, Rng& rng) {
  std::vector<std::size_t> path;
  if (n == 0) return path;
  path.reserve(n);
  const ChainSampler chain(kernel.matrix());
  const DiscreteSampler init(std::span<const double>(kernel.pi().data(), kernel.size()));
  path.push_back(init(rng));
  while (path.size() < n) path.push_back(chain.step(path.back(), rng));
  return path;
}

}  // namespace jumpvar
