#include "jumpvar/models.hpp"

#include "jumpvar/errors.hpp"

#include <cmath>

namespace jumpvar::models {

namespace {

using Index = Eigen::Index;

FiniteReversibleKernel from_weights(Matrix w) {
  const Index n = w.rows();
  Vector row = w.rowwise().sum();
  Matrix p(n, n);
  for (Index x = 0; x < n; ++x) p.row(x) = w.row(x) / row[x];
  Vector pi = row / row.sum();
  return FiniteReversibleKernel(default_labels(static_cast<std::size_t>(n)), std::move(p), std::move(pi));
}

double unit(Rng& rng) { return uniform_open(rng); }

Matrix random_symmetric(std::size_t n, Rng& rng, bool with_diagonal) {
  const auto m = static_cast<Index>(n);
  Matrix w = Matrix::Zero(m, m);
  for (Index x = 0; x < m; ++x) {
    for (Index y = x + 1; y < m; ++y) {
      // sparse-ish but always connected through the (x, x+1) chain
      const bool keep = y == x + 1 || unit(rng) < 0.6;
      const double v = keep ? std::exp(2.0 * unit(rng) - 1.0) : 0.0;
      w(x, y) = v;
      w(y, x) = v;
    }
    if (with_diagonal) w(x, x) = 3.0 * unit(rng) * unit(rng);
  }
  return w;
}

}  // namespace

FiniteReversibleKernel two_state(double a, double b) {
  if (!(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0)) throw InvalidModel("two_state needs a, b in (0, 1]");
  Matrix p(2, 2);
  p << 1.0 - a, a, b, 1.0 - b;
  Vector pi(2);
  pi << b / (a + b), a / (a + b);
  return FiniteReversibleKernel({"0", "1"}, std::move(p), std::move(pi));
}

FiniteReversibleKernel iid_kernel(const Vector& pi) {
  const Index n = pi.size();
  Matrix p = Vector::Ones(n) * pi.transpose();
  return FiniteReversibleKernel(default_labels(static_cast<std::size_t>(n)), std::move(p), pi);
}

FiniteReversibleKernel random_reversible(std::size_t n, Rng& rng) {
  return from_weights(random_symmetric(n, rng, true));
}

FiniteReversibleKernel random_zero_diagonal(std::size_t n, Rng& rng) {
  return from_weights(random_symmetric(n, rng, false));
}

StateFunction random_function(std::size_t n, Rng& rng) {
  Vector v(static_cast<Index>(n));
  const double scale = std::exp(3.0 * unit(rng) - 1.5);
  for (Index i = 0; i < v.size(); ++i) v[i] = scale * (2.0 * unit(rng) - 1.0);
  return StateFunction(std::move(v));
}

double inverse_rho(std::size_t x) { return 1.0 / (static_cast<double>(x) + 1.0); }

BirthDeath birth_death(double p, const std::function<double(std::size_t)>& rho_fn, std::size_t n_states) {
  if (!(p > 0.0 && p < 0.5)) throw InvalidModel("birth_death needs 0 < p < 1/2");
  if (n_states < 2) throw InvalidModel("birth_death needs at least two states");
  const auto n = static_cast<Index>(n_states);
  Matrix walk = Matrix::Zero(n, n);
  Vector rho(n);
  std::vector<std::string> labels;
  for (Index i = 0; i < n; ++i) {
    const std::size_t x = static_cast<std::size_t>(i) + 1;  // states are 1..N
    labels.push_back(std::to_string(x));
    rho[i] = rho_fn(x);
    if (!(rho[i] > 0.0 && rho[i] <= 1.0)) throw InvalidModel("rho(x) must lie in (0, 1]");
    if (i + 1 < n) walk(i, i + 1) = p; else walk(i, i) += p;
    if (i > 0) walk(i, i - 1) = 1.0 - p; else walk(i, i) += 1.0 - p;
  }
  // pi(x) proportional to r^x / rho(x) with r = p / (1 - p); scale by r^1
  const double r = p / (1.0 - p);
  Vector pi(n);
  for (Index i = 0; i < n; ++i) pi[i] = std::pow(r, static_cast<double>(i)) / rho[i];
  pi /= pi.sum();
  Matrix kernel = rho.asDiagonal() * walk;
  for (Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Index j = 0; j < n; ++j)
      if (j != i) off += kernel(i, j);
    kernel(i, i) = 1.0 - off;
  }
  FiniteReversibleKernel k(labels, std::move(kernel), std::move(pi));
  auto decomp = JumpDecomposition::from_parts(k, rho, std::move(walk));
  return {std::move(k), std::move(decomp)};
}

}  // namespace jumpvar::models
