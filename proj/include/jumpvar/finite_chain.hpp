#pragma once

// Exact dense computations for reversible Markov kernels on finite state
// spaces: stationarity, Dirichlet forms, right spectral gaps and asymptotic
// variances. Everything else in the library is checked against this module.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace jumpvar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tol {
inline constexpr double kStochastic = 1e-12;
inline constexpr double kIdentity = 1e-10;
inline constexpr double kSingular = 1e-12;
}  // namespace tol

/// Largest state space the dense oracle accepts.
inline constexpr std::size_t kMaxStates = 2000;

/// Values of a function at each state of a finite kernel.
class StateFunction {
 public:
  StateFunction() = default;
  explicit StateFunction(Vector values);
  StateFunction(std::initializer_list<double> values);

  const Vector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

 private:
  Vector values_;
};

/// Row-stochastic, pi-reversible transition matrix with labelled states.
///
/// Construction validates stochasticity (1e-12), positivity of pi and
/// detailed balance (1e-10); instances are immutable afterwards.
class FiniteReversibleKernel {
 public:
  FiniteReversibleKernel(std::vector<std::string> states, Matrix matrix, Vector pi);

  /// Computes pi by solving pi P = pi; throws ReducibleChain when the
  /// positive-entry graph is not strongly connected.
  static FiniteReversibleKernel from_matrix(std::vector<std::string> states, Matrix matrix);
  static FiniteReversibleKernel from_matrix(Matrix matrix);

  /// {"states": [...], "matrix": [[...]], "pi": [...]}; pi is optional.
  static FiniteReversibleKernel from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  std::size_t size() const { return states_.size(); }
  const std::vector<std::string>& states() const { return states_; }
  const Matrix& matrix() const { return matrix_; }
  const Vector& pi() const { return pi_; }
  double operator()(std::size_t x, std::size_t y) const {
    return matrix_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
  }

 private:
  std::vector<std::string> states_;
  Matrix matrix_;
  Vector pi_;
};

struct SpectralReport {
  /// Spectrum on the mean-zero subspace, ascending.
  std::vector<double> eigenvalues;
  /// Right spectral gap: 1 - max eigenvalue on the mean-zero subspace.
  double gap = 0.0;
  double min_eigenvalue = 0.0;
};

std::vector<std::string> default_labels(std::size_t n);

/// True when the directed graph of positive entries is strongly connected.
bool is_irreducible(const Matrix& matrix);

Vector stationary_distribution(const Matrix& matrix);

/// pi(f)
double expectation(const Vector& pi, const StateFunction& f);
/// pi((f - pi(f))^2)
double variance(const Vector& pi, const StateFunction& f);
StateFunction centered(const Vector& pi, const StateFunction& f);

/// 1/2 sum_{x,y} pi(x) P(x,y) (f(y) - f(x))^2
double dirichlet_form(const FiniteReversibleKernel& kernel, const StateFunction& f);

SpectralReport spectral_gap(const FiniteReversibleKernel& kernel);

/// Kipnis-Varadhan spectral sum <f, (I+P)(I-P)^{-1} f>_pi for centered f.
/// f is centered internally. Returns +infinity when f has mass on an
/// eigenvalue numerically equal to 1 on the mean-zero subspace.
double asymptotic_variance_exact(const FiniteReversibleKernel& kernel, const StateFunction& f);

/// Closed-form maximizer of the variational representation
/// 2 [sup_g 2<f,g> - E(g)] - <f,f>; independent of the eigen route above.
double variational_avar(const FiniteReversibleKernel& kernel, const StateFunction& f);

/// Weighted L2(pi) inner product.
double inner(const Vector& pi, const Vector& a, const Vector& b);

}  // namespace jumpvar
