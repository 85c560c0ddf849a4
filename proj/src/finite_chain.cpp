#include "jumpvar/finite_chain.hpp"

#include "jumpvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace jumpvar {

namespace {

using Index = Eigen::Index;

std::string fmt_pair(std::size_t x, std::size_t y) {
  std::ostringstream os;
  os << "(" << x << "," << y << ")";
  return os.str();
}

void check_square_stochastic(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("transition matrix must be square");
  if (m.rows() < 2) throw InvalidKernel("kernel needs at least two states");
  if (static_cast<std::size_t>(m.rows()) > kMaxStates)
    throw InvalidKernel("state space exceeds the dense oracle limit of 2000 states");
  for (Index x = 0; x < m.rows(); ++x) {
    double row = 0.0;
    for (Index y = 0; y < m.cols(); ++y) {
      const double p = m(x, y);
      if (!std::isfinite(p) || p < 0.0)
        throw InvalidKernel("negative or non-finite entry at " + fmt_pair(x, y));
      row += p;
    }
    if (std::abs(row - 1.0) > tol::kStochastic)
      throw InvalidKernel("row " + std::to_string(x) + " does not sum to 1");
  }
}

bool reaches_all(const Matrix& m, bool transpose) {
  const Index n = m.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<Index> todo;
  todo.push(0);
  seen[0] = 1;
  Index count = 1;
  while (!todo.empty()) {
    const Index x = todo.front();
    todo.pop();
    for (Index y = 0; y < n; ++y) {
      const double p = transpose ? m(y, x) : m(x, y);
      if (p > 0.0 && !seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = 1;
        ++count;
        todo.push(y);
      }
    }
  }
  return count == n;
}

// D^{1/2} P D^{-1/2}, symmetrized to remove rounding asymmetry.
Matrix symmetrized(const FiniteReversibleKernel& k) {
  const Vector s = k.pi().cwiseSqrt();
  Matrix a = s.asDiagonal() * k.matrix() * s.cwiseInverse().asDiagonal();
  return 0.5 * (a + a.transpose());
}

struct Spectrum {
  Vector eigenvalues;
  Matrix eigenvectors;
  Index stationary = 0;
};

Spectrum spectrum_of(const FiniteReversibleKernel& k) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(k));
  Spectrum out{solver.eigenvalues(), solver.eigenvectors(), 0};
  const Vector s = k.pi().cwiseSqrt();
  (out.eigenvectors.transpose() * s).cwiseAbs().maxCoeff(&out.stationary);
  return out;
}

void check_function(const FiniteReversibleKernel& k, const StateFunction& f) {
  if (f.size() != k.size())
    throw DimensionMismatch("function has " + std::to_string(f.size()) + " values, kernel has " +
                            std::to_string(k.size()) + " states");
}

}  // namespace

StateFunction::StateFunction(Vector values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw InvalidModel("state function values must be finite");
}

StateFunction::StateFunction(std::initializer_list<double> values)
    : StateFunction(Vector::Map(values.begin(), static_cast<Index>(values.size()))) {}

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

FiniteReversibleKernel::FiniteReversibleKernel(std::vector<std::string> states, Matrix matrix,
                                               Vector pi)
    : states_(std::move(states)), matrix_(std::move(matrix)), pi_(std::move(pi)) {
  check_square_stochastic(matrix_);
  const auto n = static_cast<std::size_t>(matrix_.rows());
  if (states_.size() != n) throw DimensionMismatch("state labels do not match matrix size");
  if (static_cast<std::size_t>(pi_.size()) != n) throw DimensionMismatch("pi does not match matrix size");
  if (std::abs(pi_.sum() - 1.0) > tol::kStochastic) throw InvalidKernel("pi does not sum to 1");
  if (!(pi_.array() > 0.0).all()) throw InvalidKernel("pi must be strictly positive");
  for (Index x = 0; x < matrix_.rows(); ++x)
    for (Index y = x + 1; y < matrix_.cols(); ++y)
      if (std::abs(pi_[x] * matrix_(x, y) - pi_[y] * matrix_(y, x)) > tol::kIdentity)
        throw InvalidKernel("detailed balance fails at " + fmt_pair(x, y));
}

FiniteReversibleKernel FiniteReversibleKernel::from_matrix(std::vector<std::string> states,
                                                           Matrix matrix) {
  Vector pi = stationary_distribution(matrix);
  return FiniteReversibleKernel(std::move(states), std::move(matrix), std::move(pi));
}

FiniteReversibleKernel FiniteReversibleKernel::from_matrix(Matrix matrix) {
  auto labels = default_labels(static_cast<std::size_t>(matrix.rows()));
  return from_matrix(std::move(labels), std::move(matrix));
}

FiniteReversibleKernel FiniteReversibleKernel::from_json(const nlohmann::json& doc) {
  if (!doc.contains("matrix") || !doc["matrix"].is_array())
    throw InvalidConfig("kernel document needs a \"matrix\" array");
  const auto& rows = doc["matrix"];
  const auto n = static_cast<Index>(rows.size());
  Matrix m(n, n);
  for (Index x = 0; x < n; ++x) {
    const auto& row = rows[static_cast<std::size_t>(x)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      throw DimensionMismatch("matrix row " + std::to_string(x) + " has the wrong length");
    for (Index y = 0; y < n; ++y) m(x, y) = row[static_cast<std::size_t>(y)].get<double>();
  }
  std::vector<std::string> states;
  if (doc.contains("states")) {
    for (const auto& s : doc["states"])
      states.push_back(s.is_string() ? s.get<std::string>() : s.dump());
  } else {
    states = default_labels(static_cast<std::size_t>(n));
  }
  if (doc.contains("pi") && !doc["pi"].is_null()) {
    const auto p = doc["pi"].get<std::vector<double>>();
    return FiniteReversibleKernel(std::move(states), std::move(m),
                                  Vector::Map(p.data(), static_cast<Index>(p.size())));
  }
  return from_matrix(std::move(states), std::move(m));
}

nlohmann::json FiniteReversibleKernel::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Index x = 0; x < matrix_.rows(); ++x) {
    std::vector<double> row;
    for (Index y = 0; y < matrix_.cols(); ++y) row.push_back(matrix_(x, y));
    rows.push_back(row);
  }
  return {{"states", states_},
          {"matrix", rows},
          {"pi", std::vector<double>(pi_.data(), pi_.data() + pi_.size())}};
}

bool is_irreducible(const Matrix& matrix) {
  return reaches_all(matrix, false) && reaches_all(matrix, true);
}

Vector stationary_distribution(const Matrix& matrix) {
  check_square_stochastic(matrix);
  if (!is_irreducible(matrix)) throw ReducibleChain("positive-entry graph is not strongly connected");
  const Index n = matrix.rows();
  Matrix a = matrix.transpose() - Matrix::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b[n - 1] = 1.0;
  Eigen::FullPivLU<Matrix> lu(a);
  Vector v = lu.solve(b);
  for (int sweep = 0; sweep < 2; ++sweep) v += lu.solve(b - a * v);
  v = v.cwiseMax(0.0);
  v /= v.sum();
  return v;
}

double inner(const Vector& pi, const Vector& a, const Vector& b) {
  return (pi.array() * a.array() * b.array()).sum();
}

double expectation(const Vector& pi, const StateFunction& f) { return pi.dot(f.values()); }

StateFunction centered(const Vector& pi, const StateFunction& f) {
  if (static_cast<std::size_t>(pi.size()) != f.size()) throw DimensionMismatch("function/pi size");
  return StateFunction(f.values().array() - expectation(pi, f));
}

double variance(const Vector& pi, const StateFunction& f) {
  const auto c = centered(pi, f);
  return inner(pi, c.values(), c.values());
}

double dirichlet_form(const FiniteReversibleKernel& kernel, const StateFunction& f) {
  check_function(kernel, f);
  const auto& p = kernel.matrix();
  const auto& pi = kernel.pi();
  const auto& v = f.values();
  double total = 0.0;
  for (Index x = 0; x < p.rows(); ++x) {
    double row = 0.0;
    for (Index y = 0; y < p.cols(); ++y) {
      const double d = v[y] - v[x];
      row += p(x, y) * d * d;
    }
    total += pi[x] * row;
  }
  return 0.5 * total;
}

SpectralReport spectral_gap(const FiniteReversibleKernel& kernel) {
  const Spectrum sp = spectrum_of(kernel);
  SpectralReport report;
  for (Index k = 0; k < sp.eigenvalues.size(); ++k)
    if (k != sp.stationary) report.eigenvalues.push_back(std::clamp(sp.eigenvalues[k], -1.0, 1.0));
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end());
  report.min_eigenvalue = report.eigenvalues.front();
  report.gap = 1.0 - report.eigenvalues.back();
  return report;
}

double asymptotic_variance_exact(const FiniteReversibleKernel& kernel, const StateFunction& f) {
  check_function(kernel, f);
  const StateFunction fc = centered(kernel.pi(), f);
  const Spectrum sp = spectrum_of(kernel);
  const Vector g = kernel.pi().cwiseSqrt().cwiseProduct(fc.values());
  const Vector coef = sp.eigenvectors.transpose() * g;
  const double scale = std::max(g.squaredNorm(), std::numeric_limits<double>::min());
  double total = 0.0;
  for (Index k = 0; k < coef.size(); ++k) {
    if (k == sp.stationary) continue;
    const double lambda = std::clamp(sp.eigenvalues[k], -1.0, 1.0);
    const double c2 = coef[k] * coef[k];
    if (1.0 - lambda < tol::kSingular) {
      if (c2 > tol::kIdentity * scale) return std::numeric_limits<double>::infinity();
      continue;
    }
    total += c2 * (1.0 + lambda) / (1.0 - lambda);
  }
  return total;
}

double variational_avar(const FiniteReversibleKernel& kernel, const StateFunction& f) {
  check_function(kernel, f);
  const StateFunction fc = centered(kernel.pi(), f);
  const Vector s = kernel.pi().cwiseSqrt();
  const Index n = s.size();
  // I - S restricted to the complement of sqrt(pi), with sqrt(pi) mapped to itself.
  const Matrix a = Matrix::Identity(n, n) - symmetrized(kernel) + s * s.transpose();
  const Vector min_ev = Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly).eigenvalues();
  if (min_ev[0] < tol::kSingular) throw SingularSystem("I - P is singular on mean-zero functions");
  const Vector h = a.ldlt().solve(s.cwiseProduct(fc.values()));
  const StateFunction g(h.cwiseQuotient(s));
  const auto& pi = kernel.pi();
  const double fg = inner(pi, fc.values(), g.values());
  const double ff = inner(pi, fc.values(), fc.values());
  return 2.0 * (2.0 * fg - dirichlet_form(kernel, g)) - ff;
}

}  // namespace jumpvar
