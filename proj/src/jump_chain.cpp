#include "jumpvar/jump_chain.hpp"

#include "jumpvar/errors.hpp"
#include "jumpvar/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace jumpvar {

namespace {

using Index = Eigen::Index;

Vector jump_invariant(const Vector& pi, const Vector& rho, double* pi_rho) {
  Vector w = pi.cwiseProduct(rho);
  *pi_rho = w.sum();
  return w / *pi_rho;
}

}  // namespace

JumpDecomposition::JumpDecomposition(FiniteReversibleKernel kernel, Vector rho,
                                     FiniteReversibleKernel jump, double pi_rho)
    : kernel_(std::move(kernel)), rho_(std::move(rho)), jump_(std::move(jump)), pi_rho_(pi_rho) {}

JumpDecomposition JumpDecomposition::canonical(const FiniteReversibleKernel& kernel) {
  const auto& p = kernel.matrix();
  const Index n = p.rows();
  Vector rho(n);
  Matrix jump = Matrix::Zero(n, n);
  for (Index x = 0; x < n; ++x) {
    double off = 0.0;
    for (Index y = 0; y < n; ++y)
      if (y != x) off += p(x, y);
    if (off <= tol::kStochastic) throw AbsorbingState("state " + kernel.states()[static_cast<std::size_t>(x)] +
                                                      " has P(x,x) = 1");
    rho[x] = off;
    for (Index y = 0; y < n; ++y)
      if (y != x) jump(x, y) = p(x, y) / off;
  }
  double pi_rho = 0.0;
  Vector jump_pi = jump_invariant(kernel.pi(), rho, &pi_rho);
  FiniteReversibleKernel jk(kernel.states(), std::move(jump), std::move(jump_pi));
  return JumpDecomposition(kernel, std::move(rho), std::move(jk), pi_rho);
}

JumpDecomposition JumpDecomposition::from_parts(const FiniteReversibleKernel& kernel, Vector rho,
                                                Matrix jump_matrix) {
  if (static_cast<std::size_t>(rho.size()) != kernel.size())
    throw DimensionMismatch("rho does not match the kernel size");
  for (Index x = 0; x < rho.size(); ++x) {
    // sums of proposal masses can exceed 1 by rounding
    if (rho[x] > 1.0 && rho[x] <= 1.0 + tol::kStochastic) rho[x] = 1.0;
    if (!(rho[x] > 0.0) || rho[x] > 1.0)
      throw AbsorbingState("rho(" + std::to_string(x) + ") outside (0, 1]");
  }
  double pi_rho = 0.0;
  Vector jump_pi = jump_invariant(kernel.pi(), rho, &pi_rho);
  FiniteReversibleKernel jk(kernel.states(), std::move(jump_matrix), std::move(jump_pi));
  JumpDecomposition out(kernel, std::move(rho), std::move(jk), pi_rho);
  const double err = (out.reassemble() - kernel.matrix()).cwiseAbs().maxCoeff();
  if (err > tol::kStochastic) throw InvalidKernel("rho and jump kernel do not reassemble P");
  return out;
}

Matrix JumpDecomposition::reassemble() const {
  Matrix out = rho_.asDiagonal() * jump_.matrix();
  out.diagonal() += (Vector::Ones(rho_.size()) - rho_);
  return out;
}

std::uint64_t JumpPath::total_time() const {
  std::uint64_t total = 0;
  for (auto t : taus) total += t;
  return total;
}

void JumpPath::validate() const {
  if (states.size() != taus.size()) throw DimensionMismatch("jump path states/taus length differ");
  for (auto t : taus)
    if (t < 1) throw InvalidModel("holding times must be >= 1");
}

void JumpPath::write_csv(std::ostream& os) const {
  os << "index,state,tau\n";
  for (std::size_t i = 0; i < states.size(); ++i) os << i << ',' << states[i] << ',' << taus[i] << '\n';
}

std::vector<std::size_t> reconstruct_path(const JumpPath& jump) {
  jump.validate();
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(jump.total_time()));
  for (std::size_t i = 0; i < jump.size(); ++i) out.insert(out.end(), jump.taus[i], jump.states[i]);
  return out;
}

JumpPath simulate_jump_path(const JumpDecomposition& decomp, std::size_t n_jumps, Rng& rng,
                            const JumpSimulationOptions& options) {
  if (n_jumps < 1) throw InvalidModel("n_jumps must be >= 1");
  const ChainSampler chain(decomp.jump_kernel().matrix());
  const auto& jpi = decomp.jump_pi();
  std::size_t x = options.start ? *options.start
                                : DiscreteSampler(std::span<const double>(jpi.data(), decomp.kernel().size()))(rng);
  if (x >= decomp.kernel().size()) throw DimensionMismatch("start state out of range");
  for (std::size_t i = 0; i < options.burn_in; ++i) x = chain.step(x, rng);
  JumpPath path;
  path.states.reserve(n_jumps);
  path.taus.reserve(n_jumps);
  const auto& rho = decomp.rho();
  for (std::size_t i = 0; i < n_jumps; ++i) {
    if (i > 0) x = chain.step(x, rng);
    path.states.push_back(x);
    path.taus.push_back(sample_geometric(rho[static_cast<Index>(x)], rng));
  }
  return path;
}

JumpPath simulate_jump_path(const JumpDecomposition& decomp, std::size_t n_jumps, std::uint64_t seed,
                            const JumpSimulationOptions& options) {
  Rng rng(seed);
  return simulate_jump_path(decomp, n_jumps, rng, options);
}

VarianceIdentity variance_identity(const JumpDecomposition& decomp, const StateFunction& f) {
  const auto& kernel = decomp.kernel();
  const auto& pi = kernel.pi();
  const auto fc = centered(pi, f);
  const Vector& v = fc.values();
  const Vector& rho = decomp.rho();

  VarianceIdentity out;
  out.lhs = asymptotic_variance_exact(kernel, fc);
  out.pi_f2_over_rho = (pi.array() * v.array().square() / rho.array()).sum();
  out.pi_f2 = inner(pi, v, v);
  const StateFunction scaled(v.cwiseQuotient(rho));
  out.jump_mean = expectation(decomp.jump_pi(), scaled);
  out.jump_avar = asymptotic_variance_exact(decomp.jump_kernel(), scaled);
  out.rhs = out.pi_f2_over_rho - out.pi_f2 + decomp.pi_rho() * out.jump_avar;
  out.residual = std::abs(out.lhs - out.rhs);
  out.relative_residual = out.residual / std::max(std::abs(out.lhs), std::numeric_limits<double>::min());
  if (out.lhs == 0.0 && out.residual == 0.0) out.relative_residual = 0.0;
  return out;
}

double theorem1_residual(const FiniteReversibleKernel& kernel, const StateFunction& f) {
  return variance_identity(decompose(kernel), f).residual;
}

GapInheritance gap_inheritance_check(const JumpDecomposition& decomp) {
  GapInheritance out;
  out.gap_kernel = spectral_gap(decomp.kernel()).gap;
  out.gap_jump = spectral_gap(decomp.jump_kernel()).gap;
  out.ok = out.gap_jump >= out.gap_kernel - tol::kStochastic;
  return out;
}

GapInheritance gap_inheritance_check(const FiniteReversibleKernel& kernel) {
  return gap_inheritance_check(decompose(kernel));
}

namespace {

void check_estimator_inputs(const JumpPath& jump, std::span<const double> rho, std::span<const double> f) {
  if (jump.size() == 0) throw EmptyPath("estimator needs a nonempty jump path");
  jump.validate();
  for (auto s : jump.states)
    if (s >= rho.size() || s >= f.size()) throw DimensionMismatch("jump state outside rho/f range");
}

}  // namespace

double rb_estimate(const JumpPath& jump, std::span<const double> rho, std::span<const double> f) {
  check_estimator_inputs(jump, rho, f);
  double num = 0.0, den = 0.0;
  for (auto s : jump.states) {
    num += f[s] / rho[s];
    den += 1.0 / rho[s];
  }
  return num / den;
}

double geo_estimate(const JumpPath& jump, std::span<const double> rho, std::span<const double> f) {
  check_estimator_inputs(jump, rho, f);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < jump.size(); ++i) {
    const auto t = static_cast<double>(jump.taus[i]);
    num += t * f[jump.states[i]];
    den += t;
  }
  return num / den;
}

EstimatorVariances estimator_variances_exact(const JumpDecomposition& decomp, const StateFunction& f) {
  const VarianceIdentity id = variance_identity(decomp, f);
  const double pr = decomp.pi_rho();
  EstimatorVariances out;
  out.sigma2_rb = pr * pr * id.jump_avar;
  out.sigma2_geo = pr * (id.pi_f2_over_rho - id.pi_f2 + pr * id.jump_avar);
  out.positive_jump_condition = id.jump_avar >= id.pi_f2_over_rho / pr;
  return out;
}

EstimatorVariances estimator_variances_exact(const FiniteReversibleKernel& kernel, const StateFunction& f) {
  return estimator_variances_exact(decompose(kernel), f);
}

}  // namespace jumpvar
