#include "jumpvar/imh.hpp"

#include "jumpvar/errors.hpp"
#include "jumpvar/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

namespace jumpvar {

namespace {

using Index = Eigen::Index;

double tolerance_for(double scale) { return tol::kIdentity * std::max(1.0, std::abs(scale)); }

}  // namespace

// ---------------------------------------------------------------------------
// model

ImhModel ImhModel::finite(std::string name, std::vector<double> points, Vector mu, Vector w) {
  const auto n = points.size();
  if (n < 2) throw InvalidModel("finite IMH support needs at least two points");
  if (static_cast<std::size_t>(mu.size()) != n || static_cast<std::size_t>(w.size()) != n)
    throw DimensionMismatch("mu / w do not match the support");
  if (!(mu.array() > 0.0).all()) throw InvalidModel("mu must be positive on the support");
  if (!(w.array() > 0.0).all() || !w.allFinite()) throw InvalidModel("w must be positive and finite");
  mu /= mu.sum();
  w /= mu.dot(w);

  auto index = std::make_shared<std::map<double, std::size_t>>();
  for (std::size_t i = 0; i < n; ++i)
    if (!index->emplace(points[i], i).second) throw InvalidModel("duplicate support point");

  ImhModel m;
  m.name_ = std::move(name);
  auto sampler = std::make_shared<DiscreteSampler>(std::span<const double>(mu.data(), n));
  auto pts = std::make_shared<std::vector<double>>(points);
  m.proposal_ = [sampler, pts](Rng& rng) { return (*pts)[(*sampler)(rng)]; };
  Vector logw = w.array().log();
  m.log_weight_ = [index, logw](double x) {
    auto it = index->find(x);
    if (it == index->end()) throw InvalidModel("point outside the finite support");
    return logw[static_cast<Index>(it->second)];
  };
  m.w_sup_ = w.maxCoeff();
  m.support_ = FiniteSupport{std::move(points), std::move(mu), std::move(w)};
  return m;
}

ImhModel ImhModel::sampled(std::string name, Sampler proposal, LogWeight log_weight, double w_sup,
                           PowerMoments moments) {
  ImhModel m;
  m.name_ = std::move(name);
  m.proposal_ = std::move(proposal);
  m.log_weight_ = std::move(log_weight);
  m.w_sup_ = w_sup;
  m.power_moments_ = std::move(moments);
  return m;
}

const FiniteSupport& ImhModel::support() const {
  if (!support_) throw NotExactMode("model '" + name_ + "' has no finite support");
  return *support_;
}

ImhMoments ImhModel::power_moments(double exponent) const {
  if (!power_moments_) throw MissingMoments("model '" + name_ + "' has no analytic moments");
  return power_moments_(exponent);
}

std::size_t ImhModel::index_of(double point) const {
  const auto& pts = support().points;
  auto it = std::find(pts.begin(), pts.end(), point);
  if (it == pts.end()) throw InvalidModel("point outside the finite support");
  return static_cast<std::size_t>(it - pts.begin());
}

Vector ImhModel::pi() const {
  const auto& s = support();
  return s.mu.cwiseProduct(s.w);
}

FiniteReversibleKernel ImhModel::kernel() const {
  const auto& s = support();
  const Index n = s.mu.size();
  Matrix p(n, n);
  for (Index x = 0; x < n; ++x) {
    double off = 0.0;
    for (Index y = 0; y < n; ++y) {
      if (y == x) continue;
      p(x, y) = s.mu[y] * std::min(1.0, s.w[y] / s.w[x]);
      off += p(x, y);
    }
    p(x, x) = 1.0 - off;
  }
  std::vector<std::string> labels;
  for (double v : s.points) {
    std::ostringstream os;
    os << v;
    labels.push_back(os.str());
  }
  Vector pi = this->pi();
  pi /= pi.sum();
  return FiniteReversibleKernel(std::move(labels), std::move(p), std::move(pi));
}

JumpDecomposition ImhModel::acceptance_decomposition() const {
  const auto& s = support();
  const Index n = s.mu.size();
  Matrix jump(n, n);
  Vector rho(n);
  for (Index x = 0; x < n; ++x) {
    for (Index y = 0; y < n; ++y) jump(x, y) = s.mu[y] * std::min(1.0, s.w[y] / s.w[x]);
    rho[x] = jump.row(x).sum();
    jump.row(x) /= rho[x];
  }
  return JumpDecomposition::from_parts(kernel(), std::move(rho), std::move(jump));
}

// ---------------------------------------------------------------------------
// simulation

std::vector<double> imh_simulate(const ImhModel& model, std::size_t n, Rng& rng,
                                 const ImhSimulationOptions& options) {
  if (n < 1) throw InvalidModel("imh_simulate needs n >= 1");
  std::vector<double> path;
  path.reserve(n);
  double x = model.propose(rng);
  double lw = model.log_weight(x);
  const std::size_t total = n + options.burn_in;
  for (std::size_t i = 0; i < total; ++i) {
    if (i > 0) {
      const double y = model.propose(rng);
      const double ly = model.log_weight(y);
      if (std::log(uniform_open(rng)) < ly - lw) {
        x = y;
        lw = ly;
      }
    }
    if (i >= options.burn_in) path.push_back(x);
  }
  return path;
}

std::vector<double> imh_simulate(const ImhModel& model, std::size_t n, std::uint64_t seed,
                                 const ImhSimulationOptions& options) {
  Rng rng(seed);
  return imh_simulate(model, n, rng, options);
}

// ---------------------------------------------------------------------------
// exact-mode quantities

RhoBounds rho_and_bounds(const ImhModel& model, std::size_t x) {
  const auto& s = model.support();
  if (x >= s.points.size()) throw DimensionMismatch("support index out of range");
  const auto xi = static_cast<Index>(x);
  RhoBounds out;
  for (Index y = 0; y < s.mu.size(); ++y) out.rho += s.mu[y] * std::min(1.0, s.w[y] / s.w[xi]);
  const double pi_w = s.mu.dot(s.w.cwiseProduct(s.w));
  out.lower = std::isfinite(pi_w) ? 1.0 / (pi_w + s.w[xi]) : 0.0;
  out.upper = std::min(1.0, 1.0 / s.w[xi]);
  return out;
}

std::string to_string(Verdict v) { return v == Verdict::Finite ? "Finite" : "Infinite"; }

VarianceClassification classify(const ImhMoments& m) {
  VarianceClassification out;
  out.f_in_L2_pi = std::isfinite(m.pi_f2);
  out.wf_in_L2_mu = std::isfinite(m.mu_w2f2);
  if (!std::isfinite(m.pi_abs_f)) {
    out.f_in_L2_pi = false;
    out.verdict = Verdict::Infinite;
    out.reason = "f is not integrable under pi";
    return out;
  }
  out.verdict = out.f_in_L2_pi && out.wf_in_L2_mu ? Verdict::Finite : Verdict::Infinite;
  if (!out.f_in_L2_pi)
    out.reason = "f is integrable but not square integrable under pi";
  else if (!out.wf_in_L2_mu)
    out.reason = "w f is not square integrable under mu";
  else
    out.reason = "f in L2(pi) and w f in L2(mu)";
  return out;
}

ImhMoments exact_moments(const ImhModel& model, const StateFunction& f) {
  const auto& s = model.support();
  if (f.size() != s.points.size()) throw DimensionMismatch("function does not match the support");
  const Vector pi = model.pi();
  const Vector fc = centered(pi, f).values();
  ImhMoments m;
  m.pi_abs_f = pi.dot(f.values().cwiseAbs());
  m.pi_f2 = inner(pi, fc, fc);
  m.mu_w2f2 = (s.mu.array() * s.w.array().square() * fc.array().square()).sum();
  return m;
}

VarianceClassification classify(const ImhModel& model, const StateFunction& f) {
  return classify(exact_moments(model, f));
}

VarianceClassification classify(const ImhModel& model, const StateFunction& f,
                                const std::optional<ImhMoments>& moments) {
  if (moments) return classify(*moments);
  if (!model.exact()) throw MissingMoments("sampler-only model '" + model.name() + "' needs moments");
  return classify(model, f);
}

VarianceClassification classify_power(const ImhModel& model, double exponent) {
  return classify(model.power_moments(exponent));
}

double snis_estimate(std::span<const double> samples, const ImhModel& model,
                     const std::function<double(double)>& f) {
  if (samples.empty()) throw EmptyPath("snis_estimate needs at least one sample");
  std::vector<double> lw(samples.size());
  double top = -kInfinity;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    lw[i] = model.log_weight(samples[i]);
    top = std::max(top, lw[i]);
  }
  if (!std::isfinite(top)) throw ZeroWeightSum("all importance weights are zero");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = std::exp(lw[i] - top);
    num += w * f(samples[i]);
    den += w;
  }
  if (!(den > 0.0)) throw ZeroWeightSum("importance weights sum to zero");
  return num / den;
}

double snis_limit_variance(const ImhModel& model, const StateFunction& f) {
  const auto& s = model.support();
  const Vector pi = model.pi();
  const Vector fc = centered(pi, f).values();
  return (pi.array() * s.w.array() * fc.array().square()).sum();
}

Prop5Bounds prop5_bounds(const ImhModel& model, const StateFunction& f) {
  const auto decomp = model.acceptance_decomposition();
  const auto& s = model.support();
  const Vector& pi = decomp.kernel().pi();
  const Vector fc = centered(pi, f).values();
  const Vector& rho = decomp.rho();
  const double jump_m2 = (decomp.jump_pi().array() * fc.array().square() / rho.array().square()).sum();
  const double pi_f2 = inner(pi, fc, fc);

  Prop5Bounds out;
  out.lower1 = 2.0 * decomp.pi_rho() * jump_m2 - pi_f2;
  out.upper = 2.0 * jump_m2 - pi_f2;
  out.lower2 = (pi.array() * s.w.array() * fc.array().square()).sum();
  out.var_exact = asymptotic_variance_exact(decomp.kernel(), StateFunction(fc));
  out.bounded_weight_lower = pi_f2;
  out.bounded_weight_upper = (2.0 * s.w.maxCoeff() - 1.0) * pi_f2;
  const double t = tolerance_for(out.upper);
  out.ok = out.lower1 <= out.var_exact + t && out.lower2 <= out.var_exact + t &&
           out.var_exact <= out.upper + t && out.bounded_weight_lower <= out.var_exact + t &&
           out.var_exact <= out.bounded_weight_upper + t;
  return out;
}

Minorization minorization_check(const ImhModel& model) {
  const auto decomp = model.acceptance_decomposition();
  const Matrix& jump = decomp.jump_kernel().matrix();
  const Vector& jpi = decomp.jump_pi();
  Minorization out;
  out.constant = kInfinity;
  for (Index x = 0; x < jump.rows(); ++x)
    for (Index y = 0; y < jump.cols(); ++y) out.constant = std::min(out.constant, jump(x, y) / jpi[y]);
  out.pi_rho = decomp.pi_rho();
  out.ok = out.constant >= out.pi_rho - tol::kStochastic;
  return out;
}

// ---------------------------------------------------------------------------
// built-in models

namespace imh_models {

namespace {

// sum_{x >= 1} x^e, +infinity when e >= -1; truncated at max_x otherwise.
double power_sum(double e, std::size_t max_x) {
  if (e >= -1.0) return kInfinity;
  double total = 0.0;
  for (std::size_t x = max_x; x >= 1; --x) total += std::pow(static_cast<double>(x), e);
  return total;
}

}  // namespace

ImhModel two_point() {
  Vector mu(2), w(2);
  mu << 0.5, 0.5;
  w << 1.5, 0.5;
  return ImhModel::finite("two_point", {0.0, 1.0}, std::move(mu), std::move(w));
}

ImhModel power_law_discrete(double beta, std::size_t max_x) {
  if (!(beta > 3.0)) throw InvalidModel("power_law_discrete needs beta > 3 so that pi(w) is finite");
  if (max_x < 2) throw InvalidModel("power_law_discrete needs max_x >= 2");
  auto cdf = std::make_shared<std::vector<double>>(max_x);
  double acc = 0.0, first = 0.0;
  for (std::size_t x = 1; x <= max_x; ++x) {
    const double p = std::pow(static_cast<double>(x), -beta);
    acc += p;
    first += p * static_cast<double>(x);
    (*cdf)[x - 1] = acc;
  }
  for (double& c : *cdf) c /= acc;
  cdf->back() = 1.0;
  // w(x) = x / mu(Id) so that mu(w) = 1
  const double log_norm = std::log(first / acc);
  auto proposal = [cdf](Rng& rng) {
    const double u = uniform_open(rng);
    auto it = std::upper_bound(cdf->begin(), cdf->end(), u);
    const auto idx = std::min<std::ptrdiff_t>(it - cdf->begin(), static_cast<std::ptrdiff_t>(cdf->size()) - 1);
    return static_cast<double>(idx + 1);
  };
  auto log_weight = [log_norm](double x) { return std::log(x) - log_norm; };
  // pi(x) proportional to x^{1 - beta}; f(x) = x^c
  auto moments = [beta, max_x](double c) {
    const double z = power_sum(1.0 - beta, max_x);
    auto pi_moment = [&](double k) { return power_sum(k + 1.0 - beta, max_x) / z; };
    ImhMoments m;
    m.pi_abs_f = pi_moment(c);
    if (c == 0.0) return m;
    const double mean = m.pi_abs_f;
    m.pi_f2 = std::isfinite(mean) ? pi_moment(2.0 * c) - mean * mean : kInfinity;
    // mu(w^2 fbar^2) has the tail of sum x^{2 + 2c - beta}
    m.mu_w2f2 = std::isfinite(m.pi_f2) ? power_sum(2.0 + 2.0 * c - beta, max_x) : kInfinity;
    if (std::isfinite(m.mu_w2f2)) {
      double total = 0.0;
      const double zmu = power_sum(-beta, max_x);
      const double wn = power_sum(1.0 - beta, max_x) / zmu;
      for (std::size_t x = max_x; x >= 1; --x) {
        const double xv = static_cast<double>(x);
        const double fb = std::pow(xv, c) - mean;
        total += std::pow(xv, -beta) / zmu * (xv / wn) * (xv / wn) * fb * fb;
      }
      m.mu_w2f2 = total;
    }
    return m;
  };
  return ImhModel::sampled("power_law_discrete(" + std::to_string(beta) + ")", proposal, log_weight,
                           kInfinity, moments);
}

ImhModel pareto_target_exponential_proposal(double alpha) {
  if (!(alpha > 0.0)) throw InvalidModel("pareto alpha must be positive");
  auto proposal = [](Rng& rng) { return 1.0 - std::log(uniform_open(rng)); };
  auto log_weight = [alpha](double x) {
    if (x < 1.0) return -kInfinity;
    return std::log(alpha) - (alpha + 1.0) * std::log(x) + (x - 1.0);
  };
  // pi(x^k) = alpha / (alpha - k) for k < alpha
  auto moments = [alpha](double c) {
    auto pi_moment = [alpha](double k) { return k < alpha ? alpha / (alpha - k) : kInfinity; };
    ImhMoments m;
    m.pi_abs_f = pi_moment(c);
    if (c == 0.0) return m;
    m.pi_f2 = std::isfinite(m.pi_abs_f) ? pi_moment(2.0 * c) - m.pi_abs_f * m.pi_abs_f : kInfinity;
    // w grows like e^x, so pi(w fbar^2) diverges for every non-constant monomial
    m.mu_w2f2 = kInfinity;
    return m;
  };
  return ImhModel::sampled("pareto_target_exponential_proposal(" + std::to_string(alpha) + ")", proposal,
                           log_weight, kInfinity, moments);
}

ImhModel random_finite(std::size_t n, Rng& rng) {
  Vector mu(static_cast<Index>(n)), w(static_cast<Index>(n));
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = static_cast<double>(i);
    mu[static_cast<Index>(i)] = std::exp(2.0 * uniform_open(rng) - 1.0);
    w[static_cast<Index>(i)] = std::exp(3.0 * (2.0 * uniform_open(rng) - 1.0));
  }
  return ImhModel::finite("random_finite(" + std::to_string(n) + ")", std::move(pts), std::move(mu), std::move(w));
}

}  // namespace imh_models

}  // namespace jumpvar
