#include "jumpvar/pseudo_marginal.hpp"

#include "jumpvar/errors.hpp"
#include "jumpvar/jump_chain.hpp"
#include "jumpvar/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jumpvar {

namespace {

using Index = Eigen::Index;

Index ix(std::size_t i) { return static_cast<Index>(i); }

bool finite(double v) { return std::isfinite(v); }

std::vector<Atom> positive(const std::vector<Atom>& a) {
  std::vector<Atom> out;
  for (const auto& at : a)
    if (at.u > 0.0 && at.p > 0.0) out.push_back(at);
  return out;
}

std::vector<Atom> require_atoms(const NoiseFamily& noise, std::size_t x) {
  auto a = noise.atoms_at(x);
  if (!a) throw NotExactMode("noise '" + noise.label() + "' has no finite atom representation");
  return *a;
}

}  // namespace

// ---------------------------------------------------------------------------

MarginalModel::MarginalModel(std::vector<std::string> states, Vector pi_bar, Matrix q_bar)
    : states_(std::move(states)), pi_bar_(std::move(pi_bar)), q_bar_(std::move(q_bar)) {
  const auto n = states_.size();
  if (n < 2) throw InvalidModel("marginal model needs at least two states");
  if (static_cast<std::size_t>(pi_bar_.size()) != n || static_cast<std::size_t>(q_bar_.rows()) != n ||
      static_cast<std::size_t>(q_bar_.cols()) != n)
    throw DimensionMismatch("marginal model: pibar and qbar must match the state count");
  if ((pi_bar_.array() <= 0.0).any() || std::abs(pi_bar_.sum() - 1.0) > tol::kStochastic)
    throw InvalidModel("marginal target must be positive and sum to 1");
  for (Index x = 0; x < q_bar_.rows(); ++x) {
    if ((q_bar_.row(x).array() < 0.0).any()) throw InvalidKernel("proposal entries must be nonnegative");
    if (std::abs(q_bar_.row(x).sum() - 1.0) > tol::kStochastic) throw InvalidKernel("proposal rows must sum to 1");
  }
  proposal_ = std::make_shared<const ChainSampler>(q_bar_);
  initial_ = std::make_shared<const DiscreteSampler>(std::span<const double>(pi_bar_.data(), n));
}

MarginalModel MarginalModel::independent(std::vector<std::string> states, Vector pi_bar, Vector mu_bar) {
  const Index n = mu_bar.size();
  if ((mu_bar.array() <= 0.0).any()) throw InvalidModel("independent proposal must be positive");
  mu_bar /= mu_bar.sum();
  Matrix q(n, n);
  for (Index x = 0; x < n; ++x) q.row(x) = mu_bar.transpose();
  return MarginalModel(std::move(states), std::move(pi_bar), std::move(q));
}

MarginalModel MarginalModel::from_kernel(const FiniteReversibleKernel& kernel) {
  return MarginalModel(kernel.states(), kernel.pi(), kernel.matrix());
}

bool MarginalModel::is_independent() const {
  for (Index x = 1; x < q_bar_.rows(); ++x)
    if ((q_bar_.row(x) - q_bar_.row(0)).cwiseAbs().maxCoeff() > tol::kStochastic) return false;
  return true;
}

double MarginalModel::r_bar(std::size_t x, std::size_t y) const {
  const double fwd = pi_bar_[ix(x)] * q_bar_(ix(x), ix(y));
  if (fwd <= 0.0) return 0.0;
  return pi_bar_[ix(y)] * q_bar_(ix(y), ix(x)) / fwd;
}

double MarginalModel::alpha_bar(std::size_t x, std::size_t y) const { return std::min(1.0, r_bar(x, y)); }

double MarginalModel::rho_bar(std::size_t x) const {
  double total = 0.0;
  for (std::size_t y = 0; y < size(); ++y) total += q_bar_(ix(x), ix(y)) * alpha_bar(x, y);
  return total;
}

FiniteReversibleKernel MarginalModel::kernel() const {
  const Index n = ix(size());
  Matrix p = Matrix::Zero(n, n);
  for (Index x = 0; x < n; ++x) {
    double off = 0.0;
    for (Index y = 0; y < n; ++y) {
      if (y == x) continue;
      p(x, y) = q_bar_(x, y) * alpha_bar(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      off += p(x, y);
    }
    p(x, x) = 1.0 - off;
  }
  return FiniteReversibleKernel(states_, std::move(p), pi_bar_);
}

JumpDecomposition MarginalModel::acceptance_decomposition() const {
  const Index n = ix(size());
  Vector rho(n);
  Matrix jump(n, n);
  for (Index x = 0; x < n; ++x) {
    rho[x] = rho_bar(static_cast<std::size_t>(x));
    if (rho[x] <= 0.0) throw AbsorbingState("marginal state " + states_[static_cast<std::size_t>(x)] + " never accepts");
    for (Index y = 0; y < n; ++y)
      jump(x, y) = q_bar_(x, y) * alpha_bar(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) / rho[x];
  }
  return JumpDecomposition::from_parts(kernel(), std::move(rho), std::move(jump));
}

// ---------------------------------------------------------------------------

AcceptancePair acceptance_probabilities(double r_bar, double u, double v) {
  if (!(u > 0.0)) throw ZeroNoiseCurrent("acceptance needs a positive current noise value");
  return {std::min(1.0, r_bar * v / u), std::min(1.0, r_bar) * std::min(1.0, v / u)};
}

PmState pm_initial_state(const PmModel& model, Rng& rng) {
  PmState s;
  s.x = model.marginal.draw_initial(rng);
  // Q_x(du) u puts no mass on u = 0
  for (int tries = 0; tries < 1000000; ++tries) {
    s.u = model.noise.sample(s.x, rng);
    if (s.u > 0.0) return s;
  }
  throw ZeroNoiseCurrent("could not draw a positive noise value for the initial state");
}

namespace {

PmTransition step_impl(const PmModel& model, const PmState& state, Rng& rng, bool aux) {
  if (!(state.u > 0.0)) throw ZeroNoiseCurrent("pseudo-marginal step from u = 0");
  const std::size_t y = model.marginal.propose(state.x, rng);
  const double v = model.noise.sample(y, rng);
  const auto acc = acceptance_probabilities(model.marginal.r_bar(state.x, y), state.u, v);
  PmTransition t;
  t.alpha = acc.alpha;
  t.alpha_r = acc.alpha_r;
  t.accepted = uniform_open(rng) < (aux ? acc.alpha_r : acc.alpha);
  t.state = t.accepted ? PmState{y, v} : state;
  return t;
}

}  // namespace

PmTransition pm_step(const PmModel& model, const PmState& state, Rng& rng) {
  return step_impl(model, state, rng, false);
}

PmTransition aux_r_step(const PmModel& model, const PmState& state, Rng& rng) {
  return step_impl(model, state, rng, true);
}

std::size_t marginal_step(const MarginalModel& model, std::size_t x, Rng& rng) {
  const std::size_t y = model.propose(x, rng);
  return uniform_open(rng) < model.alpha_bar(x, y) ? y : x;
}

std::vector<PmState> pm_simulate(const PmModel& model, std::size_t n, Rng& rng, bool aux_kernel) {
  std::vector<PmState> path;
  if (n == 0) return path;
  path.reserve(n);
  path.push_back(pm_initial_state(model, rng));
  while (path.size() < n) path.push_back(step_impl(model, path.back(), rng, aux_kernel).state);
  return path;
}

// ---------------------------------------------------------------------------

ProductSpace product_space(const PmModel& model) {
  const auto& m = model.marginal;
  ProductSpace space;
  std::vector<double> pi;
  for (std::size_t x = 0; x < m.size(); ++x) {
    auto a = positive(require_atoms(model.noise, x));
    for (const auto& at : a) {
      space.states.push_back({x, at.u});
      pi.push_back(m.pi_bar()[ix(x)] * at.p * at.u);
    }
    space.atoms.push_back(std::move(a));
  }
  if (space.states.size() > kMaxStates) throw InvalidModel("product space exceeds the dense oracle limit");
  space.pi = Eigen::Map<Vector>(pi.data(), ix(pi.size()));
  space.pi /= space.pi.sum();
  return space;
}

namespace {

FiniteReversibleKernel product_kernel(const PmModel& model, bool aux) {
  const auto space = product_space(model);
  const auto& m = model.marginal;
  const Index n = ix(space.states.size());
  // offsets of each x block in the product ordering
  std::vector<Index> offset(m.size() + 1, 0);
  for (std::size_t x = 0; x < m.size(); ++x) offset[x + 1] = offset[x] + ix(space.atoms[x].size());
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& s = space.states[static_cast<std::size_t>(i)];
    double off = 0.0;
    for (std::size_t y = 0; y < m.size(); ++y) {
      const double q = m.q_bar()(ix(s.x), ix(y));
      if (q <= 0.0) continue;
      const double r = m.r_bar(s.x, y);
      for (std::size_t k = 0; k < space.atoms[y].size(); ++k) {
        const Index j = offset[y] + ix(k);
        if (j == i) continue;
        const auto& at = space.atoms[y][k];
        const auto acc = acceptance_probabilities(r, s.u, at.u);
        p(i, j) = q * at.p * (aux ? acc.alpha_r : acc.alpha);
        off += p(i, j);
      }
    }
    p(i, i) = 1.0 - off;
  }
  std::vector<std::string> labels;
  labels.reserve(space.states.size());
  for (const auto& s : space.states) {
    std::ostringstream os;
    os << m.states()[s.x] << ":" << s.u;
    labels.push_back(os.str());
  }
  return FiniteReversibleKernel(std::move(labels), std::move(p), space.pi);
}

}  // namespace

FiniteReversibleKernel pm_product_kernel(const PmModel& model) { return product_kernel(model, false); }

FiniteReversibleKernel aux_r_product_kernel(const PmModel& model) { return product_kernel(model, true); }

// ---------------------------------------------------------------------------

RhoUProfile rho_u_profile(const NoiseFamily& noise, double u) {
  RhoUProfile r;
  const double sbar = noise.s_bar(0);
  r.value = noise.rho_u(u);
  r.lower = 1.0 / (sbar + u);
  r.upper = std::min(1.0, 1.0 / u);
  r.q_id_rho_u = noise.q_id_rho_u();
  r.q_id_lower = 1.0 / (2.0 * sbar);
  const double eps = 1e-10;
  r.ok = r.value >= r.lower - eps && r.value <= r.upper + eps && r.q_id_rho_u >= r.q_id_lower - eps;
  return r;
}

RhoUProfile rho_u_profile_mc(const NoiseFamily& noise, double u, std::size_t draws, Rng& rng) {
  if (!(u > 0.0)) throw ZeroNoiseCurrent("rho_U is evaluated at u > 0 only");
  if (!noise.state_independent()) throw UnevaluableNoise("rho_U needs a state-independent family");
  if (draws < 2) throw InvalidConfig("rho_U Monte Carlo needs at least two draws");
  double sum = 0.0, sum2 = 0.0, msum = 0.0, msum2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double v = noise.sample(0, rng);
    const double w = noise.sample(0, rng);
    const double t = std::min(1.0, v / u);
    const double m = std::min(v, w);
    sum += t;
    sum2 += t * t;
    msum += m;
    msum2 += m * m;
  }
  const double nd = static_cast<double>(draws);
  RhoUProfile r;
  const double sbar = noise.s_bar(0);
  r.value = sum / nd;
  r.stderr = std::sqrt(std::max(0.0, sum2 / nd - r.value * r.value) / (nd - 1.0));
  r.lower = 1.0 / (sbar + u);
  r.upper = std::min(1.0, 1.0 / u);
  r.q_id_rho_u = msum / nd;
  const double q_se = std::sqrt(std::max(0.0, msum2 / nd - r.q_id_rho_u * r.q_id_rho_u) / (nd - 1.0));
  r.q_id_lower = 1.0 / (2.0 * sbar);
  r.ok = r.value >= r.lower - 4.0 * r.stderr && r.value <= r.upper + 4.0 * r.stderr &&
         r.q_id_rho_u >= r.q_id_lower - 4.0 * q_se;
  return r;
}

MeanOneLaw mean_one_atoms(std::vector<Atom> a) {
  // validation via the noise constructor
  const auto q = NoiseFamily::atoms(std::move(a));
  MeanOneLaw law;
  law.atoms = q.atoms_at(0);
  law.second_moment = q.second_moment(0);
  law.sampler = [q](Rng& rng) { return q.sample(0, rng); };
  return law;
}

MeanOneLaw mean_one_lognormal(double sigma2) {
  const auto q = NoiseFamily::lognormal_mean1(sigma2);
  MeanOneLaw law;
  law.lognormal_sigma2 = sigma2;
  law.second_moment = q.second_moment(0);
  law.sampler = [q](Rng& rng) { return q.sample(0, rng); };
  return law;
}

MeanOneLaw mean_one_sampled(std::function<double(Rng&)> sampler, double second_moment) {
  if (!sampler) throw InvalidModel("sampled law needs a sampler");
  if (!(second_moment >= 1.0)) throw InvalidModel("a mean-one law has second moment >= 1");
  MeanOneLaw law;
  law.sampler = std::move(sampler);
  law.second_moment = second_moment;
  return law;
}

SandwichResult lemma2_bounds(const MeanOneLaw& law, double c, std::size_t draws, std::uint64_t seed) {
  if (!(c > 0.0)) throw InvalidModel("sandwich needs c > 0");
  if (!law.atoms && !law.lognormal_sigma2) {
    Rng rng(seed);
    return lemma2_bounds_mc(law, c, draws, rng);
  }
  SandwichResult r;
  if (law.atoms) {
    r.value = atoms::expected_min_ratio(*law.atoms, c);
  } else {
    r.value = NoiseFamily::lognormal_mean1(*law.lognormal_sigma2).rho_u(c);
  }
  r.lower = 1.0 / (law.second_moment + c);
  r.upper = std::min(1.0, 1.0 / c);
  r.ok = r.value >= r.lower - 1e-10 && r.value <= r.upper + 1e-10;
  return r;
}

SandwichResult lemma2_bounds_mc(const MeanOneLaw& law, double c, std::size_t draws, Rng& rng) {
  if (!(c > 0.0)) throw InvalidModel("sandwich needs c > 0");
  if (draws < 2) throw InvalidConfig("sandwich Monte Carlo needs at least two draws");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double t = std::min(1.0, law.sampler(rng) / c);
    sum += t;
    sum2 += t * t;
  }
  const double nd = static_cast<double>(draws);
  SandwichResult r;
  r.value = sum / nd;
  r.stderr = std::sqrt(std::max(0.0, sum2 / nd - r.value * r.value) / (nd - 1.0));
  r.lower = 1.0 / (law.second_moment + c);
  r.upper = std::min(1.0, 1.0 / c);
  r.ok = r.value >= r.lower - 4.0 * r.stderr && r.value <= r.upper + 4.0 * r.stderr;
  return r;
}

double rho_r_exact(const PmModel& model, const PmState& state) {
  if (!(state.u > 0.0)) throw ZeroNoiseCurrent("rho_R is evaluated at u > 0 only");
  const auto& m = model.marginal;
  double total = 0.0;
  for (std::size_t y = 0; y < m.size(); ++y) {
    const double q = m.q_bar()(ix(state.x), ix(y));
    if (q <= 0.0) continue;
    total += q * m.alpha_bar(state.x, y) * atoms::expected_min_ratio(require_atoms(model.noise, y), state.u);
  }
  return total;
}

RhoRReport rho_r_bounds_check(const PmModel& model, const PmState& state) {
  const auto& m = model.marginal;
  const double sbar = model.noise.s_bar(m.size());
  RhoRReport r;
  r.rho_r = rho_r_exact(model, state);
  r.rho_bar = m.rho_bar(state.x);
  r.lower_sbar = r.rho_bar / (sbar + state.u);
  for (std::size_t y = 0; y < m.size(); ++y)
    r.lower_sy += m.q_bar()(ix(state.x), ix(y)) * m.alpha_bar(state.x, y) /
                  (model.noise.second_moment(y) + state.u);
  r.upper = r.rho_bar * std::min(1.0, 1.0 / state.u);
  for (const auto& at : positive(require_atoms(model.noise, state.x)))
    r.rho_rx += at.p * at.u * rho_r_exact(model, {state.x, at.u});
  r.rho_rx_lower = r.rho_bar / (2.0 * sbar);
  r.rho_rx_upper = r.rho_bar;
  const double eps = 1e-10;
  r.ok = r.lower_sbar <= r.lower_sy + eps && r.lower_sy <= r.rho_r + eps && r.rho_r <= r.upper + eps &&
         r.rho_rx_lower <= r.rho_rx + eps && r.rho_rx <= r.rho_rx_upper + eps;
  return r;
}

// ---------------------------------------------------------------------------

PmClassification classify_pm_imh(const PmMoments& moments) {
  PmClassification c;
  c.f_in_L2_pi = finite(moments.pi_f2);
  c.integral = moments.weighted_integral;
  c.integral_finite = finite(moments.weighted_integral);
  c.verdict = c.f_in_L2_pi && c.integral_finite ? Verdict::Finite : Verdict::Infinite;
  c.route = "moments";
  return c;
}

namespace {

Vector importance_weight(const MarginalModel& m) {
  if (!m.is_independent()) throw InvalidModel("classification requires independent proposals");
  Vector mu = m.q_bar().row(0).transpose();
  if ((mu.array() <= 0.0).any()) throw InvalidModel("independent proposal must cover every state");
  return m.pi_bar().cwiseQuotient(mu);
}

}  // namespace

PmClassification classify_pm_imh(const PmModel& model, const StateFunction& f_x) {
  const auto& m = model.marginal;
  if (f_x.size() != m.size()) throw DimensionMismatch("f_X must have one value per marginal state");
  const Vector w = importance_weight(m);
  const auto f = centered(m.pi_bar(), f_x);
  PmMoments mom;
  mom.pi_f2 = inner(m.pi_bar(), f.values(), f.values());
  for (std::size_t x = 0; x < m.size(); ++x) {
    const double f2 = f[x] * f[x];
    if (f2 == 0.0) continue;
    mom.weighted_integral += model.noise.second_moment(x) * w[ix(x)] * f2 * m.pi_bar()[ix(x)];
  }
  auto c = classify_pm_imh(mom);
  c.route = "x-only";
  return c;
}

PmClassification classify_pm_imh(const PmModel& model, const PmFunction& f,
                                 const std::optional<PmMoments>& moments) {
  const auto& m = model.marginal;
  bool have_atoms = true;
  for (std::size_t x = 0; x < m.size() && have_atoms; ++x) have_atoms = model.noise.atoms_at(x).has_value();
  if (!have_atoms) {
    if (!moments) throw MissingMoments("f(x, u) classification needs exact atoms or supplied moments");
    return classify_pm_imh(*moments);
  }
  const Vector w = importance_weight(m);
  const auto space = product_space(model);
  double mean = 0.0;
  for (std::size_t i = 0; i < space.states.size(); ++i)
    mean += space.pi[ix(i)] * f(space.states[i].x, space.states[i].u);
  PmMoments mom;
  for (std::size_t i = 0; i < space.states.size(); ++i) {
    const auto& s = space.states[i];
    const double d = f(s.x, s.u) - mean;
    mom.pi_f2 += space.pi[ix(i)] * d * d;
  }
  // int u^2 w fbar^2 pibar Q: the pi weight already carries pibar Q u
  for (std::size_t i = 0; i < space.states.size(); ++i) {
    const auto& s = space.states[i];
    const double d = f(s.x, s.u) - mean;
    mom.weighted_integral += space.pi[ix(i)] * s.u * w[ix(s.x)] * d * d;
  }
  auto c = classify_pm_imh(mom);
  c.route = "atoms";
  return c;
}

PmClassification classify_pm_imh_power(const PowerLawPmModel& model, double c) {
  if (!(model.a - model.beta < -1.0)) throw InvalidModel("pibar ~ x^(a - beta) must be summable");
  if (model.n_average < 1) throw InvalidModel("averaging needs N >= 1");
  // fbar^2 ~ x^(2c) for c > 0 and tends to a nonzero constant for c < 0
  const double f2_exp = c == 0.0 ? 0.0 : std::max(2.0 * c, 0.0);
  const double s_exp = std::max(0.0, model.gamma);
  PmClassification out;
  out.route = "power-law";
  if (c == 0.0) {
    out.f_in_L2_pi = true;
    out.integral_finite = true;
    out.integral = 0.0;
    out.verdict = Verdict::Finite;
    return out;
  }
  out.f_in_L2_pi = f2_exp + model.a - model.beta < -1.0;
  out.integral_finite = s_exp + f2_exp + 2.0 * model.a - model.beta < -1.0;
  if (out.integral_finite) {
    // truncated, unnormalized sum of s_N(x) w(x) fbar(x)^2 pibar(x)
    const double n = static_cast<double>(model.n_average);
    for (int x = 100000; x >= 1; --x) {
      const double xd = x;
      out.integral += (1.0 + std::pow(xd, model.gamma) / n) * std::pow(xd, f2_exp + 2.0 * model.a - model.beta);
    }
  } else {
    out.integral = kInfinity;
  }
  out.verdict = out.f_in_L2_pi && out.integral_finite ? Verdict::Finite : Verdict::Infinite;
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(HypothesisStatus s) {
  switch (s) {
    case HypothesisStatus::Verified: return "verified";
    case HypothesisStatus::Failed: return "failed";
    case HypothesisStatus::Assumed: return "assumed";
    case HypothesisStatus::NotApplicable: return "not_applicable";
  }
  return "?";
}

namespace {

Hypothesis gap_hypothesis(const std::string& name, const std::function<double()>& gap,
                          const std::optional<bool>& assumed) {
  Hypothesis h{name, HypothesisStatus::Failed, ""};
  try {
    const double g = gap();
    std::ostringstream os;
    os << "spectral gap " << g;
    h.detail = os.str();
    h.status = g > tol::kSingular ? HypothesisStatus::Verified : HypothesisStatus::Failed;
  } catch (const Error& e) {
    if (assumed) {
      h.status = *assumed ? HypothesisStatus::Assumed : HypothesisStatus::Failed;
      h.detail = std::string("caller assertion; oracle unavailable: ") + e.what();
    } else {
      h.detail = e.what();
    }
  }
  return h;
}

Hypothesis flag(const std::string& name, bool ok, const std::string& detail) {
  return {name, ok ? HypothesisStatus::Verified : HypothesisStatus::Failed, detail};
}

void conclude(SufficiencyConclusion& c, std::optional<double> criterion, const std::string& what) {
  c.criterion = criterion;
  c.applies = std::all_of(c.hypotheses.begin(), c.hypotheses.end(), [](const Hypothesis& h) {
    return h.status == HypothesisStatus::Verified || h.status == HypothesisStatus::Assumed;
  });
  if (!c.applies) {
    c.why = "hypotheses not met";
    return;
  }
  if (!criterion) {
    c.why = what + " not evaluable";
    return;
  }
  c.concludes_finite = finite(*criterion);
  c.why = c.concludes_finite ? what + " finite" : what + " infinite; result is silent";
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct Integrals {
  std::optional<double> f2_u2;      // int fbar^2 pibar Q u^2
  std::optional<double> jump_crit;  // int (u + sbar) u fbar^2 / rhobar pibar Q
};

SufficiencyReport build_report(const PmModel& model, const Integrals& in, bool x_only,
                               const std::optional<StateFunction>& f_x,
                               const SufficiencyAssumptions& assumptions) {
  const auto& m = model.marginal;
  const double sbar = model.noise.s_bar(m.size());
  SufficiencyReport rep;

  auto& marg = rep.marginal_route;
  marg.hypotheses.push_back(gap_hypothesis("marginal kernel variance bounding",
                                         [&] { return spectral_gap(m.kernel()).gap; },
                                         assumptions.marginal_variance_bounding));
  marg.hypotheses.push_back(flag("noise second moments bounded", finite(sbar), "sbar = " + num(sbar)));
  conclude(marg, in.f2_u2, "int fbar^2 u^2");

  auto jump_hyps = [&] {
    std::vector<Hypothesis> h;
    h.push_back(flag("state-independent noise", model.noise.state_independent(), model.noise.label()));
    h.push_back(flag("noise second moments bounded", finite(sbar), "sbar = " + num(sbar)));
    h.push_back(gap_hypothesis("marginal jump kernel variance bounding",
                               [&] { return spectral_gap(m.acceptance_decomposition().jump_kernel()).gap; },
                               assumptions.marginal_jump_variance_bounding));
    return h;
  };

  auto& jr = rep.jump_route;
  jr.hypotheses = jump_hyps();
  conclude(jr, in.jump_crit, "int (u + sbar) u fbar^2 / rhobar");

  auto& jrx = rep.jump_route_x_only;
  if (!x_only || !f_x) {
    jrx.hypotheses.push_back({"f depends on x only", HypothesisStatus::NotApplicable, ""});
    jrx.why = "f depends on u";
  } else {
    jrx.hypotheses = jump_hyps();
    jrx.hypotheses.push_back(flag("f depends on x only", true, ""));
    std::optional<double> v;
    try {
      v = asymptotic_variance_exact(m.kernel(), *f_x);
    } catch (const Error&) {
    }
    conclude(jrx, v, "var(f_X, Pbar)");
  }
  return rep;
}

}  // namespace

SufficiencyReport sufficiency_report(const PmModel& model, const PmFunction& f, bool x_only,
                                     const SufficiencyAssumptions& assumptions) {
  const auto& m = model.marginal;
  const double sbar = model.noise.s_bar(m.size());
  const auto space = product_space(model);
  double mean = 0.0;
  for (std::size_t i = 0; i < space.states.size(); ++i)
    mean += space.pi[ix(i)] * f(space.states[i].x, space.states[i].u);
  Integrals in{0.0, 0.0};
  Vector fv(ix(space.states.size()));
  for (std::size_t i = 0; i < space.states.size(); ++i) {
    const auto& s = space.states[i];
    const double d = f(s.x, s.u) - mean;
    fv[ix(i)] = d;
    // pi already carries pibar Q u
    *in.f2_u2 += space.pi[ix(i)] * s.u * d * d;
    *in.jump_crit += space.pi[ix(i)] * (s.u + sbar) * d * d / m.rho_bar(s.x);
  }
  std::optional<StateFunction> f_x;
  if (x_only) {
    Vector v = Vector::Zero(ix(m.size()));
    for (std::size_t x = 0; x < m.size(); ++x) v[ix(x)] = f(x, 1.0);
    f_x = StateFunction(v);
  }
  auto rep = build_report(model, in, x_only, f_x, assumptions);
  rep.product_chain_avar = asymptotic_variance_exact(pm_product_kernel(model), StateFunction(fv));
  return rep;
}

SufficiencyReport sufficiency_report(const PmModel& model, const StateFunction& f_x,
                                     const SufficiencyAssumptions& assumptions) {
  const auto& m = model.marginal;
  if (f_x.size() != m.size()) throw DimensionMismatch("f_X must have one value per marginal state");
  bool have_atoms = true;
  for (std::size_t x = 0; x < m.size() && have_atoms; ++x) have_atoms = model.noise.atoms_at(x).has_value();
  if (have_atoms)
    return sufficiency_report(model, [&](std::size_t x, double) { return f_x[x]; }, true, assumptions);

  // x-only f without atoms: the u integrals reduce to second moments
  const double sbar = model.noise.s_bar(m.size());
  const auto f = centered(m.pi_bar(), f_x);
  Integrals in{0.0, 0.0};
  for (std::size_t x = 0; x < m.size(); ++x) {
    const double w = m.pi_bar()[ix(x)] * f[x] * f[x];
    if (w == 0.0) continue;
    const double s = model.noise.second_moment(x);
    *in.f2_u2 += w * s;
    *in.jump_crit += w * (s + sbar) / m.rho_bar(x);
  }
  return build_report(model, in, true, f_x, assumptions);
}

// ---------------------------------------------------------------------------

namespace pm_models {

MarginalModel two_state_marginal() { return MarginalModel::from_kernel(models::two_state(0.3, 0.3)); }

NoiseFamily two_atom_noise() { return NoiseFamily::atoms({{0.5, 0.5}, {1.5, 0.5}}); }

PmModel abc_model(Vector p, std::vector<double> h) {
  const Index n = p.size();
  if (static_cast<std::size_t>(n) != h.size()) throw DimensionMismatch("abc model: p and h sizes differ");
  if ((p.array() <= 0.0).any()) throw InvalidModel("abc model: p must be positive");
  p /= p.sum();
  Vector pi(n);
  for (Index x = 0; x < n; ++x) pi[x] = p[x] * h[static_cast<std::size_t>(x)];
  pi /= pi.sum();
  auto noise = NoiseFamily::abc(h);
  return {MarginalModel::independent(default_labels(static_cast<std::size_t>(n)), pi, p), noise};
}

namespace {

std::vector<Atom> random_atoms(Rng& rng) {
  const int k = 2 + static_cast<int>(uniform_open(rng) * 3.0);
  std::vector<Atom> a;
  double total_p = 0.0;
  for (int i = 0; i < k; ++i) {
    // occasionally a zero atom, which the target never visits
    const double u = i == 0 && uniform_open(rng) < 0.3 ? 0.0 : std::exp(3.0 * uniform_open(rng) - 1.5);
    const double p = 0.2 + uniform_open(rng);
    a.push_back({u, p});
    total_p += p;
  }
  double mean = 0.0;
  for (auto& at : a) {
    at.p /= total_p;
    mean += at.p * at.u;
  }
  for (auto& at : a) at.u /= mean;
  // renormalize probabilities exactly
  double s = 0.0;
  for (const auto& at : a) s += at.p;
  for (auto& at : a) at.p /= s;
  return a;
}

Vector random_positive(std::size_t n, Rng& rng) {
  Vector v(ix(n));
  for (Index i = 0; i < v.size(); ++i) v[i] = std::exp(2.0 * uniform_open(rng) - 1.0);
  return v / v.sum();
}

NoiseFamily random_noise(std::size_t n, Rng& rng, bool state_dependent) {
  if (!state_dependent) return NoiseFamily::atoms(random_atoms(rng));
  std::vector<std::vector<Atom>> all;
  for (std::size_t x = 0; x < n; ++x) all.push_back(random_atoms(rng));
  return NoiseFamily::state_atoms(std::move(all));
}

}  // namespace

PmModel random_exact(std::size_t n, Rng& rng, bool state_dependent) {
  auto proposal = models::random_reversible(n, rng);
  Vector pi = random_positive(n, rng);
  MarginalModel marginal(proposal.states(), pi, proposal.matrix());
  return {marginal, random_noise(n, rng, state_dependent)};
}

PmModel random_independent(std::size_t n, Rng& rng) {
  Vector mu = random_positive(n, rng);
  Vector pi = random_positive(n, rng);
  return {MarginalModel::independent(default_labels(n), pi, mu), random_noise(n, rng, false)};
}

}  // namespace pm_models

}  // namespace jumpvar
