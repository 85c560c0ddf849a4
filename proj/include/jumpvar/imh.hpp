#pragma once

// Independence Metropolis-Hastings: proposal mu, weight w = dpi/dmu and
// acceptance 1 ^ w(y)/w(x). Simulation on the real line, exact computations
// on finite supports, and the classification of functions whose ergodic
// averages have finite asymptotic variance.

#include "jumpvar/finite_chain.hpp"
#include "jumpvar/jump_chain.hpp"
#include "jumpvar/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jumpvar {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Second moments that decide finiteness, +infinity when divergent.
struct ImhMoments {
  /// pi(|f|) for the uncentered f; +infinity when f is not integrable.
  double pi_abs_f = 0.0;
  /// pi(fbar^2)
  double pi_f2 = 0.0;
  /// mu(w^2 fbar^2) = pi(w fbar^2)
  double mu_w2f2 = 0.0;
};

/// Finite support enabling exact computations. Weights are normalized so
/// that sum mu(x) w(x) = 1.
struct FiniteSupport {
  std::vector<double> points;
  Vector mu;
  Vector w;
};

class ImhModel {
 public:
  using Sampler = std::function<double(Rng&)>;
  using LogWeight = std::function<double(double)>;
  /// Moments of f(x) = x^c for analytic families.
  using PowerMoments = std::function<ImhMoments(double exponent)>;

  /// Exact-mode model; w is normalized internally.
  static ImhModel finite(std::string name, std::vector<double> points, Vector mu, Vector w);
  /// Sampler-only model. `w_sup` is the pi-essential supremum of w.
  static ImhModel sampled(std::string name, Sampler proposal, LogWeight log_weight, double w_sup,
                          PowerMoments moments = {});

  const std::string& name() const { return name_; }
  bool exact() const { return support_.has_value(); }
  const FiniteSupport& support() const;
  double w_sup() const { return w_sup_; }
  bool has_power_moments() const { return static_cast<bool>(power_moments_); }
  ImhMoments power_moments(double exponent) const;

  double propose(Rng& rng) const { return proposal_(rng); }
  double log_weight(double x) const { return log_weight_(x); }

  /// Index of a support point (exact mode).
  std::size_t index_of(double point) const;

  /// Transition matrix with pi = mu w (exact mode).
  FiniteReversibleKernel kernel() const;
  /// rho(x) = sum_y mu(y) (1 ^ w(y)/w(x)), jump kernel mu(y) alpha(x,y) / rho(x).
  JumpDecomposition acceptance_decomposition() const;
  Vector pi() const;

 private:
  ImhModel() = default;

  std::string name_;
  Sampler proposal_;
  LogWeight log_weight_;
  double w_sup_ = kInfinity;
  PowerMoments power_moments_;
  std::optional<FiniteSupport> support_;
};

struct ImhSimulationOptions {
  std::size_t burn_in = 0;
};

/// Path of n states; the first state is drawn from the proposal and
/// `burn_in` transitions are discarded before recording.
std::vector<double> imh_simulate(const ImhModel& model, std::size_t n, Rng& rng,
                                 const ImhSimulationOptions& options = {});
std::vector<double> imh_simulate(const ImhModel& model, std::size_t n, std::uint64_t seed,
                                 const ImhSimulationOptions& options = {});

struct RhoBounds {
  double rho = 0.0;
  double lower = 0.0;  // 1 / (pi(w) + w(x))
  double upper = 0.0;  // 1 ^ 1/w(x)
};

RhoBounds rho_and_bounds(const ImhModel& model, std::size_t x);

enum class Verdict { Finite, Infinite };
std::string to_string(Verdict v);

struct VarianceClassification {
  bool f_in_L2_pi = false;
  bool wf_in_L2_mu = false;
  Verdict verdict = Verdict::Infinite;
  std::string reason;
};

/// Verdict from supplied moments: finite iff f is square integrable under pi
/// and w f is square integrable under mu. Functions outside L1(pi) are
/// reported Infinite.
VarianceClassification classify(const ImhMoments& moments);
/// Exact mode: moments by summation over the support.
VarianceClassification classify(const ImhModel& model, const StateFunction& f);
/// Sampler mode with caller-supplied moments; throws MissingMoments when
/// the model is not exact and no moments are given.
VarianceClassification classify(const ImhModel& model, const StateFunction& f,
                                const std::optional<ImhMoments>& moments);
/// Analytic families: f(x) = x^c.
VarianceClassification classify_power(const ImhModel& model, double exponent);

/// Exact-mode moments of the centered f.
ImhMoments exact_moments(const ImhModel& model, const StateFunction& f);

/// sum w(Z_i) f(Z_i) / sum w(Z_i) over proposal draws.
double snis_estimate(std::span<const double> samples, const ImhModel& model,
                     const std::function<double(double)>& f);
/// pi(w fbar^2) in exact mode.
double snis_limit_variance(const ImhModel& model, const StateFunction& f);

struct Prop5Bounds {
  double lower1 = 0.0;  // 2 pi(rho) pitilde(f^2/rho^2) - pi(f^2)
  double lower2 = 0.0;  // pi(w f^2)
  double upper = 0.0;   // 2 pitilde(f^2/rho^2) - pi(f^2)
  double var_exact = 0.0;
  /// pi(f^2) <= var <= (2 wbar - 1) pi(f^2) when wbar is finite.
  double bounded_weight_lower = 0.0;
  double bounded_weight_upper = kInfinity;
  bool ok = false;
};

Prop5Bounds prop5_bounds(const ImhModel& model, const StateFunction& f);

struct Minorization {
  double constant = 0.0;  // min_{x,y} Ptilde(x,y) / pitilde(y)
  double pi_rho = 0.0;
  bool ok = false;
};

Minorization minorization_check(const ImhModel& model);

namespace imh_models {

/// E = {0, 1}, mu = (1/2, 1/2), pi = (3/4, 1/4).
ImhModel two_point();

/// mu(x) proportional to x^-beta on {1, ..., max_x}, w(x) proportional to x.
/// Analytic moments treat the support as all of N.
ImhModel power_law_discrete(double beta, std::size_t max_x = 1000000);

/// Target Pareto(alpha) on [1, inf), proposal 1 + Exponential(1).
ImhModel pareto_target_exponential_proposal(double alpha);

/// Random finite model with n points, mu and w log-uniformly perturbed.
ImhModel random_finite(std::size_t n, Rng& rng);

}  // namespace imh_models

}  // namespace jumpvar
