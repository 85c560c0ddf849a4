#pragma once

// Pseudo-marginal Metropolis-Hastings on (x, u): proposal qbar(x, y) Q_y(dv),
// acceptance 1 ^ rbar(x, y) v / u, target pibar(dx) Q_x(du) u. Also the
// auxiliary kernel R with factorized acceptance (1 ^ rbar)(1 ^ v/u), the
// exact product-chain construction for finitely many atoms, and the
// classification and sufficiency results for finite asymptotic variance.

#include "jumpvar/finite_chain.hpp"
#include "jumpvar/imh.hpp"
#include "jumpvar/noise.hpp"
#include "jumpvar/rng.hpp"
#include "jumpvar/sampling.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace jumpvar {

/// Finite marginal Metropolis-Hastings description.
class MarginalModel {
 public:
  MarginalModel(std::vector<std::string> states, Vector pi_bar, Matrix q_bar);

  /// Independent proposals: every row of qbar equals mu_bar.
  static MarginalModel independent(std::vector<std::string> states, Vector pi_bar, Vector mu_bar);
  /// qbar = the given reversible kernel's matrix, target = its pi; rbar = 1.
  static MarginalModel from_kernel(const FiniteReversibleKernel& kernel);

  std::size_t size() const { return states_.size(); }
  const std::vector<std::string>& states() const { return states_; }
  const Vector& pi_bar() const { return pi_bar_; }
  const Matrix& q_bar() const { return q_bar_; }
  bool is_independent() const;

  /// pibar(y) qbar(y, x) / (pibar(x) qbar(x, y)); 0 where qbar(x, y) = 0.
  double r_bar(std::size_t x, std::size_t y) const;
  double alpha_bar(std::size_t x, std::size_t y) const;
  /// rhobar(x) = sum_y qbar(x, y) alphabar(x, y), self-proposals included.
  double rho_bar(std::size_t x) const;

  /// The marginal Metropolis-Hastings kernel Pbar.
  FiniteReversibleKernel kernel() const;
  /// rhobar together with the jump kernel qbar alphabar / rhobar.
  JumpDecomposition acceptance_decomposition() const;

  std::size_t propose(std::size_t x, Rng& rng) const { return proposal_->step(x, rng); }
  std::size_t draw_initial(Rng& rng) const { return (*initial_)(rng); }

 private:
  std::vector<std::string> states_;
  Vector pi_bar_;
  Matrix q_bar_;
  std::shared_ptr<const ChainSampler> proposal_;
  std::shared_ptr<const DiscreteSampler> initial_;
};

struct PmModel {
  MarginalModel marginal;
  NoiseFamily noise;
};

struct PmState {
  std::size_t x = 0;
  double u = 1.0;
};

struct PmTransition {
  PmState state;
  double alpha = 0.0;    // 1 ^ rbar v/u
  double alpha_r = 0.0;  // (1 ^ rbar)(1 ^ v/u)
  bool accepted = false;
};

/// Initial state: x from pibar, u redrawn from Q_x until positive.
PmState pm_initial_state(const PmModel& model, Rng& rng);

/// One pseudo-marginal transition. Throws ZeroNoiseCurrent when u = 0.
PmTransition pm_step(const PmModel& model, const PmState& state, Rng& rng);
/// One transition of the auxiliary kernel R (same proposal).
PmTransition aux_r_step(const PmModel& model, const PmState& state, Rng& rng);
/// Marginal Metropolis-Hastings step consuming randomness in the same order
/// as pm_step with a deterministic noise family.
std::size_t marginal_step(const MarginalModel& model, std::size_t x, Rng& rng);

/// Path of n (x, u) states starting from pm_initial_state.
std::vector<PmState> pm_simulate(const PmModel& model, std::size_t n, Rng& rng, bool aux_kernel = false);

struct AcceptancePair {
  double alpha = 0.0;
  double alpha_r = 0.0;
};

AcceptancePair acceptance_probabilities(double r_bar, double u, double v);

// ---------------------------------------------------------------------------
// exact-discrete mode

/// (x, atom) states with positive target mass; u = 0 atoms carry none.
struct ProductSpace {
  std::vector<PmState> states;
  Vector pi;  // pibar(x) Q_x(u) u
  std::vector<std::vector<Atom>> atoms;  // positive atoms at each x
};

ProductSpace product_space(const PmModel& model);

/// Exact pseudo-marginal kernel on the product space.
FiniteReversibleKernel pm_product_kernel(const PmModel& model);
/// Exact auxiliary kernel R on the product space.
FiniteReversibleKernel aux_r_product_kernel(const PmModel& model);

struct RhoUProfile {
  double value = 0.0;
  double lower = 0.0;       // 1 / (sbar + u)
  double upper = 0.0;       // 1 ^ 1/u
  double q_id_rho_u = 0.0;  // Q(Id rho_U)
  double q_id_lower = 0.0;  // 1 / (2 sbar)
  double stderr = 0.0;      // nonzero for Monte Carlo evaluations only
  bool ok = false;
};

/// rho_U(u) = int Q(dv) (1 ^ v/u) for a state-independent Q with exact form.
RhoUProfile rho_u_profile(const NoiseFamily& noise, double u);
/// Monte Carlo fallback for sampler-only families.
RhoUProfile rho_u_profile_mc(const NoiseFamily& noise, double u, std::size_t draws, Rng& rng);

/// Mean-one law used by the E[1 ^ Y/c] sandwich.
struct MeanOneLaw {
  std::optional<std::vector<Atom>> atoms;
  std::optional<double> lognormal_sigma2;
  std::function<double(Rng&)> sampler;
  double second_moment = 0.0;
};

MeanOneLaw mean_one_atoms(std::vector<Atom> a);
MeanOneLaw mean_one_lognormal(double sigma2);
MeanOneLaw mean_one_sampled(std::function<double(Rng&)> sampler, double second_moment);

struct SandwichResult {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double stderr = 0.0;
  bool ok = false;
};

/// 1/(E[Y^2] + c) <= E[1 ^ Y/c] <= 1 ^ 1/c; exact for atom and lognormal
/// laws (1e-10), Monte Carlo with `draws` samples otherwise (4 standard errors).
SandwichResult lemma2_bounds(const MeanOneLaw& law, double c, std::size_t draws = 200000,
                             std::uint64_t seed = 1);
SandwichResult lemma2_bounds_mc(const MeanOneLaw& law, double c, std::size_t draws, Rng& rng);

struct RhoRReport {
  double rho_r = 0.0;          // rho_R(x, u)
  double rho_bar = 0.0;        // rhobar(x)
  double lower_sbar = 0.0;     // rhobar(x) / (sbar + u)
  double lower_sy = 0.0;       // sum_y qbar alphabar / (s(y) + u)
  double upper = 0.0;          // rhobar(x) (1 ^ 1/u)
  double rho_rx = 0.0;         // rho_{R,X}(x) = int Q_x(du) u rho_R(x, u)
  double rho_rx_lower = 0.0;   // rhobar(x) / (2 sbar)
  double rho_rx_upper = 0.0;   // rhobar(x)
  bool ok = false;
};

RhoRReport rho_r_bounds_check(const PmModel& model, const PmState& state);

/// Exact rho_R(x, u) by summation over proposals and atoms.
double rho_r_exact(const PmModel& model, const PmState& state);

// ---------------------------------------------------------------------------
// classification

/// Caller-supplied integrals, +infinity when divergent.
struct PmMoments {
  double pi_f2 = 0.0;              // pi(fbar^2)
  double weighted_integral = 0.0;  // int u^2 (dpibar/dmubar) f^2 pibar Q
};

struct PmClassification {
  bool f_in_L2_pi = false;
  bool integral_finite = false;
  double integral = 0.0;
  Verdict verdict = Verdict::Infinite;
  std::string route;
};

using PmFunction = std::function<double(std::size_t x, double u)>;

/// x-only f: finite iff int s(x) (dpibar/dmubar)(x) f_X(x)^2 pibar(dx) < inf.
PmClassification classify_pm_imh(const PmModel& model, const StateFunction& f_x);
/// General f(x, u): needs finitely many atoms per x, or caller moments.
PmClassification classify_pm_imh(const PmModel& model, const PmFunction& f,
                                 const std::optional<PmMoments>& moments = std::nullopt);
PmClassification classify_pm_imh(const PmMoments& moments);

/// Analytic pseudo-marginal IMH on N: mubar(x) ~ x^-beta, dpibar/dmubar ~ x^a,
/// noise variance v(x) ~ x^gamma averaged over N draws, f_X(x) = x^c.
struct PowerLawPmModel {
  double beta = 4.0;
  double a = 1.0;
  double gamma = 0.0;
  std::size_t n_average = 1;
};

PmClassification classify_pm_imh_power(const PowerLawPmModel& model, double c);

// ---------------------------------------------------------------------------
// sufficiency conditions

enum class HypothesisStatus { Verified, Failed, Assumed, NotApplicable };
std::string to_string(HypothesisStatus s);

struct Hypothesis {
  std::string name;
  HypothesisStatus status = HypothesisStatus::NotApplicable;
  std::string detail;
};

struct SufficiencyConclusion {
  bool applies = false;        // all hypotheses verified or assumed
  bool concludes_finite = false;
  std::optional<double> criterion;
  std::string why;
  std::vector<Hypothesis> hypotheses;
};

struct SufficiencyReport {
  SufficiencyConclusion marginal_route;      // Pbar variance bounding, sbar < inf, int f^2 pibar Q u^2 < inf
  SufficiencyConclusion jump_route; // state-independent Q, jump kernel VB, int (u+sbar) u f^2/rhobar ...
  SufficiencyConclusion jump_route_x_only;  // ... and var(f_X, Pbar) < inf
  std::optional<double> product_chain_avar;
};

/// Caller assertions used where the hypotheses cannot be checked.
struct SufficiencyAssumptions {
  std::optional<bool> marginal_variance_bounding;
  std::optional<bool> marginal_jump_variance_bounding;
};

SufficiencyReport sufficiency_report(const PmModel& model, const PmFunction& f, bool x_only,
                                     const SufficiencyAssumptions& assumptions = {});
SufficiencyReport sufficiency_report(const PmModel& model, const StateFunction& f_x,
                                     const SufficiencyAssumptions& assumptions = {});

namespace pm_models {

/// pibar = (1/2, 1/2), qbar = [[0.7, 0.3], [0.3, 0.7]], marginal gap 0.6.
MarginalModel two_state_marginal();
/// Uniform atoms {0.5, 1.5}.
NoiseFamily two_atom_noise();
/// pibar proportional to h p, mubar = p, ABC noise with the same h.
PmModel abc_model(Vector p, std::vector<double> h);
/// Random finite PM model: n marginal states, random reversible proposal,
/// random atom noise (state-dependent when `state_dependent`).
PmModel random_exact(std::size_t n, Rng& rng, bool state_dependent);
/// Random finite independent-proposal PM model.
PmModel random_independent(std::size_t n, Rng& rng);

}  // namespace pm_models

}  // namespace jumpvar
