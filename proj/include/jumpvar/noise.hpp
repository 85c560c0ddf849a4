#pragma once

// Families {Q_x} of nonnegative, mean-one multiplicative noise for
// pseudo-marginal chains, indexed by the marginal state x.

#include "jumpvar/rng.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace jumpvar {

struct Atom {
  double u = 0.0;
  double p = 0.0;
};

class NoiseFamily {
 public:
  enum class Kind { StateIndependent, Abc, Averaged, Custom };

  using Sampler = std::function<double(std::size_t x, Rng&)>;
  using SecondMoment = std::function<double(std::size_t x)>;

  /// U = 1 almost surely; sampling consumes no randomness.
  static NoiseFamily point_mass();
  /// State-independent distribution on finitely many atoms; mean must be 1.
  static NoiseFamily atoms(std::vector<Atom> atoms);
  /// exp(sigma Z - sigma^2 / 2), second moment exp(sigma^2).
  static NoiseFamily lognormal_mean1(double sigma2);
  /// Q_x({1/h(x)}) = h(x) = 1 - Q_x({0}); one h per marginal state.
  static NoiseFamily abc(std::vector<double> h);
  /// Average of N independent draws of `base`.
  static NoiseFamily averaged(const NoiseFamily& base, std::size_t n);
  /// State-dependent atoms, one mean-one list per marginal state (Custom kind).
  static NoiseFamily state_atoms(std::vector<std::vector<Atom>> per_state);
  static NoiseFamily custom(std::string label, Sampler sampler, SecondMoment s, double s_bar,
                            bool state_independent);

  /// {kind: "abc", h: number | [..]} | {kind: "atoms", atoms: [[u, p], ...]} |
  /// {kind: "lognormal_mean1", sigma2: x} | {kind: "averaged", base: {...}, N: n} |
  /// {kind: "point_mass"}
  static NoiseFamily from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  bool state_independent() const { return state_independent_; }

  double sample(std::size_t x, Rng& rng) const;
  /// s(x) = E[U^2], possibly +infinity.
  double second_moment(std::size_t x) const;
  /// Essential supremum of s over the marginal states (analytic, never estimated).
  double s_bar(std::size_t n_states) const;
  /// Exact atoms of Q_x when the family has finitely many; merged and sorted.
  std::optional<std::vector<Atom>> atoms_at(std::size_t x) const;

  /// rho_U(u) = E[1 ^ V/u] for state-independent families with an exact form.
  /// Throws UnevaluableNoise otherwise.
  double rho_u(double u) const;
  /// Q(Id rho_U) = E[min(V, V')] for V, V' independent draws.
  double q_id_rho_u() const;
  /// Whether rho_u / q_id_rho_u have exact forms.
  bool evaluable() const;

 private:
  NoiseFamily() = default;

  Kind kind_ = Kind::Custom;
  std::string label_;
  bool state_independent_ = true;
  std::vector<Atom> atoms_;      // StateIndependent with atoms
  std::optional<double> sigma2_; // lognormal
  std::vector<double> h_;        // Abc
  std::vector<std::vector<Atom>> state_atoms_;  // Custom with exact atoms
  std::shared_ptr<const NoiseFamily> base_;
  std::size_t n_avg_ = 1;
  Sampler sampler_;
  SecondMoment second_moment_;
  double s_bar_ = 0.0;
};

/// Discrete distribution helpers shared by the exact computations.
namespace atoms {

double mean(const std::vector<Atom>& a);
double second_moment(const std::vector<Atom>& a);
/// E[1 ^ V/c]
double expected_min_ratio(const std::vector<Atom>& a, double c);
/// Distribution of the average of n independent draws, atoms merged at 1e-12.
std::vector<Atom> average(const std::vector<Atom>& a, std::size_t n);

}  // namespace atoms

/// Standard normal cdf.
double normal_cdf(double z);

}  // namespace jumpvar
