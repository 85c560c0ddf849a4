#include "jumpvar/noise.hpp"

#include "jumpvar/errors.hpp"
#include "jumpvar/imh.hpp"
#include "jumpvar/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace jumpvar {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace atoms {

double mean(const std::vector<Atom>& a) {
  double m = 0.0;
  for (const auto& at : a) m += at.p * at.u;
  return m;
}

double second_moment(const std::vector<Atom>& a) {
  double m = 0.0;
  for (const auto& at : a) m += at.p * at.u * at.u;
  return m;
}

double expected_min_ratio(const std::vector<Atom>& a, double c) {
  double m = 0.0;
  for (const auto& at : a) m += at.p * std::min(1.0, at.u / c);
  return m;
}

namespace {

std::vector<Atom> merge(std::vector<Atom> a) {
  std::sort(a.begin(), a.end(), [](const Atom& l, const Atom& r) { return l.u < r.u; });
  std::vector<Atom> out;
  for (const auto& at : a) {
    if (at.p <= 0.0) continue;
    if (!out.empty() && std::abs(out.back().u - at.u) <= 1e-12 * std::max(1.0, at.u))
      out.back().p += at.p;
    else
      out.push_back(at);
  }
  return out;
}

}  // namespace

std::vector<Atom> average(const std::vector<Atom>& a, std::size_t n) {
  if (n < 1) throw InvalidModel("averaging needs N >= 1");
  // distribution of the running sum, divided by n at the end
  std::vector<Atom> sum = merge(a);
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<Atom> next;
    next.reserve(sum.size() * a.size());
    for (const auto& s : sum)
      for (const auto& at : a) next.push_back({s.u + at.u, s.p * at.p});
    sum = merge(std::move(next));
    if (sum.size() > kMaxStates) throw InvalidModel("averaged noise has too many atoms");
  }
  for (auto& s : sum) s.u /= static_cast<double>(n);
  return sum;
}

}  // namespace atoms

namespace {

void check_atoms(const std::vector<Atom>& a) {
  if (a.empty()) throw InvalidModel("noise needs at least one atom");
  double total = 0.0;
  for (const auto& at : a) {
    if (!(at.u >= 0.0) || !std::isfinite(at.u)) throw InvalidModel("noise atoms must be nonnegative");
    if (!(at.p >= 0.0)) throw InvalidModel("noise probabilities must be nonnegative");
    total += at.p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidModel("noise probabilities must sum to 1");
  if (std::abs(atoms::mean(a) - 1.0) > 1e-12) throw InvalidModel("noise atoms must have mean 1");
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

NoiseFamily NoiseFamily::point_mass() {
  NoiseFamily q = atoms({{1.0, 1.0}});
  q.label_ = "point_mass";
  return q;
}

NoiseFamily NoiseFamily::atoms(std::vector<Atom> a) {
  check_atoms(a);
  NoiseFamily q;
  q.kind_ = Kind::StateIndependent;
  q.atoms_ = atoms::average(a, 1);
  std::ostringstream os;
  os << "atoms{";
  for (std::size_t i = 0; i < q.atoms_.size(); ++i) os << (i ? "," : "") << q.atoms_[i].u << ":" << q.atoms_[i].p;
  os << "}";
  q.label_ = os.str();
  q.s_bar_ = atoms::second_moment(q.atoms_);
  return q;
}

NoiseFamily NoiseFamily::lognormal_mean1(double sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw InvalidModel("lognormal sigma2 must be >= 0");
  NoiseFamily q;
  q.kind_ = Kind::StateIndependent;
  q.sigma2_ = sigma2;
  q.label_ = "lognormal_mean1(" + num(sigma2) + ")";
  q.s_bar_ = std::exp(sigma2);
  return q;
}

NoiseFamily NoiseFamily::abc(std::vector<double> h) {
  if (h.empty()) throw InvalidModel("abc noise needs h values");
  for (double v : h)
    if (!(v > 0.0 && v <= 1.0)) throw InvalidModel("abc h(x) must lie in (0, 1]");
  NoiseFamily q;
  q.kind_ = Kind::Abc;
  q.state_independent_ = std::all_of(h.begin(), h.end(), [&](double v) { return v == h.front(); });
  q.h_ = std::move(h);
  q.label_ = "abc";
  q.s_bar_ = 1.0 / *std::min_element(q.h_.begin(), q.h_.end());
  return q;
}

NoiseFamily NoiseFamily::averaged(const NoiseFamily& base, std::size_t n) {
  if (n < 1) throw InvalidModel("averaging needs N >= 1");
  NoiseFamily q;
  q.kind_ = Kind::Averaged;
  q.base_ = std::make_shared<const NoiseFamily>(base);
  q.n_avg_ = n;
  q.state_independent_ = base.state_independent_;
  q.label_ = "averaged(" + base.label_ + "," + std::to_string(n) + ")";
  q.s_bar_ = 1.0 + (base.s_bar_ - 1.0) / static_cast<double>(n);
  return q;
}

NoiseFamily NoiseFamily::state_atoms(std::vector<std::vector<Atom>> per_state) {
  if (per_state.empty()) throw InvalidModel("state_atoms needs at least one state");
  NoiseFamily q;
  q.kind_ = Kind::Custom;
  q.label_ = "state_atoms";
  for (auto& a : per_state) {
    check_atoms(a);
    q.state_atoms_.push_back(atoms::average(a, 1));
    q.s_bar_ = std::max(q.s_bar_, atoms::second_moment(q.state_atoms_.back()));
  }
  q.state_independent_ = per_state.size() == 1;
  return q;
}

NoiseFamily NoiseFamily::custom(std::string label, Sampler sampler, SecondMoment s, double s_bar,
                                bool state_independent) {
  NoiseFamily q;
  q.kind_ = Kind::Custom;
  q.label_ = std::move(label);
  q.sampler_ = std::move(sampler);
  q.second_moment_ = std::move(s);
  q.s_bar_ = s_bar;
  q.state_independent_ = state_independent;
  return q;
}

NoiseFamily NoiseFamily::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("kind")) throw InvalidConfig("noise: expected an object with \"kind\"");
  const auto kind = doc["kind"].get<std::string>();
  if (kind == "point_mass") return point_mass();
  if (kind == "atoms") {
    std::vector<Atom> a;
    for (const auto& pair : doc.at("atoms")) {
      if (!pair.is_array() || pair.size() != 2) throw InvalidConfig("noise.atoms: entries must be [u, p]");
      a.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    return atoms(std::move(a));
  }
  if (kind == "lognormal_mean1") return lognormal_mean1(doc.at("sigma2").get<double>());
  if (kind == "abc") {
    const auto& h = doc.at("h");
    if (h.is_number()) return abc({h.get<double>()});
    return abc(h.get<std::vector<double>>());
  }
  if (kind == "state_atoms") {
    std::vector<std::vector<Atom>> all;
    for (const auto& one : doc.at("atoms")) {
      std::vector<Atom> a;
      for (const auto& pair : one) a.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
      all.push_back(std::move(a));
    }
    return state_atoms(std::move(all));
  }
  if (kind == "averaged") return averaged(from_json(doc.at("base")), doc.at("N").get<std::size_t>());
  throw InvalidConfig("noise.kind: unknown kind \"" + kind + "\"");
}

nlohmann::json NoiseFamily::to_json() const {
  switch (kind_) {
    case Kind::StateIndependent:
      if (sigma2_) return {{"kind", "lognormal_mean1"}, {"sigma2", *sigma2_}};
      {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& at : atoms_) a.push_back({at.u, at.p});
        return {{"kind", "atoms"}, {"atoms", a}};
      }
    case Kind::Abc:
      return {{"kind", "abc"}, {"h", h_}};
    case Kind::Averaged:
      return {{"kind", "averaged"}, {"base", base_->to_json()}, {"N", n_avg_}};
    case Kind::Custom:
      if (!state_atoms_.empty()) {
        nlohmann::json all = nlohmann::json::array();
        for (const auto& a : state_atoms_) {
          nlohmann::json one = nlohmann::json::array();
          for (const auto& at : a) one.push_back({at.u, at.p});
          all.push_back(one);
        }
        return {{"kind", "state_atoms"}, {"atoms", all}};
      }
      break;
  }
  return {{"kind", "custom"}, {"label", label_}};
}

namespace {

double abc_h(const std::vector<double>& h, std::size_t x) { return h.size() == 1 ? h.front() : h.at(x); }

}  // namespace

double NoiseFamily::sample(std::size_t x, Rng& rng) const {
  switch (kind_) {
    case Kind::StateIndependent:
      if (sigma2_) {
        const double s = std::sqrt(*sigma2_);
        std::normal_distribution<double> z;
        return std::exp(s * z(rng) - 0.5 * *sigma2_);
      }
      if (atoms_.size() == 1) return atoms_.front().u;
      {
        const double u = uniform_open(rng);
        double acc = 0.0;
        for (const auto& at : atoms_) {
          acc += at.p;
          if (u < acc) return at.u;
        }
        return atoms_.back().u;
      }
    case Kind::Abc: {
      const double h = abc_h(h_, x);
      return uniform_open(rng) < h ? 1.0 / h : 0.0;
    }
    case Kind::Averaged: {
      double total = 0.0;
      for (std::size_t i = 0; i < n_avg_; ++i) total += base_->sample(x, rng);
      return total / static_cast<double>(n_avg_);
    }
    case Kind::Custom:
      if (!state_atoms_.empty()) {
        const auto& a = state_atoms_.size() == 1 ? state_atoms_.front() : state_atoms_.at(x);
        const double u = uniform_open(rng);
        double acc = 0.0;
        for (const auto& at : a) {
          acc += at.p;
          if (u < acc) return at.u;
        }
        return a.back().u;
      }
      return sampler_(x, rng);
  }
  return 1.0;
}

double NoiseFamily::second_moment(std::size_t x) const {
  switch (kind_) {
    case Kind::StateIndependent:
      return s_bar_;
    case Kind::Abc:
      return 1.0 / abc_h(h_, x);
    case Kind::Averaged:
      return 1.0 + (base_->second_moment(x) - 1.0) / static_cast<double>(n_avg_);
    case Kind::Custom:
      if (!state_atoms_.empty())
        return atoms::second_moment(state_atoms_.size() == 1 ? state_atoms_.front() : state_atoms_.at(x));
      return second_moment_(x);
  }
  return kInfinity;
}

double NoiseFamily::s_bar(std::size_t n_states) const {
  if (state_independent_ || n_states == 0) return kind_ == Kind::Averaged ? second_moment(0) : s_bar_;
  double top = 0.0;
  for (std::size_t x = 0; x < n_states; ++x) top = std::max(top, second_moment(x));
  return top;
}

std::optional<std::vector<Atom>> NoiseFamily::atoms_at(std::size_t x) const {
  switch (kind_) {
    case Kind::StateIndependent:
      if (sigma2_) {
        if (*sigma2_ == 0.0) return std::vector<Atom>{{1.0, 1.0}};
        return std::nullopt;
      }
      return atoms_;
    case Kind::Abc: {
      const double h = abc_h(h_, x);
      if (h == 1.0) return std::vector<Atom>{{1.0, 1.0}};
      return std::vector<Atom>{{0.0, 1.0 - h}, {1.0 / h, h}};
    }
    case Kind::Averaged: {
      auto base = base_->atoms_at(x);
      if (!base) return std::nullopt;
      return atoms::average(*base, n_avg_);
    }
    case Kind::Custom:
      if (!state_atoms_.empty()) return state_atoms_.size() == 1 ? state_atoms_.front() : state_atoms_.at(x);
      return std::nullopt;
  }
  return std::nullopt;
}

bool NoiseFamily::evaluable() const {
  if (!state_independent_) return false;
  if (kind_ == Kind::StateIndependent) return true;
  return atoms_at(0).has_value();
}

double NoiseFamily::rho_u(double u) const {
  if (!(u > 0.0)) throw ZeroNoiseCurrent("rho_U is evaluated at u > 0 only");
  if (!state_independent_) throw UnevaluableNoise("rho_U needs a state-independent family");
  if (kind_ == Kind::StateIndependent && sigma2_ && *sigma2_ > 0.0) {
    // P(V > u) + E[V 1{V < u}] / u with log V ~ N(-s^2/2, s^2)
    const double s = std::sqrt(*sigma2_);
    const double lu = std::log(u);
    return normal_cdf(-(lu + 0.5 * *sigma2_) / s) + normal_cdf((lu - 0.5 * *sigma2_) / s) / u;
  }
  auto a = atoms_at(0);
  if (!a) throw UnevaluableNoise("noise '" + label_ + "' has no exact form for rho_U");
  return atoms::expected_min_ratio(*a, u);
}

double NoiseFamily::q_id_rho_u() const {
  if (!state_independent_) throw UnevaluableNoise("Q(Id rho_U) needs a state-independent family");
  if (kind_ == Kind::StateIndependent && sigma2_ && *sigma2_ > 0.0) {
    // E[min(V, V')] = 2 P(V* < V') with V* size-biased: log V* - log V' ~ N(s^2, 2 s^2)
    return 2.0 * normal_cdf(-std::sqrt(*sigma2_ / 2.0));
  }
  auto a = atoms_at(0);
  if (!a) throw UnevaluableNoise("noise '" + label_ + "' has no exact form for Q(Id rho_U)");
  double total = 0.0;
  for (const auto& l : *a)
    for (const auto& r : *a) total += l.p * r.p * std::min(l.u, r.u);
  return total;
}

}  // namespace jumpvar
