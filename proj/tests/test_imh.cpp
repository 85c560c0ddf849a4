#include "jumpvar/errors.hpp"
#include "jumpvar/imh.hpp"
#include "jumpvar/models.hpp"

#include <doctest.h>

#include <cmath>

using namespace jumpvar;

namespace {

ImhModel flat(std::size_t n) {
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = static_cast<double>(i);
  Vector mu(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < mu.size(); ++i) mu[i] = 1.0 + i;
  return ImhModel::finite("flat", pts, mu, Vector::Ones(static_cast<Eigen::Index>(n)));
}

}  // namespace

TEST_CASE("two-point model quantities") {
  const auto m = imh_models::two_point();
  const auto pi = m.pi();
  CHECK(pi[0] == doctest::Approx(0.75));
  CHECK(pi[1] == doctest::Approx(0.25));
  const auto b0 = rho_and_bounds(m, 0);
  CHECK(b0.rho == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(b0.upper == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(b0.lower == doctest::Approx(1.0 / 2.75).epsilon(1e-14));
  const auto b1 = rho_and_bounds(m, 1);
  CHECK(b1.rho == doctest::Approx(1.0));
  CHECK(b1.upper == doctest::Approx(1.0));
  CHECK(b1.lower == doctest::Approx(1.0 / 1.75).epsilon(1e-14));

  const auto d = m.acceptance_decomposition();
  CHECK(d.jump_pi()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(d.pi_rho() == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("two-point envelopes") {
  const auto b = prop5_bounds(imh_models::two_point(), StateFunction{0.25, -0.75});
  CHECK(b.var_exact == doctest::Approx(0.375).epsilon(1e-13));
  CHECK(b.lower1 == doctest::Approx(0.234375).epsilon(1e-13));
  CHECK(b.upper == doctest::Approx(0.375).epsilon(1e-13));
  CHECK(b.lower2 == doctest::Approx(0.140625).epsilon(1e-13));
  CHECK(std::abs(b.upper - b.var_exact) <= 1e-12);
  CHECK(b.ok);
  CHECK(b.bounded_weight_lower == doctest::Approx(0.1875));
  CHECK(b.bounded_weight_upper == doctest::Approx(0.375).epsilon(1e-13));
  CHECK(snis_limit_variance(imh_models::two_point(), StateFunction{1.0, 0.0}) == doctest::Approx(0.140625));
}

TEST_CASE("unit weight collapses the envelope") {
  const auto m = flat(4);
  const StateFunction f = centered(m.pi(), StateFunction{1.0, -1.0, 2.0, 0.5});
  const auto b = prop5_bounds(m, f);
  const double v = variance(m.pi(), f);
  CHECK(b.lower1 == doctest::Approx(v).epsilon(1e-12));
  CHECK(b.upper == doctest::Approx(v).epsilon(1e-12));
  CHECK(b.var_exact == doctest::Approx(v).epsilon(1e-12));
  const auto r = rho_and_bounds(m, 2);
  CHECK(r.rho == doctest::Approx(1.0));
  CHECK(r.lower == doctest::Approx(0.5));
  const auto mz = minorization_check(m);
  CHECK(mz.constant == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mz.ok);
}

TEST_CASE("minorization and envelopes on random models") {
  CHECK(minorization_check(imh_models::two_point()).ok);
  CHECK(minorization_check(imh_models::two_point()).constant >= 0.75 - 1e-12);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(stream_seed(3, s));
    const auto m = imh_models::random_finite(2 + s % 12, rng);
    CHECK(minorization_check(m).ok);
    const auto f = centered(m.pi(), models::random_function(m.support().points.size(), rng));
    CHECK(prop5_bounds(m, f).ok);
    for (std::size_t x = 0; x < m.support().points.size(); ++x) {
      const auto b = rho_and_bounds(m, x);
      CHECK(b.lower <= b.rho + 1e-12);
      CHECK(b.rho <= b.upper + 1e-12);
    }
  }
}

TEST_CASE("simulation") {
  const auto m = imh_models::two_point();
  const auto a = imh_simulate(m, 5000, 12);
  const auto b = imh_simulate(m, 5000, 12);
  CHECK(a == b);
  // every proposal accepted when w is constant: path is an iid draw sequence
  const auto f = flat(3);
  Rng r1(5), r2(5);
  const auto path = imh_simulate(f, 200, r1);
  std::vector<double> iid;
  iid.push_back(f.propose(r2));
  for (int i = 1; i < 200; ++i) {
    iid.push_back(f.propose(r2));
    uniform_open(r2);
  }
  CHECK(path == iid);
  CHECK_THROWS(imh_simulate(m, 0, 1));
}

TEST_CASE("classification from moments") {
  CHECK(classify(ImhMoments{1.0, 1.0, 2.0}).verdict == Verdict::Finite);
  CHECK(classify(ImhMoments{1.0, 1.0, kInfinity}).verdict == Verdict::Infinite);
  CHECK(classify(ImhMoments{1.0, kInfinity, kInfinity}).verdict == Verdict::Infinite);
  CHECK(classify(ImhMoments{kInfinity, kInfinity, kInfinity}).verdict == Verdict::Infinite);
  CHECK(classify(imh_models::two_point(), StateFunction{0.25, -0.75}).verdict == Verdict::Finite);

  const auto pl = imh_models::power_law_discrete(4.0);
  const auto v = classify_power(pl, 1.0);
  CHECK_FALSE(v.f_in_L2_pi);
  CHECK(v.verdict == Verdict::Infinite);
  const auto v2 = classify_power(pl, 0.75);
  CHECK(v2.f_in_L2_pi);
  CHECK_FALSE(v2.wf_in_L2_mu);
  CHECK(classify_power(pl, 0.25).verdict == Verdict::Finite);
  CHECK(classify_power(pl, 0.0).verdict == Verdict::Finite);
  const auto par = imh_models::pareto_target_exponential_proposal(3.0);
  CHECK(classify_power(par, 1.0).verdict == Verdict::Infinite);
  CHECK(classify_power(par, 0.0).verdict == Verdict::Finite);
  CHECK_THROWS_AS(classify(pl, StateFunction{1.0, 2.0}, std::nullopt), MissingMoments);
  CHECK_THROWS_AS(imh_models::power_law_discrete(3.0), InvalidModel);
}

TEST_CASE("self-normalized importance sampling") {
  const auto m = imh_models::two_point();
  const std::vector<double> one = {1.0};
  CHECK(snis_estimate(one, m, [](double x) { return 10.0 * x + 3.0; }) == doctest::Approx(13.0));
  const std::vector<double> pts = {0.0, 1.0};
  // weights 1.5 and 0.5
  CHECK(snis_estimate(pts, m, [](double x) { return x; }) == doctest::Approx(0.25));
  const auto f = flat(3);
  const std::vector<double> s = {0.0, 1.0, 2.0, 2.0};
  CHECK(snis_estimate(s, f, [](double x) { return x; }) == doctest::Approx(1.25));
  CHECK_THROWS_AS(snis_estimate(std::vector<double>{}, m, [](double x) { return x; }), EmptyPath);
}
