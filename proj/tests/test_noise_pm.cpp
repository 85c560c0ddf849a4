#include "jumpvar/errors.hpp"
#include "jumpvar/models.hpp"
#include "jumpvar/noise.hpp"
#include "jumpvar/pseudo_marginal.hpp"

#include <doctest.h>

#include <cmath>

using namespace jumpvar;

TEST_CASE("noise families: mean one and second moments") {
  const auto abc = NoiseFamily::abc({0.2});
  const auto a = *abc.atoms_at(0);
  REQUIRE(a.size() == 2);
  CHECK(a[0].u == 0.0);
  CHECK(a[0].p == doctest::Approx(0.8));
  CHECK(a[1].u == doctest::Approx(5.0));
  CHECK(a[1].p == doctest::Approx(0.2));
  CHECK(atoms::mean(a) == doctest::Approx(1.0));
  CHECK(abc.second_moment(0) == doctest::Approx(5.0));

  CHECK(pm_models::two_atom_noise().s_bar(1) == doctest::Approx(1.25));
  CHECK(NoiseFamily::lognormal_mean1(0.5).second_moment(3) == doctest::Approx(std::exp(0.5)));
  const auto avg = NoiseFamily::averaged(pm_models::two_atom_noise(), 2);
  const auto aa = *avg.atoms_at(0);
  CHECK(atoms::mean(aa) == doctest::Approx(1.0));
  CHECK(atoms::second_moment(aa) == doctest::Approx(1.0 + 0.25 / 2.0));
  CHECK(avg.s_bar(1) == doctest::Approx(1.125));

  CHECK_THROWS_AS(NoiseFamily::atoms({{0.5, 0.5}, {1.0, 0.5}}), InvalidModel);
  CHECK_THROWS_AS(NoiseFamily::atoms({{1.0, 0.5}}), InvalidModel);
  CHECK_THROWS_AS(NoiseFamily::abc({0.0}), InvalidModel);
  CHECK_THROWS_AS(NoiseFamily::lognormal_mean1(-1.0), InvalidModel);

  // sampled families: mean one within 4 standard errors
  for (const auto& q : {NoiseFamily::lognormal_mean1(0.5), NoiseFamily::lognormal_mean1(1.0),
                        NoiseFamily::averaged(NoiseFamily::lognormal_mean1(1.0), 3), abc,
                        pm_models::two_atom_noise()}) {
    Rng rng(21);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = q.sample(0, rng);
      s += u;
      s2 += u * u;
    }
    const double mean = s / n;
    CHECK(std::abs(mean - 1.0) <= 4.0 * std::sqrt((s2 / n - mean * mean) / n));
  }
}

TEST_CASE("noise json") {
  const auto j = nlohmann::json::parse(R"({"kind": "averaged", "base": {"kind": "atoms", "atoms": [[0.5, 0.5], [1.5, 0.5]]}, "N": 2})");
  const auto q = NoiseFamily::from_json(j);
  CHECK(q.s_bar(1) == doctest::Approx(1.125));
  CHECK(NoiseFamily::from_json(q.to_json()).s_bar(1) == doctest::Approx(1.125));
  CHECK(NoiseFamily::from_json(nlohmann::json::parse(R"({"kind": "abc", "h": 0.2})")).second_moment(0) ==
        doctest::Approx(5.0));
  CHECK(NoiseFamily::from_json(nlohmann::json::parse(R"({"kind": "lognormal_mean1", "sigma2": 2})")).s_bar(1) ==
        doctest::Approx(std::exp(2.0)));
  CHECK_THROWS_AS(NoiseFamily::from_json(nlohmann::json::parse(R"({"kind": "gamma"})")), InvalidConfig);
}

TEST_CASE("rho_U closed forms against numerical integration") {
  // frozen values from independent quadrature of the lognormal density
  const auto q = NoiseFamily::lognormal_mean1(0.5);
  CHECK(q.rho_u(0.5) == doctest::Approx(0.916839236090771).epsilon(1e-10));
  CHECK(q.rho_u(1.0) == doctest::Approx(0.723673609831773).epsilon(1e-10));
  CHECK(q.rho_u(3.0) == doctest::Approx(0.323230156923607).epsilon(1e-10));
  CHECK(q.q_id_rho_u() == doctest::Approx(0.617075077451819).epsilon(1e-10));
  const auto r = NoiseFamily::lognormal_mean1(2.0);
  CHECK(r.rho_u(0.5) == doctest::Approx(0.645327497299886).epsilon(1e-10));
  CHECK(r.rho_u(1.0) == doctest::Approx(0.479500122188005).epsilon(1e-10));
  CHECK(r.rho_u(3.0) == doctest::Approx(0.244843852980647).epsilon(1e-10));
  CHECK(r.q_id_rho_u() == doctest::Approx(0.317310507862556).epsilon(1e-10));
}

TEST_CASE("rho_U profile") {
  for (double u : {0.25, 1.0, 4.0}) {
    const auto p = rho_u_profile(NoiseFamily::point_mass(), u);
    CHECK(p.value == doctest::Approx(std::min(1.0, 1.0 / u)));
    CHECK(p.ok);
  }
  const auto t = rho_u_profile(pm_models::two_atom_noise(), 1.0);
  CHECK(t.value == doctest::Approx(0.75));
  CHECK(t.lower == doctest::Approx(1.0 / 2.25));
  CHECK(t.upper == doctest::Approx(1.0));
  CHECK(t.q_id_rho_u >= 0.4);
  CHECK(t.ok);
  const auto abc = NoiseFamily::abc({0.2});
  CHECK(abc.rho_u(2.0) == doctest::Approx(0.2));
  CHECK(abc.rho_u(10.0) == doctest::Approx(0.2 * 0.5));
  CHECK_THROWS_AS(NoiseFamily::abc({0.2, 0.5}).rho_u(1.0), UnevaluableNoise);
  const auto avg = NoiseFamily::averaged(NoiseFamily::lognormal_mean1(1.0), 2);
  CHECK_FALSE(avg.evaluable());
  Rng rng(3);
  CHECK(rho_u_profile_mc(avg, 1.0, 100000, rng).ok);
}

TEST_CASE("mean-one sandwich") {
  const auto one = lemma2_bounds(mean_one_atoms({{1.0, 1.0}}), 2.0);
  CHECK(one.value == doctest::Approx(0.5));
  CHECK(one.lower == doctest::Approx(1.0 / 3.0));
  CHECK(one.upper == doctest::Approx(0.5));
  CHECK(one.ok);
  const auto two = lemma2_bounds(mean_one_atoms({{0.0, 0.5}, {2.0, 0.5}}), 1.0);
  CHECK(two.value == doctest::Approx(0.5));
  CHECK(two.lower == doctest::Approx(1.0 / 3.0));
  CHECK(two.upper == doctest::Approx(1.0));
  CHECK(two.ok);
  const auto q = NoiseFamily::lognormal_mean1(0.5);
  const auto law = mean_one_sampled([q](Rng& r) { return q.sample(0, r); }, std::exp(0.5));
  Rng rng(9);
  const auto mc = lemma2_bounds_mc(law, 1.0, 200000, rng);
  CHECK(mc.ok);
  CHECK(mc.stderr > 0.0);
  CHECK(std::abs(mc.value - 0.723673609831773) <= 4.0 * mc.stderr);
}

TEST_CASE("acceptance probabilities") {
  auto a = acceptance_probabilities(2.0, 1.0, 0.5);
  CHECK(a.alpha == doctest::Approx(1.0));
  CHECK(a.alpha_r == doctest::Approx(0.5));
  a = acceptance_probabilities(1.5, 1.0, 2.0);
  CHECK(a.alpha == 1.0);
  CHECK(a.alpha_r == 1.0);
  a = acceptance_probabilities(0.4, 1.0, 1.0);
  CHECK(a.alpha == doctest::Approx(0.4));
  CHECK(a.alpha_r == doctest::Approx(0.4));
  CHECK_THROWS_AS(acceptance_probabilities(1.0, 0.0, 1.0), ZeroNoiseCurrent);
}

TEST_CASE("pseudo-marginal steps") {
  const PmModel exact{pm_models::two_state_marginal(), NoiseFamily::point_mass()};
  Rng a(5), b(5);
  PmState s = pm_initial_state(exact, a);
  std::size_t x = exact.marginal.draw_initial(b);
  CHECK(s.x == x);
  for (int i = 0; i < 5000; ++i) {
    const auto t = pm_step(exact, s, a);
    CHECK(t.alpha_r == doctest::Approx(t.alpha));
    s = t.state;
    x = marginal_step(exact.marginal, x, b);
    CHECK(s.x == x);
    CHECK(s.u == 1.0);
  }

  const PmModel abc = pm_models::abc_model(Vector::Constant(3, 1.0 / 3.0), {0.2, 0.5, 1.0});
  CHECK_THROWS_AS(pm_step(abc, PmState{0, 0.0}, a), ZeroNoiseCurrent);
  CHECK_THROWS_AS(aux_r_step(abc, PmState{0, 0.0}, a), ZeroNoiseCurrent);
  Rng c(8);
  const auto path = pm_simulate(abc, 20000, c);
  for (const auto& p : path) CHECK(p.u > 0.0);
  Rng d(8);
  const auto again = pm_simulate(abc, 20000, d);
  bool same = true;
  for (std::size_t i = 0; i < path.size(); ++i) same = same && path[i].x == again[i].x && path[i].u == again[i].u;
  CHECK(same);
}

TEST_CASE("product chains") {
  const PmModel m{pm_models::two_state_marginal(), pm_models::two_atom_noise()};
  const auto p = pm_product_kernel(m);
  const auto r = aux_r_product_kernel(m);
  CHECK(p.size() == 4);
  // pi(x, u) = pibar(x) Q(u) u
  CHECK(p.pi()[0] == doctest::Approx(0.5 * 0.5 * 0.5));
  CHECK(p.pi()[1] == doctest::Approx(0.5 * 0.5 * 1.5));
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(stream_seed(4, s));
    const auto model = pm_models::random_exact(2 + s % 5, rng, s % 2 == 1);
    const auto pk = pm_product_kernel(model);
    const auto rk = aux_r_product_kernel(model);
    const auto f = models::random_function(pk.size(), rng);
    CHECK(asymptotic_variance_exact(pk, f) <= asymptotic_variance_exact(rk, f) + 1e-12);
    // marginal of pi in x is pibar
    const auto space = product_space(model);
    Vector marg = Vector::Zero(static_cast<Eigen::Index>(model.marginal.size()));
    for (std::size_t i = 0; i < space.states.size(); ++i) marg[static_cast<Eigen::Index>(space.states[i].x)] += space.pi[static_cast<Eigen::Index>(i)];
    CHECK((marg - model.marginal.pi_bar()).cwiseAbs().maxCoeff() < 1e-12);
  }
  const StateFunction f{1.0, -1.0, 0.5, 2.0};
  CHECK(asymptotic_variance_exact(p, f) <= asymptotic_variance_exact(r, f) + 1e-12);
}

TEST_CASE("rho_R sandwiches") {
  const PmModel one{pm_models::two_state_marginal(), NoiseFamily::point_mass()};
  const auto r1 = rho_r_bounds_check(one, {0, 1.0});
  CHECK(r1.rho_r == doctest::Approx(r1.rho_bar));
  CHECK(r1.lower_sbar == doctest::Approx(r1.rho_bar / 2.0));
  CHECK(r1.upper == doctest::Approx(r1.rho_bar));
  CHECK(r1.rho_rx == doctest::Approx(r1.rho_bar));
  CHECK(r1.ok);

  const PmModel two{pm_models::two_state_marginal(), pm_models::two_atom_noise()};
  for (double u : {0.5, 1.5}) {
    const auto r = rho_r_bounds_check(two, {1, u});
    CHECK(r.ok);
    CHECK(r.lower_sbar < r.rho_r);
    CHECK(r.rho_r <= r.upper + 1e-12);
    CHECK(r.rho_rx_lower < r.rho_rx);
    CHECK(r.rho_rx < r.rho_rx_upper);
    CHECK(r.rho_r == doctest::Approx(r.rho_bar * two.noise.rho_u(u)).epsilon(1e-12));
  }
  // hand enumeration: rhobar = 1 (r = 1 everywhere), u = 0.5 -> E[1 ^ 2V] = 1
  CHECK(rho_r_exact(two, {0, 0.5}) == doctest::Approx(1.0));
  CHECK(rho_r_exact(two, {0, 1.5}) == doctest::Approx(0.5 * (1.0 / 3.0) + 0.5));

  const PmModel abc = pm_models::abc_model(Vector::Constant(3, 1.0 / 3.0), {0.2, 0.5, 1.0});
  for (const auto& s : product_space(abc).states) CHECK(rho_r_bounds_check(abc, s).ok);
  CHECK_THROWS_AS(rho_r_bounds_check(abc, {0, 0.0}), ZeroNoiseCurrent);
  const PmModel logn{pm_models::two_state_marginal(), NoiseFamily::lognormal_mean1(1.0)};
  CHECK_THROWS_AS(rho_r_bounds_check(logn, {0, 1.0}), NotExactMode);
}

TEST_CASE("independence pseudo-marginal classification") {
  Vector mu(3);
  mu << 0.5, 0.3, 0.2;
  Vector pi(3);
  pi << 0.2, 0.3, 0.5;
  const auto marginal = MarginalModel::independent(default_labels(3), pi, mu);
  const StateFunction f{1.0, 0.0, -1.0};
  const PmModel one{marginal, NoiseFamily::point_mass()};
  const auto c1 = classify_pm_imh(one, f);
  CHECK(c1.verdict == Verdict::Finite);
  // with noise == 1 the integral is pi(w fbar^2) of the marginal sampler
  const double m = 0.2 - 0.5;
  double expected = 0.0;
  const double fx[3] = {1.0, 0.0, -1.0};
  for (int i = 0; i < 3; ++i) expected += pi[i] / mu[i] * (fx[i] - m) * (fx[i] - m) * pi[i];
  CHECK(c1.integral == doctest::Approx(expected).epsilon(1e-13));
  // general f(x, u) route agrees with the x-only reduction
  const PmModel two{marginal, pm_models::two_atom_noise()};
  const auto cx = classify_pm_imh(two, f);
  const auto cg = classify_pm_imh(two, [&](std::size_t x, double) { return f[x]; });
  CHECK(cx.integral == doctest::Approx(cg.integral).epsilon(1e-12));
  CHECK(cx.integral == doctest::Approx(1.25 * expected).epsilon(1e-12));

  const PmModel logn{marginal, NoiseFamily::lognormal_mean1(1.0)};
  CHECK_THROWS_AS(classify_pm_imh(logn, [](std::size_t, double u) { return u; }), MissingMoments);
  CHECK(classify_pm_imh(logn, [](std::size_t, double u) { return u; }, PmMoments{1.0, kInfinity}).verdict ==
        Verdict::Infinite);
  CHECK_THROWS_AS(classify_pm_imh(PmModel{pm_models::two_state_marginal(), NoiseFamily::point_mass()}, StateFunction{1.0, -1.0}),
                  InvalidModel);
}

TEST_CASE("averaging leaves verdicts unchanged") {
  for (double c : {0.25, 0.5, 0.75, 1.0}) {
    for (double gamma : {0.0, 1.0, 2.0}) {
      PowerLawPmModel m{4.0, 1.0, gamma, 1};
      const auto v1 = classify_pm_imh_power(m, c).verdict;
      m.n_average = 2;
      const auto v2 = classify_pm_imh_power(m, c).verdict;
      m.n_average = 10;
      const auto v10 = classify_pm_imh_power(m, c).verdict;
      CHECK(v1 == v2);
      CHECK(v1 == v10);
    }
  }
  // analytic verdicts: pibar ~ x^{-3}, w ~ x
  CHECK(classify_pm_imh_power({4.0, 1.0, 0.0, 1}, 0.25).verdict == Verdict::Finite);
  CHECK(classify_pm_imh_power({4.0, 1.0, 0.0, 1}, 0.75).verdict == Verdict::Infinite);
  CHECK(classify_pm_imh_power({4.0, 1.0, 1.0, 1}, 0.25).verdict == Verdict::Infinite);
  CHECK_THROWS_AS(classify_pm_imh_power({2.0, 1.0, 0.0, 1}, 0.25), InvalidModel);
}

TEST_CASE("sufficiency reports") {
  const StateFunction fx{1.0, -1.0};
  const PmModel one{pm_models::two_state_marginal(), NoiseFamily::point_mass()};
  const auto r1 = sufficiency_report(one, fx);
  CHECK(r1.marginal_route.applies);
  CHECK(r1.marginal_route.concludes_finite);
  CHECK(*r1.marginal_route.criterion == doctest::Approx(1.0));

  const PmModel two{pm_models::two_state_marginal(), pm_models::two_atom_noise()};
  const auto r2 = sufficiency_report(two, fx);
  CHECK(r2.marginal_route.applies);
  CHECK(r2.marginal_route.concludes_finite);
  CHECK(*r2.marginal_route.criterion == doctest::Approx(1.25));
  REQUIRE(r2.product_chain_avar);
  CHECK(std::isfinite(*r2.product_chain_avar));

  const PmModel logn{pm_models::two_state_marginal(), NoiseFamily::lognormal_mean1(1.0)};
  const auto r3 = sufficiency_report(logn, fx);
  CHECK(r3.jump_route_x_only.applies);
  CHECK(r3.jump_route_x_only.concludes_finite);
  CHECK(*r3.jump_route_x_only.criterion == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
  CHECK_FALSE(r3.product_chain_avar);

  const PmModel abc = pm_models::abc_model(Vector::Constant(2, 0.5), {0.2, 0.5});
  const auto r4 = sufficiency_report(abc, fx);
  CHECK_FALSE(r4.jump_route.applies);
  CHECK(r4.marginal_route.applies);
}
