#include "jumpvar/errors.hpp"
#include "jumpvar/jump_chain.hpp"
#include "jumpvar/models.hpp"
#include "jumpvar/sampling.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace jumpvar;

TEST_CASE("canonical decomposition of the two-state chain") {
  const auto d = decompose(models::two_state(0.3, 0.3));
  CHECK(d.rho()[0] == doctest::Approx(0.3));
  CHECK(d.rho()[1] == doctest::Approx(0.3));
  CHECK(d.jump_kernel()(0, 1) == doctest::Approx(1.0));
  CHECK(d.jump_kernel()(0, 0) == doctest::Approx(0.0));
  CHECK(d.jump_pi()[0] == doctest::Approx(0.5));
  CHECK(d.pi_rho() == doctest::Approx(0.3));
  CHECK((d.reassemble() - d.kernel().matrix()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zero-diagonal kernel is its own jump chain") {
  Rng rng(3);
  const auto k = models::random_zero_diagonal(6, rng);
  const auto d = decompose(k);
  CHECK((d.rho().array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK((d.jump_kernel().matrix() - k.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((d.jump_pi() - k.pi()).cwiseAbs().maxCoeff() < 1e-14);
  const auto f = models::random_function(6, rng);
  CHECK(variance_identity(d, f).residual < 1e-12);
}

TEST_CASE("absorbing states are rejected") {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, 1.0;
  Vector pi(2);
  pi << 0.5, 0.5;
  const FiniteReversibleKernel k({"a", "b"}, m, pi);
  CHECK_THROWS_AS(decompose(k), AbsorbingState);
}

TEST_CASE("explicit decomposition must reassemble") {
  const auto k = models::two_state(0.3, 0.3);
  Vector rho(2);
  rho << 0.5, 0.5;
  Matrix flip(2, 2);
  flip << 0.0, 1.0, 1.0, 0.0;
  CHECK_THROWS(JumpDecomposition::from_parts(k, rho, flip));
  rho << 0.6, 0.6;
  Matrix half(2, 2);
  half << 0.5, 0.5, 0.5, 0.5;
  const auto d = JumpDecomposition::from_parts(k, rho, half);
  CHECK(d.pi_rho() == doctest::Approx(0.6));
}

TEST_CASE("path reconstruction") {
  JumpPath p{{0, 1}, {2, 1}};
  CHECK(reconstruct_path(p) == std::vector<std::size_t>{0, 0, 1});
  JumpPath q{{0, 1, 0}, {1, 3, 2}};
  CHECK(reconstruct_path(q) == std::vector<std::size_t>{0, 1, 1, 1, 0, 0});
  JumpPath ones{{2, 0, 1}, {1, 1, 1}};
  CHECK(reconstruct_path(ones) == ones.states);
  CHECK(q.total_time() == 6);
  std::ostringstream os;
  p.write_csv(os);
  CHECK(os.str() == "index,state,tau\n0,0,2\n1,1,1\n");
  JumpPath bad{{0}, {0}};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("geometric holding times") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) CHECK(sample_geometric(1.0, rng) == 1);
  const auto d = decompose(models::two_state(0.3, 0.3));
  const std::size_t n = 100000;
  const auto path = simulate_jump_path(d, n, 2024);
  double sum = 0.0, sum2 = 0.0;
  for (auto t : path.taus) {
    sum += static_cast<double>(t);
    sum2 += static_cast<double>(t) * static_cast<double>(t);
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0 / 0.3) <= 3.0 * se);
  // alternation of the flip jump chain
  for (std::size_t i = 1; i < 100; ++i) CHECK(path.states[i] != path.states[i - 1]);
}

TEST_CASE("jump paths are deterministic per seed") {
  Rng rng(5);
  const auto d = decompose(models::random_reversible(5, rng));
  const auto a = simulate_jump_path(d, 1000, 99);
  const auto b = simulate_jump_path(d, 1000, 99);
  CHECK(a.states == b.states);
  CHECK(a.taus == b.taus);
  const auto ones = decompose(models::random_zero_diagonal(4, rng));
  const auto c = simulate_jump_path(ones, 200, 1);
  for (auto t : c.taus) CHECK(t == 1);
}

TEST_CASE("variance identity") {
  const auto d = decompose(models::two_state(0.3, 0.3));
  const auto id = variance_identity(d, StateFunction{1.0, -1.0});
  CHECK(id.lhs == doctest::Approx(7.0 / 3.0).epsilon(1e-13));
  CHECK(id.pi_f2_over_rho == doctest::Approx(10.0 / 3.0).epsilon(1e-13));
  CHECK(id.pi_f2 == doctest::Approx(1.0));
  CHECK(std::abs(id.jump_avar) < 1e-12);
  CHECK(id.residual <= 1e-12);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(stream_seed(1, s));
    const auto k = models::random_reversible(2 + s % 19, rng);
    CHECK(theorem1_residual(k, models::random_function(k.size(), rng)) <= 1e-10);
  }
}

TEST_CASE("jump chain inherits the spectral gap") {
  const auto g = gap_inheritance_check(models::two_state(0.3, 0.3));
  CHECK(g.gap_kernel == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(g.gap_jump == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(g.ok);
  Rng rng(8);
  const auto z = gap_inheritance_check(models::random_zero_diagonal(5, rng));
  CHECK(z.gap_kernel == doctest::Approx(z.gap_jump).epsilon(1e-12));

  // birth-death: vanishing rho drags Gap(P) down while the walk keeps its gap
  const auto inv = models::birth_death(0.25, models::inverse_rho, 30);
  const auto half = models::birth_death(0.25, [](std::size_t) { return 0.5; }, 30);
  const auto gi = gap_inheritance_check(inv.walk);
  const auto gh = gap_inheritance_check(half.walk);
  CHECK(gi.ok);
  CHECK(gh.ok);
  CHECK(gi.gap_kernel == doctest::Approx(0.005745183505455498).epsilon(1e-9));
  CHECK(gh.gap_kernel == doctest::Approx(0.06935938699561295).epsilon(1e-9));
  CHECK(gi.gap_jump == doctest::Approx(0.13871877399122579).epsilon(1e-9));
  CHECK(gh.gap_jump == doctest::Approx(0.13871877399122579).epsilon(1e-9));
  double prev = 1.0;
  for (std::size_t n : {10, 20, 40, 80}) {
    const auto g2 = gap_inheritance_check(models::birth_death(0.25, models::inverse_rho, n).walk);
    CHECK(g2.gap_kernel < prev);
    CHECK(g2.gap_jump > 0.1);
    prev = g2.gap_kernel;
  }
}

TEST_CASE("birth-death jump law is geometric") {
  const auto bd = models::birth_death(0.25, models::inverse_rho, 30);
  const double r = 1.0 / 3.0;
  Vector geo(30);
  for (int i = 0; i < 30; ++i) geo[i] = (1.0 - r) * std::pow(r, i);
  geo /= geo.sum();
  CHECK(0.5 * (bd.walk.jump_pi() - geo).cwiseAbs().sum() <= 1e-10);
}

TEST_CASE("weighted estimators") {
  JumpPath p{{0, 1}, {3, 1}};
  const std::vector<double> rho = {0.25, 1.0}, f = {1.0, 0.0};
  CHECK(geo_estimate(p, rho, f) == doctest::Approx(0.75));
  CHECK(rb_estimate(p, rho, f) == doctest::Approx(0.8));
  const std::vector<double> ones = {1.0, 1.0};
  JumpPath q{{0, 1, 1}, {1, 1, 1}};
  CHECK(geo_estimate(q, ones, f) == doctest::Approx(1.0 / 3.0));
  CHECK(rb_estimate(q, ones, f) == doctest::Approx(1.0 / 3.0));
  JumpPath empty;
  CHECK_THROWS_AS(geo_estimate(empty, rho, f), EmptyPath);
  CHECK_THROWS_AS(rb_estimate(empty, rho, f), EmptyPath);
}

TEST_CASE("long two-state path: both estimators near pi(f)") {
  const auto d = decompose(models::two_state(0.3, 0.3));
  const std::size_t n = 200000;
  const auto path = simulate_jump_path(d, n, 77);
  const std::vector<double> rho = {0.3, 0.3}, f = {1.0, -1.0};
  CHECK(std::abs(geo_estimate(path, rho, f)) <= 3.0 * std::sqrt(0.7 / n));
  CHECK(std::abs(rb_estimate(path, rho, f)) <= 1.0 / n + 1e-12);
}

TEST_CASE("exact estimator variances") {
  const auto ev = estimator_variances_exact(models::two_state(0.3, 0.3), StateFunction{1.0, -1.0});
  CHECK(std::abs(ev.sigma2_rb) < 1e-12);
  CHECK(ev.sigma2_geo == doctest::Approx(0.7).epsilon(1e-13));
  Rng rng(4);
  const auto z = models::random_zero_diagonal(5, rng);
  const auto f = models::random_function(5, rng);
  const auto ez = estimator_variances_exact(z, f);
  CHECK(ez.sigma2_rb == doctest::Approx(asymptotic_variance_exact(z, f)).epsilon(1e-10));
  CHECK(ez.sigma2_geo == doctest::Approx(asymptotic_variance_exact(z, f)).epsilon(1e-10));
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng r2(stream_seed(2, s));
    const auto k = models::random_reversible(3 + s % 10, r2);
    const auto g = models::random_function(k.size(), r2);
    const auto d = decompose(k);
    const auto e = estimator_variances_exact(d, g);
    CHECK(std::abs(e.sigma2_geo - d.pi_rho() * asymptotic_variance_exact(k, g)) <= 1e-10 * std::max(1.0, e.sigma2_geo));
    if (e.positive_jump_condition) CHECK(e.sigma2_geo <= 2.0 * e.sigma2_rb + 1e-10);
  }
}
