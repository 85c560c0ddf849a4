#include "jumpvar/errors.hpp"
#include "jumpvar/finite_chain.hpp"
#include "jumpvar/models.hpp"

#include <doctest.h>

#include <cmath>

using namespace jumpvar;

namespace {

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("stationary distribution of two-state chains") {
  auto p = stationary_distribution(m2(0.7, 0.3, 0.3, 0.7));
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));
  p = stationary_distribution(m2(0.7, 0.3, 0.1, 0.9));
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("reducible chains are rejected") {
  Matrix m = Matrix::Identity(4, 4) * 0.5;
  m(0, 1) = 0.5;
  m(1, 0) = 0.5;
  m(2, 3) = 0.5;
  m(3, 2) = 0.5;
  CHECK_FALSE(is_irreducible(m));
  CHECK_THROWS_AS(stationary_distribution(m), ReducibleChain);
  CHECK_THROWS_AS(FiniteReversibleKernel::from_matrix(m), ReducibleChain);
}

TEST_CASE("kernel validation") {
  CHECK_THROWS_AS(FiniteReversibleKernel::from_matrix(m2(0.7, 0.4, 0.3, 0.7)), InvalidKernel);
  CHECK_THROWS_AS(FiniteReversibleKernel::from_matrix(m2(1.2, -0.2, 0.3, 0.7)), InvalidKernel);
  Vector pi(2);
  pi << 0.3, 0.7;
  // stochastic but pi is not its invariant law
  CHECK_THROWS(FiniteReversibleKernel({"a", "b"}, m2(0.7, 0.3, 0.3, 0.7), pi));
  Matrix rect(2, 3);
  rect.setConstant(1.0 / 3.0);
  CHECK_THROWS_AS(FiniteReversibleKernel::from_matrix(rect), DimensionMismatch);
  // non-reversible cycle
  Matrix cyc = Matrix::Zero(3, 3);
  cyc(0, 1) = cyc(1, 2) = cyc(2, 0) = 1.0;
  CHECK_THROWS(FiniteReversibleKernel::from_matrix(cyc));
}

TEST_CASE("json round trip") {
  const auto k = models::two_state(0.3, 0.1);
  const auto back = FiniteReversibleKernel::from_json(k.to_json());
  CHECK((back.matrix() - k.matrix()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.pi() - k.pi()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(back.states() == k.states());
  CHECK_THROWS_AS(FiniteReversibleKernel::from_json(nlohmann::json{{"states", {"a"}}}), InvalidConfig);
}

TEST_CASE("dirichlet form") {
  const auto k = models::two_state(0.3, 0.3);
  CHECK(dirichlet_form(k, StateFunction{2.0, 2.0}) == doctest::Approx(0.0));
  CHECK(dirichlet_form(k, StateFunction{1.0, -1.0}) == doctest::Approx(0.6).epsilon(1e-14));
  Vector pi(3);
  pi << 0.2, 0.5, 0.3;
  const auto iid = models::iid_kernel(pi);
  const StateFunction f = centered(pi, StateFunction{1.0, -2.0, 4.0});
  CHECK(dirichlet_form(iid, f) == doctest::Approx(variance(pi, f)).epsilon(1e-13));
}

TEST_CASE("spectral gap") {
  CHECK(spectral_gap(models::two_state(0.3, 0.3)).gap == doctest::Approx(0.6).epsilon(1e-13));
  Vector pi(3);
  pi << 0.2, 0.5, 0.3;
  CHECK(spectral_gap(models::iid_kernel(pi)).gap == doctest::Approx(1.0).epsilon(1e-13));
  const auto flip = spectral_gap(models::two_state(1.0, 1.0));
  CHECK(flip.gap == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(flip.min_eigenvalue == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("asymptotic variance, spectral and variational") {
  const auto k = models::two_state(0.3, 0.3);
  CHECK(asymptotic_variance_exact(k, StateFunction{1.0, 1.0}) == doctest::Approx(0.0));
  CHECK(asymptotic_variance_exact(k, StateFunction{1.0, -1.0}) == doctest::Approx(7.0 / 3.0).epsilon(1e-13));
  CHECK(variational_avar(k, StateFunction{1.0, -1.0}) == doctest::Approx(7.0 / 3.0).epsilon(1e-13));
  CHECK(variational_avar(k, StateFunction{0.0, 0.0}) == doctest::Approx(0.0));
  // uncentered input is centered internally
  CHECK(asymptotic_variance_exact(k, StateFunction{3.0, 1.0}) == doctest::Approx(7.0 / 3.0).epsilon(1e-13));

  Vector pi(3);
  pi << 0.2, 0.5, 0.3;
  const StateFunction f{1.0, -2.0, 4.0};
  CHECK(asymptotic_variance_exact(models::iid_kernel(pi), f) == doctest::Approx(variance(pi, f)).epsilon(1e-13));

  // birth-death chain solved independently by a direct linear solve
  const auto bd = models::birth_death(0.25, models::inverse_rho, 30);
  Vector x(30);
  for (int i = 0; i < 30; ++i) x[i] = i + 1;
  CHECK(asymptotic_variance_exact(bd.kernel, StateFunction(x)) == doctest::Approx(63.395999849317086).epsilon(1e-9));
}

TEST_CASE("spectral and variational routes agree on random kernels") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(stream_seed(7, s));
    const auto k = models::random_reversible(10, rng);
    const auto f = models::random_function(10, rng);
    const double a = asymptotic_variance_exact(k, f);
    const double b = variational_avar(k, f);
    CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("period-two chain has zero asymptotic variance for the alternating function") {
  const auto flip = models::two_state(1.0, 1.0);
  CHECK(std::abs(asymptotic_variance_exact(flip, StateFunction{1.0, -1.0})) < 1e-12);
  CHECK(std::abs(variational_avar(flip, StateFunction{1.0, -1.0})) < 1e-12);
}

TEST_CASE("state functions reject non-finite values") {
  CHECK_THROWS_AS(StateFunction({1.0, std::nan("")}), InvalidModel);
  const auto k = models::two_state(0.3, 0.3);
  CHECK_THROWS_AS(asymptotic_variance_exact(k, StateFunction{1.0, 2.0, 3.0}), DimensionMismatch);
}
