#include "jumpvar/avar_estimators.hpp"
#include "jumpvar/errors.hpp"
#include "jumpvar/models.hpp"
#include "jumpvar/sampling.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace jumpvar;

TEST_CASE("batch means on deterministic paths") {
  std::vector<double> alt(10000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 == 0 ? 1.0 : -1.0;
  const auto e = batch_means(alt, 100);
  CHECK(e.value == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(e.n_batches == 100);
  CHECK(e.batch_len == 100);

  // hand computation: batch averages 1, 3, 5 with batch_len 2 -> 2 * var(1, 3, 5) = 8
  const auto h = batch_means(std::vector<double>{0, 2, 2, 4, 4, 6, 100}, 2);
  CHECK(h.value == doctest::Approx(8.0));
  CHECK(h.n_batches == 3);
  CHECK(h.stderr == doctest::Approx(8.0));

  CHECK_THROWS_AS(batch_means(std::vector<double>{}, 1), EmptyPath);
  CHECK_THROWS_AS(batch_means(std::vector<double>{1.0, 2.0, 3.0}, 2), PathTooShort);
  CHECK_THROWS_AS(batch_means(std::vector<double>{1.0, 2.0}, 0), InvalidConfig);
  CHECK(default_batch_len(1000000) == 1000);
  CHECK(default_batch_len(99) == 9);
}

TEST_CASE("shift invariance") {
  Rng rng(17);
  std::vector<double> v(40000), w(40000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = uniform_open(rng);
    w[i] = v[i] + 123.0;
  }
  CHECK(std::abs(batch_means(v, 200).value - batch_means(w, 200).value) <= 1e-10);
}

TEST_CASE("iid and two-state paths recover the exact value") {
  Rng rng(31);
  std::vector<double> iid(1000000);
  for (auto& x : iid) x = uniform_open(rng) < 0.5 ? 1.0 : -1.0;
  const auto e = batch_means(PathSample{iid, "iid", "sign", 31, 0});
  CHECK(e.batch_len == 1000);
  CHECK(std::abs(e.value - 1.0) <= 3.0 * e.stderr);

  const auto k = models::two_state(0.3, 0.3);
  Rng r2(32);
  const auto xs = simulate_chain(k, 1000000, r2);
  std::vector<double> f(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) f[i] = xs[i] == 0 ? 1.0 : -1.0;
  const auto t = batch_means(f, 1000);
  CHECK(std::abs(t.value - 7.0 / 3.0) <= 3.0 * t.stderr);
}

TEST_CASE("divergence scan") {
  const PathGenerator constant = [](std::size_t n, std::uint64_t) { return std::vector<double>(n, 2.0); };
  const auto s = divergence_scan(constant, {1000, 10000, 100000}, 5, 7);
  CHECK(s.monotone_fraction == 0.0);
  CHECK(s.seeds.size() == 5);
  CHECK(s.seeds[2] == stream_seed(7, 2));
  REQUIRE(s.estimates.size() == 5);
  CHECK(s.estimates[0].size() == 3);

  const PathGenerator iid = [](std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = uniform_open(rng);
    return v;
  };
  const auto a = divergence_scan(iid, {1000, 10000}, 4, 3);
  const auto b = divergence_scan(iid, {1000, 10000}, 4, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(a.estimates[i][j].value == b.estimates[i][j].value);
}

TEST_CASE("estimate csv rows") {
  std::ostringstream os;
  write_estimate_header(os);
  write_estimate_row(os, "two_state", "1,-1", 100, AvarEstimate{2.5, 10, 10, 0.5}, 9);
  CHECK(os.str() == "model,f,n,batch_len,value,stderr,seed\ntwo_state,\"1,-1\",100,10,2.5,0.5,9\n");
}
