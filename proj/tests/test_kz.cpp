#include <doctest.h>

#include <cmath>
#include <random>

#include "core/errors.hpp"
#include "core/kz.hpp"

using namespace sgbench;

namespace {

// U(L, t_f) = g(ln t_f - mu ln L) with g a smooth sigmoid, plus noise.
std::vector<BinderPoint> planted(double mu, double noise, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<BinderPoint> pts;
  for (int L : {4, 6, 8, 10, 12}) {
    const double centre = mu * std::log(double(L));
    for (int k = -8; k <= 8; ++k) {
      const double ln_tf = std::log(8.0) * 5.0 + 0.35 * k + (centre - std::log(8.0) * 5.0) * 0.5;
      const double x = ln_tf - centre;
      const double u = 0.5 + 0.45 * std::tanh(0.8 * x);
      pts.push_back({L, std::exp(ln_tf), u + noise * eps(gen), noise, 100});
    }
  }
  return pts;
}

}  // namespace

TEST_CASE("overlaps") {
  const SpinConfig a{1, 1, -1, -1}, b{1, -1, -1, 1};
  CHECK(overlap(a, a) == 1.0);
  CHECK(overlap(a, b) == 0.0);
  CHECK_THROWS_AS(overlap(a, SpinConfig{1, 1}), InvalidInput);
  const std::vector<SpinConfig> s{a, b, a, b, a};
  CHECK(overlaps(s, Pairing::AllPairs, 0).size() == 10);
  const auto d = overlaps(s, Pairing::DisjointRandom, 7);
  CHECK(d.size() == 2);
  CHECK(d == overlaps(s, Pairing::DisjointRandom, 7));
  CHECK(parse_pairing(to_string(Pairing::AllPairs)) == Pairing::AllPairs);
  CHECK_THROWS_AS(parse_pairing("some"), InvalidInput);
}

TEST_CASE("binder cumulant limits") {
  const std::vector<double> mass{1.0, -1.0, 1.0, 1.0, -1.0};
  CHECK(binder_cumulant(mass) == doctest::Approx(1.0).epsilon(1e-14));
  const std::vector<double> half{0.0, 1.0, 0.0, -1.0};
  CHECK(binder_cumulant(half) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(binder_cumulant(std::vector<double>{0.0, 0.0}), InvalidInput);
  CHECK_THROWS_AS(binder_cumulant(std::vector<double>{}), InvalidInput);

  // Gaussian q gives U -> 0
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n01;
  std::vector<double> g(200000);
  for (auto& x : g) x = n01(gen);
  CHECK(std::abs(binder_cumulant(g)) < 0.02);
}

TEST_CASE("binder estimate over instances") {
  const std::vector<std::vector<double>> q{{1.0, -1.0}, {0.0, 1.0, 0.0, -1.0}, {0.0, 0.0}};
  const auto e = binder(q);
  CHECK(e.skipped == 1);
  REQUIRE(e.per_instance.size() == 2);
  CHECK(e.U == doctest::Approx(0.75));
  const auto pooled = binder(q, true);
  CHECK(pooled.U == doctest::Approx(binder_cumulant(std::vector<double>{1, -1, 0, 1, 0, -1, 0, 0})));

  const auto p = binder_point(6, 2.0, q, 100, 3);
  CHECK(p.L == 6);
  CHECK(p.t_f == 2.0);
  CHECK(p.U == doctest::Approx(0.75));
  CHECK(p.sigma_U > 0.0);
  CHECK(p.n_pairs == 8);
  const auto same = binder_point(6, 2.0, {{1.0, -1.0}, {1.0, 1.0}}, 100, 3);
  CHECK(same.sigma_U == doctest::Approx(0.0));
}

TEST_CASE("collapse recovers a planted exponent") {
  const auto grid = linear_grid(2.0, 8.0, 61);
  CHECK(grid.size() == 61);
  CHECK(grid[1] - grid[0] == doctest::Approx(0.1));
  const double step = grid[1] - grid[0];
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const auto pts = planted(5.0, 0.005, rep);
    CollapseOptions opt;
    opt.seed = rep;
    const auto r = collapse(pts, grid, opt);
    CHECK(std::abs(r.mu - 5.0) <= step);
    CHECK(r.sigma_mu >= 0.0);
    CHECK(r.points.size() == pts.size());
    CHECK(r.scan.size() == grid.size());
  }
  const auto clean = planted(5.0, 0.0, 0);
  CHECK(collapse_quality(clean, 5.0) < collapse_quality(clean, 4.0));
  CHECK(collapse_quality(clean, 5.0) < collapse_quality(clean, 6.0));
}

TEST_CASE("collapse input checks") {
  std::vector<BinderPoint> two_sizes;
  for (int L : {4, 6})
    for (int k = 0; k < 5; ++k) two_sizes.push_back({L, 1.0 + k, 0.5, 0.01, 10});
  const auto grid = linear_grid(0.0, 2.0, 5);
  CHECK_THROWS_AS(collapse(two_sizes, grid), InvalidInput);
  CHECK_THROWS_AS(linear_grid(1.0, 0.0, 5), InvalidInput);
}
