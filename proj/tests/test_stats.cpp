#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/stats.hpp"

using namespace sgbench;

namespace {

BootstrapInput uniform_input(std::size_t instances, std::vector<GridPoint> grid, std::size_t k, std::size_t n,
                             std::size_t gauges = 4) {
  BootstrapInput in;
  in.grid = std::move(grid);
  in.counts.assign(instances, std::vector<std::vector<GaugeCount>>(in.grid.size(),
                                                                    std::vector<GaugeCount>(gauges, {k, n})));
  return in;
}

}  // namespace

TEST_CASE("weighted median") {
  const std::vector<double> v{3.0, 1.0, 2.0};
  CHECK(weighted_median(v, std::vector<double>{1, 1, 1}) == 2.0);
  CHECK(weighted_median(v, std::vector<double>{1, 0, 0}) == 3.0);
  CHECK(weighted_median(v, std::vector<double>{0.2, 0.5, 0.3}) == 1.0);
  const std::vector<double> with_inf{kNeverHit, 1.0, kNeverHit};
  CHECK(std::isinf(weighted_median(with_inf, std::vector<double>{1, 1, 1})));
  CHECK(weighted_median(with_inf, std::vector<double>{1, 2, 0}) == 1.0);
  CHECK_THROWS_AS(weighted_median(v, std::vector<double>{1, -1, 1}), InvalidInput);
  CHECK_THROWS_AS(weighted_median(v, std::vector<double>{0, 0, 0}), InvalidInput);
  CHECK_THROWS_AS(weighted_median(v, std::vector<double>{1, 1}), InvalidInput);
}

TEST_CASE("dirichlet weights") {
  Rng rng(5);
  double first = 0.0;
  for (int rep = 0; rep < 2000; ++rep) {
    const auto w = dirichlet_weights(rng, 5);
    double s = 0.0;
    for (const double x : w) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(s == doctest::Approx(1.0));
    first += w[0];
  }
  CHECK(first / 2000.0 == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("jeffreys posterior quantiles") {
  for (double u : {0.01, 0.2, 0.5, 0.77, 0.999}) {
    const double arcsine = std::pow(std::sin(std::numbers::pi * u / 2.0), 2.0);
    CHECK(jeffreys_quantile(u, 0, 0) == doctest::Approx(arcsine).epsilon(1e-10));
  }
  double prev = -1.0;
  for (std::size_t k = 0; k <= 20; ++k) {
    const double q = jeffreys_quantile(0.3, k, 20);
    CHECK(q > prev);
    prev = q;
  }
  CHECK(jeffreys_quantile(0.5, 500, 1000) == doctest::Approx(0.5));
  CHECK_THROWS_AS(jeffreys_quantile(0.5, 3, 2), InvalidInput);
  Rng rng(1);
  double mean = 0.0;
  for (int i = 0; i < 4000; ++i) mean += jeffreys_draw(rng, 30, 100);
  CHECK(mean / 4000.0 == doctest::Approx(30.5 / 101.0).epsilon(0.02));
}

TEST_CASE("bootstrap is reproducible and seed dependent") {
  auto in = uniform_input(6, {{1.0, 0.1}, {2.0, 0.1}, {4.0, 0.1}}, 0, 100);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t g = 0; g < 4; ++g) in.counts[i][j][g].k = 5 + 3 * i + 7 * j + g;
  const BootstrapConfig cfg{200, 42};
  const auto a = bootstrap_median_tte(in, cfg);
  const auto b = bootstrap_median_tte(in, cfg);
  REQUIRE(a.samples.size() == 200);
  CHECK(a.optimal_values() == b.optimal_values());
  for (std::size_t s = 0; s < 200; ++s) CHECK(a.samples[s].grid_index == b.samples[s].grid_index);
  CHECK(a.median == b.median);
  CHECK(a.std_error == b.std_error);
  const auto c = bootstrap_median_tte(in, {200, 43});
  CHECK(c.optimal_values() != a.optimal_values());
  CHECK(a.lo == doctest::Approx(a.median - 2.0 * a.std_error));
  CHECK(a.hi == doctest::Approx(a.median + 2.0 * a.std_error));
}

TEST_CASE("bootstrap with certain success collapses to the anneal time") {
  const auto in = uniform_input(5, {{2.0, 0.1}, {8.0, 0.1}}, 1000, 1000);
  const auto r = bootstrap_median_tte(in, {200, 3});
  CHECK(r.flagged == 0);
  for (const auto& s : r.samples) CHECK(std::abs(s.median_tte - 2.0) < 1e-3 * 2.0);
  CHECK(p_value_tf_min(r, 2.0) == 1.0);
  CHECK(gate_for(p_value_tf_min(r, 2.0)) == Gate::Excluded);
}

TEST_CASE("bootstrap flags samples with no finite median") {
  const auto in = uniform_input(3, {{1.0, 0.1}}, 0, 1000);
  const auto r = bootstrap_median_tte(in, {50, 1});
  // a Jeffreys draw is never exactly zero, so check the tail instead
  CHECK(r.median > 1e3);
  auto in2 = uniform_input(3, {{1.0, 0.1}}, 0, 1000);
  in2.correction = 0.5;
  const auto r2 = bootstrap_median_tte(in2, {50, 1});
  CHECK(r2.median == doctest::Approx(0.5 * r.median));
}

TEST_CASE("optimal grid point, ties and the pinned fraction") {
  // identical counts: ties go to the smaller t_f then the smaller J_p
  auto tie = uniform_input(4, {{2.0, 0.3}, {2.0, 0.1}, {4.0, 0.1}}, 1000, 1000);
  const auto rt = bootstrap_median_tte(tie, {20, 1});
  for (const auto& s : rt.samples) {
    CHECK(s.grid_index == 1);
    CHECK(s.j_p == 0.1);
  }

  // near-balanced counts so the argmin moves between samples
  auto in = uniform_input(8, {{1.0, 0.1}, {2.0, 0.1}}, 0, 200);
  for (std::size_t i = 0; i < 8; ++i) {
    for (auto& g : in.counts[i][0]) g.k = 20;
    for (auto& g : in.counts[i][1]) g.k = 38;
  }
  const auto r = bootstrap_median_tte(in, {200, 9});
  std::size_t pinned = 0;
  for (const auto& s : r.samples) pinned += s.t_f == 1.0;
  CHECK(p_value_tf_min(r, 1.0) == double(pinned) / 200.0);
  CHECK(pinned > 0);
  CHECK(pinned < 200);

  CHECK(gate_for(0.01) == Gate::Filled);
  CHECK(gate_for(0.05) == Gate::Open);
  CHECK(gate_for(0.19) == Gate::Open);
  CHECK(gate_for(0.2) == Gate::Excluded);
  CHECK(to_string(Gate::Open) == "open");
}

TEST_CASE("bootstrap input validation") {
  auto in = uniform_input(2, {{1.0, 0.1}}, 1, 10);
  CHECK_THROWS_AS(bootstrap_median_tte(in, {0, 1}), InvalidInput);
  in.counts[1].clear();
  CHECK_THROWS_AS(bootstrap_median_tte(in, {10, 1}), InvalidInput);
  BootstrapInput empty;
  CHECK_THROWS_AS(bootstrap_median_tte(empty, {10, 1}), InvalidInput);
}

TEST_CASE("instance bootstrap") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 100.0};
  const auto a = bootstrap_instance_median(v, {300, 5}, 0.0);
  const auto b = bootstrap_instance_median(v, {300, 5}, 0.0);
  CHECK(a.optimal_values() == b.optimal_values());
  CHECK(a.median >= 2.0);
  CHECK(a.median <= 4.0);
  const std::vector<double> same(7, 5.0);
  const auto c = bootstrap_instance_median(same, {100, 1}, 0.0);
  CHECK(c.median == 5.0);
  CHECK(c.std_error == 0.0);
  CHECK_THROWS_AS(bootstrap_instance_median(std::vector<double>{}, {10, 1}), InvalidInput);
}

TEST_CASE("power law fit") {
  std::vector<ScalingPoint> pts;
  for (int L = 5; L <= 15; ++L) {
    const double n = 6.0 * L * L;
    pts.push_back({n, 0.37 * std::pow(n, 1.73), {}, 0.0});
  }
  const auto f = fit_power_law(pts);
  REQUIRE(f.ok);
  CHECK(std::abs(f.alpha - 1.73) < 1e-12);
  CHECK(f.c == doctest::Approx(0.37));
  CHECK(f.points_used.size() == 11);
  CHECK_FALSE(f.sigma_from_bootstrap);
  CHECK(f.sigma_alpha < 1e-10);

  std::mt19937_64 gen(3);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (auto& p : pts)
    for (int b = 0; b < 50; ++b) p.boot.push_back(p.tte * std::exp(noise(gen)));
  const auto fb = fit_power_law(pts);
  CHECK(fb.sigma_from_bootstrap);
  CHECK(fb.refits == 50);
  CHECK(fb.sigma_alpha > 0.0);

  auto gated = pts;
  for (std::size_t i = 2; i < gated.size(); ++i) gated[i].p_value = 0.5;
  const auto g = fit_power_law(gated);
  CHECK_FALSE(g.ok);
  CHECK(g.diagnostic.find("need 3") != std::string::npos);
  gated[2].p_value = 0.0;
  gated[3].tte = kNeverHit;
  gated[3].p_value = 0.0;
  CHECK(fit_power_law(gated).points_used == std::vector<std::size_t>{0, 1, 2});

  const std::vector<double> x{0, 1, 2}, y{1, 3, 5};
  const auto lf = least_squares(x, y);
  CHECK(lf.slope == doctest::Approx(2.0));
  CHECK(lf.intercept == doctest::Approx(1.0));
  CHECK_THROWS_AS(least_squares(std::vector<double>{1, 1}, std::vector<double>{0, 1}), InvalidInput);
}
