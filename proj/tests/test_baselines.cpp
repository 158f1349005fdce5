#include <doctest.h>

#include <algorithm>
#include <set>

#include "core/baselines.hpp"
#include "core/errors.hpp"
#include "core/topology.hpp"

using namespace sgbench;

namespace {

std::shared_ptr<const Graph> random_graph(std::size_t n, double density, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (rng.uniform() < density) edges.push_back({a, b});
  return std::make_shared<const Graph>(n, edges);
}

// Plain enumeration over all 2^n states, no incremental updates.
std::int64_t naive_min(const Instance& inst) {
  const std::size_t n = inst.num_spins();
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  SpinConfig s(n);
  for (std::uint64_t bits = 0; bits < (1ull << n); ++bits) {
    for (std::size_t i = 0; i < n; ++i) s[i] = (bits >> i & 1) ? -1 : 1;
    best = std::min(best, inst.energy_units(s));
  }
  return best;
}

Instance pm_lattice(std::size_t side, std::uint64_t seed) {
  auto g = std::make_shared<const Graph>(square_lattice(side, side));
  return generate_instance(g, DisorderClass::Binomial, seed);
}

}  // namespace

TEST_CASE("brute force small cases") {
  auto ring = std::make_shared<const Graph>(ring_graph(4));
  const Instance ferro(ring, {-1, -1, -1, -1}, {}, 1);
  const auto r = brute_force(ferro);
  CHECK(r.e0() == Rational(-4));
  CHECK(r.degeneracy == 2);
  REQUIRE(r.ground_states.size() == 2);
  std::set<SpinConfig> gs(r.ground_states.begin(), r.ground_states.end());
  CHECK(gs.count(SpinConfig(4, 1)));
  CHECK(gs.count(SpinConfig(4, -1)));
  CHECK(brute_force_lexmin(ferro) == SpinConfig(4, 1));

  auto pair = std::make_shared<const Graph>(2, std::vector<Edge>{{0, 1}});
  const Instance anti(pair, {1}, {}, 1);
  const auto a = brute_force(anti);
  CHECK(a.e0() == Rational(-1));
  CHECK(a.degeneracy == 2);
  for (const auto& s : a.ground_states) CHECK(s[0] == -s[1]);
  CHECK(brute_force_lexmin(anti) == SpinConfig{1, -1});
}

TEST_CASE("brute force matches naive enumeration") {
  const auto inst = generate_instance(random_graph(20, 0.15, 1), DisorderClass::Sidon28, 5);
  const auto r = brute_force(inst);
  CHECK(r.e0_units == naive_min(inst));
  for (const auto& s : r.ground_states) CHECK(inst.energy_units(s) == r.e0_units);
  CHECK(r.degeneracy % 2 == 0);

  auto g = random_graph(12, 0.4, 2);
  Rng rng(3);
  std::vector<std::int32_t> J(g->num_edges()), h(12);
  for (auto& x : J) x = static_cast<std::int32_t>(rng.index(13)) - 6;
  for (auto& x : h) x = static_cast<std::int32_t>(rng.index(13)) - 6;
  const Instance fi(g, J, h, 6);
  const auto rf = brute_force(fi);
  CHECK(rf.e0_units == naive_min(fi));
  const auto lex = brute_force_lexmin(fi);
  CHECK(fi.energy_units(lex) == rf.e0_units);
  auto up_first = [](Spin x, Spin y) { return x > y; };
  for (const auto& s : rf.ground_states)
    CHECK_FALSE(std::lexicographical_compare(s.begin(), s.end(), lex.begin(), lex.end(), up_first));

  CHECK_THROWS_AS(brute_force(generate_instance(random_graph(31, 0.1, 4), DisorderClass::Binomial, 1)), InvalidInput);
}

TEST_CASE("banded transfer agrees with brute force") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto g = std::make_shared<const Graph>(square_lattice(4, 5));
    const auto inst = generate_instance(g, DisorderClass::Range6, seed);
    CHECK(ordering_bandwidth(*g) <= 5);
    CHECK(banded_ground_energy(inst) == brute_force(inst).e0_units);
    CHECK(banded_lexmin(inst) == brute_force_lexmin(inst));
  }
  auto tall = std::make_shared<const Graph>(square_lattice(5, 20));
  const auto big = generate_instance(tall, DisorderClass::Sidon28, 3);
  CHECK_THROWS_AS(banded_ground_energy(big, 10), InvalidInput);
}

TEST_CASE("simulated annealing") {
  const auto inst = generate_instance(random_graph(20, 0.2, 9), DisorderClass::Sidon28, 1);
  const auto sched = geometric_schedule(0.1, 5.0, 50);
  CHECK(sched.size() == 50);
  CHECK(sched.front() == doctest::Approx(0.1));
  CHECK(sched.back() == doctest::Approx(5.0));
  const auto a = simulated_annealing(inst, sched, 500, 7);
  const auto b = simulated_annealing(inst, sched, 500, 7);
  CHECK(a == b);
  for (std::size_t i = 1; i < a.events.size(); ++i) CHECK(a.events[i].best_units <= a.events[i - 1].best_units);
  CHECK(a.best_units() >= brute_force(inst).e0_units);

  const std::vector<double> frozen{1e6};
  const auto f = simulated_annealing(inst, frozen, 200, 3);
  for (std::size_t i = 1; i < f.events.size(); ++i) CHECK(f.events[i].best_units <= f.events[i - 1].best_units);
  CHECK(anneal_read(inst, sched, 300, 11) == anneal_read(inst, sched, 300, 11));
}

TEST_CASE("simulated annealing with restarts solves small binomial instances") {
  const auto sched = geometric_schedule(0.1, 5.0, 100);
  int solved = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto inst = generate_instance(random_graph(16, 0.25, 1000 + k), DisorderClass::Binomial, k);
    const auto e0 = brute_force(inst, 1).e0_units;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::uint64_t r = 0; r < 100 && best > e0; ++r) {
      best = std::min(best, simulated_annealing(inst, sched, 1000, derive_key({k, r})).best_units());
    }
    solved += best == e0;
  }
  CHECK(solved >= 95);
}

TEST_CASE("greedy descent") {
  const auto inst = generate_instance(random_graph(18, 0.3, 10), DisorderClass::Sidon28, 2);
  const auto gs = brute_force_lexmin(inst);
  CHECK(greedy_descent(inst, gs, 1) == gs);
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    SpinConfig s(18);
    for (auto& x : s) x = static_cast<Spin>(rng.spin());
    const auto out = greedy_descent(inst, s, rep);
    CHECK(is_one_flip_stable(inst, out));
    CHECK(inst.energy_units(out) <= inst.energy_units(s));
  }
  auto g = std::make_shared<const Graph>(square_lattice(6, 6));
  const Instance ferro(g, std::vector<std::int32_t>(g->num_edges(), -1), {}, 1);
  for (int rep = 0; rep < 10; ++rep) {
    SpinConfig s(36);
    for (auto& x : s) x = static_cast<Spin>(rng.spin());
    const auto out = greedy_descent(ferro, s, rep);
    CHECK(is_one_flip_stable(ferro, out));
  }
}

TEST_CASE("patchwork plan and accounting") {
  const auto inst = pm_lattice(8, 3);
  const auto plan = make_patchwork_plan(inst.graph(), 4);
  CHECK(plan.patches.size() == 4);
  std::vector<int> owner(64, -1);
  for (std::size_t p = 0; p < plan.patches.size(); ++p)
    for (const auto v : plan.patches[p]) {
      CHECK(owner[v] == -1);
      owner[v] = static_cast<int>(p);
    }
  CHECK(std::count(owner.begin(), owner.end(), -1) == 0);
  const auto& edges = inst.graph().edges();
  std::set<std::uint32_t> boundary(plan.boundary_edges.begin(), plan.boundary_edges.end());
  for (std::uint32_t e = 0; e < edges.size(); ++e) CHECK((owner[edges[e].a] != owner[edges[e].b]) == bool(boundary.count(e)));
  CHECK(plan.boundary_edges.size() == 16);

  const auto r = patchwork_solve(inst, 4);
  CHECK(r.num_patches == 4);
  CHECK(r.energy_units == r.patch_sum_units + r.boundary_units);
  CHECK(r.energy_units - r.patch_sum_units <= 2 * r.boundary_abs_units);
  CHECK(r.energy_units >= banded_ground_energy(inst));

  const auto whole = patchwork_solve(inst, 8);
  CHECK(whole.num_patches == 1);
  CHECK(whole.spins == default_patch_solver()(inst));

  auto nopos = std::make_shared<const Graph>(ring_graph(6));
  CHECK_THROWS_AS(patchwork_solve(generate_instance(nopos, DisorderClass::Binomial, 1), 2), InvalidInput);
  CHECK_THROWS_AS(make_patchwork_plan(inst.graph(), 0), InvalidInput);
}

TEST_CASE("patchwork solves the uniform ferromagnet exactly") {
  auto g = std::make_shared<const Graph>(square_lattice(8, 8));
  const Instance ferro(g, std::vector<std::int32_t>(g->num_edges(), -1), {}, 1);
  const auto r = patchwork_solve(ferro, 4);
  CHECK(r.energy_units == -static_cast<std::int64_t>(g->num_edges()));
  CHECK(r.spins == SpinConfig(64, 1));
}

TEST_CASE("patchwork residual density bound on random lattices") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = pm_lattice(12, 50 + seed);
    const auto e0 = banded_ground_energy(inst);
    for (int l0 : {2, 3, 4, 6}) {
      const auto r = patchwork_solve(inst, l0);
      CHECK(r.energy_units >= e0);
      CHECK(double(r.energy_units - e0) / 144.0 <= 4.0 / l0);
    }
  }
}

TEST_CASE("ground state validation") {
  static const PegasusGraph peg = build_pegasus(16);
  auto g2 = std::make_shared<const Graph>(build_qac_logical(peg, 2).logical.graph);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto inst = generate_instance(g2, DisorderClass::Sidon28, 40 + s);
    GroundStateOptions o;
    o.sweeps = 10000;
    o.seed = s;
    const auto r = validate_ground_state(inst, o);
    CHECK(r.exact);
    CHECK(r.validated);
    CHECK(r.e0_units == brute_force(inst).e0_units);
    CHECK(r.pticm_units == r.e0_units);
    o.seed = s + 100;
    CHECK(validate_ground_state(inst, o).e0_units == r.e0_units);
  }

  auto g5 = std::make_shared<const Graph>(build_qac_logical(peg, 5).logical.graph);
  const auto big = generate_instance(g5, DisorderClass::Sidon28, 1);
  GroundStateOptions quick;
  quick.sweeps = 10;
  quick.brute_force_limit = 0;
  quick.banded_limit = 0;
  const auto q = validate_ground_state(big, quick);
  CHECK_FALSE(q.exact);
  CHECK(q.validated == (double(q.last_improvement) < 0.9 * 10));
  REQUIRE(q.last_improvement >= 9);
  CHECK_FALSE(q.validated);

  std::vector<GroundStateReport> reps(10);
  for (int i = 0; i < 10; ++i) {
    reps[i].sweeps = 1000;
    reps[i].last_improvement = 50 * i;
  }
  CHECK(instance_set_settled(reps));
  reps[8].last_improvement = 950;
  reps[9].last_improvement = 990;
  CHECK_FALSE(instance_set_settled(reps));
}
