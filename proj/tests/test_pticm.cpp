#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/baselines.hpp"
#include "core/errors.hpp"
#include "core/pticm.hpp"
#include "core/topology.hpp"

using namespace sgbench;

namespace {

std::shared_ptr<const Graph> logical_graph(int L) {
  static const PegasusGraph peg = build_pegasus(16);
  return std::make_shared<const Graph>(build_qac_logical(peg, L).logical.graph);
}

TemperatureLadder two_temps(double b0, double b1) {
  TemperatureLadder l;
  l.betas = {b0, b1};
  l.n_icm = 1;
  l.label = "toy";
  return l;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double batch_sigma(const std::vector<double>& v, std::size_t batches) {
  const std::size_t len = v.size() / batches;
  std::vector<double> m;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += v[b * len + i];
    m.push_back(s / double(len));
  }
  const double mu = mean(m);
  double ss = 0.0;
  for (double x : m) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / double(batches - 1) / double(batches));
}

}  // namespace

TEST_CASE("ladder construction") {
  const auto set1 = make_ladder(32, 0.1, 5.0, LadderSpacing::Log, 8, "B5");
  CHECK(set1.size() == 32);
  CHECK(set1.n_icm == 8);
  CHECK(set1.betas.front() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(set1.betas.back() == doctest::Approx(5.0).epsilon(1e-15));
  const double ratio = std::pow(50.0, 1.0 / 31.0);
  for (std::size_t i = 1; i < 32; ++i) CHECK(set1.betas[i] / set1.betas[i - 1] == doctest::Approx(ratio).epsilon(1e-12));
  CHECK(set1.is_icm(31));
  CHECK(set1.is_icm(24));
  CHECK_FALSE(set1.is_icm(23));

  const auto two = make_ladder(2, 0.3, 0.7, LadderSpacing::Log, 1);
  CHECK(two.betas == std::vector<double>{0.3, 0.7});

  const auto set2 = make_ladder(24, 0.2, 10.0, LadderSpacing::FeedbackInit, 6, "F24");
  CHECK(set2.size() == 24);
  CHECK(set2.betas.front() == doctest::Approx(0.2));
  CHECK(set2.betas.back() == doctest::Approx(10.0));

  CHECK_THROWS_AS(make_ladder(1, 0.1, 5.0, LadderSpacing::Log, 1), InvalidInput);
  CHECK_THROWS_AS(make_ladder(8, 5.0, 0.1, LadderSpacing::Log, 1), InvalidInput);
  CHECK_THROWS_AS(make_ladder(8, 0.0, 1.0, LadderSpacing::Log, 1), InvalidInput);
  CHECK_THROWS_AS(make_ladder(8, 0.1, 1.0, LadderSpacing::Log, 9), InvalidInput);

  const auto std4 = standard_ladders();
  REQUIRE(std4.size() == 4);
  const std::vector<std::tuple<std::string, std::size_t, double, double, int>> rows{
      {"B5", 32, 0.1, 5.0, 8}, {"F24", 24, 0.2, 10.0, 6}, {"F32", 32, 0.2, 10.0, 8}, {"B20", 32, 0.1, 20.0, 8}};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std4[i].label == std::get<0>(rows[i]));
    CHECK(std4[i].size() == std::get<1>(rows[i]));
    CHECK(std4[i].betas.front() == doctest::Approx(std::get<2>(rows[i])));
    CHECK(std4[i].betas.back() == doctest::Approx(std::get<3>(rows[i])));
    CHECK(std4[i].n_icm == std::get<4>(rows[i]));
  }
}

TEST_CASE("metropolis limits") {
  auto g = logical_graph(3);
  const auto inst = generate_instance(g, DisorderClass::Sidon28, 3);
  PtState cold(inst, two_temps(1e5, 1e6), 4);
  for (int s = 0; s < 50; ++s) {
    const auto before = cold.energy_units(0, 1);
    cold.metropolis_sweep(0, 1);
    CHECK(cold.energy_units(0, 1) <= before);
  }
  CHECK(cold.energies_consistent());

  PtState hot(inst, two_temps(1e-12, 1.0), 5);
  std::size_t accepted = 0, proposed = 0;
  while (proposed < 10000) {
    accepted += hot.metropolis_sweep(0, 0);
    proposed += inst.num_spins();
  }
  CHECK(double(accepted) / double(proposed) > 0.99);
  CHECK(hot.energies_consistent());
}

TEST_CASE("single spin magnetization follows -tanh(beta)") {
  auto g = std::make_shared<const Graph>(1, std::vector<Edge>{});
  const Instance inst(g, {}, {1}, 1);
  const double beta = 0.7;
  PtState st(inst, two_temps(beta, 2.0), 6);
  std::vector<double> m;
  for (int s = 0; s < 100000; ++s) {
    st.metropolis_sweep(0, 0);
    m.push_back(st.spins(0, 0)[0]);
  }
  CHECK(std::abs(mean(m) + std::tanh(beta)) < 3.0 * batch_sigma(m, 100));
}

TEST_CASE("two spin Gibbs distribution") {
  auto g = std::make_shared<const Graph>(2, std::vector<Edge>{{0, 1}});
  const Instance inst(g, {-2}, {1, 0}, 2);  // J = -1, h0 = 1/2
  const double beta = 0.8;
  PtState st(inst, two_temps(beta, 3.0), 7);
  std::vector<double> z(4);
  double zsum = 0.0;
  for (int k = 0; k < 4; ++k) {
    SpinConfig s{Spin((k & 1) ? -1 : 1), Spin((k & 2) ? -1 : 1)};
    z[k] = std::exp(-beta * inst.energy(s).to_double());
    zsum += z[k];
  }
  std::vector<std::vector<double>> hits(4);
  for (int s = 0; s < 200000; ++s) {
    st.metropolis_sweep(0, 0);
    const auto& sp = st.spins(0, 0);
    const int k = (sp[0] < 0 ? 1 : 0) | (sp[1] < 0 ? 2 : 0);
    for (int j = 0; j < 4; ++j) hits[j].push_back(j == k ? 1.0 : 0.0);
  }
  for (int j = 0; j < 4; ++j) CHECK(std::abs(mean(hits[j]) - z[j] / zsum) < 3.0 * batch_sigma(hits[j], 100) + 1e-9);
}

TEST_CASE("replica exchange acceptance") {
  auto g = std::make_shared<const Graph>(1, std::vector<Edge>{});
  const Instance inst(g, {}, {1}, 1);
  const SpinConfig up{1}, down{-1};

  PtState eq(inst, two_temps(0.5, 1.0), 8);
  eq.set_spins(0, 0, up);
  eq.set_spins(0, 1, up);
  const auto id0 = eq.replica_id(0, 0);
  CHECK(eq.pt_exchange(0) == 1);
  CHECK(eq.replica_id(0, 1) == id0);

  PtState st(inst, two_temps(0.5, 1.0), 9);
  const int attempts = 100000;
  int swaps = 0;
  for (int a = 0; a < attempts; ++a) {
    st.set_spins(0, 0, up);    // E = +1 at beta 0.5
    st.set_spins(0, 1, down);  // E = -1 at beta 1.0
    swaps += static_cast<int>(st.pt_exchange(0));
    st.pt_exchange(0);  // odd offset: no pair with two temperatures
  }
  const double p = std::exp((0.5 - 1.0) * (1.0 - (-1.0)));
  const double sigma = std::sqrt(p * (1 - p) / attempts);
  CHECK(std::abs(double(swaps) / attempts - p) < 3.0 * sigma);
}

TEST_CASE("replica exchange only permutes configurations") {
  auto g = logical_graph(3);
  const auto inst = generate_instance(g, DisorderClass::Sidon28, 10);
  PtState st(inst, make_ladder(8, 0.2, 3.0, LadderSpacing::Log, 2), 11);
  for (int s = 0; s < 20; ++s) st.sweep();
  for (int c = 0; c < 2; ++c) {
    std::vector<std::pair<SpinConfig, std::uint32_t>> before, after;
    for (std::size_t t = 0; t < 8; ++t) before.push_back({st.spins(c, t), st.replica_id(c, t)});
    st.pt_exchange(c);
    for (std::size_t t = 0; t < 8; ++t) after.push_back({st.spins(c, t), st.replica_id(c, t)});
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);
  }
  CHECK(st.energies_consistent());
}

TEST_CASE("icm moves") {
  auto g = logical_graph(3);
  const auto inst = generate_instance(g, DisorderClass::Sidon28, 12);
  const auto ladder = make_ladder(4, 0.5, 2.0, LadderSpacing::Log, 2);
  Rng rng(1);
  SpinConfig s(inst.num_spins());
  for (auto& x : s) x = static_cast<Spin>(rng.spin());

  PtState same(inst, ladder, 13);
  same.set_spins(0, 3, s);
  same.set_spins(1, 3, s);
  CHECK(same.icm_move(3) == 0);
  CHECK(same.spins(0, 3) == s);

  SpinConfig flipped = s;
  for (auto& x : flipped) x = static_cast<Spin>(-x);
  PtState anti(inst, ladder, 14);
  anti.set_spins(0, 3, s);
  anti.set_spins(1, 3, flipped);
  const auto e0 = anti.energy_units(0, 3), e1 = anti.energy_units(1, 3);
  CHECK(anti.icm_move(3) == inst.num_spins());
  CHECK(anti.spins(0, 3) == flipped);
  CHECK(anti.spins(1, 3) == s);
  CHECK(anti.energy_units(0, 3) == e0);
  CHECK(anti.energy_units(1, 3) == e1);

  PtState st(inst, ladder, 15);
  for (int k = 0; k < 3000; ++k) {
    st.metropolis_sweep(0, 2);
    st.metropolis_sweep(1, 2);
    const auto sum = st.energy_units(0, 2) + st.energy_units(1, 2);
    st.icm_move(2);
    const auto e0k = inst.energy_units(st.spins(0, 2));
    const auto e1k = inst.energy_units(st.spins(1, 2));
    CHECK(e0k == st.energy_units(0, 2));
    CHECK(e1k == st.energy_units(1, 2));
    CHECK(e0k + e1k == sum);
  }
}

TEST_CASE("run_pticm finds exact ground states on small instances") {
  auto g = logical_graph(2);
  REQUIRE(g->num_nodes() == 24);
  const auto b5 = standard_ladders()[0];
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = generate_instance(g, DisorderClass::Sidon28, 100 + seed);
    const auto bf = brute_force(inst);
    PticmOptions o;
    o.sweeps = 10000;
    const auto tr = run_pticm(inst, b5, seed, o);
    CHECK(tr.best_units() == bf.e0_units);
    CHECK(inst.energy_units(tr.best_config) == tr.best_units());
    for (std::size_t i = 1; i < tr.events.size(); ++i) {
      CHECK(tr.events[i].best_units < tr.events[i - 1].best_units);
      CHECK(tr.events[i].sweep > tr.events[i - 1].sweep);
    }
  }
}

TEST_CASE("run_pticm determinism, zero sweeps, stop_at and cadence") {
  auto g = logical_graph(3);
  const auto inst = generate_instance(g, DisorderClass::Sidon28, 16);
  const auto ladder = make_ladder(8, 0.2, 4.0, LadderSpacing::Log, 2, "t8");
  PticmOptions o;
  o.sweeps = 300;
  o.seconds_per_sweep = 1e-3;
  const auto a = run_pticm(inst, ladder, 7, o);
  const auto b = run_pticm(inst, ladder, 7, o);
  CHECK(a == b);
  CHECK(a.label == "t8");
  CHECK(a.sweeps_total == 300);
  for (const auto& e : a.events) CHECK(e.seconds == doctest::Approx(double(e.sweep) * 1e-3));

  o.sweeps = 0;
  const auto z = run_pticm(inst, ladder, 7, o);
  REQUIRE(z.events.size() == 1);
  CHECK(z.events[0].sweep == 0);

  o.sweeps = 5000;
  o.stop_at = a.best_units() + 50;
  const auto s = run_pticm(inst, ladder, 7, o);
  CHECK(s.best_units() <= *o.stop_at);
  CHECK(s.sweeps_total < 5000);

  PticmOptions c;
  c.sweeps = 100;
  c.record_cadence = 10;
  const auto tc = run_pticm(inst, ladder, 3, c);
  std::size_t on_cadence = 0;
  for (const auto& e : tc.events) on_cadence += e.sweep % 10 == 0 && e.sweep > 0;
  CHECK(on_cadence >= 10);
  for (std::size_t i = 1; i < tc.events.size(); ++i) CHECK(tc.events[i].best_units <= tc.events[i - 1].best_units);
}

TEST_CASE("trace file round trip") {
  auto g = logical_graph(2);
  const auto inst = generate_instance(g, DisorderClass::Sidon28, 17);
  PticmOptions o;
  o.sweeps = 200;
  o.seconds_per_sweep = 2.5e-4;
  const auto tr = run_pticm(inst, standard_ladders()[0], 3, o);
  std::ostringstream out;
  save_trace(out, tr, instance_hash(inst));
  CHECK(out.str().rfind("#trace instance=" + instance_hash(inst) + " ladder=B5 seed=3 sweeps=200 spw=", 0) == 0);
  std::istringstream in(out.str());
  std::string h;
  const auto back = load_trace(in, &h);
  CHECK(h == instance_hash(inst));
  CHECK(back.events.size() == tr.events.size());
  for (std::size_t i = 0; i < tr.events.size(); ++i) {
    CHECK(back.events[i].sweep == tr.events[i].sweep);
    CHECK(back.events[i].best_units == tr.events[i].best_units);
  }
  CHECK(back.denominator == 28);
  CHECK(back.seconds_per_sweep == tr.seconds_per_sweep);

  std::istringstream bad("#trace instance=x ladder=B5 seed=1 sweeps=10 spw=1\n5 -10\n3 -12\n");
  CHECK_THROWS_AS(load_trace(bad), ParseError);
  std::istringstream rising("#trace instance=x ladder=B5 seed=1 sweeps=10 spw=1\n1 -10\n3 -8\n");
  CHECK_THROWS_AS(load_trace(rising), ParseError);
}

TEST_CASE("sweeps to quantile") {
  const std::vector<std::uint64_t> same(7, 100);
  CHECK(sweeps_to_quantile(same) == 100);
  std::vector<std::uint64_t> ten;
  for (int i = 1; i <= 10; ++i) ten.push_back(10 * i);
  CHECK(sweeps_to_quantile(ten, 0.9) == 90);
  CHECK(sweeps_to_quantile(ten, 1.0) == 100);
  CHECK(sweeps_to_quantile(ten, 0.5) == 50);
  CHECK_THROWS_AS(sweeps_to_quantile(std::vector<std::uint64_t>{}), InvalidInput);
}

TEST_CASE("feedback optimization") {
  auto g = std::make_shared<const Graph>(square_lattice(6, 6));
  const Instance ferro(g, std::vector<std::int32_t>(g->num_edges(), -1), {}, 1);
  const std::vector<Instance> insts{ferro};
  const auto start = make_ladder(12, 0.05, 3.0, LadderSpacing::FeedbackInit, 2, "fb");

  FeedbackOptions none;
  none.rounds = 0;
  const auto r0 = feedback_optimize(start, insts, none);
  CHECK(r0.ladder.betas == start.betas);

  FeedbackOptions fo;
  fo.rounds = 3;
  fo.sweeps_per_round = 20000;
  fo.seed = 5;
  const auto r = feedback_optimize(start, insts, fo);
  CHECK(r.converged);
  CHECK(r.rounds_completed == 3);
  CHECK_NOTHROW(check_ladder(r.ladder));
  CHECK(r.ladder.betas.front() == start.betas.front());
  CHECK(r.ladder.betas.back() == start.betas.back());

  const auto before = measure_diffusion(insts, start, 40000, 77);
  const auto after = measure_diffusion(insts, r.ladder, 40000, 77);
  for (std::size_t t = 1; t < after.f.size(); ++t) CHECK(after.f[t] >= after.f[t - 1] - 0.02);
  CHECK(diffusion_deviation(after) < diffusion_deviation(before));

  FeedbackOptions starved = fo;
  starved.rounds = 2;
  starved.sweeps_per_round = 3;
  starved.min_round_trips = 1000;
  const auto rs = feedback_optimize(start, insts, starved);
  CHECK_FALSE(rs.converged);
  CHECK_FALSE(rs.note.empty());
  CHECK(rs.ladder.betas == start.betas);
}
