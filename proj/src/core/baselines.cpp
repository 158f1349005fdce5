#include "core/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace sgbench {

namespace {

// +1 sorts before -1.
bool lex_less(std::span<const Spin> a, std::span<const Spin> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

template <typename Visit>
std::int64_t gray_enumerate(const Instance& inst, Visit&& visit) {
  const std::size_t n = inst.num_spins();
  if (n > kBruteForceMaxSpins) {
    throw InvalidInput("brute force is limited to " + std::to_string(kBruteForceMaxSpins) +
                       " spins (got " + std::to_string(n) + "); use PT-ICM ground-state validation");
  }
  const Graph& g = inst.graph();
  const auto J = inst.couplings();
  const std::size_t free = inst.has_fields() ? n : (n == 0 ? 0 : n - 1);
  SpinConfig s(n, 1);
  std::vector<std::int64_t> f(n);
  for (NodeId v = 0; v < n; ++v) f[v] = inst.local_field_units(s, v);
  std::int64_t e = inst.energy_units(s);
  std::int64_t best = e;
  visit(s, e, best);
  const std::uint64_t total = std::uint64_t{1} << free;
  for (std::uint64_t i = 1; i < total; ++i) {
    const NodeId v = static_cast<NodeId>(__builtin_ctzll(i));
    e -= 2 * s[v] * f[v];
    s[v] = static_cast<Spin>(-s[v]);
    for (const auto& nb : g.neighbors(v)) f[nb.node] += 2 * static_cast<std::int64_t>(J[nb.edge]) * s[v];
    if (e <= best) {
      best = std::min(best, e);
      visit(s, e, best);
    }
  }
  return best;
}

SpinConfig flipped(const SpinConfig& s) {
  SpinConfig out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = static_cast<Spin>(-s[i]);
  return out;
}

}  // namespace

BruteForceResult brute_force(const Instance& instance, std::size_t max_states) {
  BruteForceResult r;
  r.denominator = instance.denominator();
  const bool paired = !instance.has_fields() && instance.num_spins() > 0;
  std::int64_t cur = std::numeric_limits<std::int64_t>::max();
  r.e0_units = gray_enumerate(instance, [&](const SpinConfig& s, std::int64_t e, std::int64_t) {
    if (e < cur) {
      cur = e;
      r.ground_states.clear();
      r.degeneracy = 0;
    }
    if (e != cur) return;
    r.degeneracy += paired ? 2 : 1;
    if (r.ground_states.size() < max_states) r.ground_states.push_back(s);
    if (paired && r.ground_states.size() < max_states) r.ground_states.push_back(flipped(s));
  });
  return r;
}

SpinConfig brute_force_lexmin(const Instance& instance) {
  SpinConfig best;
  std::int64_t cur = std::numeric_limits<std::int64_t>::max();
  const bool paired = !instance.has_fields();
  gray_enumerate(instance, [&](const SpinConfig& s, std::int64_t e, std::int64_t) {
    SpinConfig cand = (paired && !s.empty() && s[0] < 0) ? flipped(s) : s;
    if (e < cur || (e == cur && lex_less(cand, best))) {
      cur = e;
      best = std::move(cand);
    }
  });
  return best;
}

namespace {

struct Banding {
  std::vector<NodeId> order;  // rank -> node
  std::size_t width = 1;
  // per rank: (window bit, coupling) for neighbours earlier in the order
  std::vector<std::vector<std::pair<int, std::int64_t>>> back;
};

Banding make_banding(const Graph& g) {
  Banding b;
  const std::size_t n = g.num_nodes();
  b.order.resize(n);
  std::iota(b.order.begin(), b.order.end(), 0);
  if (g.has_positions()) {
    const auto& p = g.positions();
    std::stable_sort(b.order.begin(), b.order.end(), [&](NodeId x, NodeId y) {
      if (p[x].y != p[y].y) return p[x].y < p[y].y;
      return p[x].x < p[y].x;
    });
  }
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[b.order[i]] = i;
  for (const auto& e : g.edges()) {
    const std::size_t d = rank[e.a] > rank[e.b] ? rank[e.a] - rank[e.b] : rank[e.b] - rank[e.a];
    b.width = std::max(b.width, d);
  }
  return b;
}

void fill_back(Banding& b, const Instance& inst) {
  const Graph& g = inst.graph();
  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[b.order[i]] = i;
  b.back.assign(n, {});
  const long w = static_cast<long>(b.width);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& nb : g.neighbors(b.order[i])) {
      const std::size_t r = rank[nb.node];
      if (r < i) b.back[i].push_back({static_cast<int>(static_cast<long>(r) - (static_cast<long>(i) - w)),
                                      inst.couplings()[nb.edge]});
    }
  }
}

// Sum of J * s_j over earlier neighbours for window state w (bit 1 = down).
inline std::int64_t window_sum(const std::vector<std::pair<int, std::int64_t>>& back, std::uint32_t w) {
  std::int64_t t = 0;
  for (const auto& [bit, j] : back) t += ((w >> bit) & 1u) ? -j : j;
  return t;
}

}  // namespace

std::size_t ordering_bandwidth(const Graph& g) { return make_banding(g).width; }

std::int64_t banded_ground_energy(const Instance& instance, std::size_t max_bandwidth) {
  Banding b = make_banding(instance.graph());
  if (b.width > max_bandwidth) {
    throw InvalidInput("ordering bandwidth " + std::to_string(b.width) + " exceeds limit " +
                       std::to_string(max_bandwidth));
  }
  fill_back(b, instance);
  const std::size_t states = std::size_t{1} << b.width;
  const std::uint32_t top = 1u << (b.width - 1);
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> cur(states, 0), next(states);
  const auto h = instance.fields();
  for (std::size_t i = 0; i < b.order.size(); ++i) {
    std::fill(next.begin(), next.end(), inf);
    const std::int64_t hi = h[b.order[i]];
    for (std::uint32_t w = 0; w < states; ++w) {
      if (cur[w] == inf) continue;
      const std::int64_t t = hi + window_sum(b.back[i], w);
      const std::uint32_t base = w >> 1;
      next[base] = std::min(next[base], cur[w] + t);
      next[base | top] = std::min(next[base | top], cur[w] - t);
    }
    cur.swap(next);
  }
  return *std::min_element(cur.begin(), cur.end());
}

SpinConfig banded_lexmin(const Instance& instance, std::size_t max_bandwidth) {
  Banding b = make_banding(instance.graph());
  if (b.width > max_bandwidth) {
    throw InvalidInput("ordering bandwidth " + std::to_string(b.width) + " exceeds limit " +
                       std::to_string(max_bandwidth));
  }
  fill_back(b, instance);
  const std::size_t n = b.order.size();
  const std::size_t states = std::size_t{1} << b.width;
  const std::uint32_t top = 1u << (b.width - 1);
  const auto h = instance.fields();
  // cost[i][w]: optimal energy of ranks i..n-1 given the window before rank i.
  std::vector<std::int64_t> cost((n + 1) * states, 0);
  for (std::size_t i = n; i-- > 0;) {
    const std::int64_t hi = h[b.order[i]];
    const std::int64_t* after = &cost[(i + 1) * states];
    std::int64_t* here = &cost[i * states];
    for (std::uint32_t w = 0; w < states; ++w) {
      const std::int64_t t = hi + window_sum(b.back[i], w);
      const std::uint32_t base = w >> 1;
      here[w] = std::min(t + after[base], -t + after[base | top]);
    }
  }
  SpinConfig s(n);
  std::uint32_t w = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t t = h[b.order[i]] + window_sum(b.back[i], w);
    const std::uint32_t base = w >> 1;
    if (t + cost[(i + 1) * states + base] == cost[i * states + w]) {
      s[b.order[i]] = 1;
      w = base;
    } else {
      s[b.order[i]] = -1;
      w = base | top;
    }
  }
  return s;
}

std::vector<double> geometric_schedule(double beta_min, double beta_max, std::size_t n) {
  if (n == 0 || !(beta_min > 0.0) || !(beta_max >= beta_min)) throw InvalidInput("bad schedule bounds");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? beta_max : beta_min * std::pow(beta_max / beta_min, static_cast<double>(i) / (n - 1));
  }
  return out;
}

namespace {

template <typename OnSweep>
SpinConfig anneal_core(const Instance& instance, std::span<const double> schedule, std::uint64_t sweeps,
                       std::uint64_t seed, OnSweep&& on_sweep) {
  if (schedule.empty()) throw InvalidInput("annealing schedule is empty");
  Rng rng(seed);
  const std::size_t n = instance.num_spins();
  SpinConfig s(n);
  for (auto& x : s) x = static_cast<Spin>(rng.spin());
  std::int64_t e = instance.energy_units(s);
  on_sweep(std::uint64_t{0}, s, e);

  const Graph& g = instance.graph();
  const auto J = instance.couplings();
  std::vector<std::uint32_t> start(n + 1, 0);
  std::vector<std::pair<NodeId, std::int32_t>> adj;
  adj.reserve(2 * g.num_edges());
  for (NodeId v = 0; v < n; ++v) {
    for (const auto& nb : g.neighbors(v)) adj.push_back({nb.node, J[nb.edge]});
    start[v + 1] = static_cast<std::uint32_t>(adj.size());
  }
  std::vector<std::int64_t> lf(n);
  for (NodeId v = 0; v < n; ++v) lf[v] = instance.local_field_units(s, v);
  const std::int64_t maxf = instance.max_local_field_units();
  const bool tabled = maxf <= (1 << 16);
  const double den = static_cast<double>(instance.denominator());
  std::vector<double> table;
  double table_beta = -1.0;
  for (std::uint64_t sw = 0; sw < sweeps; ++sw) {
    const double beta = schedule[std::min<std::size_t>(schedule.size() - 1, sw * schedule.size() / sweeps)];
    if (tabled && beta != table_beta) {
      table.assign(maxf + 1, -1.0);
      table_beta = beta;
    }
    auto accept = [&](std::int64_t f) {
      if (!tabled) return std::exp(-2.0 * beta * static_cast<double>(f) / den);
      double& a = table[f];
      if (a < 0.0) a = std::exp(-2.0 * beta * static_cast<double>(f) / den);
      return a;
    };
    for (NodeId v = 0; v < n; ++v) {
      const std::int64_t sf = s[v] * lf[v];
      if (sf >= 0 || rng.uniform() < accept(-sf)) {
        e -= 2 * sf;
        s[v] = static_cast<Spin>(-s[v]);
        const std::int64_t d = 2 * s[v];
        for (std::uint32_t k = start[v]; k < start[v + 1]; ++k) lf[adj[k].first] += d * adj[k].second;
      }
    }
    on_sweep(sw + 1, s, e);
  }
  return s;
}

}  // namespace

RunTrace simulated_annealing(const Instance& instance, std::span<const double> schedule,
                             std::uint64_t sweeps, std::uint64_t seed, std::uint64_t record_cadence) {
  RunTrace tr;
  tr.denominator = instance.denominator();
  tr.seed = seed;
  tr.label = "sa";
  tr.sweeps_total = sweeps;
  anneal_core(instance, schedule, sweeps, seed, [&](std::uint64_t sw, const SpinConfig& s, std::int64_t e) {
    if (tr.events.empty() || e < tr.events.back().best_units) {
      tr.best_config = s;
      tr.events.push_back({sw, 0.0, e});
    } else if (record_cadence && sw % record_cadence == 0) {
      tr.events.push_back({sw, 0.0, tr.events.back().best_units});
    }
  });
  return tr;
}

SpinConfig anneal_read(const Instance& instance, std::span<const double> schedule, std::uint64_t sweeps,
                       std::uint64_t seed) {
  return anneal_core(instance, schedule, sweeps, seed, [](std::uint64_t, const SpinConfig&, std::int64_t) {});
}

SpinConfig greedy_descent(const Instance& instance, SpinConfig s, std::uint64_t seed) {
  const std::size_t n = instance.num_spins();
  if (s.size() != n) throw InvalidInput("start configuration size does not match instance");
  Rng rng(seed);
  const Graph& g = instance.graph();
  const auto J = instance.couplings();
  std::vector<std::int64_t> f(n);
  for (NodeId v = 0; v < n; ++v) f[v] = instance.local_field_units(s, v);
  std::vector<NodeId> cand;
  std::vector<std::int64_t> where(n, -1);
  const auto refresh = [&](NodeId v) {
    const bool improving = s[v] * f[v] > 0;
    if (improving && where[v] < 0) {
      where[v] = static_cast<std::int64_t>(cand.size());
      cand.push_back(v);
    } else if (!improving && where[v] >= 0) {
      const NodeId last = cand.back();
      cand[where[v]] = last;
      where[last] = where[v];
      cand.pop_back();
      where[v] = -1;
    }
  };
  for (NodeId v = 0; v < n; ++v) refresh(v);
  while (!cand.empty()) {
    const NodeId v = cand[rng.index(cand.size())];
    s[v] = static_cast<Spin>(-s[v]);
    for (const auto& nb : g.neighbors(v)) {
      f[nb.node] += 2 * static_cast<std::int64_t>(J[nb.edge]) * s[v];
      refresh(nb.node);
    }
    refresh(v);
  }
  return s;
}

bool is_one_flip_stable(const Instance& instance, std::span<const Spin> spins) {
  for (NodeId v = 0; v < instance.num_spins(); ++v) {
    if (spins[v] * instance.local_field_units(spins, v) > 0) return false;
  }
  return true;
}

PatchworkPlan make_patchwork_plan(const Graph& graph, int sub_side) {
  if (sub_side < 1) throw InvalidInput("patch side must be >= 1");
  if (!graph.has_positions()) throw InvalidInput("patchwork needs node coordinates");
  const auto& p = graph.positions();
  double xmin = 0.0, ymin = 0.0;
  if (!p.empty()) {
    xmin = p[0].x;
    ymin = p[0].y;
    for (const auto& q : p) {
      xmin = std::min(xmin, q.x);
      ymin = std::min(ymin, q.y);
    }
  }
  std::map<std::pair<long, long>, std::vector<NodeId>> blocks;
  std::vector<std::pair<long, long>> key(graph.num_nodes());
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    key[v] = {static_cast<long>(std::floor((p[v].y - ymin) / sub_side + 1e-9)),
              static_cast<long>(std::floor((p[v].x - xmin) / sub_side + 1e-9))};
    blocks[key[v]].push_back(v);
  }
  PatchworkPlan plan;
  plan.sub_side = sub_side;
  for (auto& [k, nodes] : blocks) plan.patches.push_back(std::move(nodes));
  for (std::uint32_t e = 0; e < graph.num_edges(); ++e) {
    if (key[graph.edges()[e].a] != key[graph.edges()[e].b]) plan.boundary_edges.push_back(e);
  }
  return plan;
}

PatchSolver default_patch_solver() {
  return [](const Instance& patch) {
    return patch.num_spins() <= 20 ? brute_force_lexmin(patch) : banded_lexmin(patch);
  };
}

Instance induced_instance(const Instance& instance, std::span<const NodeId> nodes) {
  const Graph& g = instance.graph();
  auto sub = std::make_shared<Graph>(g.induced(nodes));
  std::vector<std::int32_t> j;
  j.reserve(sub->num_edges());
  for (const auto& e : sub->edges()) j.push_back(instance.couplings()[*g.find_edge(nodes[e.a], nodes[e.b])]);
  std::vector<std::int32_t> h;
  h.reserve(nodes.size());
  for (const NodeId v : nodes) h.push_back(instance.fields()[v]);
  return Instance(std::move(sub), std::move(j), std::move(h), instance.denominator(),
                  instance.disorder(), instance.seed());
}

PatchworkResult patchwork_solve(const Instance& instance, int sub_side, const PatchSolver& solver) {
  const PatchworkPlan plan = make_patchwork_plan(instance.graph(), sub_side);
  PatchworkResult r;
  r.spins.assign(instance.num_spins(), 1);
  r.num_patches = plan.patches.size();
  for (const auto& nodes : plan.patches) {
    const Instance sub = induced_instance(instance, nodes);
    const SpinConfig sol = solver(sub);
    r.patch_sum_units += sub.energy_units(sol);
    for (std::size_t i = 0; i < nodes.size(); ++i) r.spins[nodes[i]] = sol[i];
  }
  const auto& edges = instance.graph().edges();
  for (const std::uint32_t e : plan.boundary_edges) {
    const std::int64_t j = instance.couplings()[e];
    r.boundary_units += j * r.spins[edges[e].a] * r.spins[edges[e].b];
    r.boundary_abs_units += j < 0 ? -j : j;
  }
  r.energy_units = instance.energy_units(r.spins);
  return r;
}

GroundStateReport validate_ground_state(const Instance& instance, const GroundStateOptions& options) {
  GroundStateReport r;
  r.denominator = instance.denominator();
  std::optional<std::int64_t> exact;
  if (instance.num_spins() <= options.brute_force_limit) {
    exact = brute_force(instance, 1).e0_units;
  } else if (ordering_bandwidth(instance.graph()) <= options.banded_limit) {
    exact = banded_ground_energy(instance, options.banded_limit);
  }
  const TemperatureLadder ladder = options.ladder.betas.empty() ? standard_ladders()[0] : options.ladder;
  PticmOptions po;
  po.sweeps = options.sweeps;
  po.stop_at = exact;
  const RunTrace tr = run_pticm(instance, ladder, options.seed, po);
  r.pticm_units = tr.best_units();
  r.last_improvement = tr.last_improvement();
  r.sweeps = tr.sweeps_total;
  r.exact = exact.has_value();
  r.e0_units = exact ? std::min(*exact, r.pticm_units) : r.pticm_units;
  const bool settled = static_cast<double>(r.last_improvement) <
                       options.settle_fraction * static_cast<double>(options.sweeps);
  r.validated = r.exact || settled;
  return r;
}

bool instance_set_settled(std::span<const GroundStateReport> reports, double settle_fraction) {
  if (reports.empty()) return false;
  std::vector<std::uint64_t> hits;
  std::uint64_t sweeps = 0;
  for (const auto& r : reports) {
    hits.push_back(r.last_improvement);
    sweeps = std::max(sweeps, r.sweeps);
  }
  return static_cast<double>(sweeps_to_quantile(std::span<const std::uint64_t>(hits), 0.9)) <
         settle_fraction * static_cast<double>(sweeps);
}

}  // namespace sgbench
