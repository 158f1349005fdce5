#include "core/pticm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "core/errors.hpp"

namespace sgbench {

void check_ladder(const TemperatureLadder& ladder) {
  if (ladder.betas.size() < 2) throw InvalidInput("ladder needs at least 2 temperatures");
  if (ladder.n_icm < 1 || static_cast<std::size_t>(ladder.n_icm) > ladder.betas.size()) {
    throw InvalidInput("n_icm must lie in [1, n_t]");
  }
  if (!(ladder.betas.front() >= 0.0)) throw InvalidInput("betas must be non-negative");
  for (std::size_t i = 1; i < ladder.betas.size(); ++i) {
    if (!(ladder.betas[i] > ladder.betas[i - 1])) throw InvalidInput("betas must be strictly increasing");
  }
}

TemperatureLadder make_ladder(int n_t, double beta_min, double beta_max, LadderSpacing spacing,
                              int n_icm, std::string label) {
  if (n_t < 2) throw InvalidInput("n_t must be >= 2");
  if (!(beta_min > 0.0) || !(beta_max > beta_min) || !std::isfinite(beta_max)) {
    throw InvalidInput("need 0 < beta_min < beta_max");
  }
  TemperatureLadder l;
  l.n_icm = n_icm;
  l.betas.resize(n_t);
  const double ratio = std::log(beta_max / beta_min);
  for (int i = 0; i < n_t; ++i) l.betas[i] = beta_min * std::exp(ratio * i / (n_t - 1));
  l.betas.front() = beta_min;
  l.betas.back() = beta_max;
  if (label.empty()) {
    label = (spacing == LadderSpacing::Log ? "log" : "fb") + std::to_string(n_t);
  }
  l.label = std::move(label);
  check_ladder(l);
  return l;
}

std::vector<TemperatureLadder> standard_ladders() {
  return {
      make_ladder(32, 0.1, 5.0, LadderSpacing::Log, 8, "B5"),
      make_ladder(24, 0.2, 10.0, LadderSpacing::FeedbackInit, 6, "F24"),
      make_ladder(32, 0.2, 10.0, LadderSpacing::FeedbackInit, 8, "F32"),
      make_ladder(32, 0.1, 20.0, LadderSpacing::Log, 8, "B20"),
  };
}

std::optional<std::uint64_t> RunTrace::first_hit(std::int64_t threshold_units) const {
  for (const auto& e : events) {
    if (e.best_units <= threshold_units) return e.sweep;
  }
  return std::nullopt;
}

std::uint64_t RunTrace::last_improvement() const {
  if (events.empty()) return 0;
  const std::int64_t best = events.back().best_units;
  for (const auto& e : events) {
    if (e.best_units == best) return e.sweep;
  }
  return events.back().sweep;
}

void save_trace(std::ostream& out, const RunTrace& trace, const std::string& instance_hash) {
  char spw[40];
  std::snprintf(spw, sizeof spw, "%.17g", trace.seconds_per_sweep);
  out << "#trace instance=" << instance_hash << " ladder=" << (trace.label.empty() ? "-" : trace.label)
      << " seed=" << trace.seed << " sweeps=" << trace.sweeps_total << " spw=" << spw
      << " denom=" << trace.denominator << '\n';
  for (const auto& e : trace.events) out << e.sweep << ' ' << e.best_units << '\n';
}

RunTrace load_trace(std::istream& in, std::string* instance_hash) {
  RunTrace t;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty trace file", 1);
  ++line_no;
  std::istringstream hs(line);
  std::string tag;
  hs >> tag;
  if (tag != "#trace") throw ParseError("expected #trace header", line_no);
  std::map<std::string, std::string> kv;
  for (std::string tok; hs >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header field '" + tok + "'", line_no);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  try {
    for (const char* key : {"instance", "ladder", "seed", "sweeps", "spw"}) {
      if (!kv.count(key)) throw ParseError(std::string("header missing ") + key, line_no);
    }
    if (instance_hash) *instance_hash = kv["instance"];
    t.label = kv["ladder"] == "-" ? "" : kv["ladder"];
    t.seed = std::stoull(kv["seed"]);
    t.sweeps_total = std::stoull(kv["sweeps"]);
    t.seconds_per_sweep = std::stod(kv["spw"]);
    t.denominator = kv.count("denom") ? std::stoll(kv["denom"]) : 1;
  } catch (const std::logic_error&) {
    throw ParseError("bad numeric header value", line_no);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    TraceEvent e;
    std::string rest;
    if (!(ls >> e.sweep >> e.best_units) || (ls >> rest)) throw ParseError("expected '<sweep> <energy>'", line_no);
    if (!t.events.empty() && (e.best_units > t.events.back().best_units || e.sweep < t.events.back().sweep)) {
      throw ParseError("trace is not monotone", line_no);
    }
    e.seconds = static_cast<double>(e.sweep) * t.seconds_per_sweep;
    t.events.push_back(e);
  }
  return t;
}

PtState::PtState(const Instance& instance, const TemperatureLadder& ladder, std::uint64_t seed)
    : instance_(&instance), ladder_(ladder), rng_(seed) {
  check_ladder(ladder_);
  const std::size_t n = instance.num_spins();
  const std::size_t nt = ladder_.size();
  std::uint32_t id = 0;
  for (int c = 0; c < 2; ++c) {
    spins_[c].resize(nt);
    energy_[c].resize(nt);
    ids_[c].resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      auto& s = spins_[c][t];
      s.resize(n);
      for (auto& x : s) x = static_cast<Spin>(rng_.spin());
      energy_[c][t] = instance.energy_units(s);
      ids_[c][t] = id++;
    }
  }
  max_field_ = instance.max_local_field_units();
  if (max_field_ <= (1 << 16)) {
    accept_.resize(nt);
    const double den = static_cast<double>(instance.denominator());
    for (std::size_t t = 0; t < nt; ++t) {
      accept_[t].resize(max_field_ + 1);
      for (std::int64_t f = 0; f <= max_field_; ++f) {
        accept_[t][f] = std::exp(-2.0 * ladder_.betas[t] * static_cast<double>(f) / den);
      }
    }
  }
  mark_.assign(n, 0);
}

double PtState::acceptance(std::size_t t, std::int64_t field) const {
  if (!accept_.empty()) return accept_[t][field];
  return std::exp(-2.0 * ladder_.betas[t] * static_cast<double>(field) /
                  static_cast<double>(instance_->denominator()));
}

void PtState::set_spins(int chain, std::size_t t, SpinConfig spins) {
  energy_[chain][t] = instance_->energy_units(spins);
  spins_[chain][t] = std::move(spins);
}

std::size_t PtState::metropolis_sweep(int chain, std::size_t t) {
  auto& s = spins_[chain][t];
  std::int64_t e = energy_[chain][t];
  const Graph& g = instance_->graph();
  const auto J = instance_->couplings();
  const auto h = instance_->fields();
  std::size_t accepted = 0;
  const NodeId n = static_cast<NodeId>(s.size());
  for (NodeId v = 0; v < n; ++v) {
    std::int64_t f = h[v];
    for (const auto& nb : g.neighbors(v)) f += static_cast<std::int64_t>(J[nb.edge]) * s[nb.node];
    // flipping changes the energy by -2 s_v f
    const std::int64_t sf = s[v] * f;
    if (sf >= 0 || rng_.uniform() < acceptance(t, -sf)) {
      e -= 2 * sf;
      s[v] = static_cast<Spin>(-s[v]);
      ++accepted;
    }
  }
  energy_[chain][t] = e;
  return accepted;
}

std::size_t PtState::pt_exchange(int chain) {
  const std::size_t nt = ladder_.size();
  const double den = static_cast<double>(instance_->denominator());
  std::size_t accepted = 0;
  for (std::size_t t = parity_[chain]; t + 1 < nt; t += 2) {
    const double arg = (ladder_.betas[t] - ladder_.betas[t + 1]) *
                       static_cast<double>(energy_[chain][t] - energy_[chain][t + 1]) / den;
    if (arg >= 0.0 || rng_.uniform() < std::exp(arg)) {
      std::swap(spins_[chain][t], spins_[chain][t + 1]);
      std::swap(energy_[chain][t], energy_[chain][t + 1]);
      std::swap(ids_[chain][t], ids_[chain][t + 1]);
      ++accepted;
    }
  }
  parity_[chain] ^= 1;
  return accepted;
}

std::size_t PtState::icm_move(std::size_t t) {
  auto& a = spins_[0][t];
  auto& b = spins_[1][t];
  const NodeId n = static_cast<NodeId>(a.size());
  std::size_t disagree = 0;
  for (NodeId v = 0; v < n; ++v) disagree += (a[v] != b[v]);
  if (disagree == 0) return 0;
  std::uint64_t pick = rng_.index(disagree);
  NodeId seed = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (a[v] != b[v] && pick-- == 0) {
      seed = v;
      break;
    }
  }

  if (++mark_gen_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    mark_gen_ = 1;
  }
  const Graph& g = instance_->graph();
  cluster_.clear();
  stack_.clear();
  stack_.push_back(seed);
  mark_[seed] = mark_gen_;
  while (!stack_.empty()) {
    const NodeId v = stack_.back();
    stack_.pop_back();
    cluster_.push_back(v);
    for (const auto& nb : g.neighbors(v)) {
      if (mark_[nb.node] != mark_gen_ && a[nb.node] != b[nb.node]) {
        mark_[nb.node] = mark_gen_;
        stack_.push_back(nb.node);
      }
    }
  }

  const auto J = instance_->couplings();
  const auto h = instance_->fields();
  std::int64_t da = 0;
  std::int64_t db = 0;
  for (const NodeId v : cluster_) {
    da -= 2 * static_cast<std::int64_t>(h[v]) * a[v];
    db -= 2 * static_cast<std::int64_t>(h[v]) * b[v];
    for (const auto& nb : g.neighbors(v)) {
      if (mark_[nb.node] == mark_gen_) continue;
      da -= 2 * static_cast<std::int64_t>(J[nb.edge]) * a[v] * a[nb.node];
      db -= 2 * static_cast<std::int64_t>(J[nb.edge]) * b[v] * b[nb.node];
    }
  }
  for (const NodeId v : cluster_) {
    a[v] = static_cast<Spin>(-a[v]);
    b[v] = static_cast<Spin>(-b[v]);
  }
  energy_[0][t] += da;
  energy_[1][t] += db;
  return cluster_.size();
}

void PtState::sweep() {
  const std::size_t nt = ladder_.size();
  for (int c = 0; c < 2; ++c) {
    for (std::size_t t = 0; t < nt; ++t) metropolis_sweep(c, t);
  }
  pt_exchange(0);
  pt_exchange(1);
  for (std::size_t t = nt - ladder_.n_icm; t < nt; ++t) icm_move(t);
  ++sweeps_;
}

std::int64_t PtState::best_units(int* chain, std::size_t* t) const {
  std::int64_t best = energy_[0][0];
  int bc = 0;
  std::size_t bt = 0;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < energy_[c].size(); ++i) {
      if (energy_[c][i] < best) {
        best = energy_[c][i];
        bc = c;
        bt = i;
      }
    }
  }
  if (chain) *chain = bc;
  if (t) *t = bt;
  return best;
}

bool PtState::energies_consistent() const {
  for (int c = 0; c < 2; ++c) {
    for (std::size_t t = 0; t < spins_[c].size(); ++t) {
      if (instance_->energy_units(spins_[c][t]) != energy_[c][t]) return false;
    }
  }
  return true;
}

RunTrace run_pticm(const Instance& instance, const TemperatureLadder& ladder, std::uint64_t seed,
                   const PticmOptions& options) {
  PtState st(instance, ladder, seed);
  RunTrace tr;
  tr.denominator = instance.denominator();
  tr.seed = seed;
  tr.seconds_per_sweep = options.seconds_per_sweep;
  tr.label = ladder.label;
  int c = 0;
  std::size_t t = 0;
  std::int64_t best = st.best_units(&c, &t);
  tr.best_config = st.spins(c, t);
  tr.events.push_back({0, 0.0, best});
  std::uint64_t sw = 0;
  const auto reached = [&] { return options.stop_at && best <= *options.stop_at; };
  while (sw < options.sweeps && !reached()) {
    st.sweep();
    ++sw;
    const std::int64_t b = st.best_units(&c, &t);
    if (b < best) {
      best = b;
      tr.best_config = st.spins(c, t);
      tr.events.push_back({sw, sw * options.seconds_per_sweep, best});
    } else if (options.record_cadence && sw % options.record_cadence == 0) {
      tr.events.push_back({sw, sw * options.seconds_per_sweep, best});
    }
  }
  tr.sweeps_total = sw;
  return tr;
}

DiffusionProfile measure_diffusion(std::span<const Instance> instances,
                                   const TemperatureLadder& ladder, std::uint64_t sweeps,
                                   std::uint64_t seed) {
  if (instances.empty()) throw InvalidInput("diffusion needs at least one instance");
  const std::size_t nt = ladder.size();
  DiffusionProfile p;
  p.f.assign(nt, 0.0);
  p.visits.assign(nt, 0);
  std::vector<std::uint64_t> cold(nt, 0);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    PtState st(instances[i], ladder, derive_key({seed, i, 0xfb}));
    // 0 unlabelled, 1 last end was coldest, 2 last end was hottest
    std::vector<std::uint8_t> label(2 * nt, 0);
    for (std::uint64_t s = 0; s < sweeps; ++s) {
      st.sweep();
      for (int c = 0; c < 2; ++c) {
        const std::uint32_t top = st.replica_id(c, nt - 1);
        const std::uint32_t bottom = st.replica_id(c, 0);
        label[top] = 1;
        if (label[bottom] == 1) ++p.round_trips;
        label[bottom] = 2;
        for (std::size_t t = 0; t < nt; ++t) {
          const std::uint8_t l = label[st.replica_id(c, t)];
          if (l == 0) continue;
          ++p.visits[t];
          cold[t] += (l == 1);
        }
      }
    }
  }
  for (std::size_t t = 0; t < nt; ++t) {
    p.f[t] = p.visits[t] ? static_cast<double>(cold[t]) / static_cast<double>(p.visits[t]) : 0.0;
  }
  return p;
}

double diffusion_deviation(const DiffusionProfile& profile) {
  const std::size_t n = profile.f.size();
  double dev = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    dev = std::max(dev, std::abs(profile.f[t] - static_cast<double>(t) / static_cast<double>(n - 1)));
  }
  return dev;
}

namespace {

// Places interior temperatures so that the density eta ~ sqrt(df/dbeta)
// carries equal mass between neighbours.
std::vector<double> redistribute(const std::vector<double>& betas, const std::vector<double>& f) {
  const std::size_t n = betas.size();
  std::vector<double> eta(n - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double db = betas[i + 1] - betas[i];
    const double df = std::max(f[i + 1] - f[i], 1e-3 / static_cast<double>(n));
    eta[i] = std::sqrt(df / db);
    total += eta[i] * db;
  }
  std::vector<double> out(n);
  out.front() = betas.front();
  out.back() = betas.back();
  double cum = 0.0;
  std::size_t seg = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 1 < n - 1 && cum + eta[seg] * (betas[seg + 1] - betas[seg]) < target) {
      cum += eta[seg] * (betas[seg + 1] - betas[seg]);
      ++seg;
    }
    out[k] = betas[seg] + (target - cum) / eta[seg];
  }
  return out;
}

}  // namespace

FeedbackResult feedback_optimize(const TemperatureLadder& ladder,
                                 std::span<const Instance> instances,
                                 const FeedbackOptions& options) {
  check_ladder(ladder);
  FeedbackResult r;
  r.ladder = ladder;
  if (options.rounds <= 0) return r;
  if (instances.empty()) throw InvalidInput("feedback optimization needs instances");
  for (int round = 0; round < options.rounds; ++round) {
    const auto prof = measure_diffusion(instances, r.ladder, options.sweeps_per_round,
                                        derive_key({options.seed, static_cast<std::uint64_t>(round)}));
    const bool sparse = std::any_of(prof.visits.begin(), prof.visits.end(),
                                    [](std::uint64_t v) { return v == 0; });
    if (prof.round_trips < options.min_round_trips || sparse) {
      r.converged = false;
      r.note = "round " + std::to_string(round + 1) + ": " + std::to_string(prof.round_trips) +
               " round trips, too few to estimate f";
      return r;
    }
    TemperatureLadder next = r.ladder;
    next.betas = redistribute(r.ladder.betas, prof.f);
    try {
      check_ladder(next);
    } catch (const InvalidInput& e) {
      r.converged = false;
      r.note = std::string("round ") + std::to_string(round + 1) + ": " + e.what();
      return r;
    }
    r.ladder = std::move(next);
    r.rounds_completed = round + 1;
  }
  return r;
}

std::uint64_t sweeps_to_quantile(std::span<const std::uint64_t> hit_sweeps, double q) {
  if (hit_sweeps.empty()) throw InvalidInput("sweeps_to_quantile needs at least one instance");
  if (!(q > 0.0 && q <= 1.0)) throw InvalidInput("quantile must lie in (0, 1]");
  std::vector<std::uint64_t> s(hit_sweeps.begin(), hit_sweeps.end());
  std::sort(s.begin(), s.end());
  const double pos = std::ceil(q * static_cast<double>(s.size()) - 1e-9);
  const std::size_t idx = static_cast<std::size_t>(std::max(1.0, pos)) - 1;
  return s[std::min(idx, s.size() - 1)];
}

std::uint64_t sweeps_to_quantile(std::span<const RunTrace> traces, double q) {
  std::vector<std::uint64_t> hits;
  hits.reserve(traces.size());
  for (const auto& t : traces) hits.push_back(t.last_improvement());
  return sweeps_to_quantile(std::span<const std::uint64_t>(hits), q);
}

}  // namespace sgbench
