#include "core/qac.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "core/baselines.hpp"
#include "core/errors.hpp"
#include "core/pticm.hpp"
#include "core/rng.hpp"

namespace sgbench {

std::string to_string(QacMode m) { return m == QacMode::QAC ? "QAC" : "U3"; }

QacMode parse_qac_mode(const std::string& s) {
  if (s == "QAC") return QacMode::QAC;
  if (s == "U3") return QacMode::U3;
  throw InvalidInput("unknown QAC mode '" + s + "'");
}

PhysicalProblem encode(const Instance& logical, const QacLayout& layout, QacMode mode,
                       const Rational& penalty) {
  const LogicalGraph& lg = layout.logical;
  if (logical.num_spins() != lg.graph.num_nodes() || logical.graph().edges() != lg.graph.edges()) {
    throw InvalidInput("logical instance does not live on the layout's logical graph");
  }
  if (layout.embedding.groups.size() != lg.graph.num_nodes()) {
    throw InvalidInput("embedding has " + std::to_string(layout.embedding.groups.size()) +
                       " groups for " + std::to_string(lg.graph.num_nodes()) + " logical nodes");
  }
  if (penalty < Rational(0)) throw InvalidInput("penalty strength must be non-negative");
  PhysicalProblem p;
  p.mode = mode;
  p.penalty = mode == QacMode::QAC ? penalty : Rational(0);
  if (mode == QacMode::QAC) {
    p.penalty_off_grid = !(penalty == Rational(1, 10) || penalty == Rational(2, 10) || penalty == Rational(3, 10));
  }
  const std::int64_t den = lcm_checked(logical.denominator(), p.penalty.den());
  const std::int64_t scale = den / logical.denominator();
  const std::int64_t pen = p.penalty.num() * (den / p.penalty.den());

  const std::size_t n = lg.graph.num_nodes();
  std::vector<Edge> edges;
  std::vector<std::int32_t> j;
  for (std::size_t e = 0; e < lg.graph.num_edges(); ++e) {
    const auto [a, b] = lg.graph.edges()[e];
    const SupportMask m = lg.support[e];
    if (support_count(m) < 3) ++p.partial_edges;
    for (int c = 0; c < 3; ++c) {
      if (!(m & (1u << c))) continue;
      edges.push_back({physical_index(a, c), physical_index(b, c)});
      j.push_back(static_cast<std::int32_t>(logical.couplings()[e] * scale));
    }
  }
  if (mode == QacMode::QAC && pen != 0) {
    for (NodeId g = 0; g < n; ++g) {
      for (int c = 0; c < 3; ++c) {
        edges.push_back({physical_index(g, c), physical_index(g, kPenaltySlot)});
        j.push_back(static_cast<std::int32_t>(-pen));
      }
    }
  }
  std::vector<std::int32_t> h(4 * n, 0);
  for (NodeId g = 0; g < n; ++g) {
    for (int c = 0; c < 3; ++c) h[physical_index(g, c)] = static_cast<std::int32_t>(logical.fields()[g] * scale);
  }
  p.qubits.resize(4 * n);
  for (NodeId g = 0; g < n; ++g) {
    const auto& grp = layout.embedding.groups[g];
    for (int c = 0; c < 3; ++c) p.qubits[physical_index(g, c)] = grp.data[c];
    p.qubits[physical_index(g, kPenaltySlot)] = grp.penalty;
  }
  auto graph = std::make_shared<Graph>(4 * n, std::move(edges));
  p.instance = Instance(std::move(graph), std::move(j), std::move(h), den, DisorderClass::Custom, logical.seed());
  return p;
}

std::size_t SampleSet::num_gauges() const {
  std::size_t g = 0;
  for (std::size_t i = 0; i < gauge_ids.size(); ++i) g += (i == 0 || gauge_ids[i] != gauge_ids[i - 1]);
  return g;
}

void save_samples(std::ostream& out, const SampleSet& s) {
  char tf[40];
  std::snprintf(tf, sizeof tf, "%.17g", s.tf_us);
  out << "#samples mode=" << to_string(s.mode) << " tf_us=" << tf << " gauges=" << s.num_gauges()
      << " reads=" << s.reads.size() << " sampler=" << (s.sampler.empty() ? "-" : s.sampler) << '\n';
  std::string line;
  for (std::size_t i = 0; i < s.reads.size(); ++i) {
    line.clear();
    for (const Spin x : s.reads[i]) line.push_back(x > 0 ? '+' : x < 0 ? '-' : '?');
    out << s.gauge_ids[i] << ' ' << line << '\n';
  }
}

SampleSet load_samples(std::istream& in) {
  SampleSet s;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty sample file", 1);
  std::istringstream hs(line);
  std::string tag;
  hs >> tag;
  if (tag != "#samples") throw ParseError("expected #samples header", 1);
  std::map<std::string, std::string> kv;
  for (std::string tok; hs >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header field '" + tok + "'", 1);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"mode", "tf_us", "gauges", "reads"}) {
    if (!kv.count(key)) throw ParseError(std::string("header missing ") + key, 1);
  }
  std::size_t reads = 0, gauges = 0;
  try {
    s.mode = parse_qac_mode(kv["mode"]);
    s.tf_us = std::stod(kv["tf_us"]);
    reads = std::stoull(kv["reads"]);
    gauges = std::stoull(kv["gauges"]);
  } catch (const InvalidInput& e) {
    throw ParseError(e.what(), 1);
  } catch (const std::logic_error&) {
    throw ParseError("bad numeric header value", 1);
  }
  s.sampler = kv.count("sampler") && kv["sampler"] != "-" ? kv["sampler"] : "";
  std::map<std::uint32_t, bool> closed;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::uint32_t g = 0;
    std::string spins, extra;
    if (!(ls >> g >> spins) || (ls >> extra)) throw ParseError("expected '<gauge> <spins>'", line_no);
    if (!s.reads.empty() && s.reads.front().size() != spins.size()) {
      throw ParseError("read length " + std::to_string(spins.size()) + " differs from " +
                       std::to_string(s.reads.front().size()), line_no);
    }
    if (!s.gauge_ids.empty() && s.gauge_ids.back() != g) {
      closed[s.gauge_ids.back()] = true;
      if (closed.count(g)) throw ParseError("gauge " + std::to_string(g) + " is not contiguous", line_no);
    }
    SpinConfig r(spins.size());
    for (std::size_t i = 0; i < spins.size(); ++i) {
      switch (spins[i]) {
        case '+': r[i] = 1; break;
        case '-': r[i] = -1; break;
        case '?': r[i] = 0; break;
        default: throw ParseError(std::string("bad spin character '") + spins[i] + "'", line_no);
      }
    }
    s.gauge_ids.push_back(g);
    s.reads.push_back(std::move(r));
  }
  if (s.reads.size() != reads) {
    throw ParseError("header says " + std::to_string(reads) + " reads, file has " + std::to_string(s.reads.size()),
                     line_no);
  }
  if (s.num_gauges() != gauges) throw ParseError("header gauge count does not match reads", line_no);
  return s;
}

namespace {

void check_read_size(const SampleSet& samples, const Instance& logical) {
  for (const auto& r : samples.reads) {
    if (r.size() != 4 * logical.num_spins()) {
      throw InvalidInput("read has " + std::to_string(r.size()) + " qubits, expected " +
                         std::to_string(4 * logical.num_spins()));
    }
  }
}

}  // namespace

LogicalSampleSet decode_qac(const SampleSet& samples, const Instance& logical) {
  if (samples.mode != QacMode::QAC) throw InvalidInput("decode_qac needs QAC samples");
  check_read_size(samples, logical);
  LogicalSampleSet out;
  out.mode = QacMode::QAC;
  out.tf_us = samples.tf_us;
  out.denominator = logical.denominator();
  const std::size_t n = logical.num_spins();
  for (std::size_t i = 0; i < samples.reads.size(); ++i) {
    const auto& r = samples.reads[i];
    SpinConfig s(n);
    bool ok = true;
    for (NodeId g = 0; g < n && ok; ++g) {
      int sum = 0;
      for (int c = 0; c < 3; ++c) {
        const Spin x = r[physical_index(g, c)];
        if (x == 0) ok = false;
        sum += x;
      }
      s[g] = sum > 0 ? 1 : -1;
    }
    if (!ok) {
      ++out.dropped;
      continue;
    }
    out.energy_units.push_back(logical.energy_units(s));
    out.spins.push_back(std::move(s));
    out.gauge_ids.push_back(samples.gauge_ids[i]);
    out.copy.push_back(0);
  }
  return out;
}

LogicalSampleSet decode_u3(const SampleSet& samples, const Instance& logical) {
  if (samples.mode != QacMode::U3) throw InvalidInput("decode_u3 needs U3 samples");
  check_read_size(samples, logical);
  LogicalSampleSet out;
  out.mode = QacMode::U3;
  out.tf_us = samples.tf_us;
  out.denominator = logical.denominator();
  const std::size_t n = logical.num_spins();
  for (std::size_t i = 0; i < samples.reads.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      SpinConfig s(n);
      bool ok = true;
      for (NodeId g = 0; g < n; ++g) {
        s[g] = samples.reads[i][physical_index(g, c)];
        ok = ok && s[g] != 0;
      }
      if (!ok) {
        ++out.dropped;
        continue;
      }
      out.energy_units.push_back(logical.energy_units(s));
      out.spins.push_back(std::move(s));
      out.gauge_ids.push_back(samples.gauge_ids[i]);
      out.copy.push_back(static_cast<std::uint8_t>(c));
    }
  }
  return out;
}

LogicalSampleSet decode(const SampleSet& samples, const Instance& logical) {
  return samples.mode == QacMode::QAC ? decode_qac(samples, logical) : decode_u3(samples, logical);
}

std::vector<SpinConfig> AnnealingSampler::sample(const SampleRequest& rq) {
  const auto sweeps = static_cast<std::uint64_t>(std::max(1.0, std::round(sweeps_per_us_ * rq.tf_us)));
  const auto schedule = geometric_schedule(beta_min_, beta_max_, std::min<std::uint64_t>(sweeps, 64));
  std::vector<SpinConfig> reads;
  reads.reserve(rq.n_reads);
  for (std::size_t i = 0; i < rq.n_reads; ++i) {
    reads.push_back(anneal_read(*rq.problem, schedule, sweeps, derive_key({rq.seed, i})));
  }
  return reads;
}

std::vector<SpinConfig> TemperingSampler::sample(const SampleRequest& rq) {
  const auto sweeps = static_cast<std::uint64_t>(std::max(1.0, std::round(sweeps_per_us_ * rq.tf_us)));
  const auto ladder = make_ladder(n_t_, beta_min_, beta_max_, LadderSpacing::Log, 1, "sampler");
  std::vector<SpinConfig> reads;
  reads.reserve(rq.n_reads);
  for (std::size_t i = 0; i < rq.n_reads; ++i) {
    PtState st(*rq.problem, ladder, derive_key({rq.seed, i}));
    for (std::uint64_t s = 0; s < sweeps; ++s) st.sweep();
    reads.push_back(st.spins(0, ladder.size() - 1));
  }
  return reads;
}

std::vector<SpinConfig> ExactSampler::sample(const SampleRequest& rq) {
  const auto bf = brute_force(*rq.problem, 4096);
  std::vector<SpinConfig> reads;
  reads.reserve(rq.n_reads);
  for (std::size_t i = 0; i < rq.n_reads; ++i) {
    reads.push_back(bf.ground_states[counter_uniform_index(derive_key({rq.seed, i}), bf.ground_states.size())]);
  }
  return reads;
}

std::vector<SpinConfig> RecordedSampler::sample(const SampleRequest& rq) {
  if (next_ + rq.n_reads > recorded_.reads.size()) {
    throw StateError("recorded sample set exhausted after " + std::to_string(next_) + " reads");
  }
  std::vector<SpinConfig> reads;
  for (std::size_t i = 0; i < rq.n_reads; ++i) {
    const auto& r = recorded_.reads[next_++];
    if (r.size() != rq.problem->num_spins()) throw InvalidInput("recorded read length does not match problem");
    reads.push_back(rq.gauge ? apply_gauge_config(r, *rq.gauge) : r);
  }
  return reads;
}

SampleSet sample(Sampler& sampler, const PhysicalProblem& physical, double tf_us,
                 std::size_t n_reads, std::span<const Gauge> gauges, std::uint64_t seed) {
  if (n_reads == 0) throw InvalidInput("n_reads must be >= 1");
  if (gauges.empty()) throw InvalidInput("at least one gauge is required");
  SampleSet out;
  out.mode = physical.mode;
  out.tf_us = tf_us;
  out.sampler = sampler.id();
  const std::size_t per = n_reads / gauges.size();
  const std::size_t extra = n_reads % gauges.size();
  for (std::size_t gi = 0; gi < gauges.size(); ++gi) {
    const Gauge& g = gauges[gi];
    const std::size_t n = per + (gi < extra ? 1 : 0);
    if (n == 0) continue;
    const Instance gauged = apply_gauge(physical.instance, g);
    SampleRequest rq{&gauged, &g, tf_us, n, derive_key({seed, g.id})};
    std::vector<SpinConfig> reads;
    try {
      reads = sampler.sample(rq);
    } catch (const std::exception& e) {
      throw Error("sampler '" + sampler.id() + "' failed on gauge " + std::to_string(g.id) + ": " + e.what());
    }
    if (reads.size() != n) {
      throw Error("sampler '" + sampler.id() + "' returned " + std::to_string(reads.size()) + " reads for gauge " +
                  std::to_string(g.id) + ", expected " + std::to_string(n));
    }
    for (auto& r : reads) {
      out.reads.push_back(apply_gauge_config(r, g));
      out.gauge_ids.push_back(g.id);
    }
  }
  return out;
}

}  // namespace sgbench
