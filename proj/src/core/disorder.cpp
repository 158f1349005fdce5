#include "core/disorder.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "core/errors.hpp"
#include "core/hash.hpp"
#include "core/rng.hpp"

namespace sgbench {

std::string to_string(DisorderClass c) {
  switch (c) {
    case DisorderClass::Binomial: return "binomial";
    case DisorderClass::Sidon28: return "S28";
    case DisorderClass::Range6: return "R6";
    case DisorderClass::Custom: return "custom";
  }
  return "custom";
}

DisorderClass parse_disorder_class(const std::string& name) {
  if (name == "binomial") return DisorderClass::Binomial;
  if (name == "S28") return DisorderClass::Sidon28;
  if (name == "R6") return DisorderClass::Range6;
  if (name == "custom") return DisorderClass::Custom;
  throw InvalidInput("unknown disorder class '" + name + "'");
}

CouplingSet coupling_set(DisorderClass c) {
  switch (c) {
    case DisorderClass::Binomial: return {1, {1}};
    case DisorderClass::Sidon28: return {28, {8, 13, 19, 28}};
    case DisorderClass::Range6: return {6, {1, 2, 3, 4, 5, 6}};
    case DisorderClass::Custom: break;
  }
  throw InvalidInput("custom disorder has no built-in coupling set");
}

Instance::Instance(std::shared_ptr<const Graph> graph, std::vector<std::int32_t> couplings,
                   std::vector<std::int32_t> fields, std::int64_t denominator,
                   DisorderClass disorder, std::uint64_t seed)
    : graph_(std::move(graph)),
      couplings_(std::move(couplings)),
      fields_(std::move(fields)),
      denominator_(denominator),
      disorder_(disorder),
      seed_(seed) {
  if (!graph_) throw InvalidInput("instance needs a graph");
  if (denominator_ <= 0) throw InvalidInput("denominator must be positive");
  if (couplings_.size() != graph_->num_edges()) throw InvalidInput("coupling count != edge count");
  if (fields_.empty()) fields_.assign(graph_->num_nodes(), 0);
  if (fields_.size() != graph_->num_nodes()) throw InvalidInput("field count != node count");
  has_fields_ = std::any_of(fields_.begin(), fields_.end(), [](std::int32_t h) { return h != 0; });
}

std::int64_t Instance::energy_units(std::span<const Spin> spins) const {
  if (spins.size() != num_spins()) {
    throw InvalidInput("configuration has " + std::to_string(spins.size()) + " spins, instance has " +
                       std::to_string(num_spins()));
  }
  std::int64_t e = 0;
  for (std::size_t v = 0; v < fields_.size(); ++v) e += static_cast<std::int64_t>(fields_[v]) * spins[v];
  const auto& edges = graph_->edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    e += static_cast<std::int64_t>(couplings_[i]) * spins[edges[i].a] * spins[edges[i].b];
  }
  return e;
}

std::int64_t Instance::local_field_units(std::span<const Spin> spins, NodeId v) const noexcept {
  std::int64_t f = fields_[v];
  for (const auto& n : graph_->neighbors(v)) f += static_cast<std::int64_t>(couplings_[n.edge]) * spins[n.node];
  return f;
}

std::int64_t Instance::max_local_field_units() const noexcept {
  std::int64_t best = 0;
  for (NodeId v = 0; v < num_spins(); ++v) {
    std::int64_t f = std::abs(fields_[v]);
    for (const auto& n : graph_->neighbors(v)) f += std::abs(couplings_[n.edge]);
    best = std::max(best, f);
  }
  return best;
}

Instance Instance::rebind(std::shared_ptr<const Graph> graph) const {
  if (!graph || graph->num_nodes() != num_spins() || graph->edges() != graph_->edges()) {
    throw InvalidInput("rebind requires a graph with identical edges");
  }
  return Instance(std::move(graph), couplings_, fields_, denominator_, disorder_, seed_);
}

bool operator==(const Instance& a, const Instance& b) {
  return a.denominator_ == b.denominator_ && a.disorder_ == b.disorder_ && a.seed_ == b.seed_ &&
         a.couplings_ == b.couplings_ && a.fields_ == b.fields_ &&
         a.graph_->num_nodes() == b.graph_->num_nodes() && a.graph_->edges() == b.graph_->edges();
}

Instance generate_instance(std::shared_ptr<const Graph> graph, DisorderClass disorder,
                           std::uint64_t seed) {
  if (!graph || graph->num_nodes() == 0) throw InvalidInput("cannot generate on an empty graph");
  const CouplingSet set = coupling_set(disorder);
  const std::uint64_t choices = 2 * set.magnitudes.size();
  std::vector<std::int32_t> couplings(graph->num_edges());
  for (std::size_t e = 0; e < couplings.size(); ++e) {
    const std::uint64_t pick = counter_uniform_index(derive_key({seed, e, 0x4a}), choices);
    const std::int32_t mag = set.magnitudes[pick / 2];
    couplings[e] = (pick % 2) ? -mag : mag;
  }
  return Instance(std::move(graph), std::move(couplings), {}, set.denominator, disorder, seed);
}

Gauge random_gauge(std::size_t n, std::uint64_t seed, std::uint32_t id) {
  Gauge g;
  g.id = id;
  g.signs.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    g.signs[v] = (mix64(derive_key({seed, id, 0x6a, v})) >> 63) ? -1 : 1;
  }
  return g;
}

Gauge identity_gauge(std::size_t n, std::uint32_t id) {
  return Gauge{id, std::vector<Spin>(n, 1)};
}

Instance apply_gauge(const Instance& instance, const Gauge& gauge) {
  const Graph& g = instance.graph();
  if (gauge.signs.size() != g.num_nodes()) throw InvalidInput("gauge size does not match instance");
  std::vector<std::int32_t> j(instance.couplings().begin(), instance.couplings().end());
  std::vector<std::int32_t> h(instance.fields().begin(), instance.fields().end());
  for (std::size_t e = 0; e < j.size(); ++e) {
    j[e] *= gauge.signs[g.edges()[e].a] * gauge.signs[g.edges()[e].b];
  }
  for (std::size_t v = 0; v < h.size(); ++v) h[v] *= gauge.signs[v];
  return Instance(instance.graph_ptr(), std::move(j), std::move(h), instance.denominator(),
                  instance.disorder(), instance.seed());
}

SpinConfig apply_gauge_config(std::span<const Spin> config, const Gauge& gauge) {
  if (gauge.signs.size() != config.size()) throw InvalidInput("gauge size does not match configuration");
  SpinConfig out(config.size());
  for (std::size_t v = 0; v < config.size(); ++v) out[v] = static_cast<Spin>(config[v] * gauge.signs[v]);
  return out;
}

SidonReport sidon_property_check(std::span<const Rational> values, int max_subset) {
  SidonReport r;
  std::vector<Rational> vals(values.begin(), values.end());
  for (const auto& v : vals) {
    if (v <= Rational(0)) throw InvalidInput("Sidon check needs positive values");
  }
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

  r.pair_sum_free = true;
  for (std::size_t i = 0; i < vals.size() && r.pair_sum_free; ++i) {
    for (std::size_t j = i; j < vals.size(); ++j) {
      const Rational s = vals[i] + vals[j];
      if (std::binary_search(vals.begin(), vals.end(), s)) {
        r.pair_sum_free = false;
        r.pair_witness = {vals[i], vals[j], s};
        break;
      }
    }
  }

  // Positive values never sum to zero without signs.
  r.unsigned_zero_sum_free = true;

  // Depth-first over multisets in non-decreasing value order, each value
  // carrying one sign (+1, -1) for all its copies.
  r.signed_zero_sum_free = true;
  std::vector<Rational> terms;
  std::function<bool(std::size_t, Rational, int)> search = [&](std::size_t start, Rational sum,
                                                               int remaining) -> bool {
    if (!terms.empty() && sum == Rational(0)) return true;
    if (remaining == 0) return false;
    for (std::size_t i = start; i < vals.size(); ++i) {
      for (int copies = 1; copies <= remaining; ++copies) {
        for (const int sign : {1, -1}) {
          for (int c = 0; c < copies; ++c) terms.push_back(sign > 0 ? vals[i] : -vals[i]);
          const Rational next = sum + Rational(sign * copies) * vals[i];
          if (search(i + 1, next, remaining - copies)) return true;
          terms.resize(terms.size() - copies);
        }
      }
    }
    return false;
  };
  if (max_subset > 0 && search(0, Rational(0), max_subset)) {
    r.signed_zero_sum_free = false;
    r.zero_witness = terms;
  }
  return r;
}

void save_instance(std::ostream& out, const Instance& instance) {
  const Graph& g = instance.graph();
  out << "#instance class=" << to_string(instance.disorder()) << " denom=" << instance.denominator()
      << " seed=" << instance.seed() << " N=" << g.num_nodes() << '\n';
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (instance.fields()[v] != 0) out << "h " << v << ' ' << instance.fields()[v] << '\n';
  }
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    out << "J " << g.edges()[e].a << ' ' << g.edges()[e].b << ' ' << instance.couplings()[e] << '\n';
  }
}

namespace {

std::int64_t parse_int(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("expected integer, got '" + tok + "'", line);
  }
  if (used != tok.size()) throw ParseError("expected integer, got '" + tok + "'", line);
  return v;
}

}  // namespace

Instance load_instance(std::istream& in) {
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;
  DisorderClass disorder = DisorderClass::Custom;
  std::int64_t denom = 1;
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  std::vector<std::int32_t> fields;
  std::vector<Edge> edges;
  std::vector<std::int32_t> couplings;
  std::map<std::pair<NodeId, NodeId>, std::size_t> seen;
  while (std::getline(in, text)) {
    ++line_no;
    if (!have_header) {
      std::istringstream ss(text);
      std::string tag;
      ss >> tag;
      if (tag != "#instance") throw ParseError("expected #instance header", line_no);
      std::map<std::string, std::string> kv;
      for (std::string tok; ss >> tok;) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError("malformed header field '" + tok + "'", line_no);
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
      for (const char* key : {"class", "denom", "seed", "N"}) {
        if (!kv.count(key)) throw ParseError(std::string("header missing ") + key, line_no);
      }
      try {
        disorder = parse_disorder_class(kv["class"]);
      } catch (const InvalidInput& e) {
        throw ParseError(e.what(), line_no);
      }
      denom = parse_int(kv["denom"], line_no);
      if (denom <= 0) throw ParseError("denominator must be positive", line_no);
      seed = static_cast<std::uint64_t>(std::stoull(kv["seed"]));
      n = parse_int(kv["N"], line_no);
      if (n < 0) throw ParseError("negative N", line_no);
      fields.assign(static_cast<std::size_t>(n), 0);
      have_header = true;
      continue;
    }
    if (text.empty() || text[0] == '#') continue;
    std::istringstream ss(text);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok[0] == "h") {
      if (tok.size() != 3) throw ParseError("h line needs 2 fields", line_no);
      const auto v = parse_int(tok[1], line_no);
      if (v < 0 || v >= n) throw ParseError("node id out of range", line_no);
      fields[v] = static_cast<std::int32_t>(parse_int(tok[2], line_no));
    } else if (tok[0] == "J") {
      if (tok.size() != 4) throw ParseError("J line needs 3 fields", line_no);
      const auto a = parse_int(tok[1], line_no);
      const auto b = parse_int(tok[2], line_no);
      if (a < 0 || a >= n || b < 0 || b >= n) throw ParseError("node id out of range", line_no);
      if (a == b) throw ParseError("self-coupling", line_no);
      const std::pair<NodeId, NodeId> key{static_cast<NodeId>(std::min(a, b)),
                                          static_cast<NodeId>(std::max(a, b))};
      if (seen.count(key)) throw ParseError("duplicate coupling", line_no);
      seen[key] = edges.size();
      edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
      couplings.push_back(static_cast<std::int32_t>(parse_int(tok[3], line_no)));
    } else {
      throw ParseError("unknown record '" + tok[0] + "'", line_no);
    }
  }
  if (!have_header) throw ParseError("missing #instance header", line_no + 1);
  auto graph = std::make_shared<Graph>(static_cast<std::size_t>(n), std::move(edges));
  return Instance(std::move(graph), std::move(couplings), std::move(fields), denom, disorder, seed);
}

std::string instance_text(const Instance& instance) {
  std::ostringstream ss;
  save_instance(ss, instance);
  return ss.str();
}

std::string instance_hash(const Instance& instance) { return content_hash(instance_text(instance)); }

}  // namespace sgbench
