#include "core/topology.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "core/errors.hpp"

namespace sgbench {

namespace {

// Standard Pegasus shift offsets.
constexpr std::array<int, 12> kOffset0{2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6};
constexpr std::array<int, 12> kOffset1{6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10};

std::uint64_t pair_key(QubitId a, QubitId b) noexcept {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

bool PegasusGraph::in_fabric(int m, const PegasusCoord& c) noexcept {
  if (c.u < 0 || c.u > 1 || c.w < 0 || c.w >= m || c.k < 0 || c.k >= 12 || c.z < 0 ||
      c.z >= m - 1) {
    return false;
  }
  if (c.w == 0 && c.k < 2) return false;
  if (c.w == m - 1 && c.k >= 10) return false;
  return true;
}

QubitId PegasusGraph::linear(const PegasusCoord& c) const noexcept {
  return static_cast<QubitId>(((c.u * m_ + c.w) * 12 + c.k) * (m_ - 1) + c.z);
}

PegasusCoord PegasusGraph::coord(QubitId q) const noexcept {
  PegasusCoord c;
  int r = static_cast<int>(q);
  c.z = r % (m_ - 1);
  r /= (m_ - 1);
  c.k = r % 12;
  r /= 12;
  c.w = r % m_;
  c.u = r / m_;
  return c;
}

QubitId PegasusGraph::from_tile(const TileCoord& n) const noexcept {
  const int u = n.u;
  PegasusCoord c;
  c.u = u;
  c.z = u ? n.x : n.y;
  switch (n.t) {
    case 0:
      c.w = u ? n.y + 1 : n.x;
      c.k = 4 + n.k;
      break;
    case 1:
      c.w = u ? n.y + 1 : n.x;
      c.k = u ? n.k : 8 + n.k;
      break;
    default:
      c.w = u ? n.y : n.x + 1;
      c.k = u ? 8 + n.k : n.k;
      break;
  }
  return linear(c);
}

bool PegasusGraph::has_qubit(QubitId q) const noexcept {
  return q < compact_.size() && compact_[q] >= 0;
}

bool PegasusGraph::has_coupler(QubitId a, QubitId b) const noexcept {
  if (!has_qubit(a) || !has_qubit(b)) return false;
  return graph_.find_edge(static_cast<NodeId>(compact_[a]), static_cast<NodeId>(compact_[b]))
      .has_value();
}

std::size_t PegasusGraph::degree(QubitId q) const noexcept {
  return has_qubit(q) ? graph_.degree(static_cast<NodeId>(compact_[q])) : 0;
}

PegasusGraph build_pegasus(int m, const std::optional<DefectMask>& mask) {
  if (m < 2) throw InvalidInput("Pegasus size M must be at least 2");
  PegasusGraph g;
  g.m_ = m;
  const int m1 = m - 1;
  const std::size_t capacity = static_cast<std::size_t>(24) * m * m1;

  std::vector<char> present(capacity, 0);
  for (int u = 0; u < 2; ++u)
    for (int w = 0; w < m; ++w)
      for (int k = 0; k < 12; ++k)
        for (int z = 0; z < m1; ++z) {
          const PegasusCoord c{u, w, k, z};
          if (PegasusGraph::in_fabric(m, c)) present[g.linear(c)] = 1;
        }

  std::set<std::uint64_t> dead_couplers;
  if (mask) {
    for (const QubitId q : mask->qubits) {
      if (q >= capacity || !present[q]) {
        throw InvalidInput("defect mask names nonexistent qubit " + std::to_string(q));
      }
    }
    for (const auto& [a, b] : mask->couplers) {
      if (a >= capacity || b >= capacity || !present[a] || !present[b]) {
        throw InvalidInput("defect mask names coupler with nonexistent endpoint " +
                           std::to_string(a) + "-" + std::to_string(b));
      }
      dead_couplers.insert(pair_key(a, b));
    }
  }

  std::vector<Coupler> all;
  auto add = [&](const PegasusCoord& p, const PegasusCoord& q, CouplerKind kind) {
    if (PegasusGraph::in_fabric(m, p) && PegasusGraph::in_fabric(m, q)) {
      all.push_back({g.linear(p), g.linear(q), kind});
    }
  };
  for (int u = 0; u < 2; ++u)
    for (int w = 0; w < m; ++w)
      for (int k = 0; k < 12; ++k) {
        for (int z = 0; z + 1 < m1; ++z) add({u, w, k, z}, {u, w, k, z + 1}, CouplerKind::External);
        if (k % 2 == 0)
          for (int z = 0; z < m1; ++z) add({u, w, k, z}, {u, w, k + 1, z}, CouplerKind::Odd);
      }
  for (int w = 0; w < m; ++w)
    for (int kk = 0; kk < 12; ++kk) {
      const int k_lo = w ? 0 : kOffset1[kk];
      const int k_hi = w < m1 ? 12 : kOffset1[kk];
      for (int k = k_lo; k < k_hi; ++k)
        for (int z = 0; z < m1; ++z) {
          add({0, w, k, z},
              {1, z + (kk < kOffset0[k] ? 1 : 0), kk, w - (k < kOffset1[kk] ? 1 : 0)},
              CouplerKind::Internal);
        }
    }

  if (mask) {
    for (const auto& [a, b] : mask->couplers) {
      const auto key = pair_key(a, b);
      const bool exists = std::any_of(all.begin(), all.end(), [&](const Coupler& c) {
        return pair_key(c.a, c.b) == key;
      });
      if (!exists) {
        throw InvalidInput("defect mask names nonexistent coupler " + std::to_string(a) + "-" +
                           std::to_string(b));
      }
    }
    for (const QubitId q : mask->qubits) present[q] = 0;
  }

  g.compact_.assign(capacity, -1);
  for (QubitId q = 0; q < capacity; ++q) {
    if (present[q]) {
      g.compact_[q] = static_cast<std::int32_t>(g.qubits_.size());
      g.qubits_.push_back(q);
    }
  }
  std::vector<Edge> edges;
  for (const auto& c : all) {
    if (!present[c.a] || !present[c.b] || dead_couplers.count(pair_key(c.a, c.b))) continue;
    g.couplers_.push_back(c);
    edges.push_back({static_cast<NodeId>(g.compact_[c.a]), static_cast<NodeId>(g.compact_[c.b])});
  }
  g.graph_ = Graph(g.qubits_.size(), std::move(edges));
  return g;
}

int max_side_length(const PegasusGraph& pegasus) noexcept { return pegasus.size() - 1; }

namespace {

struct GroupSlot {
  std::uint32_t group;
  int copy;  // 0..2 data, 3 penalty
};

QacLayout assemble_layout(int side_length, std::vector<QacGroup> groups,
                          std::vector<Position> positions,
                          const std::map<std::pair<NodeId, NodeId>, SupportMask>& edge_support) {
  std::vector<Edge> edges;
  std::vector<SupportMask> support;
  for (const auto& [key, mask] : edge_support) {
    edges.push_back({key.first, key.second});
    support.push_back(mask);
  }
  QacLayout layout;
  layout.logical.side_length = side_length;
  const std::size_t n = groups.size();
  layout.logical.graph = positions.empty()
                             ? Graph(n, std::move(edges))
                             : Graph(n, std::move(edges), std::move(positions));
  layout.logical.support = std::move(support);
  layout.embedding.groups = std::move(groups);
  return layout;
}

std::map<std::pair<NodeId, NodeId>, SupportMask> induced_support(const PegasusGraph& pegasus,
                                                                 const std::vector<QacGroup>& groups,
                                                                 int min_support) {
  std::unordered_map<QubitId, GroupSlot> slot;
  for (const auto& grp : groups) {
    for (int c = 0; c < 3; ++c) slot.emplace(grp.data[c], GroupSlot{grp.logical, c});
  }
  std::map<std::pair<NodeId, NodeId>, SupportMask> support;
  for (const auto& cp : pegasus.couplers()) {
    const auto ia = slot.find(cp.a);
    const auto ib = slot.find(cp.b);
    if (ia == slot.end() || ib == slot.end()) continue;
    if (ia->second.group == ib->second.group || ia->second.copy != ib->second.copy) continue;
    NodeId x = ia->second.group;
    NodeId y = ib->second.group;
    if (x > y) std::swap(x, y);
    support[{x, y}] |= static_cast<SupportMask>(1u << ia->second.copy);
  }
  std::erase_if(support, [&](const auto& kv) { return support_count(kv.second) < min_support; });
  return support;
}

}  // namespace

QacLayout build_qac_logical(const PegasusGraph& pegasus, int side_length, int min_support) {
  if (min_support < 1 || min_support > 3) throw InvalidInput("minimum support must be 1..3");
  const int max_l = max_side_length(pegasus);
  if (side_length < 1 || side_length > max_l) {
    throw InvalidInput("side length " + std::to_string(side_length) +
                       " outside supported range [1, " + std::to_string(max_l) + "]");
  }
  std::vector<QacGroup> groups;
  std::vector<Position> positions;
  for (int y = 0; y < side_length; ++y)
    for (int x = 0; x < side_length; ++x)
      for (int t = 0; t < 3; ++t)
        for (int data_side = 0; data_side < 2; ++data_side) {
          // Data on one shore of the K4,4 cell (k = 0..2), penalty on the
          // opposite shore at k = 3.
          QacGroup grp{};
          for (int c = 0; c < 3; ++c) grp.data[c] = pegasus.from_tile({t, y, x, data_side, c});
          grp.penalty = pegasus.from_tile({t, y, x, 1 - data_side, 3});
          bool usable = pegasus.has_qubit(grp.penalty);
          for (const QubitId d : grp.data) {
            usable = usable && pegasus.has_qubit(d) && pegasus.has_coupler(d, grp.penalty);
          }
          if (!usable) continue;
          grp.logical = static_cast<NodeId>(groups.size());
          groups.push_back(grp);
          positions.push_back({static_cast<double>(x), static_cast<double>(y)});
        }
  auto support = induced_support(pegasus, groups, min_support);
  return assemble_layout(side_length, std::move(groups), std::move(positions), support);
}

void save_logical_graph(std::ostream& out, const QacLayout& layout) {
  const auto& g = layout.logical.graph;
  out << "#logical L=" << layout.logical.side_length << " N=" << g.num_nodes() << '\n';
  for (const auto& grp : layout.embedding.groups) {
    out << "n " << grp.logical << ' ' << grp.data[0] << ' ' << grp.data[1] << ' ' << grp.data[2]
        << ' ' << grp.penalty << '\n';
  }
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    const auto& e = g.edges()[i];
    out << "e " << e.a << ' ' << e.b << ' ' << support_count(layout.logical.support[i]) << '\n';
  }
}

namespace {

std::uint64_t parse_uint(const std::string& tok, std::size_t line) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ParseError("expected non-negative integer, got '" + tok + "'", line);
  }
  try {
    return std::stoull(tok);
  } catch (const std::exception&) {
    throw ParseError("integer out of range: '" + tok + "'", line);
  }
}

// Parses "key=value" tokens of a header line into a map.
std::map<std::string, std::string> parse_header(const std::string& text, const std::string& tag,
                                                std::size_t line) {
  std::istringstream ss(text);
  std::string first;
  ss >> first;
  if (first != tag) throw ParseError("expected header '" + tag + "'", line);
  std::map<std::string, std::string> kv;
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header field '" + tok + "'", line);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

}  // namespace

QacLayout load_logical_graph(std::istream& in, const PegasusGraph* pegasus) {
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;
  std::uint64_t side = 0;
  std::uint64_t n = 0;
  std::vector<std::optional<QacGroup>> groups;
  std::map<std::pair<NodeId, NodeId>, SupportMask> support;
  std::vector<std::size_t> edge_lines;

  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') throw ParseError("CR line ending", line_no);
    if (!have_header) {
      const auto kv = parse_header(text, "#logical", line_no);
      if (!kv.count("L") || !kv.count("N")) throw ParseError("header needs L and N", line_no);
      side = parse_uint(kv.at("L"), line_no);
      n = parse_uint(kv.at("N"), line_no);
      groups.assign(n, std::nullopt);
      have_header = true;
      continue;
    }
    if (text.empty() || text[0] == '#') continue;
    std::istringstream ss(text);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok[0] == "n") {
      if (tok.size() != 6) throw ParseError("node line needs 5 fields", line_no);
      const auto id = parse_uint(tok[1], line_no);
      if (id >= n) throw ParseError("node id " + tok[1] + " exceeds N", line_no);
      if (groups[id]) throw ParseError("duplicate node " + tok[1], line_no);
      QacGroup grp{};
      grp.logical = static_cast<NodeId>(id);
      for (int c = 0; c < 3; ++c) grp.data[c] = static_cast<QubitId>(parse_uint(tok[2 + c], line_no));
      grp.penalty = static_cast<QubitId>(parse_uint(tok[5], line_no));
      groups[id] = grp;
    } else if (tok[0] == "e") {
      if (tok.size() != 4) throw ParseError("edge line needs 3 fields", line_no);
      const auto a = parse_uint(tok[1], line_no);
      const auto b = parse_uint(tok[2], line_no);
      const auto count = parse_uint(tok[3], line_no);
      if (a == b) throw ParseError("self-loop on node " + tok[1], line_no);
      if (a >= n || !groups[a]) throw ParseError("dangling node id " + tok[1], line_no);
      if (b >= n || !groups[b]) throw ParseError("dangling node id " + tok[2], line_no);
      if (count < 1 || count > 3) throw ParseError("support count must be 1..3", line_no);
      const std::pair<NodeId, NodeId> key{static_cast<NodeId>(std::min(a, b)),
                                          static_cast<NodeId>(std::max(a, b))};
      if (support.count(key)) {
        throw ParseError("duplicate edge " + tok[1] + " " + tok[2], line_no);
      }
      support[key] = static_cast<SupportMask>((1u << count) - 1);
      edge_lines.push_back(line_no);
    } else {
      throw ParseError("unknown record '" + tok[0] + "'", line_no);
    }
  }
  if (!have_header) throw ParseError("missing #logical header", line_no + 1);
  std::vector<QacGroup> out_groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (!groups[i]) throw ParseError("node " + std::to_string(i) + " never defined", line_no);
    out_groups.push_back(*groups[i]);
  }

  std::vector<Position> positions;
  if (pegasus) {
    for (const auto& grp : out_groups) {
      for (const QubitId q : {grp.data[0], grp.data[1], grp.data[2], grp.penalty}) {
        if (!pegasus->has_qubit(q)) {
          throw InvalidInput("qubit " + std::to_string(q) + " not present in Pegasus graph");
        }
      }
    }
    const auto derived = induced_support(*pegasus, out_groups, 1);
    std::size_t idx = 0;
    for (auto& [key, mask] : support) {
      const auto it = derived.find(key);
      if (it == derived.end() || support_count(it->second) != support_count(mask)) {
        throw ParseError("edge support disagrees with the Pegasus graph",
                         edge_lines.empty() ? line_no : edge_lines[std::min(idx, edge_lines.size() - 1)]);
      }
      mask = it->second;
      ++idx;
    }
    // Cell coordinates of a group follow from its first data qubit.
    const int m = pegasus->size();
    std::unordered_map<QubitId, Position> cell;
    for (int t = 0; t < 3; ++t)
      for (int y = 0; y + 1 < m; ++y)
        for (int x = 0; x + 1 < m; ++x)
          for (int u = 0; u < 2; ++u)
            cell.emplace(pegasus->from_tile({t, y, x, u, 0}),
                         Position{static_cast<double>(x), static_cast<double>(y)});
    for (const auto& grp : out_groups) {
      const auto it = cell.find(grp.data[0]);
      if (it == cell.end()) {
        positions.clear();
        break;
      }
      positions.push_back(it->second);
    }
  }
  return assemble_layout(static_cast<int>(side), std::move(out_groups), std::move(positions), support);
}

bool has_cycle_of_length_five(const Graph& g) {
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const auto nv = g.neighbors(v);
    for (const auto& na : nv) {
      for (const auto& nd : nv) {
        if (na.node >= nd.node) continue;
        const NodeId a = na.node;
        const NodeId d = nd.node;
        for (const auto& nb : g.neighbors(a)) {
          const NodeId b = nb.node;
          if (b == v || b == d) continue;
          for (const auto& nc : g.neighbors(b)) {
            const NodeId c = nc.node;
            if (c == v || c == a || c == d) continue;
            if (g.find_edge(c, d)) return true;
          }
        }
      }
    }
  }
  return false;
}

ValidationReport validate_logical(const LogicalGraph& lg, std::size_t expected_bulk_degree) {
  const Graph& g = lg.graph;
  ValidationReport r;
  r.num_nodes = g.num_nodes();
  r.num_edges = g.num_edges();
  std::size_t max_degree = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    ++r.degree_histogram[g.degree(v)];
    max_degree = std::max(max_degree, g.degree(v));
  }
  std::vector<char> bulk(g.num_nodes(), 0);
  if (g.has_positions() && g.num_nodes() > 0) {
    r.bulk_from_positions = true;
    const auto& pos = g.positions();
    double x0 = pos[0].x, x1 = pos[0].x, y0 = pos[0].y, y1 = pos[0].y;
    for (const auto& p : pos) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      bulk[v] = pos[v].x > x0 && pos[v].x < x1 && pos[v].y > y0 && pos[v].y < y1;
    }
  } else {
    for (NodeId v = 0; v < g.num_nodes(); ++v) bulk[v] = g.degree(v) == max_degree && max_degree > 0;
  }
  std::size_t bulk_count = 0;
  bool all_match = true;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (!bulk[v]) continue;
    ++bulk_count;
    ++r.bulk_degree_histogram[g.degree(v)];
    all_match = all_match && g.degree(v) == expected_bulk_degree;
  }
  r.bulk_degree_ok = bulk_count > 0 && all_match;
  if (bulk_count == 0) {
    r.issues.push_back("no bulk nodes");
  } else if (!all_match) {
    r.issues.push_back("bulk degree differs from " + std::to_string(expected_bulk_degree));
  }
  r.has_five_cycle = has_cycle_of_length_five(g);
  if (!r.has_five_cycle) r.issues.push_back("no cycle of length 5");
  for (std::size_t i = 0; i < lg.support.size(); ++i) {
    if (lg.partial_support(i)) ++r.partial_support_edges;
  }
  return r;
}

}  // namespace sgbench
