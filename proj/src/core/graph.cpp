#include "core/graph.hpp"

#include <algorithm>
#include <unordered_map>

#include "core/errors.hpp"

namespace sgbench {

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges,
             std::optional<std::vector<Position>> positions)
    : num_nodes_(num_nodes), edges_(std::move(edges)), positions_(std::move(positions)) {
  if (positions_ && positions_->size() != num_nodes_) {
    throw InvalidInput("position count does not match node count");
  }
  std::vector<std::uint32_t> degree(num_nodes_, 0);
  for (auto& e : edges_) {
    if (e.a == e.b) throw InvalidInput("self-loop on node " + std::to_string(e.a));
    if (e.a >= num_nodes_ || e.b >= num_nodes_) throw InvalidInput("edge endpoint out of range");
    if (e.a > e.b) std::swap(e.a, e.b);
    ++degree[e.a];
    ++degree[e.b];
  }
  offsets_.assign(num_nodes_ + 1, 0);
  for (std::size_t v = 0; v < num_nodes_; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  adjacency_.resize(offsets_.back());
  std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::uint32_t i = 0; i < edges_.size(); ++i) {
    const auto [a, b] = edges_[i];
    adjacency_[fill[a]++] = {b, i};
    adjacency_[fill[b]++] = {a, i};
  }
  for (std::size_t v = 0; v < num_nodes_; ++v) {
    auto first = adjacency_.begin() + offsets_[v];
    auto last = adjacency_.begin() + offsets_[v + 1];
    std::sort(first, last, [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
    if (std::adjacent_find(first, last, [](const Neighbor& x, const Neighbor& y) {
          return x.node == y.node;
        }) != last) {
      throw InvalidInput("duplicate edge at node " + std::to_string(v));
    }
  }
}

const std::vector<Position>& Graph::positions() const {
  if (!positions_) throw InvalidInput("graph carries no node positions");
  return *positions_;
}

std::optional<std::uint32_t> Graph::find_edge(NodeId a, NodeId b) const noexcept {
  if (a >= num_nodes_ || b >= num_nodes_) return std::nullopt;
  const auto nb = neighbors(a);
  const auto it = std::lower_bound(nb.begin(), nb.end(), b,
                                   [](const Neighbor& n, NodeId v) { return n.node < v; });
  if (it != nb.end() && it->node == b) return it->edge;
  return std::nullopt;
}

Graph Graph::induced(std::span<const NodeId> nodes) const {
  std::unordered_map<NodeId, NodeId> local;
  local.reserve(nodes.size());
  for (NodeId i = 0; i < nodes.size(); ++i) local.emplace(nodes[i], i);
  std::vector<Edge> sub;
  for (NodeId i = 0; i < nodes.size(); ++i) {
    for (const auto& n : neighbors(nodes[i])) {
      const auto it = local.find(n.node);
      if (it != local.end() && i < it->second) sub.push_back({i, it->second});
    }
  }
  std::optional<std::vector<Position>> pos;
  if (positions_) {
    pos.emplace();
    for (const NodeId v : nodes) pos->push_back((*positions_)[v]);
  }
  return Graph(nodes.size(), std::move(sub), std::move(pos));
}

Graph square_lattice(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw InvalidInput("square lattice needs positive extents");
  std::vector<Edge> edges;
  std::vector<Position> pos(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = static_cast<NodeId>(r * cols + c);
      pos[v] = {static_cast<double>(c), static_cast<double>(r)};
      if (c + 1 < cols) edges.push_back({v, v + 1});
      if (r + 1 < rows) edges.push_back({v, static_cast<NodeId>(v + cols)});
    }
  }
  return Graph(rows * cols, std::move(edges), std::move(pos));
}

Graph ring_graph(std::size_t n) {
  if (n < 3) throw InvalidInput("ring needs at least 3 nodes");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n)});
  }
  return Graph(n, std::move(edges));
}

}  // namespace sgbench
