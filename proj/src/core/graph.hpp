#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sgbench {

using NodeId = std::uint32_t;

struct Edge {
  NodeId a;
  NodeId b;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

struct Neighbor {
  NodeId node;
  std::uint32_t edge;  // index into Graph::edges()
};

// Immutable undirected simple graph over nodes 0..n-1 with CSR adjacency.
// Edges are stored with a < b in insertion order; optional per-node planar
// positions feed the coordinate-based algorithms (patchwork, bulk detection).
class Graph {
public:
  Graph() = default;
  Graph(std::size_t num_nodes, std::vector<Edge> edges,
        std::optional<std::vector<Position>> positions = std::nullopt);

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const Neighbor> neighbors(NodeId v) const noexcept {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

  bool has_positions() const noexcept { return positions_.has_value(); }
  const std::vector<Position>& positions() const;

  // Edge index of {a, b}, if present.
  std::optional<std::uint32_t> find_edge(NodeId a, NodeId b) const noexcept;

  // Subgraph induced by `nodes`; node i of the result is nodes[i].
  Graph induced(std::span<const NodeId> nodes) const;

  friend bool operator==(const Graph& x, const Graph& y) {
    return x.num_nodes_ == y.num_nodes_ && x.edges_ == y.edges_ && x.positions_ == y.positions_;
  }

private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::optional<std::vector<Position>> positions_;
};

// Open-boundary rows x cols square lattice; node id = row * cols + col,
// position = (col, row).
Graph square_lattice(std::size_t rows, std::size_t cols);

// Cycle over n >= 3 nodes.
Graph ring_graph(std::size_t n);

}  // namespace sgbench
