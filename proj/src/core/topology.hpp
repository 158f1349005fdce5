#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/graph.hpp"

namespace sgbench {

// Pegasus coordinate: orientation u, perpendicular offset w, in-shore index k,
// parallel offset z.
struct PegasusCoord {
  int u = 0;
  int w = 0;
  int k = 0;
  int z = 0;
  friend bool operator==(const PegasusCoord&, const PegasusCoord&) = default;
};

// Coordinate of the K4,4 tiling of Pegasus: tile layer t in {0,1,2}, cell
// row y and column x in [0, M-1), orientation u, index k in [0,4).
struct TileCoord {
  int t = 0;
  int y = 0;
  int x = 0;
  int u = 0;
  int k = 0;
};

enum class CouplerKind : std::uint8_t { Internal, External, Odd };

using QubitId = std::uint32_t;  // linear Pegasus index

struct Coupler {
  QubitId a;
  QubitId b;
  CouplerKind kind;
};

struct DefectMask {
  std::vector<QubitId> qubits;
  std::vector<std::pair<QubitId, QubitId>> couplers;
};

class PegasusGraph {
public:
  int size() const noexcept { return m_; }
  std::size_t num_qubits() const noexcept { return qubits_.size(); }
  std::size_t num_couplers() const noexcept { return couplers_.size(); }
  const std::vector<QubitId>& qubits() const noexcept { return qubits_; }
  const std::vector<Coupler>& couplers() const noexcept { return couplers_; }

  bool has_qubit(QubitId q) const noexcept;
  bool has_coupler(QubitId a, QubitId b) const noexcept;
  std::size_t degree(QubitId q) const noexcept;

  QubitId linear(const PegasusCoord& c) const noexcept;
  PegasusCoord coord(QubitId q) const noexcept;
  QubitId from_tile(const TileCoord& c) const noexcept;

  // Whether (u,w,k,z) lies in the standard qubit fabric of a size-M graph.
  static bool in_fabric(int m, const PegasusCoord& c) noexcept;

  friend PegasusGraph build_pegasus(int m, const std::optional<DefectMask>& mask);

private:
  int m_ = 0;
  std::vector<QubitId> qubits_;
  std::vector<std::int32_t> compact_;  // linear id -> index into qubits_, -1 if absent
  std::vector<Coupler> couplers_;
  Graph graph_;                         // over compact indices
};

// Full Pegasus P_M fabric (M >= 2) with `mask` removed. Throws InvalidInput
// when the mask names a qubit or coupler that does not exist.
PegasusGraph build_pegasus(int m, const std::optional<DefectMask>& mask = std::nullopt);

// One QAC group: three data qubits and the penalty qubit that couples to all
// of them.
struct QacGroup {
  NodeId logical;
  std::array<QubitId, 3> data;
  QubitId penalty;
  friend bool operator==(const QacGroup&, const QacGroup&) = default;
};

struct QacEmbedding {
  std::vector<QacGroup> groups;  // groups[i].logical == i
  friend bool operator==(const QacEmbedding&, const QacEmbedding&) = default;
};

// Bit c set when copy c of the logical edge has its physical coupling
// data_c(a) -- data_c(b).
using SupportMask = std::uint8_t;

inline int support_count(SupportMask m) noexcept { return __builtin_popcount(m); }

struct LogicalGraph {
  int side_length = 0;
  Graph graph;                        // positions are tile cell (x, y) when known
  std::vector<SupportMask> support;   // parallel to graph.edges()

  bool partial_support(std::size_t edge) const noexcept {
    return support_count(support[edge]) < 3;
  }
  friend bool operator==(const LogicalGraph&, const LogicalGraph&) = default;
};

struct QacLayout {
  LogicalGraph logical;
  QacEmbedding embedding;
};

// Largest logical side length supported by a Pegasus size.
int max_side_length(const PegasusGraph& pegasus) noexcept;

// Two QAC groups per K4,4 tile cell over the L x L block of cells at the
// origin, three tile layers per cell. A group whose qubits or penalty
// couplers are missing is dropped. Two groups share a logical edge when at
// least `min_support` of their three copies are physically coupled; with the
// default of 2 the full-support edges form a honeycomb and the 2-of-3 edges
// add the non-planar bonds, giving bulk degree 5. Throws InvalidInput for L
// outside [1, max_side_length].
QacLayout build_qac_logical(const PegasusGraph& pegasus, int side_length, int min_support = 2);

void save_logical_graph(std::ostream& out, const QacLayout& layout);
// Copies realized by each edge are not stored in the text form; the loader
// marks copies 0..count-1, or rederives the exact masks when `pegasus` is
// supplied.
QacLayout load_logical_graph(std::istream& in, const PegasusGraph* pegasus = nullptr);

struct ValidationReport {
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  std::map<std::size_t, std::size_t> degree_histogram;       // all nodes
  std::map<std::size_t, std::size_t> bulk_degree_histogram;  // bulk nodes only
  bool bulk_from_positions = false;
  bool bulk_degree_ok = false;      // every bulk node has the expected degree
  bool has_five_cycle = false;
  std::size_t partial_support_edges = 0;
  std::vector<std::string> issues;
};

// Bulk nodes are those strictly inside the position bounding box when
// positions exist, otherwise nodes of maximum degree.
ValidationReport validate_logical(const LogicalGraph& graph, std::size_t expected_bulk_degree = 5);

// Whether the graph contains a simple cycle of length exactly 5.
bool has_cycle_of_length_five(const Graph& g);

}  // namespace sgbench
