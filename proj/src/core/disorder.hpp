#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/rational.hpp"

namespace sgbench {

enum class DisorderClass { Binomial, Sidon28, Range6, Custom };

std::string to_string(DisorderClass c);
DisorderClass parse_disorder_class(const std::string& name);

// Denominator and positive numerators of a class's coupling magnitudes.
struct CouplingSet {
  std::int64_t denominator;
  std::vector<std::int32_t> magnitudes;
};
CouplingSet coupling_set(DisorderClass c);

using Spin = std::int8_t;
using SpinConfig = std::vector<Spin>;

struct Gauge {
  std::uint32_t id = 0;
  std::vector<Spin> signs;
};

// Ising problem sum_i h_i s_i + sum_<ij> J_ij s_i s_j with every coefficient an
// integer numerator over a shared denominator. Energies are tracked as int64
// numerators ("units") so threshold comparisons are exact.
class Instance {
public:
  Instance() = default;
  Instance(std::shared_ptr<const Graph> graph, std::vector<std::int32_t> couplings,
           std::vector<std::int32_t> fields, std::int64_t denominator,
           DisorderClass disorder = DisorderClass::Custom, std::uint64_t seed = 0);

  const Graph& graph() const noexcept { return *graph_; }
  std::shared_ptr<const Graph> graph_ptr() const noexcept { return graph_; }
  std::size_t num_spins() const noexcept { return graph_->num_nodes(); }
  std::span<const std::int32_t> couplings() const noexcept { return couplings_; }
  std::span<const std::int32_t> fields() const noexcept { return fields_; }
  std::int64_t denominator() const noexcept { return denominator_; }
  DisorderClass disorder() const noexcept { return disorder_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool has_fields() const noexcept { return has_fields_; }

  Rational coupling(std::size_t edge) const { return {couplings_[edge], denominator_}; }
  Rational field(NodeId v) const { return {fields_[v], denominator_}; }

  // Energy numerator over denominator(). Throws InvalidInput on size mismatch.
  std::int64_t energy_units(std::span<const Spin> spins) const;
  Rational energy(std::span<const Spin> spins) const {
    return {energy_units(spins), denominator_};
  }

  // h_v + sum_j J_vj s_j in units; flipping v changes the energy by
  // -2 s_v * local_field_units(v).
  std::int64_t local_field_units(std::span<const Spin> spins, NodeId v) const noexcept;

  // Maximum |h_v| + sum_j |J_vj| over nodes, in units.
  std::int64_t max_local_field_units() const noexcept;

  // Same couplings on a graph with identical edges but extra data (positions).
  Instance rebind(std::shared_ptr<const Graph> graph) const;

  friend bool operator==(const Instance& a, const Instance& b);

private:
  std::shared_ptr<const Graph> graph_ = std::make_shared<Graph>();
  std::vector<std::int32_t> couplings_;
  std::vector<std::int32_t> fields_;
  std::int64_t denominator_ = 1;
  DisorderClass disorder_ = DisorderClass::Custom;
  std::uint64_t seed_ = 0;
  bool has_fields_ = false;
};

// Each edge draws uniformly from the class's signed value set with a
// counter-based stream keyed by (seed, edge index); h = 0.
Instance generate_instance(std::shared_ptr<const Graph> graph, DisorderClass disorder,
                           std::uint64_t seed);

Gauge random_gauge(std::size_t n, std::uint64_t seed, std::uint32_t id);
Gauge identity_gauge(std::size_t n, std::uint32_t id = 0);

Instance apply_gauge(const Instance& instance, const Gauge& gauge);
SpinConfig apply_gauge_config(std::span<const Spin> config, const Gauge& gauge);

struct SidonReport {
  bool pair_sum_free = false;            // no a + b (repetition allowed) lies in the set
  bool signed_zero_sum_free = false;     // no signed multiset of size <= max_subset sums to 0
  bool unsigned_zero_sum_free = false;   // no plain multiset of size <= max_subset sums to 0
  std::vector<Rational> pair_witness;    // a, b, a+b when pair_sum_free is false
  std::vector<Rational> zero_witness;    // signed terms when signed_zero_sum_free is false
};

// The signed check ignores multisets that use a value with both signs, since
// those reduce to a smaller multiset by cancelling the pair.
SidonReport sidon_property_check(std::span<const Rational> values, int max_subset);

void save_instance(std::ostream& out, const Instance& instance);
// The graph is rebuilt from the J lines in file order; positions are not
// stored (use Instance::rebind).
Instance load_instance(std::istream& in);

std::string instance_text(const Instance& instance);
std::string instance_hash(const Instance& instance);

}  // namespace sgbench
