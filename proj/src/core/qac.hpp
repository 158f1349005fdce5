#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/disorder.hpp"
#include "core/topology.hpp"

namespace sgbench {

enum class QacMode { QAC, U3 };

std::string to_string(QacMode m);
QacMode parse_qac_mode(const std::string& s);

// Physical qubit for logical node g, copy c (0..2 data, 3 penalty) in the
// compact numbering used by PhysicalProblem.
inline NodeId physical_index(NodeId g, int c) noexcept { return 4 * g + static_cast<NodeId>(c); }
inline constexpr int kPenaltySlot = 3;

struct PhysicalProblem {
  Instance instance;              // over compact ids 4g + c
  QacMode mode = QacMode::QAC;
  Rational penalty;               // 0 for U3
  std::vector<QubitId> qubits;    // compact id -> Pegasus linear id
  bool penalty_off_grid = false;  // QAC penalty outside {0.1, 0.2, 0.3}
  std::size_t partial_edges = 0;  // logical edges realized by fewer than 3 copies
};

// The logical instance must live on layout.logical.graph (same edge order).
// Throws InvalidInput for a negative penalty or mismatched graphs.
PhysicalProblem encode(const Instance& logical, const QacLayout& layout, QacMode mode,
                       const Rational& penalty);

// Reads hold +1/-1 per physical qubit; 0 marks an unreadable qubit.
struct SampleSet {
  QacMode mode = QacMode::QAC;
  double tf_us = 0.0;
  std::string sampler;
  std::vector<std::uint32_t> gauge_ids;  // per read, contiguous groups
  std::vector<SpinConfig> reads;

  std::size_t num_gauges() const;
};

void save_samples(std::ostream& out, const SampleSet& samples);
SampleSet load_samples(std::istream& in);

struct LogicalSampleSet {
  QacMode mode = QacMode::QAC;
  double tf_us = 0.0;
  std::int64_t denominator = 1;
  std::vector<SpinConfig> spins;
  std::vector<std::int64_t> energy_units;
  std::vector<std::uint32_t> gauge_ids;
  std::vector<std::uint8_t> copy;  // U3 copy index, 0 for QAC
  std::size_t dropped = 0;

  std::size_t size() const noexcept { return spins.size(); }
  Rational energy(std::size_t i) const { return {energy_units[i], denominator}; }
};

// Majority vote over the three data qubits of each group. Reads with any
// unreadable data qubit are dropped.
LogicalSampleSet decode_qac(const SampleSet& samples, const Instance& logical);

// Each copy of each read becomes one logical sample; copies with an
// unreadable qubit are dropped.
LogicalSampleSet decode_u3(const SampleSet& samples, const Instance& logical);

LogicalSampleSet decode(const SampleSet& samples, const Instance& logical);

struct SampleRequest {
  const Instance* problem = nullptr;  // already gauged
  const Gauge* gauge = nullptr;
  double tf_us = 0.0;
  std::size_t n_reads = 0;
  std::uint64_t seed = 0;
};

class Sampler {
public:
  virtual ~Sampler() = default;
  virtual std::string id() const = 0;
  virtual std::vector<SpinConfig> sample(const SampleRequest& request) = 0;
};

// Simulated annealing with round(sweeps_per_us * t_f) sweeps per read (at
// least one); a read is the final configuration.
class AnnealingSampler : public Sampler {
public:
  AnnealingSampler(double sweeps_per_us, double beta_min = 0.1, double beta_max = 5.0)
      : sweeps_per_us_(sweeps_per_us), beta_min_(beta_min), beta_max_(beta_max) {}
  std::string id() const override { return "sa"; }
  std::vector<SpinConfig> sample(const SampleRequest& request) override;

private:
  double sweeps_per_us_;
  double beta_min_;
  double beta_max_;
};

// Parallel tempering run per read; the read is the coldest replica of chain 0.
class TemperingSampler : public Sampler {
public:
  explicit TemperingSampler(double sweeps_per_us, int n_t = 8, double beta_min = 0.1,
                            double beta_max = 5.0)
      : sweeps_per_us_(sweeps_per_us), n_t_(n_t), beta_min_(beta_min), beta_max_(beta_max) {}
  std::string id() const override { return "pt"; }
  std::vector<SpinConfig> sample(const SampleRequest& request) override;

private:
  double sweeps_per_us_;
  int n_t_;
  double beta_min_;
  double beta_max_;
};

// Ground states by enumeration; read i picks one uniformly by seed.
class ExactSampler : public Sampler {
public:
  std::string id() const override { return "exact"; }
  std::vector<SpinConfig> sample(const SampleRequest& request) override;
};

// Replays recorded canonical-frame reads, mapped into the requested gauge
// frame so that un-gauging restores them.
class RecordedSampler : public Sampler {
public:
  explicit RecordedSampler(SampleSet recorded) : recorded_(std::move(recorded)) {}
  std::string id() const override { return recorded_.sampler.empty() ? "recorded" : recorded_.sampler; }
  std::vector<SpinConfig> sample(const SampleRequest& request) override;

private:
  SampleSet recorded_;
  std::size_t next_ = 0;
};

// Splits n_reads evenly over the gauges (earlier gauges take the remainder),
// samples each gauged problem and maps reads back to the canonical frame.
SampleSet sample(Sampler& sampler, const PhysicalProblem& physical, double tf_us,
                 std::size_t n_reads, std::span<const Gauge> gauges, std::uint64_t seed);

}  // namespace sgbench
