#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/disorder.hpp"
#include "core/rng.hpp"

namespace sgbench {

struct TemperatureLadder {
  std::vector<double> betas;  // ascending; the last n_icm are ICM temperatures
  int n_icm = 1;
  std::string label;

  std::size_t size() const noexcept { return betas.size(); }
  bool is_icm(std::size_t t) const noexcept { return t + n_icm >= betas.size(); }
};

enum class LadderSpacing { Log, FeedbackInit };

// Geometric progression from beta_min to beta_max inclusive. FeedbackInit
// gives the same starting ladder and only marks the label for later
// optimization.
TemperatureLadder make_ladder(int n_t, double beta_min, double beta_max, LadderSpacing spacing,
                              int n_icm, std::string label = {});

// Throws InvalidInput unless betas are strictly increasing and positive
// with 0 < n_icm <= size.
void check_ladder(const TemperatureLadder& ladder);

// The four S28 ladders: B5, F24, F32, B20. The F ladders come back in their
// log-spaced starting form.
std::vector<TemperatureLadder> standard_ladders();

struct TraceEvent {
  std::uint64_t sweep = 0;
  double seconds = 0.0;
  std::int64_t best_units = 0;
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct RunTrace {
  std::vector<TraceEvent> events;  // non-increasing best_units
  SpinConfig best_config;
  std::int64_t denominator = 1;
  std::uint64_t sweeps_total = 0;
  std::uint64_t seed = 0;
  double seconds_per_sweep = 0.0;
  std::string label;

  std::int64_t best_units() const { return events.empty() ? 0 : events.back().best_units; }
  // First sweep at which the best energy was <= threshold (units of denominator).
  std::optional<std::uint64_t> first_hit(std::int64_t threshold_units) const;
  // Sweep at which the lowest recorded energy was first reached.
  std::uint64_t last_improvement() const;

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

void save_trace(std::ostream& out, const RunTrace& trace, const std::string& instance_hash);
RunTrace load_trace(std::istream& in, std::string* instance_hash = nullptr);

// Two chains of one replica per temperature. Configurations move between
// temperature slots on exchange; replica ids travel with them.
class PtState {
public:
  PtState(const Instance& instance, const TemperatureLadder& ladder, std::uint64_t seed);

  const Instance& instance() const noexcept { return *instance_; }
  const TemperatureLadder& ladder() const noexcept { return ladder_; }
  Rng& rng() noexcept { return rng_; }

  const SpinConfig& spins(int chain, std::size_t t) const { return spins_[chain][t]; }
  std::int64_t energy_units(int chain, std::size_t t) const { return energy_[chain][t]; }
  std::uint32_t replica_id(int chain, std::size_t t) const { return ids_[chain][t]; }

  void set_spins(int chain, std::size_t t, SpinConfig spins);

  // One pass over spins in index order. Returns accepted flips.
  std::size_t metropolis_sweep(int chain, std::size_t t);

  // Swaps adjacent pairs starting at offset 0 or 1, alternating per call.
  // Returns accepted swaps.
  std::size_t pt_exchange(int chain);

  // Houdayer cluster move between the two chains at temperature t. Returns
  // cluster size (0 when the replicas agree everywhere).
  std::size_t icm_move(std::size_t t);

  // Every sweep: metropolis on each replica, one exchange per chain, one ICM
  // move per ICM temperature.
  void sweep();

  std::uint64_t sweeps_done() const noexcept { return sweeps_; }

  // Lowest stored energy over all replicas and where it sits.
  std::int64_t best_units(int* chain = nullptr, std::size_t* t = nullptr) const;

  // Recomputes every stored energy from scratch; true when all agree.
  bool energies_consistent() const;

private:
  const Instance* instance_;
  TemperatureLadder ladder_;
  Rng rng_;
  std::array<std::vector<SpinConfig>, 2> spins_;
  std::array<std::vector<std::int64_t>, 2> energy_;
  std::array<std::vector<std::uint32_t>, 2> ids_;
  std::array<int, 2> parity_{0, 0};
  std::vector<std::vector<double>> accept_;  // [t][local field units]
  std::int64_t max_field_ = 0;
  std::uint64_t sweeps_ = 0;
  std::vector<std::uint32_t> mark_;
  std::uint32_t mark_gen_ = 0;
  std::vector<NodeId> stack_;
  std::vector<NodeId> cluster_;

  double acceptance(std::size_t t, std::int64_t field) const;
};

struct PticmOptions {
  std::uint64_t sweeps = 10000;
  std::uint64_t record_cadence = 0;      // 0 records improvements only
  double seconds_per_sweep = 0.0;
  std::optional<std::int64_t> stop_at;   // stop once best <= this (units)
};

RunTrace run_pticm(const Instance& instance, const TemperatureLadder& ladder, std::uint64_t seed,
                   const PticmOptions& options);

// Fraction f_t of labelled replicas at temperature t whose last visited end
// of the ladder was the coldest one, plus the number of completed
// hot-to-cold-to-hot round trips.
struct DiffusionProfile {
  std::vector<double> f;
  std::vector<std::uint64_t> visits;
  std::uint64_t round_trips = 0;
};

DiffusionProfile measure_diffusion(std::span<const Instance> instances,
                                   const TemperatureLadder& ladder, std::uint64_t sweeps,
                                   std::uint64_t seed);

// max_t |f_t - t/(n-1)|
double diffusion_deviation(const DiffusionProfile& profile);

struct FeedbackOptions {
  int rounds = 3;
  std::uint64_t sweeps_per_round = 2000;
  std::uint64_t min_round_trips = 4;
  std::uint64_t seed = 1;
};

struct FeedbackResult {
  TemperatureLadder ladder;
  bool converged = true;
  int rounds_completed = 0;
  std::string note;
};

FeedbackResult feedback_optimize(const TemperatureLadder& ladder,
                                 std::span<const Instance> instances,
                                 const FeedbackOptions& options);

// Smallest sweep count by which a fraction q of instances had reached their
// lowest recorded energy.
std::uint64_t sweeps_to_quantile(std::span<const std::uint64_t> hit_sweeps, double q = 0.9);
std::uint64_t sweeps_to_quantile(std::span<const RunTrace> traces, double q = 0.9);

}  // namespace sgbench
