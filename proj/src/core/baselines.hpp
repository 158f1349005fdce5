#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/disorder.hpp"
#include "core/pticm.hpp"

namespace sgbench {

inline constexpr std::size_t kBruteForceMaxSpins = 30;

struct BruteForceResult {
  std::int64_t e0_units = 0;
  std::int64_t denominator = 1;
  std::uint64_t degeneracy = 0;            // all minimizers, both members of a flip pair
  std::vector<SpinConfig> ground_states;   // capped at max_states
  Rational e0() const { return {e0_units, denominator}; }
};

// Gray-code enumeration with incremental local fields. With h = 0 the last
// spin is pinned and each minimizer is reported with its global flip.
// Throws InvalidInput above kBruteForceMaxSpins.
BruteForceResult brute_force(const Instance& instance, std::size_t max_states = 256);

// Ground state that is lexicographically smallest with +1 ordered before -1
// (so spin 0 is up whenever that is optimal).
SpinConfig brute_force_lexmin(const Instance& instance);

// Exact minimum by transfer over a node ordering of small bandwidth (row-major
// by position when available, node id otherwise). Cost O(N 2^B).
std::size_t ordering_bandwidth(const Graph& g);
std::int64_t banded_ground_energy(const Instance& instance, std::size_t max_bandwidth = 22);
SpinConfig banded_lexmin(const Instance& instance, std::size_t max_bandwidth = 16);

// Geometric schedule of n values between beta_min and beta_max.
std::vector<double> geometric_schedule(double beta_min, double beta_max, std::size_t n);

// Single-replica Metropolis with sweep s using schedule[s * |schedule| / sweeps].
RunTrace simulated_annealing(const Instance& instance, std::span<const double> schedule,
                             std::uint64_t sweeps, std::uint64_t seed,
                             std::uint64_t record_cadence = 0);

// Final configuration of one annealing run.
SpinConfig anneal_read(const Instance& instance, std::span<const double> schedule, std::uint64_t sweeps,
                       std::uint64_t seed);

// Flips uniformly chosen strictly improving spins until none is left.
SpinConfig greedy_descent(const Instance& instance, SpinConfig start, std::uint64_t seed);

bool is_one_flip_stable(const Instance& instance, std::span<const Spin> spins);

struct PatchworkPlan {
  int sub_side = 0;
  std::vector<std::vector<NodeId>> patches;
  std::vector<std::uint32_t> boundary_edges;
};

PatchworkPlan make_patchwork_plan(const Graph& graph, int sub_side);

using PatchSolver = std::function<SpinConfig(const Instance&)>;

// brute_force_lexmin for small patches, banded_lexmin otherwise.
PatchSolver default_patch_solver();

struct PatchworkResult {
  SpinConfig spins;
  std::int64_t energy_units = 0;         // exact energy of spins on the full instance
  std::int64_t patch_sum_units = 0;      // sum of patch optima
  std::int64_t boundary_units = 0;       // boundary-edge energy of spins
  std::int64_t boundary_abs_units = 0;   // sum |J| over boundary edges
  std::size_t num_patches = 0;
};

// Instance restricted to `nodes` (local ids follow the given order).
Instance induced_instance(const Instance& instance, std::span<const NodeId> nodes);

PatchworkResult patchwork_solve(const Instance& instance, int sub_side,
                                const PatchSolver& solver = default_patch_solver());

struct GroundStateOptions {
  std::uint64_t sweeps = 500000;
  std::uint64_t seed = 1;
  std::size_t brute_force_limit = 24;
  std::size_t banded_limit = 16;
  double settle_fraction = 0.9;
  TemperatureLadder ladder;  // empty means the B5 ladder
};

struct GroundStateReport {
  std::int64_t e0_units = 0;
  std::int64_t denominator = 1;
  bool validated = false;
  bool exact = false;             // confirmed by brute force or banded transfer
  std::int64_t pticm_units = 0;
  std::uint64_t last_improvement = 0;
  std::uint64_t sweeps = 0;
  Rational e0() const { return {e0_units, denominator}; }
};

GroundStateReport validate_ground_state(const Instance& instance, const GroundStateOptions& options);

// Set-level criterion: the 0.9 quantile of settling sweeps falls before
// settle_fraction of the run.
bool instance_set_settled(std::span<const GroundStateReport> reports, double settle_fraction = 0.9);

}  // namespace sgbench
