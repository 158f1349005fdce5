#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace sgbench {

// Smallest value whose cumulative weight reaches half the total. Infinite
// values sort last. Throws InvalidInput for negative or all-zero weights.
double weighted_median(std::span<const double> values, std::span<const double> weights);

// Symmetric Dirichlet(1) of length n.
std::vector<double> dirichlet_weights(Rng& rng, std::size_t n);

// Jeffreys posterior Beta(k + 1/2, n - k + 1/2): quantile at u, and a draw by
// inversion (monotone in k for a fixed uniform).
double jeffreys_quantile(double u, std::size_t k, std::size_t n);
double jeffreys_draw(Rng& rng, std::size_t k, std::size_t n);

struct GaugeCount {
  std::size_t k = 0;
  std::size_t n = 0;
};

struct GridPoint {
  double t_f = 0.0;
  double j_p = 0.0;
};

struct BootstrapInput {
  std::vector<GridPoint> grid;
  // counts[instance][grid point][gauge]
  std::vector<std::vector<std::vector<GaugeCount>>> counts;
  double correction = 1.0;
};

struct BootstrapConfig {
  std::size_t n_boots = 200;
  std::uint64_t seed = 1;
};

struct BootstrapSample {
  std::size_t grid_index = 0;
  double t_f = 0.0;
  double j_p = 0.0;
  double median_tte = 0.0;
  bool flagged = false;  // every grid point had an infinite median
};

struct BootstrapResult {
  std::vector<BootstrapSample> samples;
  std::size_t flagged = 0;
  double median = 0.0;     // of optimal TTE over unflagged samples
  double std_error = 0.0;  // standard deviation of the same
  double lo = 0.0;         // median - 2 std_error
  double hi = 0.0;         // median + 2 std_error

  // Optimal TTE per sample with flagged samples as +inf.
  std::vector<double> optimal_values() const;
};

// Per sample: Jeffreys draw per gauge (tabulated inverse CDF), Dirichlet gauge weights per
// (instance, grid point), one set of Dirichlet instance weights, weighted
// median TTE per grid point, argmin with ties to smaller t_f then J_p.
BootstrapResult bootstrap_median_tte(const BootstrapInput& input, const BootstrapConfig& config);

// Instance-level Bayesian bootstrap of the median of per-instance values.
BootstrapResult bootstrap_instance_median(std::span<const double> values, const BootstrapConfig& config,
                                          double t_f = 0.0);

// Fraction of all samples whose optimal t_f equals t_f_min.
double p_value_tf_min(const BootstrapResult& result, double t_f_min);

enum class Gate { Filled, Open, Excluded };
Gate gate_for(double p_value);
std::string to_string(Gate g);

struct ScalingPoint {
  double n = 0.0;
  double tte = 0.0;
  std::vector<double> boot;  // per bootstrap sample, aligned across points
  double p_value = 0.0;
};

struct PowerLawFit {
  bool ok = false;
  std::string diagnostic;
  double c = 0.0;
  double alpha = 0.0;
  double sigma_alpha = 0.0;
  bool sigma_from_bootstrap = false;
  std::size_t refits = 0;
  std::vector<std::size_t> points_used;
  std::vector<double> residuals;  // log-space, per used point
};

// Least squares on (log N, log TTE) over points with p_value < gate and a
// finite positive TTE. sigma_alpha is the spread of slopes refitted to each
// bootstrap index, or the OLS standard error when fewer than two refits are
// possible. Refuses (ok = false) with fewer than 3 usable points.
PowerLawFit fit_power_law(std::span<const ScalingPoint> points, double gate = 0.05);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
};
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace sgbench
