#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/disorder.hpp"

namespace sgbench {

enum class Pairing { DisjointRandom, AllPairs };

std::string to_string(Pairing p);
Pairing parse_pairing(const std::string& s);

double overlap(std::span<const Spin> a, std::span<const Spin> b);

// Overlaps between samples of one instance. Disjoint pairing shuffles with
// `seed` and pairs neighbours, dropping an odd leftover.
std::vector<double> overlaps(std::span<const SpinConfig> samples, Pairing pairing, std::uint64_t seed);

// 1/2 (3 - <q^4>/<q^2>^2). Throws InvalidInput when <q^2> = 0 or q is empty.
double binder_cumulant(std::span<const double> q);

struct BinderEstimate {
  double U = 0.0;
  std::vector<double> per_instance;  // instances with <q^2> > 0
  std::size_t skipped = 0;
};

// Per-instance cumulant then mean, or moments pooled over all instances.
BinderEstimate binder(const std::vector<std::vector<double>>& q_by_instance, bool pooled = false);

struct BinderPoint {
  int L = 0;
  double t_f = 0.0;
  double U = 0.0;
  double sigma_U = 0.0;
  std::size_t n_pairs = 0;
};

// U and its Bayesian-bootstrap error over instances.
BinderPoint binder_point(int L, double t_f, const std::vector<std::vector<double>>& q_by_instance,
                         std::size_t n_boots = 200, std::uint64_t seed = 1);

struct CollapseOptions {
  double window = 0.2;            // master-curve window as a fraction of the rescaled range
  std::size_t resamples = 40;     // parametric resamples for sigma_mu
  std::uint64_t seed = 1;
};

struct ScanEntry {
  double mu = 0.0;
  double quality = 0.0;
  bool defined = false;
};

struct RescaledPoint {
  int L = 0;
  double t_f = 0.0;
  double x = 0.0;  // ln t_f - mu ln L
  double U = 0.0;
  double sigma_U = 0.0;
};

struct CollapseResult {
  double mu = 0.0;
  double sigma_mu = 0.0;
  double quality = 0.0;
  std::vector<ScanEntry> scan;
  std::vector<RescaledPoint> points;  // at the returned mu
  std::vector<std::string> report;
};

// Weighted mean squared deviation of each point from a local linear fit to
// the points of other sizes inside the window around it. Returns NaN when
// fewer than half the points have such a fit.
double collapse_quality(std::span<const BinderPoint> points, double mu, double window = 0.2);

std::vector<double> linear_grid(double lo, double hi, std::size_t n);

// Scan, parabolic refinement around the best grid point, and sigma_mu from
// refits with U resampled by its errors. Needs >= 3 distinct L.
CollapseResult collapse(std::span<const BinderPoint> points, std::span<const double> mu_grid,
                        const CollapseOptions& options = {});

}  // namespace sgbench
