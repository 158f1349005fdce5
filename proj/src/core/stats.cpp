#include "core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <map>
#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "core/errors.hpp"
#include "core/metrics.hpp"

namespace sgbench {

double weighted_median(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw InvalidInput("values and weights differ in length");
  if (values.empty()) throw InvalidInput("weighted median of nothing");
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) throw InvalidInput("weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidInput("weights sum to zero");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double cum = 0.0;
  for (const std::size_t i : idx) {
    cum += weights[i];
    if (2.0 * cum >= total) return values[i];
  }
  return values[idx.back()];
}

std::vector<double> dirichlet_weights(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w) {
    x = e(rng);
    s += x;
  }
  for (auto& x : w) x /= s;
  return w;
}

double jeffreys_quantile(double u, std::size_t k, std::size_t n) {
  if (k > n) throw InvalidInput("k > n in success count");
  return boost::math::ibeta_inv(static_cast<double>(k) + 0.5, static_cast<double>(n - k) + 0.5, u);
}

double jeffreys_draw(Rng& rng, std::size_t k, std::size_t n) {
  double u = rng.uniform();
  while (u == 0.0) u = rng.uniform();
  return jeffreys_quantile(u, k, n);
}

namespace {

// Posterior quantiles tabulated on a logit grid of u and interpolated
// linearly in logit(u); shared uniforms keep draws monotone in k.
class JeffreysTable {
public:
  double draw(double u, std::size_t k, std::size_t n) {
    auto& t = tables_[{k, n}];
    if (t.empty()) {
      t.resize(kPoints);
      for (std::size_t j = 0; j < kPoints; ++j) t[j] = jeffreys_quantile(u_at(j), k, n);
    }
    const double z = std::clamp(std::log(u) - std::log1p(-u), -kZ, kZ);
    const double pos = (z + kZ) / (2.0 * kZ) * static_cast<double>(kPoints - 1);
    const std::size_t j = std::min(static_cast<std::size_t>(pos), kPoints - 2);
    const double frac = pos - static_cast<double>(j);
    return t[j] + frac * (t[j + 1] - t[j]);
  }

private:
  static constexpr std::size_t kPoints = 1025;
  static constexpr double kZ = 25.0;
  static double u_at(std::size_t j) {
    const double z = -kZ + 2.0 * kZ * static_cast<double>(j) / static_cast<double>(kPoints - 1);
    return 1.0 / (1.0 + std::exp(-z));
  }
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> tables_;
};

}  // namespace

std::vector<double> BootstrapResult::optimal_values() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.flagged ? kNeverHit : s.median_tte);
  return v;
}

namespace {

void summarize(BootstrapResult& r) {
  std::vector<double> v;
  for (const auto& s : r.samples) {
    if (!s.flagged) v.push_back(s.median_tte);
  }
  r.flagged = r.samples.size() - v.size();
  if (v.empty()) {
    r.median = r.lo = r.hi = kNeverHit;
    r.std_error = 0.0;
    return;
  }
  std::vector<double> w(v.size(), 1.0);
  r.median = weighted_median(v, w);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  r.std_error = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  r.lo = r.median - 2.0 * r.std_error;
  r.hi = r.median + 2.0 * r.std_error;
}

}  // namespace

BootstrapResult bootstrap_median_tte(const BootstrapInput& in, const BootstrapConfig& config) {
  if (in.grid.empty()) throw InvalidInput("bootstrap grid is empty");
  if (in.counts.empty()) throw InvalidInput("bootstrap needs at least one instance");
  if (config.n_boots == 0) throw InvalidInput("n_boots must be >= 1");
  for (const auto& inst : in.counts) {
    if (inst.size() != in.grid.size()) throw InvalidInput("counts do not cover the grid");
    for (const auto& g : inst) {
      if (g.empty()) throw InvalidInput("every grid point needs at least one gauge");
    }
  }
  // Ties prefer smaller t_f, then smaller J_p.
  std::vector<std::size_t> order(in.grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (in.grid[a].t_f != in.grid[b].t_f) return in.grid[a].t_f < in.grid[b].t_f;
    return in.grid[a].j_p < in.grid[b].j_p;
  });

  const std::size_t ni = in.counts.size();
  JeffreysTable table;
  BootstrapResult r;
  r.samples.resize(config.n_boots);
  std::vector<double> tte_i(ni);
  for (std::size_t b = 0; b < config.n_boots; ++b) {
    Rng rng(derive_key({config.seed, b, 0xb0}));
    const auto wi = dirichlet_weights(rng, ni);
    std::vector<double> med(in.grid.size());
    for (std::size_t j = 0; j < in.grid.size(); ++j) {
      for (std::size_t i = 0; i < ni; ++i) {
        const auto& gauges = in.counts[i][j];
        const auto wg = dirichlet_weights(rng, gauges.size());
        double p = 0.0;
        for (std::size_t g = 0; g < gauges.size(); ++g) {
          double u = rng.uniform();
          while (u == 0.0) u = rng.uniform();
          p += wg[g] * table.draw(u, gauges[g].k, gauges[g].n);
        }
        tte_i[i] = tte(in.grid[j].t_f, std::clamp(p, 0.0, 1.0)) * in.correction;
      }
      med[j] = weighted_median(tte_i, wi);
    }
    BootstrapSample& s = r.samples[b];
    s.flagged = true;
    for (const std::size_t j : order) {
      if (std::isfinite(med[j]) && (s.flagged || med[j] < s.median_tte)) {
        s.flagged = false;
        s.grid_index = j;
        s.median_tte = med[j];
      }
    }
    if (s.flagged) {
      s.median_tte = kNeverHit;
    } else {
      s.t_f = in.grid[s.grid_index].t_f;
      s.j_p = in.grid[s.grid_index].j_p;
    }
  }
  summarize(r);
  return r;
}

BootstrapResult bootstrap_instance_median(std::span<const double> values, const BootstrapConfig& config,
                                          double t_f) {
  if (values.empty()) throw InvalidInput("bootstrap needs at least one instance");
  if (config.n_boots == 0) throw InvalidInput("n_boots must be >= 1");
  BootstrapResult r;
  r.samples.resize(config.n_boots);
  for (std::size_t b = 0; b < config.n_boots; ++b) {
    Rng rng(derive_key({config.seed, b, 0xb1}));
    const auto w = dirichlet_weights(rng, values.size());
    const double m = weighted_median(values, w);
    auto& s = r.samples[b];
    s.t_f = t_f;
    s.median_tte = m;
    s.flagged = !std::isfinite(m);
  }
  summarize(r);
  return r;
}

double p_value_tf_min(const BootstrapResult& result, double t_f_min) {
  if (result.samples.empty()) return 0.0;
  std::size_t pinned = 0;
  for (const auto& s : result.samples) pinned += (!s.flagged && s.t_f == t_f_min);
  return static_cast<double>(pinned) / static_cast<double>(result.samples.size());
}

Gate gate_for(double p) {
  if (p < 0.05) return Gate::Filled;
  if (p < 0.20) return Gate::Open;
  return Gate::Excluded;
}

std::string to_string(Gate g) {
  switch (g) {
    case Gate::Filled: return "filled";
    case Gate::Open: return "open";
    case Gate::Excluded: return "excluded";
  }
  return "excluded";
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InvalidInput("least squares needs >= 2 matched points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidInput("least squares needs distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

PowerLawFit fit_power_law(std::span<const ScalingPoint> points, double gate) {
  PowerLawFit fit;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.p_value < gate) || !(p.tte > 0.0) || !std::isfinite(p.tte) || !(p.n > 0.0)) continue;
    fit.points_used.push_back(i);
    x.push_back(std::log(p.n));
    y.push_back(std::log(p.tte));
  }
  if (fit.points_used.size() < 3) {
    fit.diagnostic = "only " + std::to_string(fit.points_used.size()) +
                     " sizes pass the P < " + format_double(gate) + " gate with a finite TTE; need 3";
    return fit;
  }
  const LineFit lf = least_squares(x, y);
  fit.ok = true;
  fit.alpha = lf.slope;
  fit.c = std::exp(lf.intercept);
  for (std::size_t i = 0; i < x.size(); ++i) fit.residuals.push_back(y[i] - lf.intercept - lf.slope * x[i]);

  std::size_t nb = std::numeric_limits<std::size_t>::max();
  for (const std::size_t i : fit.points_used) nb = std::min(nb, points[i].boot.size());
  std::vector<double> slopes;
  std::vector<double> yb(x.size());
  for (std::size_t b = 0; b < nb; ++b) {
    bool good = true;
    for (std::size_t k = 0; k < x.size() && good; ++k) {
      const double v = points[fit.points_used[k]].boot[b];
      good = v > 0.0 && std::isfinite(v);
      yb[k] = good ? std::log(v) : 0.0;
    }
    if (good) slopes.push_back(least_squares(x, yb).slope);
  }
  fit.refits = slopes.size();
  if (slopes.size() >= 2) {
    const double m = std::accumulate(slopes.begin(), slopes.end(), 0.0) / static_cast<double>(slopes.size());
    double ss = 0.0;
    for (const double s : slopes) ss += (s - m) * (s - m);
    fit.sigma_alpha = std::sqrt(ss / static_cast<double>(slopes.size() - 1));
    fit.sigma_from_bootstrap = true;
  } else {
    fit.sigma_alpha = lf.slope_se;
  }
  return fit;
}

}  // namespace sgbench
