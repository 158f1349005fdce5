#include "core/kz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/stats.hpp"

namespace sgbench {

std::string to_string(Pairing p) { return p == Pairing::DisjointRandom ? "disjoint_random" : "all_pairs"; }

Pairing parse_pairing(const std::string& s) {
  if (s == "disjoint_random") return Pairing::DisjointRandom;
  if (s == "all_pairs") return Pairing::AllPairs;
  throw InvalidInput("unknown pairing '" + s + "'");
}

double overlap(std::span<const Spin> a, std::span<const Spin> b) {
  if (a.size() != b.size() || a.empty()) throw InvalidInput("overlap needs equal non-empty configurations");
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return static_cast<double>(s) / static_cast<double>(a.size());
}

std::vector<double> overlaps(std::span<const SpinConfig> samples, Pairing pairing, std::uint64_t seed) {
  if (samples.size() < 2) throw InvalidInput("overlaps need at least 2 samples");
  std::vector<double> q;
  if (pairing == Pairing::AllPairs) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (std::size_t j = i + 1; j < samples.size(); ++j) q.push_back(overlap(samples[i], samples[j]));
    }
    return q;
  }
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng.index(i + 1)]);
  for (std::size_t i = 0; i + 1 < idx.size(); i += 2) q.push_back(overlap(samples[idx[i]], samples[idx[i + 1]]));
  return q;
}

double binder_cumulant(std::span<const double> q) {
  if (q.empty()) throw InvalidInput("binder cumulant of no overlaps");
  double m2 = 0.0, m4 = 0.0;
  for (const double x : q) {
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m2 /= static_cast<double>(q.size());
  m4 /= static_cast<double>(q.size());
  if (!(m2 > 0.0)) throw InvalidInput("<q^2> is zero");
  return 0.5 * (3.0 - m4 / (m2 * m2));
}

BinderEstimate binder(const std::vector<std::vector<double>>& q_by_instance, bool pooled) {
  BinderEstimate est;
  if (pooled) {
    std::vector<double> all;
    for (const auto& q : q_by_instance) all.insert(all.end(), q.begin(), q.end());
    est.U = binder_cumulant(all);
    return est;
  }
  for (const auto& q : q_by_instance) {
    if (q.empty()) {
      ++est.skipped;
      continue;
    }
    double m2 = 0.0;
    for (const double x : q) m2 += x * x;
    if (!(m2 > 0.0)) {
      ++est.skipped;
      continue;
    }
    est.per_instance.push_back(binder_cumulant(q));
  }
  if (est.per_instance.empty()) throw InvalidInput("no instance has <q^2> > 0");
  est.U = std::accumulate(est.per_instance.begin(), est.per_instance.end(), 0.0) /
          static_cast<double>(est.per_instance.size());
  return est;
}

BinderPoint binder_point(int L, double t_f, const std::vector<std::vector<double>>& q_by_instance,
                         std::size_t n_boots, std::uint64_t seed) {
  BinderPoint p;
  p.L = L;
  p.t_f = t_f;
  const auto est = binder(q_by_instance);
  p.U = est.U;
  for (const auto& q : q_by_instance) p.n_pairs += q.size();
  const auto& u = est.per_instance;
  if (u.size() > 1 && n_boots > 1) {
    std::vector<double> boots(n_boots);
    for (std::size_t b = 0; b < n_boots; ++b) {
      Rng rng(derive_key({seed, b, 0xb2}));
      const auto w = dirichlet_weights(rng, u.size());
      boots[b] = std::inner_product(w.begin(), w.end(), u.begin(), 0.0);
    }
    const double m = std::accumulate(boots.begin(), boots.end(), 0.0) / static_cast<double>(n_boots);
    double ss = 0.0;
    for (const double x : boots) ss += (x - m) * (x - m);
    p.sigma_U = std::sqrt(ss / static_cast<double>(n_boots - 1));
  }
  return p;
}

double collapse_quality(std::span<const BinderPoint> points, double mu, double window) {
  const std::size_t n = points.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::log(points[i].t_f) - mu * std::log(points[i].L);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double half = 0.5 * window * (*hi - *lo);
  double num = 0.0, den = 0.0;
  std::size_t fitted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // weighted local line through the other sizes' points near x_i
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t cnt = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (points[j].L == points[i].L || std::abs(x[j] - x[i]) > half) continue;
      const double w = points[j].sigma_U > 0.0 ? 1.0 / (points[j].sigma_U * points[j].sigma_U) : 1.0;
      sw += w;
      sx += w * x[j];
      sy += w * points[j].U;
      sxx += w * x[j] * x[j];
      sxy += w * x[j] * points[j].U;
      ++cnt;
    }
    if (cnt < 2) continue;
    const double det = sw * sxx - sx * sx;
    double pred;
    if (det > 1e-12 * sw * sw) {
      const double b = (sw * sxy - sx * sy) / det;
      const double a = (sy - b * sx) / sw;
      pred = a + b * x[i];
    } else {
      pred = sy / sw;
    }
    const double r = points[i].U - pred;
    const double w = points[i].sigma_U > 0.0 ? 1.0 / (points[i].sigma_U * points[i].sigma_U) : 1.0;
    num += w * r * r;
    den += w;
    ++fitted;
  }
  if (2 * fitted < n || fitted == 0) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw InvalidInput("grid needs n >= 2 and hi > lo");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

namespace {

struct ScanBest {
  double mu = 0.0;
  double quality = 0.0;
  bool found = false;
};

ScanBest scan_minimum(std::span<const BinderPoint> points, std::span<const double> grid, double window,
                      std::vector<ScanEntry>* scan) {
  std::vector<ScanEntry> s(grid.size());
  std::size_t best = grid.size();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    s[k].mu = grid[k];
    s[k].quality = collapse_quality(points, grid[k], window);
    s[k].defined = std::isfinite(s[k].quality);
    if (s[k].defined && (best == grid.size() || s[k].quality < s[best].quality)) best = k;
  }
  ScanBest out;
  if (best < grid.size()) {
    out.found = true;
    out.mu = grid[best];
    out.quality = s[best].quality;
    if (best > 0 && best + 1 < grid.size() && s[best - 1].defined && s[best + 1].defined) {
      const double x0 = grid[best - 1], x1 = grid[best], x2 = grid[best + 1];
      const double y0 = s[best - 1].quality, y1 = s[best].quality, y2 = s[best + 1].quality;
      const double d = (x0 - x1) * (x0 - x2) * (x1 - x2);
      const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d;
      const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d;
      if (a > 0.0) out.mu = std::clamp(-b / (2.0 * a), x0, x2);
    }
  }
  if (scan) *scan = std::move(s);
  return out;
}

}  // namespace

CollapseResult collapse(std::span<const BinderPoint> points, std::span<const double> mu_grid,
                        const CollapseOptions& options) {
  std::set<int> sizes;
  for (const auto& p : points) {
    if (!(p.t_f > 0.0) || p.L <= 0) throw InvalidInput("collapse points need t_f > 0 and L > 0");
    sizes.insert(p.L);
  }
  if (sizes.size() < 3) throw InvalidInput("collapse needs at least 3 distinct sizes, got " + std::to_string(sizes.size()));
  if (mu_grid.size() < 3) throw InvalidInput("mu grid needs at least 3 values");
  for (std::size_t i = 1; i < mu_grid.size(); ++i) {
    if (!(mu_grid[i] > mu_grid[i - 1])) throw InvalidInput("mu grid must be strictly increasing");
  }
  CollapseResult r;
  const ScanBest best = scan_minimum(points, mu_grid, options.window, &r.scan);
  for (const auto& s : r.scan) {
    if (!s.defined) r.report.push_back("mu=" + std::to_string(s.mu) + ": rescaled sizes do not overlap");
  }
  if (!best.found) throw InvalidInput("collapse quality is undefined at every mu in the grid");
  r.mu = best.mu;
  r.quality = collapse_quality(points, r.mu, options.window);
  if (!std::isfinite(r.quality)) r.quality = best.quality;

  std::vector<double> mus;
  std::vector<BinderPoint> jitter(points.begin(), points.end());
  std::normal_distribution<double> gauss(0.0, 1.0);
  bool any_error = std::any_of(points.begin(), points.end(), [](const BinderPoint& p) { return p.sigma_U > 0.0; });
  for (std::size_t k = 0; any_error && k < options.resamples; ++k) {
    Rng rng(derive_key({options.seed, k, 0xc0}));
    for (std::size_t i = 0; i < points.size(); ++i) jitter[i].U = points[i].U + points[i].sigma_U * gauss(rng);
    const ScanBest b = scan_minimum(jitter, mu_grid, options.window, nullptr);
    if (b.found) mus.push_back(b.mu);
  }
  if (mus.size() >= 2) {
    const double m = std::accumulate(mus.begin(), mus.end(), 0.0) / static_cast<double>(mus.size());
    double ss = 0.0;
    for (const double x : mus) ss += (x - m) * (x - m);
    r.sigma_mu = std::sqrt(ss / static_cast<double>(mus.size() - 1));
  }
  for (const auto& p : points) {
    r.points.push_back({p.L, p.t_f, std::log(p.t_f) - r.mu * std::log(p.L), p.U, p.sigma_U});
  }
  return r;
}

}  // namespace sgbench
