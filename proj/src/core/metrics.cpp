#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "core/errors.hpp"

namespace sgbench {

std::string to_string(TargetKind k) { return k == TargetKind::Epsilon ? "epsilon" : "rho"; }

TargetKind parse_target_kind(const std::string& s) {
  if (s == "epsilon" || s == "eps") return TargetKind::Epsilon;
  if (s == "rho") return TargetKind::Rho;
  throw InvalidInput("unknown target kind '" + s + "'");
}

EnergyTarget epsilon_target(const Rational& e0, const Rational& eps) {
  if (eps < Rational(0)) throw InvalidInput("epsilon must be non-negative");
  return {TargetKind::Epsilon, eps, e0, e0 + eps * e0.abs()};
}

EnergyTarget rho_target(const Rational& e0, const Rational& rho, std::size_t n) {
  if (rho < Rational(0)) throw InvalidInput("rho must be non-negative");
  return {TargetKind::Rho, rho, e0, e0 + rho * Rational(static_cast<std::int64_t>(n))};
}

EnergyTarget make_target(TargetKind kind, const Rational& e0, const Rational& value, std::size_t n) {
  return kind == TargetKind::Epsilon ? epsilon_target(e0, value) : rho_target(e0, value, n);
}

std::int64_t threshold_units(const EnergyTarget& target, std::int64_t denominator) {
  const __int128 num = static_cast<__int128>(target.threshold.num()) * denominator;
  const __int128 d = target.threshold.den();
  __int128 q = num / d;
  if (num % d != 0 && num < 0) --q;
  return static_cast<std::int64_t>(q);
}

SuccessCount success_probability(std::span<const std::int64_t> energy_units, std::int64_t denominator,
                                 const EnergyTarget& target) {
  if (energy_units.empty()) throw InvalidInput("success probability of an empty sample set");
  const std::int64_t thr = threshold_units(target, denominator);
  SuccessCount c;
  c.n = energy_units.size();
  c.k = static_cast<std::size_t>(std::count_if(energy_units.begin(), energy_units.end(),
                                               [thr](std::int64_t e) { return e <= thr; }));
  return c;
}

SuccessCount success_probability(const LogicalSampleSet& samples, const EnergyTarget& target) {
  return success_probability(samples.energy_units, samples.denominator, target);
}

double tte(double t_f, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("success probability must lie in [0, 1]");
  if (p == 0.0) return kNeverHit;
  if (p >= 0.99) return t_f;
  const double r = std::log(0.01) / std::log1p(-p);
  return t_f * std::max(1.0, r);
}

double correction_factor(CorrectionMethod method, std::size_t n, std::size_t n_max) {
  if (n == 0 || n > n_max) throw InvalidInput("correction needs 0 < N <= N_max");
  const double frac = static_cast<double>(n) / static_cast<double>(n_max);
  switch (method) {
    case CorrectionMethod::QaSingleCopy: return frac;
    case CorrectionMethod::U3: return frac * 0.75;
    case CorrectionMethod::Pticm: return 1.0;
  }
  return 1.0;
}

double apply_correction(double tte_value, CorrectionMethod method, std::size_t n, std::size_t n_max) {
  return tte_value * correction_factor(method, n, n_max);
}

double tte_from_hit_times(std::span<const double> hits) {
  if (hits.empty()) throw InvalidInput("no repetitions");
  std::vector<double> t;
  for (const double h : hits) {
    if (std::isfinite(h)) t.push_back(h);
  }
  std::sort(t.begin(), t.end());
  double best = kNeverHit;
  const double n = static_cast<double>(hits.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i + 1 < t.size() && t[i + 1] == t[i]) continue;
    best = std::min(best, tte(t[i], static_cast<double>(i + 1) / n));
  }
  return best;
}

std::vector<double> hit_times(std::span<const RunTrace> traces, const EnergyTarget& target) {
  std::vector<double> out;
  out.reserve(traces.size());
  for (const auto& tr : traces) {
    const auto hit = tr.first_hit(threshold_units(target, tr.denominator));
    out.push_back(hit ? static_cast<double>(std::max<std::uint64_t>(*hit, 1)) * tr.seconds_per_sweep : kNeverHit);
  }
  return out;
}

double tte_curve_pticm(std::span<const RunTrace> traces, const EnergyTarget& target) {
  const auto h = hit_times(traces, target);
  return tte_from_hit_times(h);
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_results_header(std::ostream& out) {
  out << "method,disorder,L,N,t_f_or_runtime,unit,target_kind,target_value,k,n,tte_corrected\n";
}

void write_result_row(std::ostream& out, const ResultRow& r) {
  if (r.unit.empty()) throw InvalidInput("results rows need a time unit");
  out << r.method << ',' << r.disorder << ',' << r.L << ',' << r.N << ',' << format_double(r.t_f_or_runtime)
      << ',' << r.unit << ',' << to_string(r.target_kind) << ',' << r.target_value << ',' << r.k << ',' << r.n
      << ',' << format_double(r.tte_corrected) << '\n';
}

std::vector<ResultRow> read_results(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
    if (f.size() != 11) throw ParseError("expected 11 columns, got " + std::to_string(f.size()), line_no);
    ResultRow r;
    try {
      r.method = f[0];
      r.disorder = f[1];
      r.L = std::stoi(f[2]);
      r.N = std::stoull(f[3]);
      r.t_f_or_runtime = std::stod(f[4]);
      r.unit = f[5];
      r.target_kind = parse_target_kind(f[6]);
      r.target_value = f[7];
      r.k = std::stoull(f[8]);
      r.n = std::stoull(f[9]);
      r.tte_corrected = std::stod(f[10]);
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad field: ") + e.what(), line_no);
    }
    if (r.unit.empty()) throw ParseError("missing unit", line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace sgbench
