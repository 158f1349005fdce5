#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "core/pticm.hpp"
#include "core/qac.hpp"
#include "core/rational.hpp"

namespace sgbench {

inline constexpr double kNeverHit = std::numeric_limits<double>::infinity();

enum class TargetKind { Epsilon, Rho };

std::string to_string(TargetKind k);
TargetKind parse_target_kind(const std::string& s);

struct EnergyTarget {
  TargetKind kind = TargetKind::Epsilon;
  Rational value;        // epsilon or rho
  Rational e0;
  Rational threshold;
};

// epsilon: E0 + eps |E0|. rho: E0 + rho * J * N with J = 1.
EnergyTarget epsilon_target(const Rational& e0, const Rational& eps);
EnergyTarget rho_target(const Rational& e0, const Rational& rho, std::size_t n);
EnergyTarget make_target(TargetKind kind, const Rational& e0, const Rational& value, std::size_t n);

// Largest energy numerator over `denominator` that satisfies the target.
std::int64_t threshold_units(const EnergyTarget& target, std::int64_t denominator);

struct SuccessCount {
  std::size_t k = 0;
  std::size_t n = 0;
  double p() const { return n ? static_cast<double>(k) / static_cast<double>(n) : 0.0; }
};

SuccessCount success_probability(const LogicalSampleSet& samples, const EnergyTarget& target);
SuccessCount success_probability(std::span<const std::int64_t> energy_units, std::int64_t denominator,
                                 const EnergyTarget& target);

// t_f log(0.01) / log(1 - p), at least t_f; p = 0 gives kNeverHit.
double tte(double t_f, double p);
inline double ttr(double t_f, double p_rho) { return tte(t_f, p_rho); }

enum class CorrectionMethod { QaSingleCopy, U3, Pticm };

double correction_factor(CorrectionMethod method, std::size_t n, std::size_t n_max);
double apply_correction(double tte_value, CorrectionMethod method, std::size_t n, std::size_t n_max);

// Minimum over hit times t of t log(0.01)/log(1 - F(t)) where F is the
// empirical CDF of first-hit times (kNeverHit for misses).
double tte_from_hit_times(std::span<const double> hit_times);

// First-hit times (seconds) of the target for each trace, then the above.
double tte_curve_pticm(std::span<const RunTrace> traces, const EnergyTarget& target);
std::vector<double> hit_times(std::span<const RunTrace> traces, const EnergyTarget& target);

struct ResultRow {
  std::string method;
  std::string disorder;
  int L = 0;
  std::size_t N = 0;
  double t_f_or_runtime = 0.0;
  std::string unit;  // "us" or "s"
  TargetKind target_kind = TargetKind::Epsilon;
  std::string target_value;
  std::size_t k = 0;
  std::size_t n = 0;
  double tte_corrected = 0.0;
};

void write_results_header(std::ostream& out);
void write_result_row(std::ostream& out, const ResultRow& row);
std::vector<ResultRow> read_results(std::istream& in);

// Shortest decimal form that parses back to the same double; "inf" for
// kNeverHit.
std::string format_double(double v);

}  // namespace sgbench
