#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "core/disorder.hpp"
#include "core/metrics.hpp"

namespace sgbench {

struct TargetSpec {
  TargetKind kind = TargetKind::Epsilon;
  std::string text;  // as written in the config, e.g. "0.01"
  Rational value;
};

// Flat key = value experiment description. Unknown keys are rejected.
struct ExperimentConfig {
  DisorderClass disorder = DisorderClass::Sidon28;
  std::vector<int> sizes{4, 5, 6, 7, 8};
  std::size_t instances = 50;
  std::uint64_t seed = 1;
  int pegasus_m = 16;
  int min_support = 2;
  std::vector<std::string> methods{"PTICM", "QAC", "U3"};
  std::vector<TargetSpec> targets;
  std::vector<double> tf_grid{0.5, 1, 2, 4, 8, 16};
  std::vector<std::string> jp_grid{"0.1", "0.2", "0.3"};
  std::size_t gauges = 2;
  std::size_t reads = 200;
  std::size_t u3_reads = 100;
  std::string sampler = "sa";
  double sampler_sweeps_per_us = 32.0;
  double sampler_beta_min = 0.1;
  double sampler_beta_max = 5.0;
  std::string sample_dir;
  std::vector<std::string> ladders{"B5", "F24", "F32", "B20"};
  int feedback_rounds = 3;
  std::uint64_t feedback_sweeps = 400;
  std::size_t feedback_instances = 3;
  std::size_t repetitions = 10;
  std::uint64_t pt_max_sweeps = 4000;
  std::uint64_t gs_sweeps = 4000;
  std::size_t gs_brute_force_limit = 24;
  double spin_update_seconds = 2e-9;
  std::size_t n_boots = 200;
  double gate = 0.05;
  std::string kz_penalty = "0.1";
  std::string kz_pairing = "disjoint_random";
  double mu_min = 0.0;
  double mu_max = 12.0;
  double mu_step = 0.25;
  double kz_window = 0.2;
  std::string output = "sgbench_out";

  ExperimentConfig();

  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig desk_profile();
  static ExperimentConfig full_profile();

  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> values() const;
  std::string canonical_text() const;
  std::string hash() const;
  // Hash of the keys that determine the generated layouts and instances.
  std::string instance_hash() const;
  void check() const;
};

struct RunOptions {
  bool force = false;
  bool calibrate = false;
  std::ostream* log = nullptr;
};

// Relative path -> content hash, plus the provenance of the run that wrote it.
class Manifest {
public:
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string instance_hash;
  std::map<std::string, std::string> files;

  static Manifest load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
};

class Pipeline {
public:
  Pipeline(ExperimentConfig config, RunOptions options = {});

  const ExperimentConfig& config() const noexcept { return config_; }
  std::filesystem::path root() const { return config_.output; }

  void generate();
  void gs_validate();
  void solve_pticm();
  void sample();
  void analyze();
  void collapse();
  std::string report();

  // Runs a stage by its command name.
  void run_stage(const std::string& name);
  static const std::vector<std::string>& stage_names();

private:
  ExperimentConfig config_;
  RunOptions options_;
  Manifest manifest_;
  std::string provenance_;

  void log(const std::string& line) const;
  void load_manifest();
  void write_file(const std::string& rel, const std::string& content);
  std::string read_verified(const std::string& rel) const;
  void verify_all(const std::string& prefix) const;
  void require_fresh(const std::string& rel) const;
  double seconds_per_sweep(std::size_t n_spins, std::size_t n_temps) const;
};

}  // namespace sgbench
