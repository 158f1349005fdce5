#include "core/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/baselines.hpp"
#include "core/errors.hpp"
#include "core/hash.hpp"
#include "core/kz.hpp"
#include "core/pticm.hpp"
#include "core/qac.hpp"
#include "core/stats.hpp"
#include "core/topology.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace sgbench {

namespace {

enum : std::uint64_t {
  kTagInstance = 0x101,
  kTagGround,
  kTagPt,
  kTagGauge,
  kTagSample,
  kTagBoot,
  kTagKz,
  kTagFeedback,
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, sep);) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::string join(const std::vector<std::string>& v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw InvalidInput(key + ": expected a number, got '" + v + "'");
  return d;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  std::uint64_t x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw InvalidInput(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

std::string idx3(std::size_t i) {
  char b[16];
  std::snprintf(b, sizeof b, "i%03zu", i);
  return b;
}

std::string size_dir(int L) { return "L" + std::to_string(L); }

json num(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct GroundRow {
  Rational e0;
  bool exact = false;
  bool validated = false;
};

struct LadderSpec {
  std::string label;
  TemperatureLadder base;
  bool feedback = false;
};

LadderSpec parse_ladder(const std::string& name) {
  const auto std_ladders = standard_ladders();
  for (const auto& l : std_ladders) {
    if (l.label == name) return {name, l, name[0] == 'F'};
  }
  // log:NT:bmin:bmax:nicm or fb:NT:bmin:bmax:nicm
  const auto parts = split(name, ':');
  if (parts.size() == 5 && (parts[0] == "log" || parts[0] == "fb")) {
    const bool fb = parts[0] == "fb";
    auto l = make_ladder(static_cast<int>(to_uint("ladders", parts[1])), to_double("ladders", parts[2]),
                         to_double("ladders", parts[3]), fb ? LadderSpacing::FeedbackInit : LadderSpacing::Log,
                         static_cast<int>(to_uint("ladders", parts[4])), name);
    return {name, l, fb};
  }
  throw InvalidInput("ladders: unknown ladder '" + name + "' (B5, F24, F32, B20, log:NT:bmin:bmax:nicm, fb:...)");
}

std::string safe_label(std::string s) {
  for (auto& c : s) {
    if (c == ':') c = '_';
  }
  return s;
}

std::string sample_token(QacMode mode, const std::string& jp) {
  return mode == QacMode::QAC ? "QAC_jp" + jp : "U3";
}

std::string sample_rel(int L, std::size_t i, QacMode mode, const std::string& jp, double tf) {
  return size_dir(L) + "/" + idx3(i) + "/" + sample_token(mode, jp) + "_tf" + format_double(tf) + ".txt";
}

CorrectionMethod correction_for(const std::string& method) {
  if (method == "QAC") return CorrectionMethod::QaSingleCopy;
  if (method == "U3") return CorrectionMethod::U3;
  return CorrectionMethod::Pticm;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (const char* e : {"0.02", "0.03", "0.04", "0.05"}) {
    targets.push_back({TargetKind::Epsilon, e, Rational::parse(e)});
  }
}

ExperimentConfig ExperimentConfig::desk_profile() { return ExperimentConfig(); }

ExperimentConfig ExperimentConfig::full_profile() {
  ExperimentConfig c;
  c.sizes = {5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  c.instances = 125;
  c.gauges = 10;
  c.reads = 1000;
  c.u3_reads = 1000;
  c.n_boots = 200;
  c.tf_grid = {0.5, 1, 2, 4, 8, 16, 27};
  c.repetitions = 100;
  c.pt_max_sweeps = 500000;
  c.gs_sweeps = 500000;
  c.feedback_sweeps = 20000;
  c.feedback_instances = 10;
  c.targets.clear();
  for (const char* e : {"0.0075", "0.01", "0.0125"}) c.targets.push_back({TargetKind::Epsilon, e, Rational::parse(e)});
  c.output = "sgbench_full";
  return c;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "disorder") {
    disorder = parse_disorder_class(v);
  } else if (key == "L") {
    sizes.clear();
    for (const auto& t : split(v, ',')) sizes.push_back(static_cast<int>(to_uint(key, t)));
  } else if (key == "instances") {
    instances = to_uint(key, v);
  } else if (key == "seed") {
    seed = to_uint(key, v);
  } else if (key == "pegasus_m") {
    pegasus_m = static_cast<int>(to_uint(key, v));
  } else if (key == "min_support") {
    min_support = static_cast<int>(to_uint(key, v));
  } else if (key == "methods") {
    methods = split(v, ',');
  } else if (key == "targets") {
    targets.clear();
    for (const auto& t : split(v, ',')) {
      const auto colon = t.find(':');
      if (colon == std::string::npos) throw InvalidInput("targets: expected kind:value, got '" + t + "'");
      const std::string val = t.substr(colon + 1);
      targets.push_back({parse_target_kind(t.substr(0, colon)), val, Rational::parse(val)});
    }
  } else if (key == "tf_grid") {
    tf_grid.clear();
    for (const auto& t : split(v, ',')) tf_grid.push_back(to_double(key, t));
  } else if (key == "jp_grid") {
    jp_grid = split(v, ',');
    for (const auto& j : jp_grid) Rational::parse(j);
  } else if (key == "gauges") {
    gauges = to_uint(key, v);
  } else if (key == "reads") {
    reads = to_uint(key, v);
  } else if (key == "u3_reads") {
    u3_reads = to_uint(key, v);
  } else if (key == "sampler") {
    sampler = v;
  } else if (key == "sampler_sweeps_per_us") {
    sampler_sweeps_per_us = to_double(key, v);
  } else if (key == "sampler_beta_min") {
    sampler_beta_min = to_double(key, v);
  } else if (key == "sampler_beta_max") {
    sampler_beta_max = to_double(key, v);
  } else if (key == "sample_dir") {
    sample_dir = v;
  } else if (key == "ladders") {
    ladders = split(v, ',');
  } else if (key == "feedback_rounds") {
    feedback_rounds = static_cast<int>(to_uint(key, v));
  } else if (key == "feedback_sweeps") {
    feedback_sweeps = to_uint(key, v);
  } else if (key == "feedback_instances") {
    feedback_instances = to_uint(key, v);
  } else if (key == "repetitions") {
    repetitions = to_uint(key, v);
  } else if (key == "pt_max_sweeps") {
    pt_max_sweeps = to_uint(key, v);
  } else if (key == "gs_sweeps") {
    gs_sweeps = to_uint(key, v);
  } else if (key == "gs_brute_force_limit") {
    gs_brute_force_limit = to_uint(key, v);
  } else if (key == "spin_update_seconds") {
    spin_update_seconds = to_double(key, v);
  } else if (key == "n_boots") {
    n_boots = to_uint(key, v);
  } else if (key == "gate") {
    gate = to_double(key, v);
  } else if (key == "kz_penalty") {
    Rational::parse(v);
    kz_penalty = v;
  } else if (key == "kz_pairing") {
    parse_pairing(v);
    kz_pairing = v;
  } else if (key == "mu_min") {
    mu_min = to_double(key, v);
  } else if (key == "mu_max") {
    mu_max = to_double(key, v);
  } else if (key == "mu_step") {
    mu_step = to_double(key, v);
  } else if (key == "kz_window") {
    kz_window = to_double(key, v);
  } else if (key == "output") {
    output = v;
  } else if (key == "profile") {
    if (v == "full") {
      *this = full_profile();
    } else if (v == "desk") {
      *this = desk_profile();
    } else {
      throw InvalidInput("profile: expected desk or full");
    }
  } else {
    throw InvalidInput("unknown config key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    try {
      c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  c.check();
  return c;
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

std::map<std::string, std::string> ExperimentConfig::values() const {
  std::map<std::string, std::string> m;
  m["disorder"] = to_string(disorder);
  std::vector<std::string> tmp;
  for (const int L : sizes) tmp.push_back(std::to_string(L));
  m["L"] = join(tmp);
  m["instances"] = std::to_string(instances);
  m["seed"] = std::to_string(seed);
  m["pegasus_m"] = std::to_string(pegasus_m);
  m["min_support"] = std::to_string(min_support);
  m["methods"] = join(methods);
  tmp.clear();
  for (const auto& t : targets) tmp.push_back(to_string(t.kind) + ":" + t.text);
  m["targets"] = join(tmp);
  tmp.clear();
  for (const double t : tf_grid) tmp.push_back(format_double(t));
  m["tf_grid"] = join(tmp);
  m["jp_grid"] = join(jp_grid);
  m["gauges"] = std::to_string(gauges);
  m["reads"] = std::to_string(reads);
  m["u3_reads"] = std::to_string(u3_reads);
  m["sampler"] = sampler;
  m["sampler_sweeps_per_us"] = format_double(sampler_sweeps_per_us);
  m["sampler_beta_min"] = format_double(sampler_beta_min);
  m["sampler_beta_max"] = format_double(sampler_beta_max);
  m["sample_dir"] = sample_dir;
  m["ladders"] = join(ladders);
  m["feedback_rounds"] = std::to_string(feedback_rounds);
  m["feedback_sweeps"] = std::to_string(feedback_sweeps);
  m["feedback_instances"] = std::to_string(feedback_instances);
  m["repetitions"] = std::to_string(repetitions);
  m["pt_max_sweeps"] = std::to_string(pt_max_sweeps);
  m["gs_sweeps"] = std::to_string(gs_sweeps);
  m["gs_brute_force_limit"] = std::to_string(gs_brute_force_limit);
  m["spin_update_seconds"] = format_double(spin_update_seconds);
  m["n_boots"] = std::to_string(n_boots);
  m["gate"] = format_double(gate);
  m["kz_penalty"] = kz_penalty;
  m["kz_pairing"] = kz_pairing;
  m["mu_min"] = format_double(mu_min);
  m["mu_max"] = format_double(mu_max);
  m["mu_step"] = format_double(mu_step);
  m["kz_window"] = format_double(kz_window);
  m["output"] = output;
  return m;
}

std::string ExperimentConfig::canonical_text() const {
  std::string s;
  for (const auto& [k, v] : values()) s += k + "=" + v + "\n";
  return s;
}

std::string ExperimentConfig::hash() const {
  // The output location does not change any result.
  auto v = values();
  v.erase("output");
  std::string s;
  for (const auto& [k, x] : v) s += k + "=" + x + "\n";
  return content_hash(s);
}

std::string ExperimentConfig::instance_hash() const {
  const auto v = values();
  std::string s;
  for (const char* k : {"L", "disorder", "instances", "min_support", "pegasus_m", "seed"}) {
    s += std::string(k) + "=" + v.at(k) + "\n";
  }
  return content_hash(s);
}

void ExperimentConfig::check() const {
  if (sizes.empty()) throw InvalidInput("L list is empty");
  if (instances == 0) throw InvalidInput("instances must be >= 1");
  if (targets.empty()) throw InvalidInput("targets list is empty");
  if (tf_grid.empty()) throw InvalidInput("tf_grid is empty");
  if (jp_grid.empty()) throw InvalidInput("jp_grid is empty");
  if (ladders.empty()) throw InvalidInput("ladders list is empty");
  if (methods.empty()) throw InvalidInput("methods list is empty");
  if (gauges == 0 || reads == 0 || u3_reads == 0) throw InvalidInput("gauges and reads must be >= 1");
  if (repetitions == 0) throw InvalidInput("repetitions must be >= 1");
  if (n_boots == 0) throw InvalidInput("n_boots must be >= 1");
  if (!(mu_step > 0.0) || !(mu_max > mu_min)) throw InvalidInput("mu grid is degenerate");
  for (const auto& m : methods) {
    if (m != "PTICM" && m != "QAC" && m != "U3" && m != "SA" && m != "patchwork") {
      throw InvalidInput("unknown method '" + m + "'");
    }
  }
  for (const double t : tf_grid) {
    if (!(t > 0.0)) throw InvalidInput("tf_grid values must be positive");
  }
  if (sampler != "sa" && sampler != "pt" && sampler != "exact" && sampler != "file") {
    throw InvalidInput("sampler must be sa, pt, exact or file");
  }
  if (sampler == "file" && sample_dir.empty()) throw InvalidInput("sampler=file needs sample_dir");
  for (const auto& l : ladders) parse_ladder(l);
}

Manifest Manifest::load(const fs::path& dir) {
  Manifest m;
  const fs::path p = dir / "manifest.txt";
  if (!fs::exists(p)) return m;
  std::istringstream in(slurp(p));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("#manifest", 0) == 0) {
      std::istringstream hs(line.substr(9));
      for (std::string tok; hs >> tok;) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        if (tok.substr(0, eq) == "config") m.config_hash = tok.substr(eq + 1);
        if (tok.substr(0, eq) == "seed") m.seed = std::stoull(tok.substr(eq + 1));
        if (tok.substr(0, eq) == "instances") m.instance_hash = tok.substr(eq + 1);
      }
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string h, rel;
    if (!(ls >> h >> rel)) throw ParseError("manifest: expected '<hash> <path>'", line_no);
    m.files[rel] = h;
  }
  return m;
}

void Manifest::save(const fs::path& dir) const {
  fs::create_directories(dir);
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  out << "#manifest config=" << config_hash << " seed=" << seed;
  if (!instance_hash.empty()) out << " instances=" << instance_hash;
  out << '\n';
  for (const auto& [rel, h] : files) out << h << ' ' << rel << '\n';
  if (!out) throw IoError("cannot write manifest in " + dir.string());
}

Pipeline::Pipeline(ExperimentConfig config, RunOptions options)
    : config_(std::move(config)), options_(options) {
  config_.check();
  provenance_ = "# config=" + config_.hash() + " seed=" + std::to_string(config_.seed) + "\n";
}

const std::vector<std::string>& Pipeline::stage_names() {
  static const std::vector<std::string> names{"generate", "gs-validate", "solve-pticm", "sample",
                                              "analyze",  "collapse",    "report"};
  return names;
}

void Pipeline::run_stage(const std::string& name) {
  if (name == "generate") return generate();
  if (name == "gs-validate") return gs_validate();
  if (name == "solve-pticm") return solve_pticm();
  if (name == "sample") return sample();
  if (name == "analyze") return analyze();
  if (name == "collapse") return collapse();
  if (name == "report") {
    report();
    return;
  }
  throw InvalidInput("unknown stage '" + name + "'");
}

void Pipeline::log(const std::string& line) const {
  if (options_.log) *options_.log << line << '\n';
}

void Pipeline::load_manifest() {
  manifest_ = Manifest::load(root());
  if (manifest_.files.empty()) {
    throw StateError("no manifest in " + root().string() + "; run 'generate' first");
  }
  if (manifest_.instance_hash != config_.instance_hash()) {
    throw StateError("instances in " + root().string() +
                     " were generated from a different L/disorder/instances/seed/pegasus_m/min_support;"
                     " rerun 'generate' with --force");
  }
}

void Pipeline::write_file(const std::string& rel, const std::string& content) {
  const fs::path p = root() / rel;
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw IoError("cannot write " + p.string());
  manifest_.files[rel] = content_hash(content);
}

std::string Pipeline::read_verified(const std::string& rel) const {
  const auto it = manifest_.files.find(rel);
  if (it == manifest_.files.end()) {
    throw StateError(rel + " is not in the manifest; run the stage that produces it first");
  }
  const fs::path p = root() / rel;
  if (!fs::exists(p)) throw StateError(rel + " is listed in the manifest but missing on disk");
  std::string content = slurp(p);
  const std::string h = content_hash(content);
  if (h != it->second) {
    throw StateError("hash mismatch for " + rel + ": manifest " + it->second + ", file " + h);
  }
  return content;
}

void Pipeline::verify_all(const std::string& prefix) const {
  std::vector<std::string> diffs;
  std::size_t seen = 0;
  for (const auto& [rel, h] : manifest_.files) {
    if (rel.rfind(prefix, 0) != 0) continue;
    ++seen;
    const fs::path p = root() / rel;
    if (!fs::exists(p)) {
      diffs.push_back("  missing  " + rel);
      continue;
    }
    const std::string got = content_hash(slurp(p));
    if (got != h) diffs.push_back("  changed  " + rel + " (" + h + " -> " + got + ")");
  }
  if (seen == 0) throw StateError("no " + prefix + " artifacts in the manifest; run the upstream stage first");
  if (!diffs.empty()) {
    std::string msg = std::to_string(diffs.size()) + " artifact(s) under " + prefix + " differ from the manifest:\n";
    for (std::size_t i = 0; i < diffs.size() && i < 20; ++i) msg += diffs[i] + "\n";
    if (diffs.size() > 20) msg += "  ...\n";
    throw StateError(msg + "rerun the producing stage with --force");
  }
}

void Pipeline::require_fresh(const std::string& rel) const {
  if (!options_.force && fs::exists(root() / rel)) {
    throw StateError((root() / rel).string() + " already exists; pass --force to overwrite");
  }
  if (options_.force) fs::remove_all(root() / rel);
}

double Pipeline::seconds_per_sweep(std::size_t n_spins, std::size_t n_temps) const {
  return config_.spin_update_seconds * static_cast<double>(n_spins) * 2.0 * static_cast<double>(n_temps);
}

namespace {

struct Context {
  PegasusGraph pegasus;
  std::map<int, QacLayout> layouts;
  std::map<int, std::shared_ptr<const Graph>> graphs;
};

}  // namespace

void Pipeline::generate() {
  for (const int L : config_.sizes) {
    if (L < 1 || L > config_.pegasus_m - 1) {
      throw InvalidInput("L=" + std::to_string(L) + " is outside [1, " + std::to_string(config_.pegasus_m - 1) +
                         "] for Pegasus size " + std::to_string(config_.pegasus_m));
    }
  }
  if (!options_.force && fs::exists(root() / "manifest.txt")) {
    throw StateError((root() / "manifest.txt").string() + " already exists; pass --force to regenerate");
  }
  if (options_.force) {
    for (const char* d : {"layouts", "instances", "traces", "samples", "ladders", "config.txt", "ground_states.csv",
                          "pticm_tte.csv", "results.csv", "bootstrap.json", "fits.json", "collapse.json",
                          "report.txt"}) {
      fs::remove_all(root() / d);
    }
  }
  manifest_ = Manifest{};
  manifest_.config_hash = config_.hash();
  manifest_.seed = config_.seed;
  manifest_.instance_hash = config_.instance_hash();
  const PegasusGraph peg = build_pegasus(config_.pegasus_m);
  for (const int L : config_.sizes) {
    const QacLayout layout = build_qac_logical(peg, L, config_.min_support);
    std::ostringstream ls;
    save_logical_graph(ls, layout);
    write_file("layouts/" + size_dir(L) + ".txt", ls.str() + provenance_);
    auto graph = std::make_shared<const Graph>(layout.logical.graph);
    for (std::size_t i = 0; i < config_.instances; ++i) {
      const Instance inst = generate_instance(graph, config_.disorder,
                                              derive_key({config_.seed, kTagInstance, static_cast<std::uint64_t>(L), i}));
      std::string text = instance_text(inst);
      const auto nl = text.find('\n');
      text.insert(nl + 1, provenance_);
      write_file("instances/" + size_dir(L) + "/" + idx3(i) + ".txt", text);
    }
    log("generate: L=" + std::to_string(L) + " N=" + std::to_string(layout.logical.graph.num_nodes()) + ", " +
        std::to_string(config_.instances) + " instances");
  }
  std::string echo;
  for (const auto& [k, v] : config_.values()) {
    if (k != "output") echo += k + "=" + v + "\n";
  }
  write_file("config.txt", provenance_ + echo);
  manifest_.save(root());
}

namespace {

QacLayout load_layout_text(const std::string& text, const PegasusGraph& peg) {
  std::istringstream in(text);
  return load_logical_graph(in, &peg);
}

Instance load_instance_text(const std::string& text, const std::shared_ptr<const Graph>& graph) {
  std::istringstream in(text);
  return load_instance(in).rebind(graph);
}

std::map<std::pair<int, std::size_t>, GroundRow> parse_ground_states(const std::string& text) {
  std::map<std::pair<int, std::size_t>, GroundRow> m;
  std::istringstream in(text);
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
    const auto f = split(line, ',');
    if (f.size() < 7) throw ParseError("ground_states.csv: expected 9 columns", line_no);
    GroundRow r;
    r.e0 = Rational(std::stoll(f[3]), std::stoll(f[4]));
    r.exact = f[5] == "1";
    r.validated = f[6] == "1";
    m[{std::stoi(f[0]), static_cast<std::size_t>(std::stoull(f[1]))}] = r;
  }
  return m;
}

}  // namespace

void Pipeline::gs_validate() {
  load_manifest();
  verify_all("instances/");
  verify_all("layouts/");
  require_fresh("ground_states.csv");
  const PegasusGraph peg = build_pegasus(config_.pegasus_m);
  std::ostringstream csv;
  csv << provenance_ << "L,instance,hash,e0_num,e0_den,exact,validated,last_improvement,sweeps\n";
  for (const int L : config_.sizes) {
    const QacLayout layout = load_layout_text(read_verified("layouts/" + size_dir(L) + ".txt"), peg);
    auto graph = std::make_shared<const Graph>(layout.logical.graph);
    std::vector<GroundStateReport> reports;
    for (std::size_t i = 0; i < config_.instances; ++i) {
      const Instance inst =
          load_instance_text(read_verified("instances/" + size_dir(L) + "/" + idx3(i) + ".txt"), graph);
      GroundStateOptions go;
      go.sweeps = config_.gs_sweeps;
      go.seed = derive_key({config_.seed, kTagGround, static_cast<std::uint64_t>(L), i});
      go.brute_force_limit = config_.gs_brute_force_limit;
      const auto r = validate_ground_state(inst, go);
      reports.push_back(r);
      const Rational e0 = r.e0();
      csv << L << ',' << i << ',' << instance_hash(inst) << ',' << e0.num() << ',' << e0.den() << ','
          << (r.exact ? 1 : 0) << ',' << (r.validated ? 1 : 0) << ',' << r.last_improvement << ',' << r.sweeps
          << '\n';
    }
    const auto unvalidated = std::count_if(reports.begin(), reports.end(),
                                           [](const GroundStateReport& r) { return !r.validated; });
    log("gs-validate: L=" + std::to_string(L) + " " + std::to_string(reports.size() - unvalidated) + "/" +
        std::to_string(reports.size()) + " validated, set settled=" +
        (instance_set_settled(reports) ? "yes" : "no"));
  }
  write_file("ground_states.csv", csv.str());
  manifest_.save(root());
}

void Pipeline::solve_pticm() {
  load_manifest();
  if (!manifest_.files.count("ground_states.csv")) {
    log("solve-pticm: no ground-state energies yet, running gs-validate first");
    gs_validate();
  }
  verify_all("instances/");
  require_fresh("pticm_tte.csv");
  if (options_.force) {
    fs::remove_all(root() / "traces");
    fs::remove_all(root() / "ladders");
    std::erase_if(manifest_.files, [](const auto& kv) {
      return kv.first.rfind("traces/", 0) == 0 || kv.first.rfind("ladders/", 0) == 0;
    });
  }
  const auto ground = parse_ground_states(read_verified("ground_states.csv"));
  const PegasusGraph peg = build_pegasus(config_.pegasus_m);
  std::vector<LadderSpec> specs;
  for (const auto& name : config_.ladders) specs.push_back(parse_ladder(name));

  std::ostringstream csv;
  csv << provenance_ << "L,instance,target_kind,target_value,ladder,tte_s\n";
  for (const int L : config_.sizes) {
    const QacLayout layout = load_layout_text(read_verified("layouts/" + size_dir(L) + ".txt"), peg);
    auto graph = std::make_shared<const Graph>(layout.logical.graph);
    std::vector<Instance> insts;
    for (std::size_t i = 0; i < config_.instances; ++i) {
      insts.push_back(load_instance_text(read_verified("instances/" + size_dir(L) + "/" + idx3(i) + ".txt"), graph));
    }
    const std::size_t n = graph->num_nodes();

    std::vector<TemperatureLadder> ladders;
    std::ostringstream lad;
    lad << provenance_;
    for (std::size_t li = 0; li < specs.size(); ++li) {
      TemperatureLadder l = specs[li].base;
      if (specs[li].feedback) {
        FeedbackOptions fo;
        fo.rounds = config_.feedback_rounds;
        fo.sweeps_per_round = config_.feedback_sweeps;
        fo.seed = derive_key({config_.seed, kTagFeedback, static_cast<std::uint64_t>(L), li});
        const std::size_t k = std::min(config_.feedback_instances, insts.size());
        const auto fr = feedback_optimize(l, std::span<const Instance>(insts.data(), k), fo);
        l = fr.ladder;
        log("solve-pticm: L=" + std::to_string(L) + " ladder " + l.label + ": " +
            std::to_string(fr.rounds_completed) + " feedback rounds" + (fr.converged ? "" : " (" + fr.note + ")"));
      }
      lad << l.label << ' ' << l.n_icm;
      for (const double b : l.betas) lad << ' ' << format_double(b);
      lad << '\n';
      ladders.push_back(std::move(l));
    }
    write_file("ladders/" + size_dir(L) + ".txt", lad.str());

    double spin_seconds = config_.spin_update_seconds;
    if (options_.calibrate) {
      PtState st(insts[0], ladders[0], 1);
      const auto t0 = std::chrono::steady_clock::now();
      for (int s = 0; s < 20; ++s) st.sweep();
      const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      spin_seconds = dt / (20.0 * static_cast<double>(n) * 2.0 * static_cast<double>(ladders[0].size()));
      log("solve-pticm: calibrated " + format_double(spin_seconds) + " s per spin update");
    }

    for (std::size_t i = 0; i < insts.size(); ++i) {
      const auto git = ground.find({L, i});
      if (git == ground.end()) throw StateError("no ground-state energy for L=" + std::to_string(L) + " instance " + std::to_string(i));
      std::vector<EnergyTarget> targets;
      std::int64_t stop = std::numeric_limits<std::int64_t>::max();
      for (const auto& t : config_.targets) {
        targets.push_back(make_target(t.kind, git->second.e0, t.value, n));
        stop = std::min(stop, threshold_units(targets.back(), insts[i].denominator()));
      }
      std::vector<double> best(targets.size(), kNeverHit);
      std::vector<std::string> best_label(targets.size(), "-");
      const std::string ihash = instance_hash(insts[i]);
      for (std::size_t li = 0; li < ladders.size(); ++li) {
        PticmOptions po;
        po.sweeps = config_.pt_max_sweeps;
        po.seconds_per_sweep = spin_seconds * static_cast<double>(n) * 2.0 * static_cast<double>(ladders[li].size());
        po.stop_at = stop;
        std::vector<RunTrace> traces;
        std::ostringstream tf;
        for (std::size_t rep = 0; rep < config_.repetitions; ++rep) {
          traces.push_back(run_pticm(insts[i], ladders[li],
                                     derive_key({config_.seed, kTagPt, static_cast<std::uint64_t>(L), i, li, rep}), po));
          save_trace(tf, traces.back(), ihash);
          if (rep == 0) tf << provenance_;
        }
        write_file("traces/" + size_dir(L) + "/" + idx3(i) + "_" + safe_label(ladders[li].label) + ".txt", tf.str());
        for (std::size_t t = 0; t < targets.size(); ++t) {
          const double v = tte_curve_pticm(traces, targets[t]);
          csv << L << ',' << i << ',' << to_string(targets[t].kind) << ',' << config_.targets[t].text << ','
              << ladders[li].label << ',' << format_double(v) << '\n';
          if (v < best[t]) {
            best[t] = v;
            best_label[t] = ladders[li].label;
          }
        }
      }
      for (std::size_t t = 0; t < targets.size(); ++t) {
        csv << L << ',' << i << ',' << to_string(targets[t].kind) << ',' << config_.targets[t].text << ",best,"
            << format_double(best[t]) << '\n';
      }
    }
    log("solve-pticm: L=" + std::to_string(L) + " done");
  }
  write_file("pticm_tte.csv", csv.str());
  manifest_.save(root());
}

namespace {

std::vector<std::string> sampled_penalties(const ExperimentConfig& c) {
  std::vector<std::string> jp = c.jp_grid;
  if (std::find(jp.begin(), jp.end(), c.kz_penalty) == jp.end()) jp.push_back(c.kz_penalty);
  return jp;
}

bool has_method(const ExperimentConfig& c, const std::string& m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

}  // namespace

void Pipeline::sample() {
  load_manifest();
  verify_all("instances/");
  require_fresh("samples");
  std::erase_if(manifest_.files, [](const auto& kv) { return kv.first.rfind("samples/", 0) == 0; });
  const PegasusGraph peg = build_pegasus(config_.pegasus_m);
  std::unique_ptr<Sampler> sampler;
  if (config_.sampler == "sa") {
    sampler = std::make_unique<AnnealingSampler>(config_.sampler_sweeps_per_us, config_.sampler_beta_min,
                                                 config_.sampler_beta_max);
  } else if (config_.sampler == "pt") {
    sampler = std::make_unique<TemperingSampler>(config_.sampler_sweeps_per_us, 8, config_.sampler_beta_min,
                                                 config_.sampler_beta_max);
  } else if (config_.sampler == "exact") {
    sampler = std::make_unique<ExactSampler>();
  }
  std::vector<std::pair<QacMode, std::string>> modes;
  if (has_method(config_, "QAC")) {
    for (const auto& jp : sampled_penalties(config_)) modes.push_back({QacMode::QAC, jp});
  }
  if (has_method(config_, "U3")) modes.push_back({QacMode::U3, "0"});
  if (modes.empty()) throw InvalidInput("sample: methods include neither QAC nor U3");

  std::size_t files = 0;
  for (const int L : config_.sizes) {
    const QacLayout layout = load_layout_text(read_verified("layouts/" + size_dir(L) + ".txt"), peg);
    auto graph = std::make_shared<const Graph>(layout.logical.graph);
    for (std::size_t i = 0; i < config_.instances; ++i) {
      const Instance inst =
          load_instance_text(read_verified("instances/" + size_dir(L) + "/" + idx3(i) + ".txt"), graph);
      std::vector<Gauge> gauges;
      for (std::size_t g = 0; g < config_.gauges; ++g) {
        gauges.push_back(random_gauge(4 * inst.num_spins(), derive_key({config_.seed, kTagGauge, static_cast<std::uint64_t>(L), i}),
                                      static_cast<std::uint32_t>(g)));
      }
      for (std::size_t m = 0; m < modes.size(); ++m) {
        const auto& [mode, jp] = modes[m];
        const PhysicalProblem phys = encode(inst, layout, mode, Rational::parse(jp));
        for (std::size_t t = 0; t < config_.tf_grid.size(); ++t) {
          const double tf = config_.tf_grid[t];
          const std::string rel = sample_rel(L, i, mode, jp, tf);
          SampleSet set;
          if (config_.sampler == "file") {
            const fs::path src = fs::path(config_.sample_dir) / rel;
            if (!fs::exists(src)) throw StateError("sample file " + src.string() + " not found");
            std::istringstream in(slurp(src));
            try {
              set = load_samples(in);
            } catch (const ParseError& e) {
              throw ParseError(src.string() + ": " + e.what(), e.line());
            }
            if (set.mode != mode) throw InvalidInput(src.string() + ": mode does not match file name");
            if (!set.reads.empty() && set.reads[0].size() != 4 * inst.num_spins()) {
              throw InvalidInput(src.string() + ": reads have " + std::to_string(set.reads[0].size()) +
                                 " qubits, expected " + std::to_string(4 * inst.num_spins()));
            }
          } else {
            const std::size_t n_reads = mode == QacMode::QAC ? config_.reads : config_.u3_reads;
            set = sgbench::sample(*sampler, phys, tf, n_reads, gauges,
                                  derive_key({config_.seed, kTagSample, static_cast<std::uint64_t>(L), i, m, t}));
          }
          std::ostringstream out;
          save_samples(out, set);
          std::string text = out.str();
          text.insert(text.find('\n') + 1, provenance_);
          write_file("samples/" + rel, text);
          ++files;
        }
      }
    }
    log("sample: L=" + std::to_string(L) + " done");
  }
  log("sample: wrote " + std::to_string(files) + " sample files with sampler " + config_.sampler);
  manifest_.save(root());
}

namespace {

// Energies per gauge of the decoded samples in one file.
struct DecodedFile {
  std::vector<std::uint32_t> gauge_of;
  std::vector<std::int64_t> energy;
  std::int64_t denominator = 1;
  std::vector<SpinConfig> spins;
};

std::vector<GaugeCount> count_by_gauge(const DecodedFile& d, std::int64_t thr) {
  std::vector<GaugeCount> out;
  for (std::size_t s = 0; s < d.energy.size(); ++s) {
    if (s == 0 || d.gauge_of[s] != d.gauge_of[s - 1]) out.push_back({});
    ++out.back().n;
    out.back().k += d.energy[s] <= thr;
  }
  return out;
}

}  // namespace

void Pipeline::analyze() {
  load_manifest();
  require_fresh("results.csv");
  const auto ground = parse_ground_states(read_verified("ground_states.csv"));
  const PegasusGraph peg = build_pegasus(config_.pegasus_m);
  const std::size_t n_max = build_qac_logical(peg, max_side_length(peg), config_.min_support).logical.graph.num_nodes();
  const double tf_min = *std::min_element(config_.tf_grid.begin(), config_.tf_grid.end());

  struct Cell {
    std::size_t N = 0;
    BootstrapResult boot;
    double p_value = 0.0;
    ResultRow row;
  };
  // [method][target][L]
  std::map<std::string, std::vector<std::map<int, Cell>>> cells;

  std::map<std::tuple<int, std::size_t, std::string>, double> pticm_best;
  if (has_method(config_, "PTICM")) {
    std::istringstream in(read_verified("pticm_tte.csv"));
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        header = true;
        continue;
      }
      const auto f = split(line, ',');
      if (f.size() != 6 || f[4] != "best") continue;
      pticm_best[{std::stoi(f[0]), std::stoull(f[1]), f[2] + ":" + f[3]}] = std::stod(f[5]);
    }
  }

  for (const auto& method : config_.methods) {
    if (method != "PTICM" && method != "QAC" && method != "U3") {
      log("analyze: method " + method + " has no TTE pipeline; skipped");
      continue;
    }
    auto& per_target = cells[method];
    per_target.resize(config_.targets.size());
    for (const int L : config_.sizes) {
      const QacLayout layout = load_layout_text(read_verified("layouts/" + size_dir(L) + ".txt"), peg);
      auto graph = std::make_shared<const Graph>(layout.logical.graph);
      const std::size_t N = graph->num_nodes();
      const std::uint64_t boot_seed =
          derive_key({config_.seed, kTagBoot, static_cast<std::uint64_t>(L), fnv1a64(method)});

      if (method == "PTICM") {
        for (std::size_t t = 0; t < config_.targets.size(); ++t) {
          const auto& ts = config_.targets[t];
          std::vector<double> values;
          for (std::size_t i = 0; i < config_.instances; ++i) {
            const auto it = pticm_best.find({L, i, to_string(ts.kind) + ":" + ts.text});
            if (it == pticm_best.end()) throw StateError("pticm_tte.csv lacks L=" + std::to_string(L) + " instance " + std::to_string(i) + "; rerun solve-pticm");
            values.push_back(it->second);
          }
          Cell c;
          c.N = N;
          c.boot = bootstrap_instance_median(values, {config_.n_boots, boot_seed});
          c.row = {method, to_string(config_.disorder), L, N, c.boot.median, "s", ts.kind, ts.text,
                   static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double v) { return std::isfinite(v); })),
                   values.size(), c.boot.median};
          per_target[t][L] = std::move(c);
        }
        continue;
      }

      const QacMode mode = method == "QAC" ? QacMode::QAC : QacMode::U3;
      std::vector<GridPoint> grid;
      std::vector<std::string> grid_jp;
      for (const double tf : config_.tf_grid) {
        if (mode == QacMode::QAC) {
          for (const auto& jp : config_.jp_grid) {
            grid.push_back({tf, Rational::parse(jp).to_double()});
            grid_jp.push_back(jp);
          }
        } else {
          grid.push_back({tf, 0.0});
          grid_jp.push_back("0");
        }
      }
      // decoded[i][grid]
      std::vector<std::vector<DecodedFile>> decoded(config_.instances);
      std::vector<std::vector<EnergyTarget>> targets(config_.instances);
      for (std::size_t i = 0; i < config_.instances; ++i) {
        const Instance inst =
            load_instance_text(read_verified("instances/" + size_dir(L) + "/" + idx3(i) + ".txt"), graph);
        const auto git = ground.find({L, i});
        if (git == ground.end()) throw StateError("no ground-state energy for L=" + std::to_string(L));
        for (const auto& ts : config_.targets) targets[i].push_back(make_target(ts.kind, git->second.e0, ts.value, N));
        for (std::size_t g = 0; g < grid.size(); ++g) {
          std::istringstream in(read_verified("samples/" + sample_rel(L, i, mode, grid_jp[g], grid[g].t_f)));
          const LogicalSampleSet ls = decode(load_samples(in), inst);
          if (ls.dropped) log("analyze: dropped " + std::to_string(ls.dropped) + " unreadable samples");
          decoded[i].push_back({ls.gauge_ids, ls.energy_units, ls.denominator, {}});
        }
      }
      const double corr = correction_factor(correction_for(method), N, n_max);
      for (std::size_t t = 0; t < config_.targets.size(); ++t) {
        BootstrapInput bi;
        bi.grid = grid;
        bi.correction = corr;
        bi.counts.resize(config_.instances);
        for (std::size_t i = 0; i < config_.instances; ++i) {
          const std::int64_t thr = threshold_units(targets[i][t], decoded[i][0].denominator);
          for (std::size_t g = 0; g < grid.size(); ++g) bi.counts[i].push_back(count_by_gauge(decoded[i][g], thr));
        }
        Cell c;
        c.N = N;
        c.boot = bootstrap_median_tte(bi, {config_.n_boots, boot_seed});
        c.p_value = p_value_tf_min(c.boot, tf_min);
        // Point estimate of the optimal grid point from pooled counts.
        std::size_t best_g = 0;
        double best_med = kNeverHit;
        std::size_t best_k = 0, best_n = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
          std::vector<double> v;
          std::size_t kk = 0, nn = 0;
          for (std::size_t i = 0; i < config_.instances; ++i) {
            std::size_t k = 0, n = 0;
            for (const auto& gc : bi.counts[i][g]) {
              k += gc.k;
              n += gc.n;
            }
            kk += k;
            nn += n;
            v.push_back(tte(grid[g].t_f, n ? static_cast<double>(k) / static_cast<double>(n) : 0.0) * corr);
          }
          const double med = weighted_median(v, std::vector<double>(v.size(), 1.0));
          if (g == 0 || med < best_med) {
            best_med = med;
            best_g = g;
            best_k = kk;
            best_n = nn;
          }
        }
        c.row = {method, to_string(config_.disorder), L, N, grid[best_g].t_f, "us", config_.targets[t].kind,
                 config_.targets[t].text, best_k, best_n, c.boot.median};
        per_target[t][L] = std::move(c);
      }
    }
  }

  std::ostringstream csv;
  csv << provenance_;
  write_results_header(csv);
  json boot = json::object();
  boot["config_hash"] = config_.hash();
  boot["seed"] = config_.seed;
  auto echo = config_.values();
  echo.erase("output");
  boot["config"] = echo;
  boot["results"] = json::array();
  json fits = json::object();
  fits["config_hash"] = config_.hash();
  fits["seed"] = config_.seed;
  fits["fits"] = json::array();
  for (const auto& [method, per_target] : cells) {
    for (std::size_t t = 0; t < per_target.size(); ++t) {
      std::vector<ScalingPoint> pts;
      for (const auto& [L, c] : per_target[t]) {
        write_result_row(csv, c.row);
        json e;
        e["method"] = method;
        e["target_kind"] = to_string(config_.targets[t].kind);
        e["target_value"] = config_.targets[t].text;
        e["L"] = L;
        e["N"] = c.N;
        e["median_tte"] = num(c.boot.median);
        e["std_error"] = num(c.boot.std_error);
        e["interval"] = {num(c.boot.lo), num(c.boot.hi)};
        e["flagged"] = c.boot.flagged;
        e["p_value_tf_min"] = c.p_value;
        e["gate"] = to_string(gate_for(c.p_value));
        json samples = json::array();
        for (const auto& s : c.boot.samples) samples.push_back({num(s.t_f), num(s.j_p), num(s.median_tte)});
        e["samples"] = std::move(samples);
        boot["results"].push_back(std::move(e));
        pts.push_back({static_cast<double>(c.N), c.boot.median, c.boot.optimal_values(), c.p_value});
      }
      const PowerLawFit f = fit_power_law(pts, config_.gate);
      json e;
      e["method"] = method;
      e["target_kind"] = to_string(config_.targets[t].kind);
      e["target_value"] = config_.targets[t].text;
      e["ok"] = f.ok;
      if (f.ok) {
        e["alpha"] = f.alpha;
        e["sigma_alpha"] = f.sigma_alpha;
        e["c"] = f.c;
        e["sigma_from_bootstrap"] = f.sigma_from_bootstrap;
        json used = json::array();
        for (const auto i : f.points_used) used.push_back(pts[i].n);
        e["sizes_used"] = std::move(used);
      } else {
        e["diagnostic"] = f.diagnostic;
      }
      fits["fits"].push_back(std::move(e));
      log("analyze: " + method + " " + to_string(config_.targets[t].kind) + "=" + config_.targets[t].text + ": " +
          (f.ok ? "alpha=" + format_double(f.alpha) + " +- " + format_double(f.sigma_alpha) : f.diagnostic));
    }
  }
  write_file("results.csv", csv.str());
  write_file("bootstrap.json", boot.dump(1) + "\n");
  write_file("fits.json", fits.dump(1) + "\n");
  manifest_.save(root());
}

void Pipeline::collapse() {
  load_manifest();
  require_fresh("collapse.json");
  const PegasusGraph peg = build_pegasus(config_.pegasus_m);
  const Pairing pairing = parse_pairing(config_.kz_pairing);
  std::vector<double> grid;
  for (double mu = config_.mu_min; mu <= config_.mu_max + 1e-9; mu += config_.mu_step) grid.push_back(mu);

  std::vector<std::pair<QacMode, std::string>> modes;
  if (has_method(config_, "QAC")) modes.push_back({QacMode::QAC, config_.kz_penalty});
  if (has_method(config_, "U3")) modes.push_back({QacMode::U3, "0"});
  if (modes.empty()) throw InvalidInput("collapse: methods include neither QAC nor U3");

  json out = json::object();
  out["config_hash"] = config_.hash();
  out["seed"] = config_.seed;
  out["pairing"] = config_.kz_pairing;
  out["window"] = config_.kz_window;
  out["collapses"] = json::array();
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const auto& [mode, jp] = modes[m];
    std::vector<BinderPoint> points;
    json notes = json::array();
    for (const int L : config_.sizes) {
      const QacLayout layout = load_layout_text(read_verified("layouts/" + size_dir(L) + ".txt"), peg);
      auto graph = std::make_shared<const Graph>(layout.logical.graph);
      std::vector<Instance> insts;
      for (std::size_t i = 0; i < config_.instances; ++i) {
        insts.push_back(load_instance_text(read_verified("instances/" + size_dir(L) + "/" + idx3(i) + ".txt"), graph));
      }
      for (std::size_t t = 0; t < config_.tf_grid.size(); ++t) {
        const double tf = config_.tf_grid[t];
        std::vector<std::vector<double>> q;
        for (std::size_t i = 0; i < insts.size(); ++i) {
          std::istringstream in(read_verified("samples/" + sample_rel(L, i, mode, jp, tf)));
          const LogicalSampleSet ls = decode(load_samples(in), insts[i]);
          if (ls.size() < 2) continue;
          q.push_back(overlaps(ls.spins, pairing,
                               derive_key({config_.seed, kTagKz, static_cast<std::uint64_t>(L), i, t, m})));
        }
        try {
          points.push_back(binder_point(L, tf, q, config_.n_boots,
                                        derive_key({config_.seed, kTagKz, static_cast<std::uint64_t>(L), t, m})));
        } catch (const InvalidInput& e) {
          notes.push_back("L=" + std::to_string(L) + " tf=" + format_double(tf) + ": " + e.what());
        }
      }
    }
    json e;
    e["mode"] = to_string(mode);
    e["penalty"] = jp;
    json pts = json::array();
    for (const auto& p : points) {
      pts.push_back({{"L", p.L}, {"t_f", p.t_f}, {"U", num(p.U)}, {"sigma_U", num(p.sigma_U)}, {"n_pairs", p.n_pairs}});
    }
    e["binder"] = std::move(pts);
    try {
      CollapseOptions co;
      co.window = config_.kz_window;
      co.seed = derive_key({config_.seed, kTagKz, m});
      const CollapseResult r = sgbench::collapse(points, grid, co);
      e["mu"] = r.mu;
      e["sigma_mu"] = r.sigma_mu;
      e["quality"] = num(r.quality);
      json scan = json::array();
      for (const auto& s : r.scan) scan.push_back({s.mu, s.defined ? num(s.quality) : json(nullptr)});
      e["scan"] = std::move(scan);
      json resc = json::array();
      for (const auto& p : r.points) resc.push_back({{"L", p.L}, {"t_f", p.t_f}, {"x", p.x}, {"U", num(p.U)}});
      e["rescaled"] = std::move(resc);
      for (const auto& s : r.report) notes.push_back(s);
      log("collapse: " + to_string(mode) + " mu=" + format_double(r.mu) + " +- " + format_double(r.sigma_mu));
    } catch (const InvalidInput& ex) {
      e["error"] = ex.what();
      log(std::string("collapse: ") + to_string(mode) + ": " + ex.what());
    }
    e["notes"] = std::move(notes);
    out["collapses"].push_back(std::move(e));
  }
  write_file("collapse.json", out.dump(1) + "\n");
  manifest_.save(root());
}

std::string Pipeline::report() {
  load_manifest();
  std::ostringstream rep;
  rep << provenance_;
  if (manifest_.files.count("results.csv")) {
    std::istringstream in(read_verified("results.csv"));
    const auto rows = read_results(in);
    json boot = json::parse(read_verified("bootstrap.json"));
    std::map<std::tuple<std::string, std::string, int>, json> extra;
    for (const auto& e : boot["results"]) {
      extra[{e["method"].get<std::string>(), e["target_kind"].get<std::string>() + ":" + e["target_value"].get<std::string>(),
             e["L"].get<int>()}] = e;
    }
    rep << "method  target          L    N      unit  opt_t_f     median_TTE  2*SE        P      gate\n";
    for (const auto& r : rows) {
      const std::string tk = to_string(r.target_kind) + ":" + r.target_value;
      const auto& e = extra[{r.method, tk, r.L}];
      const double se = e.contains("std_error") && e["std_error"].is_number() ? e["std_error"].get<double>() : 0.0;
      const double p = e.contains("p_value_tf_min") ? e["p_value_tf_min"].get<double>() : 0.0;
      char line[200];
      std::snprintf(line, sizeof line, "%-7s %-15s %-4d %-6zu %-5s %-11.4g %-11.4g %-11.4g %-6.3f %s\n",
                    r.method.c_str(), tk.c_str(), r.L, r.N, r.unit.c_str(), r.t_f_or_runtime, r.tte_corrected,
                    2.0 * se, p, e.contains("gate") ? e["gate"].get<std::string>().c_str() : "-");
      rep << line;
    }
    rep << "\nscaling fits (TTE = c N^alpha)\n";
    json fits = json::parse(read_verified("fits.json"));
    for (const auto& f : fits["fits"]) {
      rep << "  " << f["method"].get<std::string>() << ' ' << f["target_kind"].get<std::string>() << '='
          << f["target_value"].get<std::string>() << ": ";
      if (f["ok"].get<bool>()) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "alpha = %.3f +- %.3f\n", f["alpha"].get<double>(), f["sigma_alpha"].get<double>());
        rep << buf;
      } else {
        rep << "no fit (" << f["diagnostic"].get<std::string>() << ")\n";
      }
    }
  } else {
    rep << "no results.csv yet; run 'analyze'\n";
  }
  if (manifest_.files.count("collapse.json")) {
    json c = json::parse(read_verified("collapse.json"));
    rep << "\nBinder collapse (t_f ~ L^mu)\n";
    for (const auto& e : c["collapses"]) {
      rep << "  " << e["mode"].get<std::string>() << ": ";
      if (e.contains("mu")) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "mu = %.3f +- %.3f\n", e["mu"].get<double>(), e["sigma_mu"].get<double>());
        rep << buf;
      } else {
        rep << e.value("error", std::string("no estimate")) << '\n';
      }
    }
  }
  const std::string text = rep.str();
  write_file("report.txt", text);
  manifest_.save(root());
  return text;
}

}  // namespace sgbench
