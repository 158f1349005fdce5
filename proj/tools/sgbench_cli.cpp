#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgbench/sgbench.h"

namespace {

int exit_code(sgb_status s) { return s == SGB_OK ? 0 : 1 + static_cast<int>(s); }

int fail(sgb_status s, const std::string& stage) {
  nlohmann::ordered_json j;
  j["error"] = sgb_status_name(s);
  j["stage"] = stage;
  j["message"] = sgb_last_error();
  std::cerr << j.dump() << '\n';
  return exit_code(s);
}

void print_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

struct Common {
  std::string config_path;
  std::string profile;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> keyed;
  std::string out;
  bool force = false;
  bool calibrate = false;
  bool quiet = false;
};

sgb_status make_config(const Common& o, sgb_config** cfg) {
  sgb_status s = o.config_path.empty() ? sgb_config_new(o.profile.empty() ? nullptr : o.profile.c_str(), cfg)
                                       : sgb_config_load(o.config_path.c_str(), cfg);
  if (s != SGB_OK) return s;
  if (!o.config_path.empty() && !o.profile.empty()) {
    if ((s = sgb_config_set(*cfg, "profile", o.profile.c_str())) != SGB_OK) return s;
  }
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    const std::string key = kv.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : kv.substr(eq + 1);
    if ((s = sgb_config_set(*cfg, key.c_str(), value.c_str())) != SGB_OK) return s;
  }
  for (const auto& [key, value] : o.keyed)
    if ((s = sgb_config_set(*cfg, key.c_str(), value.c_str())) != SGB_OK) return s;
  if (!o.out.empty()) s = sgb_config_set(*cfg, "output", o.out.c_str());
  return s;
}

// key=value lines of the default configuration
std::vector<std::pair<std::string, std::string>> default_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  sgb_config* c = nullptr;
  if (sgb_config_new(nullptr, &c) != SGB_OK) return out;
  size_t n = 0;
  sgb_config_text(c, nullptr, 0, &n);
  std::string text(n + 1, '\0');
  sgb_config_text(c, text.data(), text.size(), &n);
  text.resize(n);
  sgb_config_free(c);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-glass benchmark pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Common o;
  app.add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--profile", o.profile, "desk or full preset")->check(CLI::IsMember({"desk", "full"}));
  app.add_option("--set", o.sets, "override a config key (key=value), repeatable");
  app.add_option("--out", o.out, "output directory");
  app.add_flag("--force", o.force, "overwrite existing outputs");
  app.add_flag("--calibrate", o.calibrate, "measure seconds per spin update instead of the configured value");
  app.add_flag("-q,--quiet", o.quiet, "no progress lines");

  const auto keys = default_keys();
  std::vector<std::string> key_values(keys.size());
  std::vector<CLI::Option*> key_opts;
  auto* per_key = app.add_option_group("config keys", "one flag per config key, applied after --set");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& [key, def] = keys[i];
    if (key == "output" || key == "profile") {
      key_opts.push_back(nullptr);
      continue;
    }
    std::string names = "--" + key;
    std::string dashed = key;
    for (auto& ch : dashed)
      if (ch == '_') ch = '-';
    if (dashed != key) names += ",--" + dashed;
    key_opts.push_back(per_key->add_option(names, key_values[i], "default: " + (def.empty() ? "(empty)" : def)));
  }

  const std::vector<std::pair<std::string, std::string>> stages{
      {"generate", "build the lattice layouts and disorder instances"},
      {"gs-validate", "compute and validate ground-state energies"},
      {"solve-pticm", "run PT-ICM and compute time-to-epsilon"},
      {"sample", "sample the encoded problems"},
      {"analyze", "bootstrap optimal TTE and fit scaling exponents"},
      {"collapse", "Binder cumulant data collapse"},
      {"report", "print the summary report"},
  };
  for (const auto& [name, help] : stages) app.add_subcommand(name, help);
  app.add_subcommand("all", "run every stage in order");
  app.add_subcommand("show-config", "print the effective configuration and its hash");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (key_opts[i] && key_opts[i]->count() > 0) o.keyed.emplace_back(keys[i].first, key_values[i]);

  sgb_config* cfg = nullptr;
  sgb_status s = make_config(o, &cfg);
  if (s != SGB_OK) {
    sgb_config_free(cfg);
    return fail(s, cmd);
  }

  if (cmd == "show-config") {
    size_t n = 0;
    sgb_config_text(cfg, nullptr, 0, &n);
    std::string text(n + 1, '\0');
    sgb_config_text(cfg, text.data(), text.size(), &n);
    char hash[64];
    sgb_config_hash(cfg, hash, sizeof hash, nullptr);
    std::cout << "# hash=" << hash << '\n' << text.c_str();
    sgb_config_free(cfg);
    return 0;
  }

  std::vector<std::string> run;
  if (cmd == "all") {
    for (const auto& st : stages) run.push_back(st.first);
  } else {
    run.push_back(cmd);
  }
  for (const auto& stage : run) {
    if (stage == "report") {
      size_t n = 0;
      s = sgb_report(cfg, nullptr, 0, &n);
      if (s != SGB_OK) break;
      std::string text(n + 1, '\0');
      s = sgb_report(cfg, text.data(), text.size(), &n);
      if (s != SGB_OK) break;
      std::cout << text.c_str();
      continue;
    }
    s = sgb_run_stage(cfg, stage.c_str(), o.force, o.calibrate, o.quiet ? nullptr : print_line, nullptr);
    if (s != SGB_OK) {
      sgb_config_free(cfg);
      return fail(s, stage);
    }
  }
  sgb_config_free(cfg);
  return s == SGB_OK ? 0 : fail(s, "report");
}
