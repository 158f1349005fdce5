#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "sgbench/sgbench.h"

namespace fs = std::filesystem;

namespace {

std::string get(const sgb_config* c, const char* key) {
  size_t n = 0;
  REQUIRE(sgb_config_get(c, key, nullptr, 0, &n) == SGB_OK);
  std::string s(n + 1, '\0');
  REQUIRE(sgb_config_get(c, key, s.data(), s.size(), &n) == SGB_OK);
  s.resize(n);
  return s;
}

void collect(const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); }

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(sgb_status_name(SGB_OK)) == "ok");
  CHECK(std::string(sgb_status_name(SGB_ERR_STATE)) == "state_error");
  CHECK(std::string(sgb_version()).size() > 0);
}

TEST_CASE("config handle") {
  sgb_config* c = nullptr;
  REQUIRE(sgb_config_new("desk", &c) == SGB_OK);
  CHECK(get(c, "instances") == "50");
  CHECK(sgb_config_set(c, "instances", "7") == SGB_OK);
  CHECK(get(c, "instances") == "7");
  CHECK(sgb_config_set(c, "instances", "lots") == SGB_ERR_INVALID_ARGUMENT);
  CHECK(std::string(sgb_last_error()).find("instances") != std::string::npos);
  CHECK(get(c, "instances") == "7");
  CHECK(sgb_config_set(c, "no_such_key", "1") == SGB_ERR_INVALID_ARGUMENT);
  CHECK(sgb_config_set(c, "sampler", "file") == SGB_ERR_INVALID_ARGUMENT);
  CHECK(get(c, "sampler") == "sa");

  char small[4];
  size_t n = 0;
  CHECK(sgb_config_hash(c, small, sizeof small, &n) == SGB_ERR_INVALID_ARGUMENT);
  CHECK(n == 16);
  char hash[32];
  CHECK(sgb_config_hash(c, hash, sizeof hash, nullptr) == SGB_OK);
  CHECK(std::string(hash).size() == 16);

  size_t tn = 0;
  sgb_config_text(c, nullptr, 0, &tn);
  std::string text(tn + 1, '\0');
  REQUIRE(sgb_config_text(c, text.data(), text.size(), &tn) == SGB_OK);
  sgb_config* d = nullptr;
  REQUIRE(sgb_config_parse(text.c_str(), &d) == SGB_OK);
  char hash2[32];
  sgb_config_hash(d, hash2, sizeof hash2, nullptr);
  CHECK(std::string(hash) == hash2);
  sgb_config_free(d);
  sgb_config_free(c);

  sgb_config* bad = nullptr;
  CHECK(sgb_config_parse("L = 4\nfoo = 1\n", &bad) == SGB_ERR_PARSE);
  CHECK(bad == nullptr);
  CHECK(sgb_config_load("/definitely/not/here.cfg", &bad) == SGB_ERR_IO);
  CHECK(sgb_config_new("huge", &bad) == SGB_ERR_INVALID_ARGUMENT);
  CHECK(sgb_config_new(nullptr, nullptr) == SGB_ERR_INVALID_ARGUMENT);
  sgb_config_free(nullptr);
}

TEST_CASE("topology and instances through handles") {
  sgb_pegasus* p = nullptr;
  REQUIRE(sgb_pegasus_new(16, &p) == SGB_OK);
  CHECK(sgb_pegasus_num_qubits(p) == 5640);
  CHECK(sgb_pegasus_num_couplers(p) == 40484);
  CHECK(sgb_pegasus_max_side(p) == 15);
  sgb_layout* lay = nullptr;
  CHECK(sgb_layout_new(p, 16, 2, &lay) == SGB_ERR_INVALID_ARGUMENT);
  REQUIRE(sgb_layout_new(p, 2, 2, &lay) == SGB_OK);
  CHECK(sgb_layout_num_nodes(lay) == 24);

  sgb_instance* inst = nullptr;
  CHECK(sgb_instance_generate(lay, "S99", 1, &inst) == SGB_ERR_INVALID_ARGUMENT);
  REQUIRE(sgb_instance_generate(lay, "S28", 5, &inst) == SGB_OK);
  CHECK(sgb_instance_num_spins(inst) == 24);
  CHECK(sgb_instance_num_edges(inst) == sgb_layout_num_edges(lay));
  CHECK(sgb_instance_denominator(inst) == 28);

  int64_t num = 0, den = 0;
  uint64_t deg = 0;
  std::vector<int8_t> gs(24);
  REQUIRE(sgb_brute_force(inst, &num, &den, &deg, gs.data(), gs.size()) == SGB_OK);
  CHECK(deg >= 2);
  int64_t en = 0, ed = 0;
  REQUIRE(sgb_instance_energy(inst, gs.data(), gs.size(), &en, &ed) == SGB_OK);
  CHECK(en == num);
  CHECK(ed == den);
  CHECK(sgb_instance_energy(inst, gs.data(), 3, &en, &ed) == SGB_ERR_INVALID_ARGUMENT);

  int64_t pn = 0, pd = 0;
  uint64_t last = 0;
  REQUIRE(sgb_pticm_best(inst, "B5", 3, 10000, &pn, &pd, &last) == SGB_OK);
  CHECK(pn == num);
  CHECK(pd == den);
  CHECK(sgb_pticm_best(inst, "nope", 3, 10, &pn, &pd, &last) == SGB_ERR_INVALID_ARGUMENT);

  const fs::path f = fs::temp_directory_path() / "sgbench_capi_instance.txt";
  REQUIRE(sgb_instance_save(inst, f.string().c_str()) == SGB_OK);
  sgb_instance* back = nullptr;
  REQUIRE(sgb_instance_load(f.string().c_str(), &back) == SGB_OK);
  CHECK(sgb_instance_num_edges(back) == sgb_instance_num_edges(inst));
  REQUIRE(sgb_instance_energy(back, gs.data(), gs.size(), &en, &ed) == SGB_OK);
  CHECK(en == num);
  fs::remove(f);
  CHECK(sgb_instance_load("/definitely/not/here.txt", &back) != SGB_OK);

  sgb_instance_free(back);
  sgb_instance_free(inst);
  sgb_layout_free(lay);
  sgb_pegasus_free(p);
}

TEST_CASE("tte through the C API") {
  CHECK(sgb_tte(0.5, 0.5) == doctest::Approx(0.5 * std::log(0.01) / std::log(0.5)));
  CHECK(std::isinf(sgb_tte(1.0, 0.0)));
  CHECK(std::isnan(sgb_tte(1.0, 2.0)));
}

TEST_CASE("stages through the C API") {
  const fs::path dir = fs::temp_directory_path() / "sgbench_capi_run";
  fs::remove_all(dir);
  sgb_config* c = nullptr;
  REQUIRE(sgb_config_parse("L = 2, 3\ninstances = 2\ntf_grid = 1, 4\ngauges = 2\nreads = 10\nu3_reads = 10\n"
                           "repetitions = 2\npt_max_sweeps = 200\ngs_sweeps = 200\nladders = B5\n"
                           "n_boots = 10\nmethods = PTICM\n",
                           &c) == SGB_OK);
  REQUIRE(sgb_config_set(c, "output", dir.string().c_str()) == SGB_OK);
  CHECK(sgb_run_stage(c, "analyze", 0, 0, nullptr, nullptr) == SGB_ERR_STATE);
  std::vector<std::string> lines;
  CHECK(sgb_run_stage(c, "generate", 0, 0, collect, &lines) == SGB_OK);
  CHECK_FALSE(lines.empty());
  CHECK(sgb_run_stage(c, "generate", 0, 0, nullptr, nullptr) == SGB_ERR_STATE);
  CHECK(sgb_run_stage(c, "generate", 1, 0, nullptr, nullptr) == SGB_OK);
  CHECK(sgb_run_stage(c, "solve-pticm", 0, 0, nullptr, nullptr) == SGB_OK);
  CHECK(sgb_run_stage(c, "analyze", 0, 0, nullptr, nullptr) == SGB_OK);
  CHECK(sgb_run_stage(c, "dance", 0, 0, nullptr, nullptr) == SGB_ERR_INVALID_ARGUMENT);
  size_t n = 0;
  REQUIRE(sgb_report(c, nullptr, 0, &n) == SGB_OK);
  std::string rep(n + 1, '\0');
  REQUIRE(sgb_report(c, rep.data(), rep.size(), &n) == SGB_OK);
  CHECK(rep.find("PTICM") != std::string::npos);
  sgb_config_free(c);
  fs::remove_all(dir);
}
