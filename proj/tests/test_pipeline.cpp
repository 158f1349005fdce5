#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/hash.hpp"
#include "core/pipeline.hpp"

using namespace sgbench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sgbench_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig tiny(const fs::path& out) {
  auto c = ExperimentConfig::parse_text(
      "L = 2, 3\n"
      "instances = 3\n"
      "tf_grid = 1, 4\n"
      "jp_grid = 0.1, 0.2\n"
      "gauges = 2\n"
      "reads = 20\n"
      "u3_reads = 10\n"
      "repetitions = 3\n"
      "pt_max_sweeps = 300\n"
      "gs_sweeps = 300\n"
      "ladders = B5, F24\n"
      "feedback_sweeps = 100\n"
      "feedback_instances = 2\n"
      "n_boots = 20\n"
      "mu_max = 4\n");
  c.output = out.string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void run_all(Pipeline& p) {
  for (const auto& st : Pipeline::stage_names()) p.run_stage(st);
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = ExperimentConfig::parse_text("# comment\n\nL = 4,5\ninstances=7\ntargets = epsilon:0.01, rho:0.02\n");
  CHECK(c.sizes == std::vector<int>{4, 5});
  CHECK(c.instances == 7);
  REQUIRE(c.targets.size() == 2);
  CHECK(c.targets[1].kind == TargetKind::Rho);
  CHECK(c.targets[1].value == Rational(1, 50));

  try {
    ExperimentConfig::parse_text("L = 4\nbogus = 1\n");
    FAIL("unknown key accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(ExperimentConfig::parse_text("instances = many\n"), ParseError);
  CHECK_THROWS_AS(ExperimentConfig::parse_text("just a line\n"), ParseError);
}

TEST_CASE("config canonical text, hash and profiles") {
  ExperimentConfig a;
  const auto back = ExperimentConfig::parse_text(a.canonical_text());
  CHECK(back.canonical_text() == a.canonical_text());
  CHECK(back.hash() == a.hash());
  ExperimentConfig b = a;
  b.output = "elsewhere";
  CHECK(b.hash() == a.hash());
  b.set("reads", "41");
  CHECK(b.hash() != a.hash());
  CHECK(b.instance_hash() == a.instance_hash());
  b.set("seed", "2");
  CHECK(b.instance_hash() != a.instance_hash());

  const auto desk = ExperimentConfig::desk_profile();
  CHECK(desk.sizes == std::vector<int>{4, 5, 6, 7, 8});
  CHECK(desk.instances == 50);
  CHECK(desk.disorder == DisorderClass::Sidon28);
  const auto full = ExperimentConfig::full_profile();
  CHECK(full.instances == 125);
  CHECK(full.sizes.front() == 5);
  CHECK(full.sizes.back() == 15);
  CHECK(full.repetitions == 100);

  ExperimentConfig f;
  f.sampler = "file";
  CHECK_THROWS_AS(f.check(), InvalidInput);
  f.sample_dir = "/nowhere";
  CHECK_NOTHROW(f.check());
  ExperimentConfig m;
  m.methods = {"QAC", "DWAVE"};
  CHECK_THROWS_AS(m.check(), InvalidInput);
}

TEST_CASE("generate: bounds, manifest and --force") {
  const auto dir = scratch("generate");
  auto c = tiny(dir);
  c.sizes = {16};
  CHECK_THROWS_AS(Pipeline(c).generate(), InvalidInput);

  c = tiny(dir);
  Pipeline(c).generate();
  const auto m1 = Manifest::load(dir);
  CHECK(m1.config_hash == c.hash());
  CHECK(m1.instance_hash == c.instance_hash());
  CHECK(m1.files.count("layouts/L2.txt"));
  CHECK(m1.files.count("instances/L3/i002.txt"));
  for (const auto& [rel, h] : m1.files) CHECK(content_hash(slurp(dir / rel)) == h);
  CHECK_THROWS_AS(Pipeline(c).generate(), StateError);
  Pipeline(c, {.force = true}).generate();
  const auto m2 = Manifest::load(dir);
  CHECK(m2.files == m1.files);

  auto other = c;
  other.seed = 99;
  CHECK_THROWS_AS(Pipeline(other).gs_validate(), StateError);
  fs::remove_all(dir);
}

TEST_CASE("tampered artifacts are refused with a diff summary") {
  const auto dir = scratch("tamper");
  const auto c = tiny(dir);
  Pipeline(c).generate();
  {
    std::ofstream out(dir / "instances/L2/i001.txt", std::ios::app);
    out << "J 0 1 8\n";
  }
  try {
    Pipeline(c).gs_validate();
    FAIL("tampered instance accepted");
  } catch (const StateError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("instances/L2/i001.txt") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("full pipeline on a tiny config") {
  const auto dir = scratch("full");
  const auto c = tiny(dir);
  std::ostringstream log;
  Pipeline p(c, {.log = &log});
  CHECK_THROWS_AS(p.analyze(), StateError);
  p.generate();
  p.solve_pticm();  // runs ground-state validation on demand
  CHECK(fs::exists(dir / "ground_states.csv"));
  p.sample();
  p.analyze();
  p.collapse();
  const std::string rep = p.report();
  CHECK(rep.find("scaling fits") != std::string::npos);
  CHECK(rep.find("Binder collapse") != std::string::npos);

  const std::string prov = "config=" + c.hash() + " seed=1";
  const auto man = Manifest::load(dir);
  for (const auto& [rel, h] : man.files) {
    const std::string text = slurp(dir / rel);
    if (rel.ends_with(".json")) {
      const auto j = nlohmann::json::parse(text);
      CHECK_MESSAGE(j["config_hash"] == c.hash(), rel);
      CHECK_MESSAGE(j["seed"] == 1, rel);
    } else {
      CHECK_MESSAGE(text.find(prov) != std::string::npos, rel);
    }
    CHECK(content_hash(text) == h);
  }

  std::istringstream rin(slurp(dir / "results.csv"));
  const auto rows = read_results(rin);
  CHECK_FALSE(rows.empty());
  for (const auto& r : rows) {
    CHECK((r.unit == "us" || r.unit == "s"));
    CHECK(r.unit == (r.method == "PTICM" ? "s" : "us"));
  }
  CHECK_THROWS_AS(p.analyze(), StateError);

  // same config elsewhere reproduces every artifact byte for byte
  const auto dir2 = scratch("full2");
  auto c2 = c;
  c2.output = dir2.string();
  Pipeline q(c2);
  run_all(q);
  const auto man2 = Manifest::load(dir2);
  CHECK(man2.files == man.files);
  fs::remove_all(dir2);
  fs::remove_all(dir);
}

TEST_CASE("recorded sample files are ingested") {
  const auto src = scratch("rec_src");
  const auto c = tiny(src);
  Pipeline a(c);
  a.generate();
  a.sample();

  const auto dst = scratch("rec_dst");
  auto f = c;
  f.output = dst.string();
  f.methods = {"QAC", "U3"};
  f.sampler = "file";
  f.sample_dir = (src / "samples").string();
  Pipeline b(f);
  b.generate();
  b.gs_validate();
  b.sample();
  for (const auto& [rel, h] : Manifest::load(dst).files) {
    if (rel.rfind("samples/", 0) != 0) continue;
    // identical reads; only the provenance line differs
    auto strip = [](std::string t) {
      std::string out;
      std::istringstream in(t);
      for (std::string line; std::getline(in, line);)
        if (line.rfind("# config=", 0) != 0) out += line + "\n";
      return out;
    };
    CHECK(strip(slurp(dst / rel)) == strip(slurp(src / rel)));
  }
  b.analyze();

  const auto empty = scratch("rec_empty");
  fs::create_directories(empty);
  auto g = f;
  g.output = (empty / "out").string();
  g.sample_dir = (empty / "none").string();
  Pipeline e(g);
  e.generate();
  try {
    e.sample();
    FAIL("missing sample directory accepted");
  } catch (const Error& ex) {
    CHECK(std::string(ex.what()).find(g.sample_dir) != std::string::npos);
  }
  fs::remove_all(src);
  fs::remove_all(dst);
  fs::remove_all(empty);
}
