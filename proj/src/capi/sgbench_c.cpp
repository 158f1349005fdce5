#include "sgbench/sgbench.h"

#include <cstring>
#include <limits>
#include <fstream>
#include <memory>
#include <sstream>
#include <streambuf>
#include <string>

#include "core/baselines.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/pticm.hpp"
#include "core/topology.hpp"

using namespace sgbench;

struct sgb_config {
  ExperimentConfig c;
};
struct sgb_pegasus {
  PegasusGraph g;
};
struct sgb_layout {
  QacLayout layout;
  std::shared_ptr<const Graph> graph;
};
struct sgb_instance {
  Instance inst;
};

namespace {

thread_local std::string g_last_error;

template <class F>
sgb_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return SGB_OK;
  } catch (const ParseError& e) {
    g_last_error = e.what();
    return SGB_ERR_PARSE;
  } catch (const InvalidInput& e) {
    g_last_error = e.what();
    return SGB_ERR_INVALID_ARGUMENT;
  } catch (const IoError& e) {
    g_last_error = e.what();
    return SGB_ERR_IO;
  } catch (const StateError& e) {
    g_last_error = e.what();
    return SGB_ERR_STATE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SGB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SGB_ERR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (!p) throw InvalidInput(std::string(name) + " is null");
}

void copy_out(const std::string& s, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed) *needed = s.size();
  if (!buf) return;
  if (cap < s.size() + 1) throw InvalidInput("buffer of " + std::to_string(cap) + " bytes is too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

// Forwards complete lines to a C callback.
class CallbackBuf : public std::streambuf {
public:
  CallbackBuf(sgb_log_fn fn, void* user) : fn_(fn), user_(user) {}
  ~CallbackBuf() override {
    if (!line_.empty()) fn_(line_.c_str(), user_);
  }

protected:
  int_type overflow(int_type ch) override {
    if (ch == traits_type::eof()) return ch;
    if (ch == '\n') {
      fn_(line_.c_str(), user_);
      line_.clear();
    } else {
      line_.push_back(static_cast<char>(ch));
    }
    return ch;
  }

private:
  sgb_log_fn fn_;
  void* user_;
  std::string line_;
};

}  // namespace

extern "C" {

SGB_API const char* sgb_last_error(void) { return g_last_error.c_str(); }

SGB_API const char* sgb_status_name(sgb_status s) {
  switch (s) {
    case SGB_OK: return "ok";
    case SGB_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SGB_ERR_PARSE: return "parse_error";
    case SGB_ERR_IO: return "io_error";
    case SGB_ERR_STATE: return "state_error";
    case SGB_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

SGB_API const char* sgb_version(void) { return "0.1.0"; }

SGB_API sgb_status sgb_config_new(const char* profile, sgb_config** out) {
  return guarded([&] {
    need(out, "out");
    auto c = std::make_unique<sgb_config>();
    if (profile) c->c.set("profile", profile);
    *out = c.release();
  });
}

SGB_API sgb_status sgb_config_parse(const char* text, sgb_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new sgb_config{ExperimentConfig::parse_text(text)};
  });
}

SGB_API sgb_status sgb_config_load(const char* path, sgb_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot read ") + path);
    *out = new sgb_config{ExperimentConfig::parse(in)};
  });
}

SGB_API sgb_status sgb_config_set(sgb_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    ExperimentConfig c = config->c;
    c.set(key, value);
    c.check();
    config->c = std::move(c);
  });
}

SGB_API sgb_status sgb_config_get(const sgb_config* config, const char* key, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    const auto v = config->c.values();
    const auto it = v.find(key);
    if (it == v.end()) throw InvalidInput(std::string("unknown config key '") + key + "'");
    copy_out(it->second, buf, cap, needed);
  });
}

SGB_API sgb_status sgb_config_text(const sgb_config* config, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    copy_out(config->c.canonical_text(), buf, cap, needed);
  });
}

SGB_API sgb_status sgb_config_hash(const sgb_config* config, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    copy_out(config->c.hash(), buf, cap, needed);
  });
}

SGB_API void sgb_config_free(sgb_config* config) { delete config; }

SGB_API sgb_status sgb_run_stage(const sgb_config* config, const char* stage, int force, int calibrate,
                                 sgb_log_fn log, void* user) {
  return guarded([&] {
    need(config, "config");
    need(stage, "stage");
    std::unique_ptr<CallbackBuf> buf;
    std::unique_ptr<std::ostream> os;
    RunOptions opt;
    opt.force = force != 0;
    opt.calibrate = calibrate != 0;
    if (log) {
      buf = std::make_unique<CallbackBuf>(log, user);
      os = std::make_unique<std::ostream>(buf.get());
      opt.log = os.get();
    }
    Pipeline(config->c, opt).run_stage(stage);
  });
}

SGB_API sgb_status sgb_report(const sgb_config* config, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    copy_out(Pipeline(config->c).report(), buf, cap, needed);
  });
}

SGB_API sgb_status sgb_pegasus_new(int m, sgb_pegasus** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sgb_pegasus{build_pegasus(m)};
  });
}

SGB_API size_t sgb_pegasus_num_qubits(const sgb_pegasus* p) { return p ? p->g.num_qubits() : 0; }
SGB_API size_t sgb_pegasus_num_couplers(const sgb_pegasus* p) { return p ? p->g.num_couplers() : 0; }
SGB_API int sgb_pegasus_max_side(const sgb_pegasus* p) { return p ? max_side_length(p->g) : 0; }
SGB_API void sgb_pegasus_free(sgb_pegasus* p) { delete p; }

SGB_API sgb_status sgb_layout_new(const sgb_pegasus* pegasus, int side, int min_support, sgb_layout** out) {
  return guarded([&] {
    need(pegasus, "pegasus");
    need(out, "out");
    auto l = std::make_unique<sgb_layout>();
    l->layout = build_qac_logical(pegasus->g, side, min_support);
    l->graph = std::make_shared<const Graph>(l->layout.logical.graph);
    *out = l.release();
  });
}

SGB_API size_t sgb_layout_num_nodes(const sgb_layout* l) { return l ? l->graph->num_nodes() : 0; }
SGB_API size_t sgb_layout_num_edges(const sgb_layout* l) { return l ? l->graph->num_edges() : 0; }
SGB_API void sgb_layout_free(sgb_layout* l) { delete l; }

SGB_API sgb_status sgb_instance_generate(const sgb_layout* layout, const char* disorder, uint64_t seed,
                                         sgb_instance** out) {
  return guarded([&] {
    need(layout, "layout");
    need(disorder, "disorder");
    need(out, "out");
    *out = new sgb_instance{generate_instance(layout->graph, parse_disorder_class(disorder), seed)};
  });
}

SGB_API sgb_status sgb_instance_load(const char* path, sgb_instance** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    if (!in) throw IoError(std::string("cannot read ") + path);
    *out = new sgb_instance{load_instance(in)};
  });
}

SGB_API sgb_status sgb_instance_save(const sgb_instance* instance, const char* path) {
  return guarded([&] {
    need(instance, "instance");
    need(path, "path");
    std::ofstream out(path);
    save_instance(out, instance->inst);
    if (!out) throw IoError(std::string("cannot write ") + path);
  });
}

SGB_API size_t sgb_instance_num_spins(const sgb_instance* i) { return i ? i->inst.num_spins() : 0; }
SGB_API size_t sgb_instance_num_edges(const sgb_instance* i) { return i ? i->inst.graph().num_edges() : 0; }
SGB_API int64_t sgb_instance_denominator(const sgb_instance* i) { return i ? i->inst.denominator() : 0; }

SGB_API sgb_status sgb_instance_energy(const sgb_instance* instance, const int8_t* spins, size_t n, int64_t* num,
                                       int64_t* den) {
  return guarded([&] {
    need(instance, "instance");
    need(spins, "spins");
    need(num, "num");
    need(den, "den");
    for (size_t i = 0; i < n; ++i) {
      if (spins[i] != 1 && spins[i] != -1) throw InvalidInput("spins must be +1 or -1");
    }
    const Rational e = instance->inst.energy(std::span<const Spin>(spins, n));
    *num = e.num();
    *den = e.den();
  });
}

SGB_API void sgb_instance_free(sgb_instance* i) { delete i; }

SGB_API sgb_status sgb_brute_force(const sgb_instance* instance, int64_t* num, int64_t* den, uint64_t* degeneracy,
                                   int8_t* ground, size_t n) {
  return guarded([&] {
    need(instance, "instance");
    need(num, "num");
    need(den, "den");
    const auto r = brute_force(instance->inst, 1);
    const Rational e0 = r.e0();
    if (ground) {
      if (n != instance->inst.num_spins()) throw InvalidInput("ground buffer length differs from the spin count");
      const auto s = brute_force_lexmin(instance->inst);
      std::copy(s.begin(), s.end(), ground);
    }
    *num = e0.num();
    *den = e0.den();
    if (degeneracy) *degeneracy = r.degeneracy;
  });
}

SGB_API sgb_status sgb_pticm_best(const sgb_instance* instance, const char* ladder, uint64_t seed, uint64_t sweeps,
                                  int64_t* num, int64_t* den, uint64_t* last_improvement) {
  return guarded([&] {
    need(instance, "instance");
    need(ladder, "ladder");
    need(num, "num");
    need(den, "den");
    const TemperatureLadder* chosen = nullptr;
    const auto ladders = standard_ladders();
    for (const auto& l : ladders) {
      if (l.label == ladder) chosen = &l;
    }
    if (!chosen) throw InvalidInput(std::string("unknown ladder '") + ladder + "'");
    PticmOptions opt;
    opt.sweeps = sweeps;
    const RunTrace t = run_pticm(instance->inst, *chosen, seed, opt);
    const Rational e(t.best_units(), t.denominator);
    *num = e.num();
    *den = e.den();
    if (last_improvement) *last_improvement = t.last_improvement();
  });
}

SGB_API double sgb_tte(double t_f, double p) {
  try {
    return tte(t_f, p);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // extern "C"
