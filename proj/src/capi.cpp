#include "tubesynth/tubesynth.h"

#include <cstdlib>
#include <new>
#include <string>

#include "tubesynth/experiment.hpp"

namespace ex = tubesynth::experiment;

struct tsyn_experiment {
  ex::ExperimentConfig config;
  std::string output_dir;
  std::string summary;
  std::string error;
};

namespace {

thread_local std::string g_last_error;

std::string default_output_dir(const ex::ExperimentConfig& cfg) {
  if (cfg.output_dir) return cfg.output_dir->string();
  if (const char* env = std::getenv("TUBESYNTH_OUT"); env && *env) return env;
  return "tubesynth_out";
}

tsyn_status to_status(int code) { return static_cast<tsyn_status>(code); }

template <typename F>
tsyn_status guarded(tsyn_experiment* exp, F&& body) {
  if (!exp) {
    g_last_error = "null experiment handle";
    return TSYN_INVALID_ARGUMENT;
  }
  exp->summary.clear();
  exp->error.clear();
  try {
    ex::Outcome o = body(*exp);
    exp->summary = std::move(o.summary);
    return to_status(o.status);
  } catch (const tubesynth::Error& e) {
    exp->error = std::string(tubesynth::to_string(e.kind())) + ": " + e.what();
    return to_status(ex::status_of(e.kind()));
  } catch (const std::bad_alloc&) {
    exp->error = "out of memory";
    return TSYN_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    exp->error = e.what();
    return TSYN_INTERNAL_ERROR;
  }
}

}  // namespace

extern "C" {

const char* tsyn_version(void) { return "0.1.0"; }

const char* tsyn_status_name(tsyn_status status) {
  switch (status) {
    case TSYN_OK: return "ok";
    case TSYN_CONFIG_ERROR: return "config error";
    case TSYN_NO_FRAGMENT: return "no accepting fragment";
    case TSYN_SYNTHESIS_FAILURE: return "synthesis failure";
    case TSYN_VIOLATION: return "violation during run";
    case TSYN_SPEC_VIOLATED: return "specification not satisfied";
    case TSYN_INVALID_ARGUMENT: return "invalid argument";
    case TSYN_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* tsyn_last_error(void) { return g_last_error.c_str(); }

tsyn_status tsyn_experiment_load(const char* config_path, tsyn_experiment** out) {
  if (!out) {
    g_last_error = "null output pointer";
    return TSYN_INVALID_ARGUMENT;
  }
  *out = nullptr;
  if (!config_path) {
    g_last_error = "null config path";
    return TSYN_INVALID_ARGUMENT;
  }
  try {
    auto cfg = ex::load_experiment(config_path);
    std::string dir = default_output_dir(cfg);
    *out = new tsyn_experiment{std::move(cfg), std::move(dir), {}, {}};
    g_last_error.clear();
    return TSYN_OK;
  } catch (const tubesynth::Error& e) {
    g_last_error = std::string(tubesynth::to_string(e.kind())) + ": " + e.what();
    return to_status(ex::status_of(e.kind()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TSYN_INTERNAL_ERROR;
  }
}

void tsyn_experiment_free(tsyn_experiment* exp) { delete exp; }

tsyn_status tsyn_experiment_set_seed(tsyn_experiment* exp, uint64_t seed) {
  if (!exp) return TSYN_INVALID_ARGUMENT;
  exp->config.seed = seed;
  return TSYN_OK;
}

tsyn_status tsyn_experiment_set_output_dir(tsyn_experiment* exp, const char* dir) {
  if (!exp || !dir || !*dir) return TSYN_INVALID_ARGUMENT;
  exp->output_dir = dir;
  return TSYN_OK;
}

const char* tsyn_experiment_output_dir(const tsyn_experiment* exp) { return exp ? exp->output_dir.c_str() : ""; }

tsyn_status tsyn_decompose(tsyn_experiment* exp) {
  return guarded(exp, [](tsyn_experiment& e) { return ex::cmd_decompose(e.config); });
}

tsyn_status tsyn_synth(tsyn_experiment* exp) {
  return guarded(exp, [](tsyn_experiment& e) { return ex::cmd_synth(e.config, e.output_dir); });
}

tsyn_status tsyn_simulate(tsyn_experiment* exp) {
  return guarded(exp, [](tsyn_experiment& e) { return ex::cmd_simulate(e.config, e.output_dir); });
}

tsyn_status tsyn_verify(tsyn_experiment* exp) {
  return guarded(exp, [](tsyn_experiment& e) { return ex::cmd_verify(e.config, e.output_dir); });
}

const char* tsyn_experiment_summary(const tsyn_experiment* exp) { return exp ? exp->summary.c_str() : ""; }

const char* tsyn_experiment_last_error(const tsyn_experiment* exp) { return exp ? exp->error.c_str() : ""; }

}  // extern "C"
