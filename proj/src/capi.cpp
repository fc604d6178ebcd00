#include "madelab.h"

#include <exception>
#include <stdexcept>
#include <string>

#include "madelab/harness.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

int classify(const std::exception& e) {
  // I/O problems are reported as runtime errors by the harness; config and
  // parameter problems as invalid_argument.
  if (dynamic_cast<const std::invalid_argument*>(&e)) return MADELAB_ERR_ARGUMENT;
  return MADELAB_ERR_IO;
}

}  // namespace

struct madelab_experiment {
  madelab::ExperimentConfig config;
  std::string resolved;  // backing store for madelab_resolved_config
};

extern "C" {

madelab_experiment* madelab_open(const char* config_path) {
  if (config_path == nullptr) {
    set_error("config_path is null");
    return nullptr;
  }
  try {
    auto* handle = new madelab_experiment;
    handle->config = madelab::parse_config(config_path);
    return handle;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

madelab_experiment* madelab_open_text(const char* config_json) {
  if (config_json == nullptr) {
    set_error("config_json is null");
    return nullptr;
  }
  try {
    auto* handle = new madelab_experiment;
    handle->config = madelab::parse_config_text(config_json);
    return handle;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void madelab_close(madelab_experiment* handle) { delete handle; }

int madelab_set_seeds(madelab_experiment* handle, const uint64_t* seeds, size_t count) {
  if (handle == nullptr || seeds == nullptr || count == 0) {
    set_error("madelab_set_seeds: null handle, null seeds, or empty seed list");
    return MADELAB_ERR_ARGUMENT;
  }
  handle->config.seeds.assign(seeds, seeds + count);
  return MADELAB_OK;
}

int madelab_set_output_dir(madelab_experiment* handle, const char* dir) {
  if (handle == nullptr || dir == nullptr || *dir == '\0') {
    set_error("madelab_set_output_dir: null handle or empty directory");
    return MADELAB_ERR_ARGUMENT;
  }
  handle->config.output_dir = dir;
  return MADELAB_OK;
}

int madelab_set_workers(madelab_experiment* handle, int workers) {
  if (handle == nullptr || workers < 1) {
    set_error("madelab_set_workers: null handle or workers < 1");
    return MADELAB_ERR_ARGUMENT;
  }
  handle->config.workers = workers;
  return MADELAB_OK;
}

const char* madelab_resolved_config(madelab_experiment* handle) {
  if (handle == nullptr) {
    set_error("madelab_resolved_config: null handle");
    return nullptr;
  }
  try {
    handle->config.validate();
    handle->resolved = madelab::resolved_config_json(handle->config);
    return handle->resolved.c_str();
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

int madelab_run(madelab_experiment* handle) {
  if (handle == nullptr) {
    set_error("madelab_run: null handle");
    return MADELAB_ERR_ARGUMENT;
  }
  try {
    int status = madelab::run_experiment(handle->config);
    if (status != 0) {
      set_error("one or more runs failed; see *_error.txt in the output directory");
      return MADELAB_ERR_RUN;
    }
    return MADELAB_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return classify(e);
  }
}

const char* madelab_last_error(void) { return g_last_error.c_str(); }

const char* madelab_version(void) { return "0.1.0"; }

}  // extern "C"
