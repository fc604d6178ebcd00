// Command-line front end; talks to the library through the C API only.
#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "madelab.h"

namespace {

// Accepts "0..9" ranges and plain integers, comma separated.
std::vector<uint64_t> parse_seed_spec(const std::string& spec) {
  std::vector<uint64_t> seeds;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t comma = spec.find(',', pos);
    std::string part = spec.substr(pos, comma == std::string::npos ? spec.npos : comma - pos);
    std::size_t dots = part.find("..");
    if (dots != std::string::npos) {
      uint64_t lo = std::stoull(part.substr(0, dots));
      uint64_t hi = std::stoull(part.substr(dots + 2));
      if (hi < lo) throw CLI::ValidationError("--seeds", "range end below start: " + part);
      for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else if (!part.empty()) {
      seeds.push_back(std::stoull(part));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds in: " + spec);
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"made-lab: tabular exploration experiment runner"};
  app.require_subcommand(1);

  std::string config_path, seed_spec, out_dir;
  int workers = 0;
  bool check_only = false;
  std::string experiment;

  for (const char* name : {"lock", "chain_pg", "meta", "checks"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seeds", seed_spec, "seed list, e.g. 0..9 or 0,3,7");
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--workers", workers, "parallel runs");
    sub->add_flag("--check-only", check_only, "validate config and print it, do not run");
    sub->callback([&experiment, name] { experiment = name; });
  }

  CLI11_PARSE(app, argc, argv);

  madelab_experiment* handle = madelab_open(config_path.c_str());
  if (handle == nullptr) {
    std::fprintf(stderr, "error: %s\n", madelab_last_error());
    return 1;
  }

  int rc = 0;
  const char* resolved = madelab_resolved_config(handle);
  std::string configured_experiment;
  if (resolved != nullptr) {
    // The subcommand must match the config; catches copy-paste mistakes.
    std::string text(resolved);
    auto key = text.find("\"experiment\": \"");
    if (key != std::string::npos) {
      auto start = key + 15;
      configured_experiment = text.substr(start, text.find('"', start) - start);
    }
  }
  if (configured_experiment != experiment) {
    std::fprintf(stderr, "error: config declares experiment `%s`, subcommand is `%s`\n",
                 configured_experiment.c_str(), experiment.c_str());
    madelab_close(handle);
    return 1;
  }

  if (!seed_spec.empty()) {
    try {
      auto seeds = parse_seed_spec(seed_spec);
      rc = madelab_set_seeds(handle, seeds.data(), seeds.size());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      madelab_close(handle);
      return 1;
    }
  }
  if (rc == MADELAB_OK && !out_dir.empty()) rc = madelab_set_output_dir(handle, out_dir.c_str());
  if (rc == MADELAB_OK && workers > 0) rc = madelab_set_workers(handle, workers);

  if (rc == MADELAB_OK) {
    if (check_only) {
      resolved = madelab_resolved_config(handle);
      if (resolved == nullptr)
        rc = MADELAB_ERR_ARGUMENT;
      else
        std::fputs(resolved, stdout);
    } else {
      rc = madelab_run(handle);
    }
  }

  if (rc != MADELAB_OK) std::fprintf(stderr, "error: %s\n", madelab_last_error());
  madelab_close(handle);
  return rc == MADELAB_OK ? 0 : 1;
}
