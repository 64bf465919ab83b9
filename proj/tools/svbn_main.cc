// tools/svbn_main.cc

// Copyright 2026  The svbn Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end; everything goes through the public C API.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svbn.h"

namespace {

// Exit codes: 0 success, 2 config error, 3 dependency error, 4 numerical
// failure; anything else collapses to 1.
int ExitCode(svbn_status status) {
  switch (status) {
    case SVBN_OK: return 0;
    case SVBN_ERR_CONFIG: return 2;
    case SVBN_ERR_DEPENDENCY: return 3;
    case SVBN_ERR_NUMERIC: return 4;
    default: return 1;
  }
}

int Fail(svbn_status status) {
  std::fprintf(stderr, "error: %s\n", svbn_last_error());
  return ExitCode(status);
}

struct ConfigHandle {
  svbn_config* ptr = nullptr;
  ~ConfigHandle() { svbn_config_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svbn - bottleneck-feature speaker verification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::string stage_dir = "stage";
  bool force = false;
  uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "Configuration file (key = value sections)");
  app.add_option("--stage-dir", stage_dir, "Artifact directory for pipeline stages");
  app.add_flag("--force", force, "Overwrite artifacts with stale provenance");
  app.add_option("--seed", seed, "Override every *.seed config key")
      ->each([&](const std::string&) { seed_set = true; });

  const char* stages[] = {"synth",     "features",   "targets",   "train-dnn",
                          "extract-bn", "train-ubm", "train-tv",  "train-plda",
                          "enroll",    "score",      "evaluate",  "fuse"};
  const char* stage_help[] = {
      "Generate the synthetic corpus, manifests and trial lists",
      "Extract MFCC features from wav manifests (VAD + CMVN)",
      "Materialize training targets for the configured scheme",
      "Train the bottleneck extractor network",
      "Tap hidden layers and project to bottleneck features via PCA",
      "Train the universal background model",
      "Train the total-variability matrix (ivector-plda backend)",
      "Train the PLDA model (ivector-plda backend)",
      "Enroll speaker models from the enrollment manifest",
      "Score the trial list",
      "Compute EER/minDCF report per non-target type",
      "Fuse score files listed in fuse.inputs"};
  std::vector<CLI::App*> stage_commands;
  for (size_t i = 0; i < std::size(stages); ++i)
    stage_commands.push_back(app.add_subcommand(stages[i], stage_help[i]));

  auto* grad_check = app.add_subcommand(
      "grad-check", "Finite-difference check of every loss/activation combination");
  uint64_t gc_seed = 20260809;
  double gc_epsilon = 1e-5, gc_tolerance = 1e-4;
  std::string gc_report;
  grad_check->add_option("--check-seed", gc_seed, "Instance seed");
  grad_check->add_option("--epsilon", gc_epsilon, "Central-difference step");
  grad_check->add_option("--tolerance", gc_tolerance, "Max relative error allowed");
  grad_check->add_option("--report", gc_report, "Write the report to this file");

  CLI11_PARSE(app, argc, argv);

  ConfigHandle config;
  svbn_status status = config_path.empty() ? svbn_config_create(&config.ptr)
                                           : svbn_config_load(config_path.c_str(), &config.ptr);
  if (status != SVBN_OK) return Fail(status);

  if (grad_check->parsed()) {
    double worst = 0.0;
    status = svbn_grad_check(gc_seed, gc_epsilon, gc_tolerance,
                             gc_report.empty() ? nullptr : gc_report.c_str(), &worst);
    if (status != SVBN_OK) return Fail(status);
    std::printf("grad-check ok, max relative error %.3e\n", worst);
    return 0;
  }

  for (size_t i = 0; i < stage_commands.size(); ++i) {
    if (!stage_commands[i]->parsed()) continue;
    status = svbn_run_stage(config.ptr, stages[i], stage_dir.c_str(), force ? 1 : 0,
                            seed_set ? &seed : nullptr);
    if (status != SVBN_OK) return Fail(status);
    return 0;
  }
  return 0;
}
