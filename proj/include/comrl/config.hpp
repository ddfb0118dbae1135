#pragma once

#include <string>
#include <vector>

#include "comrl/meta.hpp"

namespace comrl {

// One experiment, described by a flat JSON document. Unknown keys are
// rejected so config typos cannot silently fall back to defaults.
struct ExperimentConfig {
  Family family = Family::PointDir;
  int n_train_tasks = 20;
  int n_test_tasks = 4;
  uint64_t task_seed = 7;
  uint64_t data_seed = 11;
  int horizon = 50;
  int episodes_per_tier = 5;
  std::vector<Tier> tiers = {Tier::Random, Tier::Medium, Tier::Expert};

  // Loss selector as spelled on the CLI. UNICORN-SS-0 is UNICORN-SS with the
  // metric term switched off (alpha pinned to zero).
  std::string loss = "UNICORN-SS";

  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6};
  MetaConfig meta;  // weights, encoder, BRAC, steps, batch shape, rates

  // Model-based task-OOD protocol. noise_scale < 0 selects the default of
  // 0.1 times the per-dimension std of the training-task embeddings.
  int taskood_window = 0;  // 0 means n_train_tasks
  double taskood_noise_scale = -1.0;
  int taskood_ensemble = 5;
  int taskood_rollout_len = 5;
  double taskood_imaginary_fraction = 0.5;
  int taskood_rollouts = 200;
  int taskood_finetune_steps = 1000;

  // Alpha sweep grid, in alpha/(1-alpha) ratio units, plus the all-metric
  // endpoint (a plain FOCAL run standing in for alpha -> 1).
  std::vector<double> alpha_sweep_ratios = {0.0, 0.15, 1.5};
  bool alpha_sweep_focal_endpoint = true;

  LossKind loss_kind() const;

  // Structural checks that need no dataset: selector spelling, seed list,
  // head/weight consistency, task counts, sweep ranges.
  void validate() const;
};

// Parses and validates a flat JSON config document / file.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// The meta-training view of the experiment: selector folded into
// LossKind + weights (UNICORN-SS-0 pins alpha to 0), per-run seed applied.
MetaConfig to_meta_config(const ExperimentConfig& cfg, uint64_t seed);

}  // namespace comrl
