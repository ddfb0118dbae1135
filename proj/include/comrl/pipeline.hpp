#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "comrl/config.hpp"
#include "comrl/metrics.hpp"

namespace comrl {

// Task pool and datasets shared by the experiment protocols: one task set
// split train/test, one offline dataset collected per side.
struct ExperimentData {
  std::vector<TaskSpec> train_tasks, test_tasks;
  OfflineDataset train, test;
};
ExperimentData build_experiment_data(const ExperimentConfig& cfg);

// Mean undiscounted episode return logged in a dataset's buffers; orders the
// behavior tiers.
double dataset_mean_return(const OfflineDataset& ds);

// Per-seed meta-training with held-out-task evaluation at intervals.
// Writes metrics.csv, timings.csv, curves.svg, and one weight checkpoint
// per seed into out_dir.
struct PipelineResult {
  std::vector<TaskSpec> train_tasks, test_tasks;
  std::vector<MetricsRow> rows;
  std::vector<MetaModel> models;  // final state, one per seed
  std::string metrics_path, timings_path, curve_path;
  std::vector<std::string> checkpoint_paths;
};
PipelineResult run_pipeline(const ExperimentConfig& cfg,
                            const std::string& out_dir);

// The full pipeline once per behavior-quality tier, each tier's dataset
// holding the same number of episodes (unequal sizes are rejected so the
// comparison never confounds quality with quantity).
struct QualityTierResult {
  Tier tier = Tier::Random;
  double dataset_return = 0.0;  // mean episode return of the tier's data
  double final_iid = 0.0;
  double final_ood = 0.0;
  std::vector<MetricsRow> rows;
};
struct QualityResult {
  std::vector<QualityTierResult> tiers;
  std::string csv_path;
};
QualityResult run_quality_sweep(const ExperimentConfig& cfg,
                                std::span<const Tier> tiers,
                                std::span<const int> episodes,
                                const std::string& out_dir);

// The pipeline across the metric-weight grid (ratio = alpha/(1-alpha)),
// optionally closing with a plain FOCAL run standing in for the ratio -> inf
// endpoint. best_index maximizes the final OOD mean.
struct AlphaPointResult {
  std::string label;
  double ratio = 0.0;  // +inf for the FOCAL endpoint
  double final_iid = 0.0;
  double final_ood = 0.0;
};
struct AlphaSweepResult {
  std::vector<AlphaPointResult> points;
  int best_index = 0;
  std::string csv_path;
};
AlphaSweepResult run_alpha_sweep(const ExperimentConfig& cfg,
                                 std::span<const double> ratios,
                                 bool focal_endpoint,
                                 const std::string& out_dir);

// One model-generated transition and the perturbed embedding it was rolled
// under; row layout matches TaskBuffer rows (s, a, r, s_next).
struct ImaginaryRow {
  std::vector<double> row;
  std::vector<double> z;
};

// Short policy rollouts through the reconstruction-head ensemble: start
// states drawn from the task's real buffer, per-rollout embedding z + eps
// with eps ~ N(0, diag(sigma^2)), actions from the trained actor, next
// state and reward the ensemble mean prediction.
std::vector<ImaginaryRow> imagine_rollouts(const MetaModel& model,
                                           const OfflineDataset& ds,
                                           int task_id,
                                           std::span<const double> z,
                                           std::span<const double> sigma,
                                           int n_rollouts, int rollout_len,
                                           Rng& rng);

// Mean std across ensemble members of the predicted (r, s') over sampled
// real (s, a) rows; grows when z leaves the training range.
double ensemble_disagreement(const MetaModel& model, const OfflineDataset& ds,
                             int task_id, std::span<const double> z,
                             int n_samples, Rng& rng);

// Task-level extrapolation protocol: sort the pool by the scalar task
// parameter, train on a contiguous window, and adapt to the held-out
// extremes either zero-shot (context only) or by fine-tuning the
// actor-critic on batches mixing real rows with imagined rollouts around
// the inferred embedding.
struct TaskOodSeedResult {
  uint64_t seed = 0;
  double context_only = 0.0;
  double model_based = 0.0;
  double disagreement_window = 0.0;
  double disagreement_heldout = 0.0;
};
struct TaskOodResult {
  std::vector<TaskSpec> window_tasks, heldout_tasks;
  std::vector<TaskOodSeedResult> per_seed;
  double mean_context_only = 0.0;
  double mean_model_based = 0.0;
  std::string csv_path;
};
TaskOodResult run_taskood_modelbased(const ExperimentConfig& cfg,
                                     const std::string& out_dir);

// Embedding export for offline projection: one CSV row per sampled context,
// header task_id,origin,z1..z<d>, origins "iid" and "ood" (checkpoints
// cycled in table order).
using EmbedFn = std::function<std::vector<double>(int task_id, const Tensor& context)>;
std::string export_embeddings(const EmbedFn& embed, int latent_dim,
                              const OfflineDataset& ds, int contexts_per_mode,
                              int context_len, uint64_t seed);
std::string export_embeddings(const MetaModel& model, const OfflineDataset& ds,
                              int contexts_per_mode, int context_len,
                              uint64_t seed);

}  // namespace comrl
