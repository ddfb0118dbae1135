#pragma once

#include <optional>
#include <string>
#include <vector>

#include "comrl/brac.hpp"
#include "comrl/losses.hpp"

namespace comrl {

// Which task-representation objective drives the encoder.
enum class LossKind : uint8_t { Focal, Corro, Csro, UnicornSup, UnicornSS };

std::string loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& s);

struct MetaConfig {
  LossKind loss = LossKind::UnicornSS;
  LossWeights weights;
  EncoderConfig encoder;  // input_dim is taken from the dataset
  BRACConfig brac;

  int steps = 20000;
  int task_batch = 16;          // tasks drawn per training step
  int contexts_per_task = 2;    // >= 2 gives the metric loss same-task pairs
  int context_len = 20;         // transitions per training context
  int steps_per_task_batch = 1; // inner steps before the task batch is redrawn

  double lr_encoder = 3e-4;  // representation-loss step on the encoder
  double lr_decoder = 3e-4;  // same step on the decoder / classifier / aux
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;

  int decoder_width = 64;   // hidden width of decoder / classifier / aux nets
  int corro_negatives = 4;
  int corro_anchors = 4;
  int club_aux_steps = 1;   // aux-net fits per main step (alternating)
  int ensemble_decoders = 1;  // extra reconstruction heads for model rollouts

  int eval_interval = 1000;  // 0 records loss rows only at the final step
  uint64_t seed = 1;

  void validate(const OfflineDataset& ds) const;
};

// One metrics row per evaluation point. Returns are averaged over the
// evaluation dataset's tasks (the OOD column first averages each task over
// every behavior checkpoint); the std columns spread across tasks.
struct MetaMetricsRow {
  int step = 0;
  double repr_loss = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double iid_return = 0.0;
  double iid_std = 0.0;
  double ood_return = 0.0;
  double ood_std = 0.0;
};

// Trained state: context encoder, per-loss auxiliary heads, actor-critic.
struct MetaModel {
  LossKind loss = LossKind::UnicornSS;
  Encoder encoder;
  // UnicornSS: reconstruction heads (z,s,a)->(r,s'), one per ensemble
  // member, member 0 being the head the encoder trains against.
  // UnicornSup: a single classifier z->logits. Otherwise empty.
  std::vector<Mlp> decoders;
  std::optional<ClubAux> club_aux;  // Csro only
  BRAC brac;
};

struct MetaRunResult {
  MetaModel model;
  std::vector<MetaMetricsRow> metrics;
  // Differentiable leaves observed on actor/critic tapes beyond the ones the
  // RL phase itself created. Any nonzero count would mean a gradient path
  // into the encoder, which the training loop rejects by assertion.
  int64_t detach_violations = 0;
};

// Freshly initialized model state for this config and dataset layout, as
// meta_train would build it: deterministic in cfg.seed, so restoring a saved
// checkpoint on top reproduces a trained model exactly.
MetaModel init_meta_model(const MetaConfig& cfg, const OfflineDataset& ds);

// The meta-training loop. Per step: draw a task batch, sample contexts,
// embed them, take one representation-loss step on encoder (+heads); then
// re-use those embeddings as constants, sample RL transitions, and take one
// actor and one critic step each, followed by a target soft update. The
// evaluation dataset defaults to the training dataset when null.
MetaRunResult meta_train(const MetaConfig& cfg, const OfflineDataset& train,
                         const OfflineDataset* eval_ds = nullptr);

// One adaptation episode: sample a context of the requested mode, embed it
// once, roll the policy in the true environment for one episode, and return
// the undiscounted return. OOD mode requires the behavior checkpoint to roll
// the context with.
double meta_test(const MetaModel& model, const OfflineDataset& ds, int task_id,
                 ContextMode mode, const std::optional<PolicyCheckpoint>& ckpt,
                 Rng& rng);

// Undiscounted one-episode return of the deterministic policy conditioned on
// a fixed embedding.
double policy_return(const BRAC& brac, const TaskSpec& task,
                     std::span<const double> z);

// Embeds one evaluation context per mode for a task: IID draws one stored
// trajectory; OOD enumerates checkpoints elsewhere (see
// ood_contexts_all_checkpoints).
std::vector<double> embed_context(const MetaModel& model,
                                  const OfflineDataset& ds,
                                  const ContextSegment& seg);

// Checkpoint plumbing: every parameter tensor of the model under stable
// names ("encoder.phi.W0", "decoder0.b1", "actor.W2", ...).
std::vector<NamedTensor> named_params(const MetaModel& model);
void restore_params(MetaModel& model, const std::vector<NamedTensor>& tensors);

}  // namespace comrl
