#pragma once

#include <optional>
#include <span>
#include <vector>

#include "comrl/dataset.hpp"
#include "comrl/encoder.hpp"

namespace comrl {

// Coefficients of the task-representation objectives. All losses are built
// on a Tape, so each returns a scalar Value whose backward pass yields exact
// analytic gradients.
struct LossWeights {
  double alpha = 0.0;       // reconstruction/metric mix, in [0,1)
  double focal_beta = 1.0;  // repulsive strength between different tasks
  int focal_exponent = 2;   // inverse-distance power; positive even integer
  double focal_eps = 0.1;   // repulsive denominator floor
  double lambda_club = 0.5; // weight of the mutual-information upper bound
  double tau = 0.1;         // contrastive temperature
  double kl_weight = 0.0;   // Gaussian-head prior penalty

  void validate() const;
};

// Distance-metric clustering loss over a batch of latents z [B, d] with one
// task label per row: mean over ordered pairs i != j of
//   1{same task} * ||z_i - z_j||^2
// + 1{different task} * beta / (||z_i - z_j||^n + eps).
Value focal_loss(Tape& tape, Value z, std::span<const int> task_ids,
                 const LossWeights& w);

// Contrastive reduction: scores [R, 1+K] with the positive score in column
// 0; returns mean over rows of -log softmax(row)[0].
Value info_nce(Tape& tape, Value scores);

// One contrastive training batch: for every context, each of its first
// anchors_per_task transitions followed by k_negatives relabelings of that
// transition's (s, a) under distinct other tasks (reward and next state
// recomputed by the simulator).
struct CorroBatch {
  Tensor rows;                 // [n_groups * (1 + k), row_width]
  std::vector<int> group_task; // context index per group, length n_groups
  int n_groups = 0;
  int k = 0;
};
CorroBatch build_corro_batch(const OfflineDataset& ds,
                             std::span<const ContextSegment> contexts,
                             int k_negatives, int anchors_per_task, Rng& rng);

// Contrastive objective: scores h(x, z) = exp(<g(x), z>/tau) where g is the
// encoder applied to the single transition x and z is its context's row of
// z_batch; returns the info_nce of the anchor against its negatives.
Value corro_loss(Tape& tape, const Encoder& enc, std::span<const Value> enc_leaves,
                 const CorroBatch& batch, Value z_batch, const LossWeights& w);

// Variational net behind the mutual-information upper bound: behavior input
// xb = (s, a) -> (mean, log-variance) of a diagonal Gaussian over z.
struct ClubAux {
  Mlp net;
  int latent_dim = 0;

  static ClubAux init(int xb_dim, int latent_dim, int width, Rng& rng);
};

// Mutual-information upper bound between z and the behavior input:
//   mean_i [ log q(z_i|xb_i) - mean_j log q(z_j|xb_i) ],
// computed as an exact mean of pairwise log-likelihood differences, so a
// batch whose xb rows are all identical scores exactly zero. Gradients flow
// into z; the auxiliary net enters as constants. xb is [B, dim_s + dim_a].
Value club_loss(Tape& tape, const ClubAux& aux, Value z, const Tensor& xb);

// Fitting objective for the auxiliary net (one step per main step,
// alternating): negative mean log-likelihood of the matched pairs. z enters
// as data; aux_leaves receive the gradients.
Value club_aux_nll(Tape& tape, const ClubAux& aux,
                   std::span<const Value> aux_leaves, const Tensor& xb,
                   const Tensor& z);

// Metric loss plus lambda times the mutual-information bound.
Value csro_loss(Tape& tape, Value focal, Value club, const LossWeights& w);

// Mean softmax cross-entropy of logits [B, n_classes] against labels.
Value cross_entropy_loss(Tape& tape, Value logits, std::span<const int> labels);

// Mean squared error of decoder(z, s, a) against the observed (r, s_next),
// averaged over every coordinate. rows is a transition matrix [N, w];
// row_task[i] selects the z_batch row for transition i.
Value recon_loss(Tape& tape, const Mlp& decoder,
                 std::span<const Value> dec_leaves, Value z_batch,
                 std::span<const int> row_task, const Tensor& rows, int dim_s,
                 int dim_a);

// recon + (alpha/(1-alpha)) * focal. With alpha = 0 the metric term is not
// referenced at all (label-free variant), so the result is the untouched
// reconstruction loss: bit-identical, not merely close.
Value unicorn_ss_loss(Tape& tape, Value recon, std::optional<Value> focal,
                      const LossWeights& w);

// Closed-form KL of the diagonal-Gaussian head against a standard normal
// prior, averaged over the batch. Exactly zero for the standard-normal
// posterior.
Value kl_penalty(Tape& tape, const Encoder& enc, const GaussianHead& head);

}  // namespace comrl
