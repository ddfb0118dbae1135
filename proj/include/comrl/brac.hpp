#pragma once

#include <span>

#include "comrl/dataset.hpp"
#include "comrl/mlp.hpp"

namespace comrl {

// Behavior-regularized actor-critic over the augmented state (s, z): a
// deterministic tanh actor pulled toward dataset actions, a single critic,
// and a Polyak-averaged target critic for bootstrap targets.
struct BRACConfig {
  std::vector<int> actor_hidden = {64, 64};
  std::vector<int> critic_hidden = {64, 64};
  double gamma = 0.99;
  double polyak = 0.005;  // soft-update rate in (0,1]; 1 copies outright
  // Behavior-cloning weight. When adaptive, lambda_bc is recomputed per
  // batch as bc_alpha * mean|Q(s, pi(s,z), z)|, keeping the two actor-loss
  // terms on comparable scales as Q grows; the weight itself is treated as
  // a constant by the gradient.
  bool adaptive_bc = true;
  double bc_alpha = 2.5;
  double lambda_bc = 1.0;  // fixed weight used when adaptive_bc is false
  int rl_batch = 256;      // transitions per training step, across all tasks

  void validate() const;
};

struct BRAC {
  BRACConfig cfg;
  int dim_s = 0, dim_a = 0, dim_z = 0;
  Mlp actor;          // (s, z) -> action in (-1,1)^dim_a
  Mlp critic;         // (s, a, z) -> scalar
  Mlp critic_target;  // trails critic by Polyak averaging

  static BRAC init(int dim_s, int dim_a, int dim_z, const BRACConfig& cfg,
                   Rng& rng);

  std::vector<double> act(std::span<const double> s,
                          std::span<const double> z) const;
  double q_value(std::span<const double> s, std::span<const double> a,
                 std::span<const double> z) const;

  // target <- (1 - polyak) * target + polyak * online, elementwise.
  void soft_update();
};

// Per-row task embeddings for a batch, [batch, dim_z]. Raw tensors, never
// tape leaves: the actor/critic graphs treat z as data, so no gradient can
// reach the encoder that produced it.
Tensor tile_rows(std::span<const double> row, int n);

// Mean squared Bellman residual (Q(s,a,z) - [r + gamma * Q_target(s', pi(s',z), z)])^2,
// differentiable in critic_leaves only. Targets are computed off-tape with
// the target critic and the current actor; terminal rows bootstrap with 0.
Value critic_loss(Tape& tape, const BRAC& brac,
                  std::span<const Value> critic_leaves,
                  const TransitionBatch& batch, const Tensor& z_rows);

// Mean of -Q(s, pi(s,z), z) + lambda_bc * ||pi(s,z) - a_data||^2,
// differentiable in actor_leaves only; critic parameters enter the graph as
// constants so the gradient flows through the action alone.
Value actor_loss(Tape& tape, const BRAC& brac,
                 std::span<const Value> actor_leaves,
                 const TransitionBatch& batch, const Tensor& z_rows);

// The behavior-cloning weight actor_loss will use on this batch.
double bc_weight(const BRAC& brac, const TransitionBatch& batch,
                 const Tensor& z_rows);

}  // namespace comrl
