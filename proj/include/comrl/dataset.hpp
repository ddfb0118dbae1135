#pragma once

#include <optional>
#include <string>
#include <vector>

#include "comrl/envs.hpp"
#include "comrl/rng.hpp"
#include "comrl/tensor.hpp"

namespace comrl {

// Per-task replay buffer stored flat in row-major order, one row per
// transition: (s, a, r, s_next), dim_s + dim_a + 1 + dim_s doubles.
struct TaskBuffer {
  int task_id = 0;
  int64_t count = 0;
  std::vector<double> data;
};

// Offline multi-task dataset: every task's buffer plus the checkpoint table
// that produced it. Episodes are collected at full horizon, so episode
// boundaries are multiples of episode_len within each buffer.
struct OfflineDataset {
  Family family = Family::PointDir;
  int dim_s = 0;
  int dim_a = 0;
  int episode_len = 0;
  uint64_t seed = 0;  // provenance: the collection seed
  std::vector<TaskSpec> tasks;
  std::vector<PolicyCheckpoint> checkpoints;
  std::vector<TaskBuffer> buffers;

  int n_tasks() const { return static_cast<int>(tasks.size()); }
  int row_width() const { return dim_s + dim_a + 1 + dim_s; }
  const TaskBuffer& buffer_of(int task_id) const;
  const TaskSpec& task_of(int task_id) const;

  // Read-only view of one stored transition.
  struct Row {
    std::span<const double> s, a, s_next;
    double r;
  };
  Row row(int task_id, int64_t index) const;

  void validate() const;
};

enum class ContextMode : uint8_t { IID, OOD };

// A context segment: n transitions flattened one row per transition in the
// same layout as TaskBuffer rows.
struct ContextSegment {
  int task_id = 0;
  int n = 0;
  ContextMode origin = ContextMode::IID;
  int origin_checkpoint = -1;  // index into the checkpoint table for OOD
  std::vector<double> data;
};

// Task-batch of contexts, as consumed by one training step.
struct ContextBatch {
  std::vector<int> task_ids;
  std::vector<ContextSegment> contexts;
};

// Binary dataset file: magic "CMRLDS01", u32 LE length-prefixed JSON header
// (family, dims, episode_len, seed, task params, checkpoint table, counts),
// then per task a u64 LE count and count rows of f64 LE values.
void save_dataset(const OfflineDataset& ds, const std::string& path);
OfflineDataset load_dataset(const std::string& path);

// IID: contiguous n-transition segment from the task's own buffer, never
// straddling an episode boundary. OOD: fresh rollout of the foreign
// checkpoint ckpt acting in task task_id, truncated to n transitions.
ContextSegment sample_context(const OfflineDataset& ds, int task_id, int n,
                              ContextMode mode,
                              const std::optional<PolicyCheckpoint>& ckpt,
                              Rng& rng);

// One OOD context per checkpoint in the table, in table order ("coverage
// mode"): every behavior policy, own-task and foreign alike, acts in
// task_id's environment.
std::vector<ContextSegment> ood_contexts_all_checkpoints(const OfflineDataset& ds,
                                                         int task_id, int n,
                                                         Rng& rng);

// Uniform with-replacement sample of batch_size transitions, flattened like
// a context segment. terminal[i] marks the last transition of an episode
// (buffers hold full-horizon episodes, so that is index episode_len-1 within
// its episode); the Bellman backup bootstraps 0 there.
struct TransitionBatch {
  int task_id = 0;
  int batch_size = 0;
  std::vector<double> data;      // rows of (s, a, r, s_next)
  std::vector<uint8_t> terminal; // one flag per row
};
TransitionBatch sample_rl_batch(const OfflineDataset& ds, int task_id,
                                int batch_size, Rng& rng);

// Encoder input matrix [n, dim_s+dim_a+1+dim_s] from a context segment.
Tensor context_matrix(const OfflineDataset& ds, const ContextSegment& seg);

}  // namespace comrl
