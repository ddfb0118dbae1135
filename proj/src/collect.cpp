#include "comrl/collect.hpp"

namespace comrl {

OfflineDataset collect_dataset(std::span<const TaskSpec> tasks,
                               std::span<const Tier> tiers, int episodes_per_tier,
                               uint64_t seed) {
  COMRL_REQUIRE(!tasks.empty(), "collect: need at least one task");
  COMRL_REQUIRE(!tiers.empty(), "collect: need at least one tier");
  COMRL_REQUIRE(episodes_per_tier >= 1, "collect: episodes_per_tier must be >= 1");

  OfflineDataset ds;
  ds.family = tasks[0].family;
  ds.dim_s = obs_dim(ds.family);
  ds.dim_a = action_dim(ds.family);
  ds.episode_len = tasks[0].horizon;
  ds.seed = seed;

  const Rng master(seed);
  for (const TaskSpec& task : tasks) {
    COMRL_REQUIRE(task.family == ds.family, "collect: tasks must share a family");
    COMRL_REQUIRE(task.horizon == ds.episode_len,
                  "collect: tasks must share a horizon");
    ds.tasks.push_back(task);
    TaskBuffer buf;
    buf.task_id = task.task_id;
    for (size_t ti = 0; ti < tiers.size(); ++ti) {
      const Tier tier = tiers[ti];
      Rng stream = master.derive(static_cast<uint64_t>(task.task_id) * 64 + ti);
      PolicyCheckpoint ckpt;
      ckpt.task_id = task.task_id;
      ckpt.tier = tier;
      ckpt.noise_scale = default_noise_scale(tier);
      ckpt.seed = stream.next_u64();
      ds.checkpoints.push_back(ckpt);
      for (int e = 0; e < episodes_per_tier; ++e) {
        const EpisodeRollout ep = rollout_episode(task, task, ckpt, stream);
        for (const Transition& tr : ep.transitions) {
          buf.data.insert(buf.data.end(), tr.s.begin(), tr.s.end());
          buf.data.insert(buf.data.end(), tr.a.begin(), tr.a.end());
          buf.data.push_back(tr.r);
          buf.data.insert(buf.data.end(), tr.s_next.begin(), tr.s_next.end());
        }
        buf.count += static_cast<int64_t>(ep.transitions.size());
      }
    }
    ds.buffers.push_back(std::move(buf));
  }
  ds.validate();
  return ds;
}

}  // namespace comrl
