#pragma once

#include <span>

#include "comrl/dataset.hpp"
#include "comrl/envs.hpp"

namespace comrl {

// Rolls out each task's own behavior checkpoints at every requested tier,
// logging all transitions and the checkpoint table. One checkpoint is
// created per (task, tier); the mix of tiers emulates replay buffers filled
// by policies ranging from random to expert.
OfflineDataset collect_dataset(std::span<const TaskSpec> tasks,
                               std::span<const Tier> tiers, int episodes_per_tier,
                               uint64_t seed);

}  // namespace comrl
