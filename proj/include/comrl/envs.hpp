#pragma once

#include <span>
#include <string>
#include <vector>

#include "comrl/common.hpp"
#include "comrl/rng.hpp"

namespace comrl {

// Synthetic multi-task MDP families. Tasks within one family share state and
// action spaces and differ only through their parameter vector.
enum class Family : uint8_t { PointDir, PointVel, PointMassParam, GridGoal };

std::string family_name(Family f);
Family family_from_name(const std::string& s);

struct TaskSpec {
  Family family = Family::PointDir;
  int task_id = 0;
  // PointDir: {theta in [0,2pi)}. PointVel: {v_star in [0.1,1.0]}.
  // PointMassParam: {mass in [0.5,2.0], drag in [0.0,0.5]}.
  // GridGoal: {goal cell index on the 5x5 grid}.
  std::vector<double> params;
  int horizon = 50;
  double discount = 0.99;
};

// Observation/action dimensionality (uniform within a family).
int obs_dim(Family f);
int action_dim(Family f);

enum class Tier : uint8_t { Random, Medium, Expert };

std::string tier_name(Tier t);
Tier tier_from_name(const std::string& s);

// Behavior-policy provenance record. noise_scale orders the tiers
// (random > medium > expert); the random tier ignores the expert action
// entirely and its stored scale is a finite stand-in for "unbounded".
struct PolicyCheckpoint {
  int task_id = 0;
  Tier tier = Tier::Expert;
  double noise_scale = 0.0;
  uint64_t seed = 0;
};

double default_noise_scale(Tier t);

struct EnvState {
  std::vector<double> vec;  // position (+ velocity for PointMassParam)
  int cell = 0;             // GridGoal cell index
  int step_count = 0;
};

struct Transition {
  std::vector<double> s;
  std::vector<double> a;
  double r = 0.0;
  std::vector<double> s_next;

  // Views of the behavior-related component (s, a) and the task-related
  // component (r, s_next) of the stored fields.
  struct BehaviorX {
    std::span<const double> s, a;
  };
  struct TaskX {
    double r;
    std::span<const double> s_next;
  };
  BehaviorX behavior_x() const { return {s, a}; }
  TaskX task_x() const { return {r, s_next}; }
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool action_clipped = false;
};

// Deterministic initial state: continuous families start at the origin with
// zero velocity; GridGoal starts at cell 0. The seed is accepted for
// interface uniformity; the initial distribution is a point mass.
EnvState env_reset(const TaskSpec& task, uint64_t seed);

// One transition. Continuous actions are clipped to the closed unit L2 ball
// (keeping every component within [-1,1] and reward magnitudes within their
// stated bounds); GridGoal expects a 2-vector that is quantized to one of the
// four axis moves, and the goal cell is absorbing.
StepResult env_step(const TaskSpec& task, const EnvState& state,
                    std::span<const double> action);

// Observation vector for the current state.
std::vector<double> observe(const TaskSpec& task, const EnvState& state);

// Index in {0,1,2,3} = {+x,-x,+y,-y} of the grid move a continuous action
// quantizes to, under the same largest-axis rule the stepper applies.
int grid_move_index(std::span<const double> action);

// Analytically optimal or near-optimal action for the task at this state.
std::vector<double> expert_action(const TaskSpec& task, const EnvState& state);

// Action of the checkpoint's policy at this state. ckpt_task must be the
// checkpoint's own task; states may come from a different task's rollout
// (that mismatch is exactly how out-of-distribution contexts are produced).
// Expert/medium tiers take the expert action plus Gaussian noise of
// noise_scale; the random tier draws uniformly from the action set.
std::vector<double> behavior_action(const PolicyCheckpoint& ckpt,
                                    const TaskSpec& ckpt_task,
                                    const EnvState& state, Rng& rng);

// Keeps (s, a) and recomputes (r, s_next) by applying target_task's dynamics
// and reward to them, exactly as the simulator would.
Transition relabel(const Transition& x, const TaskSpec& source_task,
                   const TaskSpec& target_task);

// n tasks with ids 0..n-1, parameters drawn uniformly from the family ranges
// (GridGoal: distinct non-start goal cells).
std::vector<TaskSpec> make_task_set(Family f, int n, uint64_t seed, int horizon = 50,
                                    double discount = 0.99);

struct EpisodeRollout {
  std::vector<Transition> transitions;
  double total_reward = 0.0;
  int clipped_actions = 0;
};

// Rolls one full-horizon episode in env_task, acting with the checkpoint's
// policy (whose own task is ckpt_task).
EpisodeRollout rollout_episode(const TaskSpec& env_task, const TaskSpec& ckpt_task,
                               const PolicyCheckpoint& ckpt, Rng& rng);

}  // namespace comrl
