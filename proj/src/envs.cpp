#include "comrl/envs.hpp"

#include <algorithm>
#include <cmath>

namespace comrl {

namespace {

constexpr double kDt = 0.1;
constexpr double kArena = 5.0;
constexpr int kGridSide = 5;
constexpr double kTwoPi = 6.283185307179586476925286766559;

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Continuous action set: the closed unit L2 ball. Components stay in [-1,1]
// and PointDir rewards stay within [-1,1].
bool clip_ball(std::vector<double>& a) {
  double sq = 0.0;
  for (double v : a) sq += v * v;
  if (sq <= 1.0) return false;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : a) v *= inv;
  return true;
}

int grid_col(int cell) { return cell % kGridSide; }
int grid_row(int cell) { return cell / kGridSide; }

// Largest-magnitude axis wins; ties and zero vectors resolve to +x.
void quantize_move(std::span<const double> a, int& dc, int& dr, bool& was_exact) {
  const double ax = a[0], ay = a[1];
  if (std::abs(ax) >= std::abs(ay)) {
    dc = (ax >= 0.0) ? 1 : -1;
    dr = 0;
  } else {
    dc = 0;
    dr = (ay >= 0.0) ? 1 : -1;
  }
  was_exact = (a[0] == static_cast<double>(dc) && a[1] == static_cast<double>(dr));
}

}  // namespace

int grid_move_index(std::span<const double> action) {
  COMRL_REQUIRE(action.size() == 2, "grid moves quantize 2-vector actions");
  int dc = 0, dr = 0;
  bool exact = false;
  quantize_move(action, dc, dr, exact);
  if (dc == 1) return 0;
  if (dc == -1) return 1;
  return dr == 1 ? 2 : 3;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::PointDir: return "PointDir";
    case Family::PointVel: return "PointVel";
    case Family::PointMassParam: return "PointMassParam";
    case Family::GridGoal: return "GridGoal";
  }
  throw internal_error("unknown family");
}

Family family_from_name(const std::string& s) {
  if (s == "PointDir") return Family::PointDir;
  if (s == "PointVel") return Family::PointVel;
  if (s == "PointMassParam") return Family::PointMassParam;
  if (s == "GridGoal") return Family::GridGoal;
  throw config_error("unknown family: " + s);
}

int obs_dim(Family f) { return f == Family::PointMassParam ? 4 : 2; }
int action_dim(Family f) { return 2; }

std::string tier_name(Tier t) {
  switch (t) {
    case Tier::Random: return "random";
    case Tier::Medium: return "medium";
    case Tier::Expert: return "expert";
  }
  throw internal_error("unknown tier");
}

Tier tier_from_name(const std::string& s) {
  if (s == "random") return Tier::Random;
  if (s == "medium") return Tier::Medium;
  if (s == "expert") return Tier::Expert;
  throw config_error("unknown tier: " + s);
}

double default_noise_scale(Tier t) {
  // The random tier's draw is uniform over the whole action set; its stored
  // scale is a finite sentinel that still orders random > medium > expert.
  switch (t) {
    case Tier::Random: return 2.0;
    case Tier::Medium: return 0.5;
    case Tier::Expert: return 0.05;
  }
  throw internal_error("unknown tier");
}

EnvState env_reset(const TaskSpec& task, uint64_t /*seed*/) {
  EnvState st;
  st.step_count = 0;
  switch (task.family) {
    case Family::PointDir:
    case Family::PointVel:
      st.vec = {0.0, 0.0};
      break;
    case Family::PointMassParam:
      st.vec = {0.0, 0.0, 0.0, 0.0};
      break;
    case Family::GridGoal:
      st.cell = 0;
      break;
  }
  return st;
}

std::vector<double> observe(const TaskSpec& task, const EnvState& state) {
  if (task.family == Family::GridGoal) {
    return {static_cast<double>(grid_col(state.cell)),
            static_cast<double>(grid_row(state.cell))};
  }
  return state.vec;
}

StepResult env_step(const TaskSpec& task, const EnvState& state,
                    std::span<const double> action) {
  COMRL_CHECK(state.step_count < task.horizon, "env_step: episode already at horizon");
  COMRL_CHECK(static_cast<int>(action.size()) == action_dim(task.family),
              "env_step: wrong action dimension");
  StepResult out;
  out.next = state;
  out.next.step_count = state.step_count + 1;

  if (task.family == Family::GridGoal) {
    const int goal = static_cast<int>(task.params.at(0));
    int dc = 0, dr = 0;
    bool exact = false;
    quantize_move(action, dc, dr, exact);
    out.action_clipped = !exact;
    if (state.cell == goal) {
      // Absorbing goal: position frozen.
      out.next.cell = state.cell;
    } else {
      const int nc = std::clamp(grid_col(state.cell) + dc, 0, kGridSide - 1);
      const int nr = std::clamp(grid_row(state.cell) + dr, 0, kGridSide - 1);
      out.next.cell = nr * kGridSide + nc;
    }
    out.reward = (out.next.cell == goal) ? 1.0 : 0.0;
    return out;
  }

  std::vector<double> a(action.begin(), action.end());
  out.action_clipped = clip_ball(a);

  switch (task.family) {
    case Family::PointDir: {
      const double theta = task.params.at(0);
      const double px = state.vec[0], py = state.vec[1];
      const double nx = clip(px + kDt * a[0], -kArena, kArena);
      const double ny = clip(py + kDt * a[1], -kArena, kArena);
      out.next.vec = {nx, ny};
      out.reward = ((nx - px) * std::cos(theta) + (ny - py) * std::sin(theta)) / kDt;
      break;
    }
    case Family::PointVel: {
      const double v_star = task.params.at(0);
      const double px = state.vec[0], py = state.vec[1];
      const double nx = clip(px + kDt * a[0], -kArena, kArena);
      const double ny = clip(py + kDt * a[1], -kArena, kArena);
      out.next.vec = {nx, ny};
      const double speed = std::hypot(nx - px, ny - py) / kDt;
      out.reward = -std::abs(speed - v_star);
      break;
    }
    case Family::PointMassParam: {
      const double m = task.params.at(0), d = task.params.at(1);
      double vx = state.vec[2], vy = state.vec[3];
      vx += (a[0] - d * vx) / m * kDt;
      vy += (a[1] - d * vy) / m * kDt;
      const double nx = clip(state.vec[0] + vx * kDt, -kArena, kArena);
      const double ny = clip(state.vec[1] + vy * kDt, -kArena, kArena);
      out.next.vec = {nx, ny, vx, vy};
      out.reward = -std::hypot(nx - 1.0, ny - 1.0);
      break;
    }
    case Family::GridGoal:
      break;  // handled above
  }
  return out;
}

std::vector<double> expert_action(const TaskSpec& task, const EnvState& state) {
  switch (task.family) {
    case Family::PointDir: {
      const double theta = task.params.at(0);
      return {std::cos(theta), std::sin(theta)};
    }
    case Family::PointVel: {
      // Move at the target speed, steering toward the origin once away from
      // it so the arena boundary is never reached.
      const double v_star = task.params.at(0);
      const double px = state.vec[0], py = state.vec[1];
      const double norm = std::hypot(px, py);
      double ux = 1.0, uy = 0.0;
      if (norm >= 1.0) {
        ux = -px / norm;
        uy = -py / norm;
      }
      return {v_star * ux, v_star * uy};
    }
    case Family::PointMassParam: {
      // Proportional-derivative control toward (1,1), compensating mass and
      // drag so the commanded velocity change is realized.
      const double m = task.params.at(0), d = task.params.at(1);
      const double px = state.vec[0], py = state.vec[1];
      const double vx = state.vec[2], vy = state.vec[3];
      const double kp = 1.0, kv = 2.5;
      std::vector<double> a = {m * (kp * (1.0 - px) - kv * vx) + d * vx,
                               m * (kp * (1.0 - py) - kv * vy) + d * vy};
      clip_ball(a);
      return a;
    }
    case Family::GridGoal: {
      const int goal = static_cast<int>(task.params.at(0));
      const int dc = grid_col(goal) - grid_col(state.cell);
      const int dr = grid_row(goal) - grid_row(state.cell);
      if (dc == 0 && dr == 0) return {1.0, 0.0};  // absorbed at goal
      if (std::abs(dc) >= std::abs(dr) && dc != 0) {
        return {dc > 0 ? 1.0 : -1.0, 0.0};
      }
      return {0.0, dr > 0 ? 1.0 : -1.0};
    }
  }
  throw internal_error("unknown family");
}

std::vector<double> behavior_action(const PolicyCheckpoint& ckpt,
                                    const TaskSpec& ckpt_task,
                                    const EnvState& state, Rng& rng) {
  COMRL_CHECK(ckpt.task_id == ckpt_task.task_id,
              "behavior_action: ckpt_task must be the checkpoint's own task");
  const bool grid = ckpt_task.family == Family::GridGoal;
  if (ckpt.tier == Tier::Random) {
    if (grid) {
      return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }
    // Uniform over the unit ball via rejection.
    while (true) {
      const double x = rng.uniform(-1.0, 1.0), y = rng.uniform(-1.0, 1.0);
      if (x * x + y * y <= 1.0) return {x, y};
    }
  }
  std::vector<double> a = expert_action(ckpt_task, state);
  for (double& v : a) v += ckpt.noise_scale * rng.normal();
  if (grid) {
    for (double& v : a) v = clip(v, -1.0, 1.0);
  } else {
    clip_ball(a);
  }
  return a;
}

Transition relabel(const Transition& x, const TaskSpec& source_task,
                   const TaskSpec& target_task) {
  COMRL_REQUIRE(source_task.family == target_task.family,
                "relabel: tasks must share a family");
  EnvState st;
  st.step_count = 0;
  if (target_task.family == Family::GridGoal) {
    st.cell = static_cast<int>(x.s.at(1)) * kGridSide + static_cast<int>(x.s.at(0));
  } else {
    st.vec = x.s;
  }
  const StepResult res = env_step(target_task, st, x.a);
  Transition out;
  out.s = x.s;
  out.a = x.a;
  out.r = res.reward;
  out.s_next = observe(target_task, res.next);
  return out;
}

std::vector<TaskSpec> make_task_set(Family f, int n, uint64_t seed, int horizon,
                                    double discount) {
  COMRL_REQUIRE(n >= 1, "make_task_set: need at least one task");
  COMRL_REQUIRE(horizon >= 1, "make_task_set: horizon must be positive");
  COMRL_REQUIRE(discount > 0.0 && discount < 1.0, "make_task_set: discount in (0,1)");
  Rng rng(seed);
  std::vector<TaskSpec> out;
  out.reserve(n);
  if (f == Family::GridGoal) {
    COMRL_REQUIRE(n <= kGridSide * kGridSide - 1,
                  "make_task_set: at most 24 distinct GridGoal tasks");
    std::vector<int> cells;
    for (int c = 1; c < kGridSide * kGridSide; ++c) cells.push_back(c);
    for (int i = static_cast<int>(cells.size()) - 1; i > 0; --i) {
      std::swap(cells[i], cells[rng.uniform_int(i + 1)]);
    }
    for (int i = 0; i < n; ++i) {
      out.push_back({f, i, {static_cast<double>(cells[i])}, horizon, discount});
    }
    return out;
  }
  for (int i = 0; i < n; ++i) {
    std::vector<double> params;
    switch (f) {
      case Family::PointDir:
        params = {kTwoPi * rng.uniform()};
        break;
      case Family::PointVel:
        params = {0.1 + 0.9 * rng.uniform()};
        break;
      case Family::PointMassParam:
        params = {0.5 + 1.5 * rng.uniform(), 0.5 * rng.uniform()};
        break;
      case Family::GridGoal:
        break;
    }
    out.push_back({f, i, std::move(params), horizon, discount});
  }
  return out;
}

EpisodeRollout rollout_episode(const TaskSpec& env_task, const TaskSpec& ckpt_task,
                               const PolicyCheckpoint& ckpt, Rng& rng) {
  EpisodeRollout out;
  EnvState st = env_reset(env_task, ckpt.seed);
  out.transitions.reserve(env_task.horizon);
  for (int t = 0; t < env_task.horizon; ++t) {
    Transition tr;
    tr.s = observe(env_task, st);
    tr.a = behavior_action(ckpt, ckpt_task, st, rng);
    const StepResult res = env_step(env_task, st, tr.a);
    tr.r = res.reward;
    tr.s_next = observe(env_task, res.next);
    out.total_reward += res.reward;
    out.clipped_actions += res.action_clipped ? 1 : 0;
    out.transitions.push_back(std::move(tr));
    st = res.next;
  }
  return out;
}

}  // namespace comrl
