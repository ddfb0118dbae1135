#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "comrl/brac.hpp"
#include "comrl/collect.hpp"
#include "comrl/meta.hpp"
#include "comrl/optim.hpp"

using namespace comrl;

namespace {

void zero_params(Mlp& m) {
  for (Tensor& p : m.params) {
    for (int64_t i = 0; i < p.numel(); ++i) p[i] = 0.0;
  }
}

// Forces the net to output the constant c for every input: all weights zero,
// final bias c.
void make_constant_net(Mlp& m, double c) {
  zero_params(m);
  Tensor& b = m.params.back();
  for (int64_t i = 0; i < b.numel(); ++i) b[i] = c;
}

TransitionBatch one_row_batch(std::span<const double> s, std::span<const double> a,
                              double r, std::span<const double> s_next,
                              bool terminal) {
  TransitionBatch b;
  b.task_id = 0;
  b.batch_size = 1;
  b.data.insert(b.data.end(), s.begin(), s.end());
  b.data.insert(b.data.end(), a.begin(), a.end());
  b.data.push_back(r);
  b.data.insert(b.data.end(), s_next.begin(), s_next.end());
  b.terminal.push_back(terminal ? 1 : 0);
  return b;
}

TransitionBatch random_batch(int n, int dim_s, int dim_a, Rng& rng) {
  TransitionBatch b;
  b.task_id = 0;
  b.batch_size = n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim_s; ++j) b.data.push_back(rng.normal(0.0, 0.5));
    for (int j = 0; j < dim_a; ++j) b.data.push_back(rng.uniform(-0.7, 0.7));
    b.data.push_back(rng.normal(0.0, 1.0));
    for (int j = 0; j < dim_s; ++j) b.data.push_back(rng.normal(0.0, 0.5));
    b.terminal.push_back(i % 3 == 0 ? 1 : 0);
  }
  return b;
}

Tensor random_z_rows(int n, int d, Rng& rng) {
  Tensor z = Tensor::matrix(n, d);
  for (int64_t i = 0; i < z.numel(); ++i) z.data()[i] = rng.normal(0.0, 0.8);
  return z;
}

std::vector<Tensor*> ptrs_of(Mlp& m) {
  std::vector<Tensor*> out;
  for (Tensor& p : m.params) out.push_back(&p);
  return out;
}

std::vector<const Tensor*> grads_of(const Tape& tape, std::span<const Value> leaves) {
  std::vector<const Tensor*> out;
  for (Value v : leaves) out.push_back(tape.has_grad(v) ? &tape.grad(v) : nullptr);
  return out;
}

BRACConfig small_cfg() {
  BRACConfig cfg;
  cfg.actor_hidden = {16, 16};
  cfg.critic_hidden = {16, 16};
  return cfg;
}

std::vector<TaskSpec> opposite_point_tasks() {
  TaskSpec east;
  east.family = Family::PointDir;
  east.task_id = 0;
  east.params = {0.0};
  TaskSpec west = east;
  west.task_id = 1;
  west.params = {std::numbers::pi};
  return {east, west};
}

// Mean per-episode return of one task's logged transitions.
double dataset_mean_return(const OfflineDataset& ds, int task_id) {
  const TaskBuffer& buf = ds.buffer_of(task_id);
  const int w = ds.row_width();
  double total = 0.0;
  for (int64_t i = 0; i < buf.count; ++i) {
    total += buf.data[static_cast<size_t>(i) * w + ds.dim_s + ds.dim_a];
  }
  return total / (static_cast<double>(buf.count) / ds.episode_len);
}

}  // namespace

TEST_CASE("configuration rejects out-of-range settings") {
  BRACConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = BRACConfig{};
  cfg.polyak = 0.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = BRACConfig{};
  cfg.polyak = 1.0;
  CHECK_NOTHROW(cfg.validate());
  cfg = BRACConfig{};
  cfg.rl_batch = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = BRACConfig{};
  cfg.bc_alpha = -0.1;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = BRACConfig{};
  cfg.lambda_bc = -1.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = BRACConfig{};
  cfg.actor_hidden = {0};
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("actor outputs live in the open unit cube and are deterministic") {
  Rng rng(11);
  BRAC brac = BRAC::init(3, 2, 4, small_cfg(), rng);
  Rng draw(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(3), z(4);
    for (double& v : s) v = draw.normal(0.0, 2.0);
    for (double& v : z) v = draw.normal(0.0, 2.0);
    const std::vector<double> a1 = brac.act(s, z);
    const std::vector<double> a2 = brac.act(s, z);
    REQUIRE(a1.size() == 2);
    for (int i = 0; i < 2; ++i) {
      CHECK(a1[i] > -1.0);
      CHECK(a1[i] < 1.0);
      CHECK(a1[i] == a2[i]);
    }
  }
}

TEST_CASE("tile_rows repeats one embedding per batch row") {
  const std::vector<double> row = {1.5, -2.0, 0.25};
  const Tensor t = tile_rows(row, 4);
  REQUIRE(t.rows() == 4);
  REQUIRE(t.cols() == 3);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(t.data()[i * 3 + j] == row[j]);
  }
}

TEST_CASE("zeroed critic at gamma zero reduces the loss to mean squared reward") {
  Rng rng(3);
  BRACConfig cfg = small_cfg();
  cfg.gamma = 0.0;
  BRAC brac = BRAC::init(2, 2, 3, cfg, rng);
  zero_params(brac.critic);

  const std::vector<double> rewards = {1.0, -0.5, 0.25, 2.0};
  TransitionBatch b;
  b.task_id = 0;
  b.batch_size = 4;
  Rng fill(9);
  for (double r : rewards) {
    for (int j = 0; j < 2; ++j) b.data.push_back(fill.normal());
    for (int j = 0; j < 2; ++j) b.data.push_back(fill.uniform(-0.5, 0.5));
    b.data.push_back(r);
    for (int j = 0; j < 2; ++j) b.data.push_back(fill.normal());
    b.terminal.push_back(0);
  }
  const Tensor z = random_z_rows(4, 3, fill);

  Tape tape;
  const std::vector<Value> leaves = brac.critic.make_leaves(tape);
  const Value loss = critic_loss(tape, brac, leaves, b, z);
  double expect = 0.0;
  for (double r : rewards) expect += r * r;
  expect /= 4.0;
  CHECK(tape.scalar_value(loss) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("terminal rows skip the bootstrap and non-terminal rows include it") {
  Rng rng(4);
  BRACConfig cfg = small_cfg();
  cfg.gamma = 0.9;
  BRAC brac = BRAC::init(2, 2, 2, cfg, rng);
  zero_params(brac.critic);
  make_constant_net(brac.critic_target, 3.0);

  const std::vector<double> s = {0.1, -0.2}, a = {0.3, 0.4}, sn = {0.0, 0.5};
  const double r = 1.0;
  const Tensor z = Tensor::matrix(1, 2);

  Tape t1;
  const auto l1 = brac.critic.make_leaves(t1);
  const Value near = critic_loss(t1, brac, l1, one_row_batch(s, a, r, sn, true), z);
  CHECK(t1.scalar_value(near) == doctest::Approx(r * r).epsilon(1e-13));

  Tape t2;
  const auto l2 = brac.critic.make_leaves(t2);
  const Value far = critic_loss(t2, brac, l2, one_row_batch(s, a, r, sn, false), z);
  const double target = r + 0.9 * 3.0;
  CHECK(t2.scalar_value(far) == doctest::Approx(target * target).epsilon(1e-13));
}

TEST_CASE("critic converges to the discounted value of a self-loop") {
  Rng rng(21);
  BRACConfig cfg = small_cfg();
  cfg.gamma = 0.9;
  cfg.polyak = 1.0;
  BRAC brac = BRAC::init(2, 2, 2, cfg, rng);

  const std::vector<double> s = {0.3, -0.2};
  const std::vector<double> z = {0.5, -1.0};
  // The logged action is the actor's own choice, so the bootstrap queries
  // the exact point being fit and the fixed point is r / (1 - gamma) = 10.
  const std::vector<double> a = brac.act(s, z);
  const TransitionBatch b = one_row_batch(s, a, 1.0, s, false);
  const Tensor z_rows = tile_rows(z, 1);

  std::vector<Tensor*> params = ptrs_of(brac.critic);
  Adam adam(AdamConfig{5e-3, 0.9, 0.999, 1e-8},
            std::vector<const Tensor*>(params.begin(), params.end()),
            std::vector<std::string>(params.size()));
  for (int step = 0; step < 8000; ++step) {
    Tape tape;
    const auto leaves = brac.critic.make_leaves(tape);
    const Value loss = critic_loss(tape, brac, leaves, b, z_rows);
    tape.backward(loss);
    adam.step(params, grads_of(tape, leaves));
    brac.soft_update();
  }
  CHECK(brac.q_value(s, a, z) == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("actor and critic gradients match central finite differences") {
  Rng rng(31);
  BRACConfig cfg;
  cfg.actor_hidden = {8, 8};
  cfg.critic_hidden = {8, 8};
  cfg.adaptive_bc = false;  // a batch-dependent weight is not differentiated
  cfg.lambda_bc = 0.7;
  BRAC brac = BRAC::init(2, 2, 2, cfg, rng);
  Rng fill(8);
  const TransitionBatch b = random_batch(6, 2, 2, fill);
  const Tensor z_rows = random_z_rows(6, 2, fill);

  SUBCASE("critic") {
    std::vector<Tensor*> params = ptrs_of(brac.critic);
    const GraphBuilder f = [&](Tape& tape, std::span<const Value> leaves) {
      return critic_loss(tape, brac, leaves, b, z_rows);
    };
    const GradCheckReport rep = grad_check(f, params, 1e-5, 1e-4);
    CHECK(rep.pass);
    CHECK(rep.worst < 1e-4);
  }
  SUBCASE("actor") {
    std::vector<Tensor*> params = ptrs_of(brac.actor);
    const GraphBuilder f = [&](Tape& tape, std::span<const Value> leaves) {
      return actor_loss(tape, brac, leaves, b, z_rows);
    };
    const GradCheckReport rep = grad_check(f, params, 1e-5, 1e-4);
    CHECK(rep.pass);
    CHECK(rep.worst < 1e-4);
  }
}

TEST_CASE("behavior-cloning weight: fixed value and adaptive scale") {
  Rng rng(41);
  BRACConfig cfg = small_cfg();
  cfg.adaptive_bc = false;
  cfg.lambda_bc = 0.37;
  BRAC brac = BRAC::init(2, 2, 2, cfg, rng);
  Rng fill(6);
  const TransitionBatch b = random_batch(5, 2, 2, fill);
  const Tensor z_rows = random_z_rows(5, 2, fill);
  CHECK(bc_weight(brac, b, z_rows) == 0.37);

  brac.cfg.adaptive_bc = true;
  brac.cfg.bc_alpha = 2.5;
  double mean_abs_q = 0.0;
  const int w = 2 + 2 + 1 + 2;
  for (int i = 0; i < 5; ++i) {
    const double* row = b.data.data() + i * w;
    const std::span<const double> s(row, 2);
    const std::span<const double> zi(z_rows.data() + i * 2, 2);
    const std::vector<double> pi = brac.act(s, zi);
    mean_abs_q += std::abs(brac.q_value(s, pi, zi));
  }
  mean_abs_q /= 5.0;
  CHECK(bc_weight(brac, b, z_rows) ==
        doctest::Approx(2.5 * mean_abs_q).epsilon(1e-13));
}

TEST_CASE("a dominant cloning weight drives the actor onto the data action") {
  Rng rng(51);
  BRACConfig cfg = small_cfg();
  cfg.adaptive_bc = false;
  cfg.lambda_bc = 1e6;
  BRAC brac = BRAC::init(2, 2, 2, cfg, rng);
  const std::vector<double> s = {0.2, -0.4}, a_data = {0.4, -0.3};
  const TransitionBatch b = one_row_batch(s, a_data, 0.0, s, true);
  const Tensor z_rows = tile_rows(std::vector<double>{1.0, -0.5}, 1);

  std::vector<Tensor*> params = ptrs_of(brac.actor);
  Adam adam(AdamConfig{1e-2, 0.9, 0.999, 1e-8},
            std::vector<const Tensor*>(params.begin(), params.end()),
            std::vector<std::string>(params.size()));
  for (int step = 0; step < 2500; ++step) {
    Tape tape;
    const auto leaves = brac.actor.make_leaves(tape);
    const Value loss = actor_loss(tape, brac, leaves, b, z_rows);
    tape.backward(loss);
    adam.step(params, grads_of(tape, leaves));
  }
  const std::vector<double> pi = brac.act(s, std::vector<double>{1.0, -0.5});
  CHECK(pi[0] == doctest::Approx(0.4).epsilon(1e-2));
  CHECK(pi[1] == doctest::Approx(-0.3).epsilon(1e-2));
}

TEST_CASE("with no cloning term the actor climbs the critic's value") {
  Rng rng(61);
  BRACConfig cfg = small_cfg();
  cfg.adaptive_bc = false;
  cfg.lambda_bc = 0.0;
  BRAC brac = BRAC::init(2, 2, 2, cfg, rng);
  Rng fill(13);
  const TransitionBatch b = random_batch(8, 2, 2, fill);
  const Tensor z_rows = random_z_rows(8, 2, fill);

  const auto mean_q = [&]() {
    const int w = 7;
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double* row = b.data.data() + i * w;
      const std::span<const double> s(row, 2);
      const std::span<const double> zi(z_rows.data() + i * 2, 2);
      sum += brac.q_value(s, brac.act(s, zi), zi);
    }
    return sum / 8.0;
  };

  const double before = mean_q();
  std::vector<Tensor*> params = ptrs_of(brac.actor);
  Adam adam(AdamConfig{1e-2, 0.9, 0.999, 1e-8},
            std::vector<const Tensor*>(params.begin(), params.end()),
            std::vector<std::string>(params.size()));
  for (int step = 0; step < 500; ++step) {
    Tape tape;
    const auto leaves = brac.actor.make_leaves(tape);
    const Value loss = actor_loss(tape, brac, leaves, b, z_rows);
    tape.backward(loss);
    adam.step(params, grads_of(tape, leaves));
  }
  CHECK(mean_q() > before);
}

TEST_CASE("soft update trails linearly and copies outright at rate one") {
  Rng rng(71);
  BRAC brac = BRAC::init(2, 2, 2, small_cfg(), rng);
  for (Tensor& p : brac.critic.params) {
    for (int64_t i = 0; i < p.numel(); ++i) p[i] += 0.1;
  }
  std::vector<Tensor> gap_before;
  for (size_t k = 0; k < brac.critic.params.size(); ++k) {
    Tensor g = brac.critic_target.params[k];
    for (int64_t i = 0; i < g.numel(); ++i) g[i] -= brac.critic.params[k][i];
    gap_before.push_back(std::move(g));
  }
  brac.cfg.polyak = 0.005;
  brac.soft_update();
  for (size_t k = 0; k < brac.critic.params.size(); ++k) {
    const Tensor& t = brac.critic_target.params[k];
    const Tensor& o = brac.critic.params[k];
    for (int64_t i = 0; i < t.numel(); ++i) {
      CHECK(t[i] - o[i] ==
            doctest::Approx(0.995 * gap_before[k][i]).epsilon(1e-12));
    }
  }
  brac.cfg.polyak = 1.0;
  brac.soft_update();
  for (size_t k = 0; k < brac.critic.params.size(); ++k) {
    const Tensor& t = brac.critic_target.params[k];
    const Tensor& o = brac.critic.params[k];
    for (int64_t i = 0; i < t.numel(); ++i) CHECK(t[i] == o[i]);
  }
}

TEST_CASE("the tape counts exactly the differentiable leaves") {
  Tape tape;
  const Tensor t = Tensor::matrix(2, 2);
  CHECK(tape.n_grad_leaves() == 0);
  const Value a = tape.leaf(t, true);
  const Value b = tape.leaf(t, true);
  tape.leaf(t, false);
  tape.constant(t);
  CHECK(tape.n_grad_leaves() == 2);
  tape.add(a, b);
  tape.mean_all(a);
  CHECK(tape.n_grad_leaves() == 2);
  const Value c = tape.leaf(Tensor::scalar(1.0), true);
  (void)c;
  CHECK(tape.n_grad_leaves() == 3);
}

TEST_CASE("meta configuration validation") {
  const std::vector<TaskSpec> tasks = opposite_point_tasks();
  const std::vector<Tier> tiers = {Tier::Expert};
  const OfflineDataset ds = collect_dataset(tasks, tiers, 2, 17);

  MetaConfig base;
  base.steps = 2;
  base.task_batch = 2;
  base.context_len = 10;
  base.brac.rl_batch = 8;
  CHECK_NOTHROW(base.validate(ds));

  MetaConfig c = base;
  c.task_batch = 3;
  CHECK_THROWS_AS(c.validate(ds), config_error);
  c = base;
  c.context_len = ds.episode_len + 1;
  CHECK_THROWS_AS(c.validate(ds), config_error);
  c = base;
  c.loss = LossKind::Corro;
  c.corro_negatives = 2;  // only one other task exists
  CHECK_THROWS_AS(c.validate(ds), config_error);
  c = base;
  c.weights.kl_weight = 0.1;  // no Gaussian head configured
  CHECK_THROWS_AS(c.validate(ds), config_error);
  c = base;
  c.encoder.gaussian_head = true;
  c.weights.kl_weight = 0.1;
  CHECK_NOTHROW(c.validate(ds));
  c = base;
  c.loss = LossKind::Focal;
  c.contexts_per_task = 1;  // metric loss needs same-task pairs
  CHECK_THROWS_AS(c.validate(ds), config_error);
  c = base;
  c.loss = LossKind::UnicornSS;
  c.weights.alpha = 0.0;
  c.contexts_per_task = 1;  // fine without the metric term
  CHECK_NOTHROW(c.validate(ds));
  c.weights.alpha = 0.5;
  CHECK_THROWS_AS(c.validate(ds), config_error);
  c = base;
  c.steps = 0;
  CHECK_THROWS_AS(c.validate(ds), config_error);

  CHECK(loss_kind_from_name("CSRO") == LossKind::Csro);
  CHECK(loss_kind_name(LossKind::UnicornSS) == "UNICORN-SS");
  CHECK_THROWS_AS(loss_kind_from_name("focal"), config_error);
}

TEST_CASE("meta training runs clean, detached, and on the eval schedule") {
  const std::vector<TaskSpec> tasks = opposite_point_tasks();
  const std::vector<Tier> tiers = {Tier::Expert};
  const OfflineDataset ds = collect_dataset(tasks, tiers, 3, 23);

  MetaConfig cfg;
  cfg.loss = LossKind::Focal;
  cfg.steps = 6;
  cfg.task_batch = 2;
  cfg.contexts_per_task = 2;
  cfg.context_len = 10;
  cfg.eval_interval = 3;
  cfg.encoder.embed_width = 16;
  cfg.encoder.post_width = 16;
  cfg.encoder.latent_dim = 3;
  cfg.brac = small_cfg();
  cfg.brac.rl_batch = 16;
  cfg.seed = 5;

  const MetaRunResult res = meta_train(cfg, ds);
  CHECK(res.detach_violations == 0);
  REQUIRE(res.metrics.size() == 2);
  CHECK(res.metrics[0].step == 3);
  CHECK(res.metrics[1].step == 6);
  for (const MetaMetricsRow& r : res.metrics) {
    CHECK(std::isfinite(r.repr_loss));
    CHECK(std::isfinite(r.actor_loss));
    CHECK(std::isfinite(r.critic_loss));
    CHECK(std::isfinite(r.iid_return));
    CHECK(std::isfinite(r.ood_return));
  }

  SUBCASE("final-step row is not duplicated when the interval lands on it") {
    MetaConfig c2 = cfg;
    c2.steps = 3;
    c2.eval_interval = 3;
    const MetaRunResult r2 = meta_train(c2, ds);
    REQUIRE(r2.metrics.size() == 1);
    CHECK(r2.metrics[0].step == 3);
  }
  SUBCASE("interval zero records only the final step") {
    MetaConfig c2 = cfg;
    c2.eval_interval = 0;
    const MetaRunResult r2 = meta_train(c2, ds);
    REQUIRE(r2.metrics.size() == 1);
    CHECK(r2.metrics[0].step == 6);
  }
  SUBCASE("an eval dataset of a different family is rejected") {
    const std::vector<TaskSpec> other =
        make_task_set(Family::PointMassParam, 2, 3);
    const OfflineDataset ev = collect_dataset(other, tiers, 1, 3);
    CHECK_THROWS_AS(meta_train(cfg, ds, &ev), config_error);
  }
}

TEST_CASE("identical seed and config reproduce the run bitwise") {
  const std::vector<TaskSpec> tasks = opposite_point_tasks();
  const std::vector<Tier> tiers = {Tier::Expert, Tier::Random};
  const OfflineDataset ds = collect_dataset(tasks, tiers, 2, 29);

  MetaConfig cfg;
  cfg.loss = LossKind::UnicornSS;
  cfg.weights.alpha = 0.5;
  cfg.weights.kl_weight = 0.01;
  cfg.encoder.gaussian_head = true;
  cfg.encoder.embed_width = 16;
  cfg.encoder.post_width = 16;
  cfg.encoder.latent_dim = 3;
  cfg.ensemble_decoders = 2;
  cfg.decoder_width = 16;
  cfg.steps = 5;
  cfg.task_batch = 2;
  cfg.context_len = 8;
  cfg.eval_interval = 2;
  cfg.brac = small_cfg();
  cfg.brac.rl_batch = 16;
  cfg.seed = 99;

  const MetaRunResult r1 = meta_train(cfg, ds);
  const MetaRunResult r2 = meta_train(cfg, ds);
  REQUIRE(r1.metrics.size() == r2.metrics.size());
  for (size_t i = 0; i < r1.metrics.size(); ++i) {
    CHECK(r1.metrics[i].step == r2.metrics[i].step);
    CHECK(r1.metrics[i].repr_loss == r2.metrics[i].repr_loss);
    CHECK(r1.metrics[i].actor_loss == r2.metrics[i].actor_loss);
    CHECK(r1.metrics[i].critic_loss == r2.metrics[i].critic_loss);
    CHECK(r1.metrics[i].iid_return == r2.metrics[i].iid_return);
    CHECK(r1.metrics[i].ood_return == r2.metrics[i].ood_return);
  }
  const std::vector<NamedTensor> p1 = named_params(r1.model);
  const std::vector<NamedTensor> p2 = named_params(r2.model);
  REQUIRE(p1.size() == p2.size());
  CHECK(p1.size() > 10);  // encoder, two decoders, actor, critic, target
  for (size_t i = 0; i < p1.size(); ++i) {
    REQUIRE(p1[i].name == p2[i].name);
    REQUIRE(p1[i].t.numel() == p2[i].t.numel());
    for (int64_t j = 0; j < p1[i].t.numel(); ++j) {
      CHECK(p1[i].t[j] == p2[i].t[j]);
    }
  }
}

TEST_CASE("zero learning rates leave every parameter at initialization") {
  const std::vector<TaskSpec> tasks = opposite_point_tasks();
  const std::vector<Tier> tiers = {Tier::Expert};
  const OfflineDataset ds = collect_dataset(tasks, tiers, 2, 31);

  MetaConfig cfg;
  cfg.loss = LossKind::Focal;
  cfg.task_batch = 2;
  cfg.context_len = 8;
  cfg.eval_interval = 0;
  cfg.encoder.embed_width = 16;
  cfg.encoder.post_width = 16;
  cfg.lr_encoder = 0.0;
  cfg.lr_decoder = 0.0;
  cfg.lr_actor = 0.0;
  cfg.lr_critic = 0.0;
  cfg.brac = small_cfg();
  cfg.brac.rl_batch = 16;
  cfg.brac.polyak = 1.0;  // target stays an exact copy of the frozen critic
  cfg.seed = 7;

  cfg.steps = 1;
  const std::vector<NamedTensor> after1 = named_params(meta_train(cfg, ds).model);
  cfg.steps = 4;
  const std::vector<NamedTensor> after4 = named_params(meta_train(cfg, ds).model);
  REQUIRE(after1.size() == after4.size());
  for (size_t i = 0; i < after1.size(); ++i) {
    REQUIRE(after1[i].name == after4[i].name);
    for (int64_t j = 0; j < after1[i].t.numel(); ++j) {
      CHECK(after1[i].t[j] == after4[i].t[j]);
    }
  }
}

TEST_CASE("two opposite point tasks train to near-expert return") {
  const std::vector<TaskSpec> tasks = opposite_point_tasks();
  const std::vector<Tier> tiers = {Tier::Expert};
  const OfflineDataset ds = collect_dataset(tasks, tiers, 10, 37);
  const double expert_return =
      0.5 * (dataset_mean_return(ds, 0) + dataset_mean_return(ds, 1));
  REQUIRE(expert_return > 40.0);

  MetaConfig cfg;
  cfg.loss = LossKind::UnicornSup;
  cfg.steps = 5000;
  cfg.task_batch = 2;
  cfg.contexts_per_task = 2;
  cfg.context_len = 20;
  cfg.eval_interval = 0;
  cfg.encoder.latent_dim = 3;
  cfg.lr_actor = 1e-3;
  cfg.lr_critic = 1e-3;
  cfg.brac.rl_batch = 128;
  cfg.seed = 12;

  const MetaRunResult res = meta_train(cfg, ds);
  REQUIRE(res.metrics.size() == 1);
  const double iid = res.metrics.back().iid_return;
  MESSAGE("expert return ", expert_return, ", learned IID return ", iid);
  CHECK(iid >= 0.8 * expert_return);

  SUBCASE("meta-test is deterministic and the embedding carries the task") {
    Rng r1(77), r2(77);
    const double m1 =
        meta_test(res.model, ds, 0, ContextMode::IID, std::nullopt, r1);
    const double m2 =
        meta_test(res.model, ds, 0, ContextMode::IID, std::nullopt, r2);
    CHECK(m1 == m2);

    Rng rc(123);
    const ContextSegment seg0 = sample_context(ds, 0, ds.episode_len,
                                               ContextMode::IID, std::nullopt, rc);
    const ContextSegment seg1 = sample_context(ds, 1, ds.episode_len,
                                               ContextMode::IID, std::nullopt, rc);
    const std::vector<double> z0 = embed_context(res.model, ds, seg0);
    const std::vector<double> z1 = embed_context(res.model, ds, seg1);
    const double own = policy_return(res.model.brac, ds.task_of(0), z0);
    const double crossed = policy_return(res.model.brac, ds.task_of(0), z1);
    MESSAGE("own-context return ", own, ", crossed-context return ", crossed);
    CHECK(own > crossed);
  }
  SUBCASE("a mismatched family is rejected at meta-test") {
    const std::vector<TaskSpec> other =
        make_task_set(Family::PointMassParam, 2, 3);
    const OfflineDataset ev = collect_dataset(other, tiers, 1, 3);
    Rng r(1);
    CHECK_THROWS_AS(
        meta_test(res.model, ev, 0, ContextMode::IID, std::nullopt, r),
        config_error);
  }
}
