#include "comrl/brac.hpp"

#include <array>
#include <cmath>

namespace comrl {

namespace {

// Splits the flat transition rows of a batch into the four component
// matrices consumed by the loss graphs.
struct BatchViews {
  Tensor s, a, r, s_next;
  int b = 0;
};

BatchViews split_batch(const TransitionBatch& batch, int dim_s, int dim_a) {
  const int b = batch.batch_size;
  const int w = 2 * dim_s + dim_a + 1;
  COMRL_CHECK(static_cast<int64_t>(batch.data.size()) ==
                  static_cast<int64_t>(b) * w,
              "transition batch rows do not match its dims");
  BatchViews v;
  v.b = b;
  v.s = Tensor::matrix(b, dim_s);
  v.a = Tensor::matrix(b, dim_a);
  v.r = Tensor::matrix(b, 1);
  v.s_next = Tensor::matrix(b, dim_s);
  for (int i = 0; i < b; ++i) {
    const double* row = batch.data.data() + static_cast<int64_t>(i) * w;
    for (int j = 0; j < dim_s; ++j) v.s.data()[i * dim_s + j] = row[j];
    for (int j = 0; j < dim_a; ++j) v.a.data()[i * dim_a + j] = row[dim_s + j];
    v.r.data()[i] = row[dim_s + dim_a];
    for (int j = 0; j < dim_s; ++j) {
      v.s_next.data()[i * dim_s + j] = row[dim_s + dim_a + 1 + j];
    }
  }
  return v;
}

Tensor hcat(const Tensor& a, const Tensor& b) {
  COMRL_CHECK(a.rows() == b.rows(), "hcat: row mismatch");
  Tensor out = Tensor::matrix(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double* o = out.data() + static_cast<int64_t>(i) * out.cols();
    const double* pa = a.data() + static_cast<int64_t>(i) * a.cols();
    const double* pb = b.data() + static_cast<int64_t>(i) * b.cols();
    for (int j = 0; j < a.cols(); ++j) o[j] = pa[j];
    for (int j = 0; j < b.cols(); ++j) o[a.cols() + j] = pb[j];
  }
  return out;
}

std::vector<Value> constant_leaves(Tape& tape, const Mlp& net) {
  std::vector<Value> out;
  out.reserve(net.params.size());
  for (const Tensor& p : net.params) out.push_back(tape.constant(p));
  return out;
}

void check_z_rows(const BRAC& brac, const Tensor& z_rows, int b) {
  COMRL_CHECK(z_rows.rank() == 2 && z_rows.rows() == b &&
                  z_rows.cols() == brac.dim_z,
              "z rows must be [batch, dim_z]");
}

}  // namespace

void BRACConfig::validate() const {
  COMRL_REQUIRE(gamma >= 0.0 && gamma < 1.0, "discount must lie in [0,1)");
  COMRL_REQUIRE(polyak > 0.0 && polyak <= 1.0,
                "soft-update rate must lie in (0,1]");
  COMRL_REQUIRE(bc_alpha >= 0.0, "bc_alpha must be non-negative");
  COMRL_REQUIRE(lambda_bc >= 0.0, "lambda_bc must be non-negative");
  COMRL_REQUIRE(rl_batch >= 1, "rl_batch must be positive");
  for (int w : actor_hidden) COMRL_REQUIRE(w >= 1, "actor width must be positive");
  for (int w : critic_hidden) {
    COMRL_REQUIRE(w >= 1, "critic width must be positive");
  }
}

BRAC BRAC::init(int dim_s, int dim_a, int dim_z, const BRACConfig& cfg,
                Rng& rng) {
  cfg.validate();
  COMRL_REQUIRE(dim_s >= 1 && dim_a >= 1 && dim_z >= 1,
                "actor-critic dims must be positive");
  BRAC b;
  b.cfg = cfg;
  b.dim_s = dim_s;
  b.dim_a = dim_a;
  b.dim_z = dim_z;
  MlpConfig ac;
  ac.in = dim_s + dim_z;
  ac.hidden = cfg.actor_hidden;
  ac.out = dim_a;
  ac.out_act = OutAct::Tanh;
  b.actor = Mlp::init(ac, rng);
  MlpConfig cc;
  cc.in = dim_s + dim_a + dim_z;
  cc.hidden = cfg.critic_hidden;
  cc.out = 1;
  b.critic = Mlp::init(cc, rng);
  b.critic_target = b.critic;
  return b;
}

std::vector<double> BRAC::act(std::span<const double> s,
                              std::span<const double> z) const {
  COMRL_CHECK(static_cast<int>(s.size()) == dim_s, "act: wrong state dim");
  COMRL_CHECK(static_cast<int>(z.size()) == dim_z, "act: wrong latent dim");
  Tensor x = Tensor::matrix(1, dim_s + dim_z);
  for (int j = 0; j < dim_s; ++j) x.data()[j] = s[j];
  for (int j = 0; j < dim_z; ++j) x.data()[dim_s + j] = z[j];
  const Tensor out = actor.eval(x);
  return {out.data(), out.data() + dim_a};
}

double BRAC::q_value(std::span<const double> s, std::span<const double> a,
                     std::span<const double> z) const {
  COMRL_CHECK(static_cast<int>(s.size()) == dim_s, "q_value: wrong state dim");
  COMRL_CHECK(static_cast<int>(a.size()) == dim_a, "q_value: wrong action dim");
  COMRL_CHECK(static_cast<int>(z.size()) == dim_z, "q_value: wrong latent dim");
  Tensor x = Tensor::matrix(1, dim_s + dim_a + dim_z);
  int j = 0;
  for (double v : s) x.data()[j++] = v;
  for (double v : a) x.data()[j++] = v;
  for (double v : z) x.data()[j++] = v;
  return critic.eval(x).data()[0];
}

void BRAC::soft_update() {
  const double rho = cfg.polyak;
  for (size_t p = 0; p < critic.params.size(); ++p) {
    Tensor& t = critic_target.params[p];
    const Tensor& o = critic.params[p];
    for (int64_t i = 0; i < t.numel(); ++i) {
      t[i] = (1.0 - rho) * t[i] + rho * o[i];
    }
  }
}

Tensor tile_rows(std::span<const double> row, int n) {
  COMRL_CHECK(n >= 1 && !row.empty(), "tile_rows: empty input");
  const int k = static_cast<int>(row.size());
  Tensor out = Tensor::matrix(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) out.data()[i * k + j] = row[j];
  }
  return out;
}

Value critic_loss(Tape& tape, const BRAC& brac,
                  std::span<const Value> critic_leaves,
                  const TransitionBatch& batch, const Tensor& z_rows) {
  const BatchViews v = split_batch(batch, brac.dim_s, brac.dim_a);
  check_z_rows(brac, z_rows, v.b);
  COMRL_CHECK(static_cast<int>(batch.terminal.size()) == v.b,
              "batch lacks terminal flags");

  // Bootstrap targets, fully off-tape: the target critic and the actor are
  // data here, not differentiable inputs.
  const Tensor a_next = brac.actor.eval(hcat(v.s_next, z_rows));
  const Tensor q_next = brac.critic_target.eval(hcat(hcat(v.s_next, a_next), z_rows));
  Tensor targets = Tensor::matrix(v.b, 1);
  for (int i = 0; i < v.b; ++i) {
    const double boot = batch.terminal[i] ? 0.0 : q_next.data()[i];
    targets[i] = v.r.data()[i] + brac.cfg.gamma * boot;
  }

  Value x = tape.constant(hcat(hcat(v.s, v.a), z_rows));
  Value q = brac.critic.forward(tape, x, critic_leaves);
  Value diff = tape.sub(q, tape.constant(std::move(targets)));
  return tape.mean_all(tape.mul(diff, diff));
}

double bc_weight(const BRAC& brac, const TransitionBatch& batch,
                 const Tensor& z_rows) {
  if (!brac.cfg.adaptive_bc) return brac.cfg.lambda_bc;
  const BatchViews v = split_batch(batch, brac.dim_s, brac.dim_a);
  check_z_rows(brac, z_rows, v.b);
  const Tensor pi = brac.actor.eval(hcat(v.s, z_rows));
  const Tensor q = brac.critic.eval(hcat(hcat(v.s, pi), z_rows));
  double sum = 0.0;
  for (int i = 0; i < v.b; ++i) sum += std::abs(q.data()[i]);
  return brac.cfg.bc_alpha * (sum / static_cast<double>(v.b));
}

Value actor_loss(Tape& tape, const BRAC& brac,
                 std::span<const Value> actor_leaves,
                 const TransitionBatch& batch, const Tensor& z_rows) {
  const BatchViews v = split_batch(batch, brac.dim_s, brac.dim_a);
  check_z_rows(brac, z_rows, v.b);
  const double lambda = bc_weight(brac, batch, z_rows);

  Value s_const = tape.constant(v.s);
  Value z_const = tape.constant(z_rows);
  Value pi = brac.actor.forward(
      tape, tape.concat_cols(std::array<Value, 2>{s_const, z_const}),
      actor_leaves);
  const std::vector<Value> critic_const = constant_leaves(tape, brac.critic);
  Value q = brac.critic.forward(
      tape, tape.concat_cols(std::array<Value, 3>{s_const, pi, z_const}),
      critic_const);
  Value d = tape.sub(pi, tape.constant(v.a));
  Value bc = tape.row_sum(tape.mul(d, d));
  return tape.mean_all(tape.add(tape.neg(q), tape.scale(bc, lambda)));
}

}  // namespace comrl
