#include "comrl/encoder.hpp"

#include <cmath>

#include "comrl/common.hpp"

namespace comrl {

void EncoderConfig::validate() const {
  COMRL_REQUIRE(input_dim >= 1, "encoder input_dim must be positive");
  COMRL_REQUIRE(embed_width >= 1, "encoder embed_width must be positive");
  COMRL_REQUIRE(post_width >= 1, "encoder post_width must be positive");
  COMRL_REQUIRE(latent_dim >= 1, "encoder latent_dim must be positive");
}

Encoder Encoder::init(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  Encoder enc;
  enc.cfg = cfg;
  MlpConfig phi_cfg;
  phi_cfg.in = cfg.input_dim;
  phi_cfg.out = cfg.embed_width;
  phi_cfg.out_act = OutAct::Relu;
  enc.phi = Mlp::init(phi_cfg, rng);
  MlpConfig rho_cfg;
  rho_cfg.in = cfg.embed_width;
  rho_cfg.hidden = {cfg.post_width};
  rho_cfg.out = enc.head_dim();
  enc.rho = Mlp::init(rho_cfg, rng);
  return enc;
}

std::vector<Tensor*> Encoder::param_ptrs() {
  std::vector<Tensor*> out;
  for (auto& t : phi.params) out.push_back(&t);
  for (auto& t : rho.params) out.push_back(&t);
  return out;
}

std::vector<const Tensor*> Encoder::param_ptrs() const {
  std::vector<const Tensor*> out;
  for (const auto& t : phi.params) out.push_back(&t);
  for (const auto& t : rho.params) out.push_back(&t);
  return out;
}

std::vector<std::string> Encoder::param_names(const std::string& prefix) const {
  std::vector<std::string> out;
  for (int i = 0; i < phi.n_affine(); ++i) {
    out.push_back(prefix + ".phi.W" + std::to_string(i));
    out.push_back(prefix + ".phi.b" + std::to_string(i));
  }
  for (int i = 0; i < rho.n_affine(); ++i) {
    out.push_back(prefix + ".rho.W" + std::to_string(i));
    out.push_back(prefix + ".rho.b" + std::to_string(i));
  }
  return out;
}

std::vector<Value> Encoder::make_leaves(Tape& tape) const {
  std::vector<Value> leaves = phi.make_leaves(tape);
  std::vector<Value> rho_leaves = rho.make_leaves(tape);
  leaves.insert(leaves.end(), rho_leaves.begin(), rho_leaves.end());
  return leaves;
}

namespace {

void check_context_dims(const Encoder& enc, const Tensor& c) {
  COMRL_REQUIRE(c.rank() == 2 && c.rows() >= 1,
                "context must be a non-empty transition matrix");
  COMRL_REQUIRE(c.cols() == enc.cfg.input_dim,
                "context row width does not match the encoder input dim");
}

}  // namespace

Value encode_batch(Tape& tape, const Encoder& enc, std::span<const Value> leaves,
                   std::span<const Tensor> contexts) {
  COMRL_REQUIRE(!contexts.empty(), "encode_batch needs at least one context");
  COMRL_CHECK(static_cast<int>(leaves.size()) == enc.n_leaves(),
              "encode_batch: leaf count mismatch");
  const auto phi_leaves = leaves.subspan(0, enc.phi.params.size());
  const auto rho_leaves = leaves.subspan(enc.phi.params.size());
  std::vector<Value> pooled;
  pooled.reserve(contexts.size());
  for (const Tensor& c : contexts) {
    check_context_dims(enc, c);
    Value x = tape.constant(c);
    Value h = enc.phi.forward(tape, x, phi_leaves);
    pooled.push_back(tape.col_mean(h));
  }
  Value stacked = tape.stack_rows(pooled);
  return enc.rho.forward(tape, stacked, rho_leaves);
}

GaussianHead split_gaussian(Tape& tape, const Encoder& enc, Value head_out) {
  COMRL_REQUIRE(enc.cfg.gaussian_head, "encoder head is deterministic");
  const int d = enc.cfg.latent_dim;
  COMRL_CHECK(tape.value(head_out).cols() == 2 * d,
              "split_gaussian: unexpected head width");
  GaussianHead h;
  h.mean = tape.slice_cols(head_out, 0, d);
  h.log_var = tape.slice_cols(head_out, d, 2 * d);
  return h;
}

Value reparam_sample(Tape& tape, const Encoder& enc, const GaussianHead& head,
                     Rng& rng) {
  COMRL_REQUIRE(enc.cfg.gaussian_head, "encoder head is deterministic");
  const Tensor& mu = tape.value(head.mean);
  Tensor eps = Tensor::matrix(mu.rows(), mu.cols());
  for (int64_t i = 0; i < eps.numel(); ++i) eps[i] = rng.normal();
  Value std_dev = tape.exp(tape.scale(head.log_var, 0.5));
  return tape.add(head.mean, tape.mul(std_dev, tape.constant(std::move(eps))));
}

std::vector<double> encode_eval(const Encoder& enc, const Tensor& context) {
  check_context_dims(enc, context);
  Tensor h = enc.phi.eval(context);
  Tensor pooled;
  col_mean_kernel(h, pooled);
  Tensor out = enc.rho.eval(pooled);
  std::vector<double> z(out.data(), out.data() + enc.cfg.latent_dim);
  for (double v : z)
    COMRL_NUMERIC(std::isfinite(v), "encode produced a non-finite latent");
  return z;
}

Latent make_latent(const Encoder& enc, const OfflineDataset& ds,
                   const ContextSegment& seg) {
  Latent l;
  l.z = encode_eval(enc, context_matrix(ds, seg));
  l.task_id = seg.task_id;
  l.origin = seg.origin;
  return l;
}

}  // namespace comrl
