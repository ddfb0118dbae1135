#pragma once

#include <span>
#include <string>
#include <vector>

#include "comrl/dataset.hpp"
#include "comrl/mlp.hpp"

namespace comrl {

struct EncoderConfig {
  int input_dim = 0;     // transition row width: dim_s + dim_a + 1 + dim_s
  int embed_width = 64;  // per-transition feature width
  int post_width = 64;   // hidden width of the post-pool projector
  int latent_dim = 5;
  // When true the head emits (mean, log-variance) and training can draw
  // reparameterized samples; evaluation always uses the mean.
  bool gaussian_head = false;

  void validate() const;
};

// Permutation-invariant context encoder: a per-transition feature map phi
// (affine + relu), an exact column-mean pool over the context, and a
// projector rho down to the latent. The pool uses error-free summation, so
// encoding is bitwise invariant to context ordering and a context of one
// transition repeated n times encodes exactly like the single transition.
struct Encoder {
  EncoderConfig cfg;
  Mlp phi;  // input_dim -> embed_width, relu output
  Mlp rho;  // embed_width -> post_width -> head_dim

  static Encoder init(const EncoderConfig& cfg, Rng& rng);

  int head_dim() const {
    return cfg.gaussian_head ? 2 * cfg.latent_dim : cfg.latent_dim;
  }
  int n_leaves() const {
    return static_cast<int>(phi.params.size() + rho.params.size());
  }

  std::vector<Tensor*> param_ptrs();
  std::vector<const Tensor*> param_ptrs() const;
  std::vector<std::string> param_names(const std::string& prefix) const;

  // One differentiable leaf per parameter, phi's then rho's.
  std::vector<Value> make_leaves(Tape& tape) const;
};

// Latent description of one context.
struct Latent {
  std::vector<double> z;
  int task_id = -1;
  ContextMode origin = ContextMode::IID;
};

// Taped encode of a batch of context matrices (each [n_i, input_dim]) into
// one row per context: [B, latent_dim], or [B, 2*latent_dim] with the
// Gaussian head (means in the first half, log-variances in the second).
// leaves pairs with phi params then rho params, as from make_leaves.
Value encode_batch(Tape& tape, const Encoder& enc, std::span<const Value> leaves,
                   std::span<const Tensor> contexts);

// Mean / log-variance halves of a Gaussian-head output.
struct GaussianHead {
  Value mean, log_var;
};
GaussianHead split_gaussian(Tape& tape, const Encoder& enc, Value head_out);

// Reparameterized draw mean + exp(log_var/2) * eps, with eps sampled from
// rng once at graph-build time (standard normal, fixed on the tape).
Value reparam_sample(Tape& tape, const Encoder& enc, const GaussianHead& head,
                     Rng& rng);

// Untaped encode of a single context; the Gaussian head yields its mean.
// Shares forward kernels with the taped path, so for equal parameters and
// context the two agree bitwise.
std::vector<double> encode_eval(const Encoder& enc, const Tensor& context);

// encode_eval plus source metadata, with a finiteness check on z.
Latent make_latent(const Encoder& enc, const OfflineDataset& ds,
                   const ContextSegment& seg);

}  // namespace comrl
