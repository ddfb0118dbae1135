#include "comrl/mlp.hpp"

#include <cmath>

namespace comrl {

Mlp Mlp::init(const MlpConfig& cfg, Rng& rng) {
  COMRL_CHECK(cfg.in > 0 && cfg.out > 0, "mlp: dims must be positive");
  Mlp m;
  m.cfg = cfg;
  std::vector<int> widths;
  widths.push_back(cfg.in);
  for (int h : cfg.hidden) {
    COMRL_CHECK(h > 0, "mlp: hidden width must be positive");
    widths.push_back(h);
  }
  widths.push_back(cfg.out);
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l], fan_out = widths[l + 1];
    Tensor w = Tensor::matrix(fan_in, fan_out);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int64_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-limit, limit);
    m.params.push_back(std::move(w));
    m.params.push_back(Tensor({fan_out}));
  }
  return m;
}

int64_t Mlp::n_params() const {
  int64_t n = 0;
  for (const Tensor& t : params) n += t.numel();
  return n;
}

Tensor Mlp::eval(const Tensor& x) const {
  Tensor h = x, next;
  const int layers = n_affine();
  for (int l = 0; l < layers; ++l) {
    affine_kernel(h, params[2 * l], params[2 * l + 1], next);
    const bool last = (l == layers - 1);
    if (!last) {
      if (cfg.act == Act::Relu) {
        relu_kernel(next, h);
      } else {
        tanh_kernel(next, h);
      }
    } else if (cfg.out_act == OutAct::Tanh) {
      tanh_kernel(next, h);
    } else if (cfg.out_act == OutAct::Relu) {
      relu_kernel(next, h);
    } else {
      h = std::move(next);
    }
  }
  return h;
}

Value Tape_forward_impl(Tape& tape, const Mlp& m, Value x,
                        std::span<const Value> leaves) {
  COMRL_CHECK(static_cast<int>(leaves.size()) == static_cast<int>(m.params.size()),
              "mlp forward: leaf count mismatch");
  Value h = x;
  const int layers = m.n_affine();
  for (int l = 0; l < layers; ++l) {
    h = tape.affine(h, leaves[2 * l], leaves[2 * l + 1]);
    const bool last = (l == layers - 1);
    if (!last) {
      h = (m.cfg.act == Act::Relu) ? tape.relu(h) : tape.tanh(h);
    } else if (m.cfg.out_act == OutAct::Tanh) {
      h = tape.tanh(h);
    } else if (m.cfg.out_act == OutAct::Relu) {
      h = tape.relu(h);
    }
  }
  return h;
}

Value Mlp::forward(Tape& tape, Value x, std::span<const Value> leaves) const {
  return Tape_forward_impl(tape, *this, x, leaves);
}

std::vector<Value> Mlp::make_leaves(Tape& tape) const {
  std::vector<Value> out;
  out.reserve(params.size());
  for (const Tensor& t : params) out.push_back(tape.leaf(t, true));
  return out;
}

void append_named(std::vector<NamedTensor>& out, const std::string& prefix,
                  const Mlp& mlp) {
  for (int l = 0; l < mlp.n_affine(); ++l) {
    out.push_back({prefix + ".W" + std::to_string(l), mlp.params[2 * l]});
    out.push_back({prefix + ".b" + std::to_string(l), mlp.params[2 * l + 1]});
  }
}

void restore_named(const std::vector<NamedTensor>& in, const std::string& prefix,
                   Mlp& mlp) {
  for (int l = 0; l < mlp.n_affine(); ++l) {
    const std::string wn = prefix + ".W" + std::to_string(l);
    const std::string bn = prefix + ".b" + std::to_string(l);
    bool got_w = false, got_b = false;
    for (const NamedTensor& nt : in) {
      if (nt.name == wn) {
        COMRL_CHECK(nt.t.same_shape(mlp.params[2 * l]), "restore: shape mismatch " + wn);
        mlp.params[2 * l] = nt.t;
        got_w = true;
      } else if (nt.name == bn) {
        COMRL_CHECK(nt.t.same_shape(mlp.params[2 * l + 1]), "restore: shape mismatch " + bn);
        mlp.params[2 * l + 1] = nt.t;
        got_b = true;
      }
    }
    COMRL_CHECK(got_w && got_b, "restore: missing tensor for " + prefix);
  }
}

}  // namespace comrl
