#pragma once

#include <span>
#include <string>
#include <vector>

#include "comrl/rng.hpp"
#include "comrl/tape.hpp"
#include "comrl/tensor.hpp"

namespace comrl {

enum class Act : uint8_t { Relu, Tanh };
enum class OutAct : uint8_t { Linear, Tanh, Relu };

struct MlpConfig {
  int in = 0;
  std::vector<int> hidden;
  int out = 0;
  Act act = Act::Relu;
  // Tanh squashes actor outputs into (-1,1); Relu is used by the
  // per-transition context feature map.
  OutAct out_act = OutAct::Linear;
};

// Fully connected network. Parameters are stored as W0, b0, W1, b1, ...
// Weights use Xavier-uniform init (+-sqrt(6/(fan_in+fan_out))), biases zero.
struct Mlp {
  MlpConfig cfg;
  std::vector<Tensor> params;

  static Mlp init(const MlpConfig& cfg, Rng& rng);

  int n_affine() const { return static_cast<int>(params.size()) / 2; }
  int64_t n_params() const;

  // Untaped forward. Shares kernels with the taped path, so for equal inputs
  // and parameters the two produce bit-identical outputs.
  Tensor eval(const Tensor& x) const;

  // Taped forward through leaf handles previously created for this net's
  // parameters (leaves[i] corresponds to params[i]).
  Value forward(Tape& tape, Value x, std::span<const Value> leaves) const;

  // Creates one differentiable leaf per parameter tensor, in params order.
  std::vector<Value> make_leaves(Tape& tape) const;
};

// Named parameter tensors, the unit of checkpoint IO.
struct NamedTensor {
  std::string name;
  Tensor t;
};

// Appends an Mlp's parameters as "<prefix>.W0", "<prefix>.b0", ...
void append_named(std::vector<NamedTensor>& out, const std::string& prefix,
                  const Mlp& mlp);
// Restores parameters previously appended under this prefix.
void restore_named(const std::vector<NamedTensor>& in, const std::string& prefix,
                   Mlp& mlp);

// Binary checkpoint file. Layout: magic "CMRLW001", then per tensor: name
// length (u32 LE), UTF-8 name, rank (u32 LE), extents (u32 LE each), payload
// (f64 LE). Tensors are written in order and read back until end of file.
void save_weights(const std::string& path, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> load_weights(const std::string& path);

}  // namespace comrl
