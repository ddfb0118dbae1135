#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "comrl/tape.hpp"
#include "comrl/tensor.hpp"

namespace comrl {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment first-order optimizer. One instance owns the moment state
// for a fixed list of parameter tensors; names are used in diagnostics.
class Adam {
 public:
  Adam(AdamConfig cfg, std::span<const Tensor* const> params,
       std::vector<std::string> names);

  // Applies one update. grads[i] pairs with params[i] of the constructor;
  // a null grad entry means "no gradient this step" (tensor untouched except
  // for moment decay, matching a zero gradient).
  void step(std::span<Tensor* const> params, std::span<const Tensor* const> grads);

  int64_t step_count() const { return t_; }
  double lr() const { return cfg_.lr; }

 private:
  AdamConfig cfg_;
  int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
  std::vector<std::string> names_;
};

// Builds a loss graph on the given tape from leaves that pair positionally
// with the checked parameter tensors, returning the scalar root.
using GraphBuilder = std::function<Value(Tape&, std::span<const Value>)>;

struct GradCheckReport {
  // Per parameter tensor: maximum relative error between analytic gradient
  // and central finite differences, and whether it exceeded the tolerance.
  std::vector<double> max_rel_err;
  std::vector<bool> exceeded;
  double worst = 0.0;
  bool pass = true;
};

// Central-difference gradient verification. For each parameter element,
// perturbs by +-step, re-evaluates the graph, and compares the analytic
// gradient against (f(p+step) - f(p-step)) / (2 step). Relative error uses a
// small floor so near-zero gradients are compared absolutely. A
// non-deterministic builder (two unperturbed forwards that disagree bitwise)
// is rejected.
GradCheckReport grad_check(const GraphBuilder& f, std::span<Tensor* const> params,
                           double step, double tol);

}  // namespace comrl
