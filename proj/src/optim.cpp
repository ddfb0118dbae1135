#include "comrl/optim.hpp"

#include <cmath>

#include "comrl/common.hpp"

namespace comrl {

Adam::Adam(AdamConfig cfg, std::span<const Tensor* const> params,
           std::vector<std::string> names)
    : cfg_(cfg), names_(std::move(names)) {
  COMRL_CHECK(params.size() == names_.size(), "adam: name/param count mismatch");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Tensor* p : params) {
    m_.emplace_back(p->shape());
    v_.emplace_back(p->shape());
  }
}

void Adam::step(std::span<Tensor* const> params,
                std::span<const Tensor* const> grads) {
  COMRL_CHECK(params.size() == m_.size() && grads.size() == m_.size(),
              "adam: tensor count mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    COMRL_CHECK(p.same_shape(m), "adam: parameter shape changed");
    const Tensor* g = grads[k];
    for (int64_t i = 0; i < p.numel(); ++i) {
      const double gi = g ? (*g)[i] : 0.0;
      if (!std::isfinite(gi)) {
        throw numeric_error("adam: non-finite gradient in tensor " + names_[k]);
      }
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      p[i] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
    }
  }
}

GradCheckReport grad_check(const GraphBuilder& f, std::span<Tensor* const> params,
                           double step, double tol) {
  COMRL_REQUIRE(step > 0.0 && step <= 1e-2, "grad_check: step must be in (0, 1e-2]");

  auto eval_scalar = [&]() {
    Tape tape;
    std::vector<Value> leaves;
    leaves.reserve(params.size());
    for (Tensor* p : params) leaves.push_back(tape.leaf(*p, true));
    const Value root = f(tape, leaves);
    return tape.scalar_value(root);
  };

  // Analytic pass.
  Tape tape;
  std::vector<Value> leaves;
  leaves.reserve(params.size());
  for (Tensor* p : params) leaves.push_back(tape.leaf(*p, true));
  const Value root = f(tape, leaves);
  const double v0 = tape.scalar_value(root);
  tape.backward(root);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Value l : leaves) {
    analytic.push_back(tape.has_grad(l) ? tape.grad(l) : Tensor(tape.value(l).shape()));
  }

  // Two unperturbed forwards must agree bitwise.
  const double v1 = eval_scalar();
  if (v0 != v1) {
    throw numeric_error("grad_check: builder is non-deterministic");
  }

  GradCheckReport rep;
  rep.max_rel_err.assign(params.size(), 0.0);
  rep.exceeded.assign(params.size(), false);
  constexpr double kFloor = 1e-6;
  for (size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    for (int64_t i = 0; i < p.numel(); ++i) {
      const double saved = p[i];
      p[i] = saved + step;
      const double fp = eval_scalar();
      p[i] = saved - step;
      const double fm = eval_scalar();
      p[i] = saved;
      const double fd = (fp - fm) / (2.0 * step);
      const double a = analytic[k][i];
      const double denom = std::max(std::max(std::abs(a), std::abs(fd)), kFloor);
      const double rel = std::abs(a - fd) / denom;
      rep.max_rel_err[k] = std::max(rep.max_rel_err[k], rel);
    }
    rep.worst = std::max(rep.worst, rep.max_rel_err[k]);
    rep.exceeded[k] = rep.max_rel_err[k] > tol;
    if (rep.exceeded[k]) rep.pass = false;
  }
  return rep;
}

}  // namespace comrl
