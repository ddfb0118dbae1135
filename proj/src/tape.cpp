#include "comrl/tape.hpp"

#include <algorithm>
#include <cmath>

namespace comrl {

void affine_kernel(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out) {
  COMRL_CHECK(x.cols() == w.rows(), "affine: x cols must equal w rows");
  COMRL_CHECK(b.numel() == w.cols(), "affine: bias length must equal w cols");
  const int n = x.rows(), in = x.cols(), o = w.cols();
  out = Tensor::matrix(n, o);
  // Row i's outputs depend only on row i's values, with a fixed fma order
  // over the inputs: y_j = fma(x_K-1, w_K-1j, ... fma(x_0, w_0j, b_j)). Rows
  // therefore encode identically wherever they appear in the batch, which is
  // what makes mean-pooled context encodings permutation-invariant bit for
  // bit. The inner loop vectorizes across independent output columns.
  for (int i = 0; i < n; ++i) {
    double* orow = out.data() + static_cast<int64_t>(i) * o;
    for (int j = 0; j < o; ++j) orow[j] = b[j];
    const double* xrow = x.data() + static_cast<int64_t>(i) * in;
    for (int k = 0; k < in; ++k) {
      const double xk = xrow[k];
      const double* wrow = w.data() + static_cast<int64_t>(k) * o;
      for (int j = 0; j < o; ++j) orow[j] = std::fma(xk, wrow[j], orow[j]);
    }
  }
}

void relu_kernel(const Tensor& x, Tensor& out) {
  out = Tensor(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void tanh_kernel(const Tensor& x, Tensor& out) {
  out = Tensor(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) out[i] = std::tanh(x[i]);
}

void log_softmax_kernel(const Tensor& x, Tensor& out) {
  out = Tensor(x.shape());
  const int n = x.rows(), k = x.cols();
  for (int i = 0; i < n; ++i) {
    const double* row = x.data() + static_cast<int64_t>(i) * k;
    double* orow = out.data() + static_cast<int64_t>(i) * k;
    double m = row[0];
    for (int j = 1; j < k; ++j) m = std::max(m, row[j]);
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += std::exp(row[j] - m);
    const double lse = m + std::log(s);
    for (int j = 0; j < k; ++j) orow[j] = row[j] - lse;
  }
}

void softmax_kernel(const Tensor& x, Tensor& out) {
  log_softmax_kernel(x, out);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::exp(out[i]);
}

namespace {

// Error-free transforms for exact summation (two_sum and friends). Used by
// the column-mean reduction so that pooled context embeddings are exactly
// independent of summation order: the column sum is accumulated as an exact
// expansion of non-overlapping doubles, then rounded once.
inline void two_sum(double a, double b, double& s, double& err) {
  s = a + b;
  const double bv = s - a;
  const double av = s - bv;
  err = (a - av) + (b - bv);
}

// Adds b into an expansion kept in buf[0..m), smallest component first.
inline int grow_expansion(double* buf, int m, double b) {
  double q = b;
  int out = 0;
  for (int i = 0; i < m; ++i) {
    double s, err;
    two_sum(q, buf[i], s, err);
    if (err != 0.0) buf[out++] = err;
    q = s;
  }
  buf[out++] = q;
  return out;
}

// Exact mean of n doubles: sum as an expansion, take the correctly rounded
// leading component, then divide with an fma-corrected quotient so that the
// mean of n identical values is exactly that value.
double exact_mean_impl(const double* vals, int n, int stride) {
  double buf[64];
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (m >= 60) {
      // Compress: re-accumulate the expansion into itself.
      double tmp[64];
      int tm = 0;
      for (int j = m - 1; j >= 0; --j) tm = grow_expansion(tmp, tm, buf[j]);
      m = tm;
      std::copy(tmp, tmp + tm, buf);
      COMRL_CHECK(m < 60, "exact_mean: expansion overflow");
    }
    m = grow_expansion(buf, m, vals[static_cast<int64_t>(i) * stride]);
  }
  // Leading (last) component approximates the exact sum to within half an
  // ulp; the remaining tail refines the quotient below.
  const double hi = buf[m - 1];
  double tail = 0.0;
  for (int i = 0; i < m - 1; ++i) tail += buf[i];
  const double dn = static_cast<double>(n);
  const double q = hi / dn;
  // r = hi - q*n exactly, courtesy of fused multiply-add.
  const double r = std::fma(-q, dn, hi);
  return q + (r + tail) / dn;
}

}  // namespace

double exact_mean_strided(const double* vals, int n, int stride) {
  return exact_mean_impl(vals, n, stride);
}

void col_mean_kernel(const Tensor& x, Tensor& out) {
  const int rows = x.rows(), k = x.cols();
  COMRL_CHECK(rows > 0, "col_mean: empty tensor");
  out = Tensor::matrix(1, k);
  for (int j = 0; j < k; ++j) out[j] = exact_mean_impl(x.data() + j, rows, k);
}

Value Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

Value Tape::leaf(const Tensor& t, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.requires_grad = requires_grad;
  n.value = t;
  return push(std::move(n));
}

Value Tape::constant(Tensor t) {
  Node n;
  n.op = Op::Leaf;
  n.requires_grad = false;
  n.value = std::move(t);
  return push(std::move(n));
}

double Tape::scalar_value(Value v) const {
  const Tensor& t = value(v);
  COMRL_CHECK(t.numel() == 1, "scalar_value: tensor is not scalar-shaped");
  return t[0];
}

const Tensor& Tape::grad(Value v) const {
  const Node& n = node(v);
  COMRL_CHECK(n.grad_live, "grad: node has no gradient (not reached by backward)");
  return n.grad;
}

Value Tape::affine(Value x, Value w, Value b) {
  Node n;
  n.op = Op::Affine;
  n.parents = {x.id, w.id, b.id};
  n.requires_grad =
      node(x).requires_grad || node(w).requires_grad || node(b).requires_grad;
  affine_kernel(value(x), value(w), value(b), n.value);
  return push(std::move(n));
}

Value Tape::relu(Value x) {
  Node n;
  n.op = Op::Relu;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  relu_kernel(value(x), n.value);
  return push(std::move(n));
}

Value Tape::tanh(Value x) {
  Node n;
  n.op = Op::Tanh;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  tanh_kernel(value(x), n.value);
  return push(std::move(n));
}

Value Tape::log(Value x) {
  Node n;
  n.op = Op::Log;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  const Tensor& xv = value(x);
  n.value = Tensor(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) {
    if (!(xv[i] > 0.0)) {
      throw numeric_error("log: non-positive input " + std::to_string(xv[i]));
    }
    n.value[i] = std::log(xv[i]);
  }
  return push(std::move(n));
}

Value Tape::exp(Value x) {
  Node n;
  n.op = Op::Exp;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  const Tensor& xv = value(x);
  n.value = Tensor(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) n.value[i] = std::exp(xv[i]);
  return push(std::move(n));
}

Value Tape::add(Value a, Value b) {
  COMRL_CHECK(value(a).same_shape(value(b)), "add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.parents = {a.id, b.id};
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  const Tensor &av = value(a), &bv = value(b);
  n.value = Tensor(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) n.value[i] = av[i] + bv[i];
  return push(std::move(n));
}

Value Tape::sub(Value a, Value b) {
  COMRL_CHECK(value(a).same_shape(value(b)), "sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.parents = {a.id, b.id};
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  const Tensor &av = value(a), &bv = value(b);
  n.value = Tensor(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) n.value[i] = av[i] - bv[i];
  return push(std::move(n));
}

Value Tape::mul(Value a, Value b) {
  COMRL_CHECK(value(a).same_shape(value(b)), "mul: shape mismatch");
  Node n;
  n.op = Op::Mul;
  n.parents = {a.id, b.id};
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  const Tensor &av = value(a), &bv = value(b);
  n.value = Tensor(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) n.value[i] = av[i] * bv[i];
  return push(std::move(n));
}

Value Tape::scale(Value x, double c) {
  Node n;
  n.op = Op::Scale;
  n.parents = {x.id};
  n.c = c;
  n.requires_grad = node(x).requires_grad;
  const Tensor& xv = value(x);
  n.value = Tensor(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) n.value[i] = c * xv[i];
  return push(std::move(n));
}

Value Tape::add_const(Value x, double c) {
  Node n;
  n.op = Op::AddConst;
  n.parents = {x.id};
  n.c = c;
  n.requires_grad = node(x).requires_grad;
  const Tensor& xv = value(x);
  n.value = Tensor(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) n.value[i] = xv[i] + c;
  return push(std::move(n));
}

Value Tape::log_softmax(Value x) {
  Node n;
  n.op = Op::LogSoftmax;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  log_softmax_kernel(value(x), n.value);
  return push(std::move(n));
}

Value Tape::sqdist_rows(Value a, Value b) {
  COMRL_CHECK(value(a).same_shape(value(b)), "sqdist_rows: shape mismatch");
  Node n;
  n.op = Op::SqDistRows;
  n.parents = {a.id, b.id};
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  const Tensor &av = value(a), &bv = value(b);
  const int rows = av.rows(), k = av.cols();
  n.value = Tensor::matrix(rows, 1);
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    const double* ar = av.data() + static_cast<int64_t>(i) * k;
    const double* br = bv.data() + static_cast<int64_t>(i) * k;
    for (int j = 0; j < k; ++j) {
      const double d = ar[j] - br[j];
      s += d * d;
    }
    n.value[i] = s;
  }
  return push(std::move(n));
}

Value Tape::sum_all(Value x) {
  Node n;
  n.op = Op::SumAll;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  const Tensor& xv = value(x);
  double s = 0.0;
  for (int64_t i = 0; i < xv.numel(); ++i) s += xv[i];
  n.value = Tensor::scalar(s);
  return push(std::move(n));
}

Value Tape::mean_all(Value x) {
  Node n;
  n.op = Op::MeanAll;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  const Tensor& xv = value(x);
  COMRL_CHECK(xv.numel() > 0, "mean_all: empty tensor");
  // Exact reduction: the mean is independent of element order, and a tensor
  // whose elements cancel exactly in pairs yields exactly zero.
  n.value = Tensor::scalar(
      exact_mean_strided(xv.data(), static_cast<int>(xv.numel()), 1));
  return push(std::move(n));
}

Value Tape::row_sum(Value x) {
  Node n;
  n.op = Op::RowSum;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  const Tensor& xv = value(x);
  const int rows = xv.rows(), k = xv.cols();
  n.value = Tensor::matrix(rows, 1);
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    const double* r = xv.data() + static_cast<int64_t>(i) * k;
    for (int j = 0; j < k; ++j) s += r[j];
    n.value[i] = s;
  }
  return push(std::move(n));
}

Value Tape::col_mean(Value x) {
  Node n;
  n.op = Op::ColMean;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  col_mean_kernel(value(x), n.value);
  return push(std::move(n));
}

Value Tape::concat_cols(std::span<const Value> parts) {
  COMRL_CHECK(!parts.empty(), "concat_cols: no parts");
  Node n;
  n.op = Op::ConcatCols;
  const int rows = value(parts[0]).rows();
  int total = 0;
  for (Value p : parts) {
    COMRL_CHECK(value(p).rows() == rows, "concat_cols: row mismatch");
    total += value(p).cols();
    n.parents.push_back(p.id);
    n.requires_grad = n.requires_grad || node(p).requires_grad;
  }
  n.value = Tensor::matrix(rows, total);
  int off = 0;
  for (Value p : parts) {
    const Tensor& pv = value(p);
    const int k = pv.cols();
    for (int i = 0; i < rows; ++i) {
      const double* src = pv.data() + static_cast<int64_t>(i) * k;
      double* dst = n.value.data() + static_cast<int64_t>(i) * total + off;
      std::copy(src, src + k, dst);
    }
    off += k;
  }
  return push(std::move(n));
}

Value Tape::stack_rows(std::span<const Value> parts) {
  COMRL_CHECK(!parts.empty(), "stack_rows: no parts");
  Node n;
  n.op = Op::StackRows;
  const int k = value(parts[0]).cols();
  int total = 0;
  for (Value p : parts) {
    COMRL_CHECK(value(p).cols() == k, "stack_rows: col mismatch");
    total += value(p).rows();
    n.parents.push_back(p.id);
    n.requires_grad = n.requires_grad || node(p).requires_grad;
  }
  n.value = Tensor::matrix(total, k);
  int off = 0;
  for (Value p : parts) {
    const Tensor& pv = value(p);
    std::copy(pv.data(), pv.data() + pv.numel(),
              n.value.data() + static_cast<int64_t>(off) * k);
    off += pv.rows();
  }
  return push(std::move(n));
}

Value Tape::gather_rows(Value x, std::vector<int> idx) {
  Node n;
  n.op = Op::GatherRows;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  const Tensor& xv = value(x);
  const int rows = xv.rows(), k = xv.cols();
  n.value = Tensor::matrix(static_cast<int>(idx.size()), k);
  for (size_t i = 0; i < idx.size(); ++i) {
    COMRL_CHECK(idx[i] >= 0 && idx[i] < rows, "gather_rows: index out of range");
    const double* src = xv.data() + static_cast<int64_t>(idx[i]) * k;
    std::copy(src, src + k, n.value.data() + static_cast<int64_t>(i) * k);
  }
  n.aux = std::move(idx);
  return push(std::move(n));
}

Value Tape::slice_cols(Value x, int c0, int c1) {
  const Tensor& xv = value(x);
  COMRL_CHECK(0 <= c0 && c0 < c1 && c1 <= xv.cols(), "slice_cols: bad bounds");
  Node n;
  n.op = Op::SliceCols;
  n.parents = {x.id};
  n.aux = {c0, c1};
  n.requires_grad = node(x).requires_grad;
  const int rows = xv.rows(), k = xv.cols(), w = c1 - c0;
  n.value = Tensor::matrix(rows, w);
  for (int i = 0; i < rows; ++i) {
    const double* src = xv.data() + static_cast<int64_t>(i) * k + c0;
    std::copy(src, src + w, n.value.data() + static_cast<int64_t>(i) * w);
  }
  return push(std::move(n));
}

Value Tape::reshape(Value x, std::vector<int> shape) {
  const Tensor& xv = value(x);
  COMRL_CHECK(Tensor::numel_of(shape) == xv.numel(), "reshape: numel mismatch");
  Node n;
  n.op = Op::Reshape;
  n.parents = {x.id};
  n.requires_grad = node(x).requires_grad;
  n.value = Tensor(shape, std::vector<double>(xv.data(), xv.data() + xv.numel()));
  for (int e : shape) n.aux.push_back(e);
  return push(std::move(n));
}

Tensor& Tape::ensure_grad(int id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    n.grad = Tensor(n.value.shape());
    n.grad_live = true;
  }
  return n.grad;
}

void Tape::backward(Value root) {
  Node& r = node(root);
  COMRL_CHECK(r.value.numel() == 1, "backward: root must be scalar-shaped");
  COMRL_CHECK(r.requires_grad, "backward: root does not depend on any parameter");
  ensure_grad(root.id)[0] = 1.0;
  for (int id = root.id; id >= 0; --id) {
    if (nodes_[id].grad_live && nodes_[id].op != Op::Leaf) backward_node(id);
  }
}

void Tape::backward_node(int id) {
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  auto want = [&](int pid) { return nodes_[pid].requires_grad; };

  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::Affine: {
      const int xi = n.parents[0], wi = n.parents[1], bi = n.parents[2];
      const Tensor& x = nodes_[xi].value;
      const Tensor& w = nodes_[wi].value;
      const int rows = g.rows(), o = g.cols(), in = x.cols();
      // Hand-rolled adjoint products with fixed accumulation orders: inner
      // loops run over independent elements, so vectorization cannot reorder
      // any floating-point reduction and reruns are byte-identical.
      if (want(xi)) {
        // dX = g * W^T, accumulated j-sequentially per element via a
        // transposed copy of W so the inner loop is contiguous.
        Tensor wt = Tensor::matrix(o, in);
        for (int k = 0; k < in; ++k)
          for (int j = 0; j < o; ++j)
            wt.data()[static_cast<int64_t>(j) * in + k] =
                w.data()[static_cast<int64_t>(k) * o + j];
        Tensor& dx = ensure_grad(xi);
        for (int i = 0; i < rows; ++i) {
          double* dxrow = dx.data() + static_cast<int64_t>(i) * in;
          const double* grow = g.data() + static_cast<int64_t>(i) * o;
          for (int j = 0; j < o; ++j) {
            const double gij = grow[j];
            const double* wtrow = wt.data() + static_cast<int64_t>(j) * in;
            for (int k = 0; k < in; ++k)
              dxrow[k] = std::fma(gij, wtrow[k], dxrow[k]);
          }
        }
      }
      if (want(wi)) {
        // dW = X^T * g, accumulated i-sequentially per element.
        Tensor& dw = ensure_grad(wi);
        for (int i = 0; i < rows; ++i) {
          const double* xrow = x.data() + static_cast<int64_t>(i) * in;
          const double* grow = g.data() + static_cast<int64_t>(i) * o;
          for (int k = 0; k < in; ++k) {
            const double xik = xrow[k];
            double* dwrow = dw.data() + static_cast<int64_t>(k) * o;
            for (int j = 0; j < o; ++j)
              dwrow[j] = std::fma(xik, grow[j], dwrow[j]);
          }
        }
      }
      if (want(bi)) {
        Tensor& db = ensure_grad(bi);
        for (int i = 0; i < rows; ++i) {
          const double* r = g.data() + static_cast<int64_t>(i) * o;
          for (int j = 0; j < o; ++j) db[j] += r[j];
        }
      }
      break;
    }
    case Op::Relu: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      for (int64_t i = 0; i < g.numel(); ++i) {
        if (n.value[i] > 0.0) dx[i] += g[i];
      }
      break;
    }
    case Op::Tanh: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      for (int64_t i = 0; i < g.numel(); ++i) {
        dx[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
      }
      break;
    }
    case Op::Log: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      const Tensor& x = nodes_[xi].value;
      for (int64_t i = 0; i < g.numel(); ++i) dx[i] += g[i] / x[i];
      break;
    }
    case Op::Exp: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      for (int64_t i = 0; i < g.numel(); ++i) dx[i] += g[i] * n.value[i];
      break;
    }
    case Op::Add: {
      for (int pi : n.parents) {
        if (!want(pi)) continue;
        Tensor& d = ensure_grad(pi);
        for (int64_t i = 0; i < g.numel(); ++i) d[i] += g[i];
      }
      break;
    }
    case Op::Sub: {
      const int ai = n.parents[0], bi = n.parents[1];
      if (want(ai)) {
        Tensor& d = ensure_grad(ai);
        for (int64_t i = 0; i < g.numel(); ++i) d[i] += g[i];
      }
      if (want(bi)) {
        Tensor& d = ensure_grad(bi);
        for (int64_t i = 0; i < g.numel(); ++i) d[i] -= g[i];
      }
      break;
    }
    case Op::Mul: {
      const int ai = n.parents[0], bi = n.parents[1];
      const Tensor& av = nodes_[ai].value;
      const Tensor& bv = nodes_[bi].value;
      if (want(ai)) {
        Tensor& d = ensure_grad(ai);
        for (int64_t i = 0; i < g.numel(); ++i) d[i] += g[i] * bv[i];
      }
      if (want(bi)) {
        Tensor& d = ensure_grad(bi);
        for (int64_t i = 0; i < g.numel(); ++i) d[i] += g[i] * av[i];
      }
      break;
    }
    case Op::Scale: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      for (int64_t i = 0; i < g.numel(); ++i) dx[i] += n.c * g[i];
      break;
    }
    case Op::AddConst: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      for (int64_t i = 0; i < g.numel(); ++i) dx[i] += g[i];
      break;
    }
    case Op::LogSoftmax: {
      // y = x - lse(x) row-wise; dx = dy - softmax(x) * rowsum(dy).
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      const int rows = g.rows(), k = g.cols();
      for (int i = 0; i < rows; ++i) {
        const double* gr = g.data() + static_cast<int64_t>(i) * k;
        const double* yr = n.value.data() + static_cast<int64_t>(i) * k;
        double* dr = dx.data() + static_cast<int64_t>(i) * k;
        double gs = 0.0;
        for (int j = 0; j < k; ++j) gs += gr[j];
        for (int j = 0; j < k; ++j) dr[j] += gr[j] - std::exp(yr[j]) * gs;
      }
      break;
    }
    case Op::SqDistRows: {
      const int ai = n.parents[0], bi = n.parents[1];
      const Tensor& av = nodes_[ai].value;
      const Tensor& bv = nodes_[bi].value;
      const int rows = av.rows(), k = av.cols();
      Tensor* da = want(ai) ? &ensure_grad(ai) : nullptr;
      Tensor* db = want(bi) ? &ensure_grad(bi) : nullptr;
      for (int i = 0; i < rows; ++i) {
        const double gi = g[i];
        const int64_t off = static_cast<int64_t>(i) * k;
        for (int j = 0; j < k; ++j) {
          const double d2 = 2.0 * (av[off + j] - bv[off + j]) * gi;
          if (da) (*da)[off + j] += d2;
          if (db) (*db)[off + j] -= d2;
        }
      }
      break;
    }
    case Op::SumAll: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      const double gv = g[0];
      for (int64_t i = 0; i < dx.numel(); ++i) dx[i] += gv;
      break;
    }
    case Op::MeanAll: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      const double gv = g[0] / static_cast<double>(dx.numel());
      for (int64_t i = 0; i < dx.numel(); ++i) dx[i] += gv;
      break;
    }
    case Op::RowSum: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      const int rows = dx.rows(), k = dx.cols();
      for (int i = 0; i < rows; ++i) {
        const double gi = g[i];
        double* dr = dx.data() + static_cast<int64_t>(i) * k;
        for (int j = 0; j < k; ++j) dr[j] += gi;
      }
      break;
    }
    case Op::ColMean: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      const int rows = dx.rows(), k = dx.cols();
      const double inv = 1.0 / static_cast<double>(rows);
      for (int i = 0; i < rows; ++i) {
        double* dr = dx.data() + static_cast<int64_t>(i) * k;
        for (int j = 0; j < k; ++j) dr[j] += g[j] * inv;
      }
      break;
    }
    case Op::ConcatCols: {
      const int rows = g.rows(), total = g.cols();
      int off = 0;
      for (int pi : n.parents) {
        const int k = nodes_[pi].value.cols();
        if (want(pi)) {
          Tensor& d = ensure_grad(pi);
          for (int i = 0; i < rows; ++i) {
            const double* src = g.data() + static_cast<int64_t>(i) * total + off;
            double* dst = d.data() + static_cast<int64_t>(i) * k;
            for (int j = 0; j < k; ++j) dst[j] += src[j];
          }
        }
        off += k;
      }
      break;
    }
    case Op::StackRows: {
      const int k = g.cols();
      int off = 0;
      for (int pi : n.parents) {
        const int rows = nodes_[pi].value.rows();
        if (want(pi)) {
          Tensor& d = ensure_grad(pi);
          const double* src = g.data() + static_cast<int64_t>(off) * k;
          for (int64_t i = 0; i < d.numel(); ++i) d[i] += src[i];
        }
        off += rows;
      }
      break;
    }
    case Op::GatherRows: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      const int k = g.cols();
      for (size_t i = 0; i < n.aux.size(); ++i) {
        const double* src = g.data() + static_cast<int64_t>(i) * k;
        double* dst = dx.data() + static_cast<int64_t>(n.aux[i]) * k;
        for (int j = 0; j < k; ++j) dst[j] += src[j];
      }
      break;
    }
    case Op::SliceCols: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      const int c0 = n.aux[0], w = n.aux[1] - n.aux[0];
      const int rows = dx.rows(), k = dx.cols();
      for (int i = 0; i < rows; ++i) {
        const double* src = g.data() + static_cast<int64_t>(i) * w;
        double* dst = dx.data() + static_cast<int64_t>(i) * k + c0;
        for (int j = 0; j < w; ++j) dst[j] += src[j];
      }
      break;
    }
    case Op::Reshape: {
      const int xi = n.parents[0];
      if (!want(xi)) break;
      Tensor& dx = ensure_grad(xi);
      for (int64_t i = 0; i < g.numel(); ++i) dx[i] += g[i];
      break;
    }
  }
}

void Tape::reset() { nodes_.clear(); }

int Tape::n_grad_leaves() const {
  int n = 0;
  for (const Node& nd : nodes_) {
    if (nd.op == Op::Leaf && nd.requires_grad) ++n;
  }
  return n;
}

}  // namespace comrl
