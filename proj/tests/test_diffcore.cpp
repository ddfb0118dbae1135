#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "comrl/mlp.hpp"
#include "comrl/optim.hpp"
#include "comrl/rng.hpp"
#include "comrl/tape.hpp"

using namespace comrl;

namespace {

// Random op compositions exercising the whole vocabulary. Inputs to kinked or
// domain-restricted ops are nudged away from trouble spots so the central
// finite difference with step 1e-5 stays a valid oracle.
Value random_graph(Tape& tape, std::span<const Value> leaves, uint64_t seed) {
  Rng rng(seed);
  std::vector<Value> pool(leaves.begin(), leaves.end());

  auto safe_for_kink = [&](Value v) {
    const Tensor& t = tape.value(v);
    for (int64_t i = 0; i < t.numel(); ++i) {
      if (std::abs(t[i]) < 1e-3) return tape.add_const(v, 0.5);
    }
    return v;
  };

  const int n_ops = 5 + rng.uniform_int(8);
  for (int k = 0; k < n_ops; ++k) {
    const Value a = pool[rng.uniform_int(static_cast<int>(pool.size()))];
    const int choice = rng.uniform_int(12);
    Value out;
    switch (choice) {
      case 0:
        out = tape.tanh(a);
        break;
      case 1:
        out = tape.relu(safe_for_kink(a));
        break;
      case 2:
        // log of a strictly positive expression
        out = tape.log(tape.add_const(tape.mul(a, a), 0.5));
        break;
      case 3:
        out = tape.exp(tape.scale(a, 0.3));
        break;
      case 4:
        out = tape.log_softmax(a);
        break;
      case 5: {
        const Value b = pool[rng.uniform_int(static_cast<int>(pool.size()))];
        if (tape.value(a).same_shape(tape.value(b))) {
          out = tape.add(a, b);
        } else {
          out = tape.scale(a, -1.3);
        }
        break;
      }
      case 6: {
        const Value b = pool[rng.uniform_int(static_cast<int>(pool.size()))];
        if (tape.value(a).same_shape(tape.value(b))) {
          out = tape.mul(a, b);
        } else {
          out = tape.add_const(a, 0.25);
        }
        break;
      }
      case 7: {
        const Value b = pool[rng.uniform_int(static_cast<int>(pool.size()))];
        if (tape.value(a).same_shape(tape.value(b))) {
          out = tape.sqdist_rows(a, b);
        } else {
          out = tape.row_sum(a);
        }
        break;
      }
      case 8:
        out = tape.col_mean(a);
        break;
      case 9: {
        std::vector<int> idx;
        const int rows = tape.value(a).rows();
        for (int i = 0; i < rows; ++i) idx.push_back(rng.uniform_int(rows));
        out = tape.gather_rows(a, idx);
        break;
      }
      case 10: {
        const Value parts[2] = {a, a};
        out = tape.concat_cols(parts);
        break;
      }
      case 11: {
        const int c = tape.value(a).cols();
        out = (c >= 2) ? tape.slice_cols(a, 0, c - 1) : tape.scale(a, 2.0);
        break;
      }
      default:
        out = a;
        break;
    }
    pool.push_back(out);
  }
  Value acc = tape.mean_all(pool.back());
  acc = tape.add(acc, tape.mean_all(pool[pool.size() / 2]));
  return acc;
}

std::vector<Tensor> random_params(uint64_t seed) {
  Rng rng(seed);
  const int n = 2 + rng.uniform_int(3);
  std::vector<Tensor> out;
  for (int k = 0; k < n; ++k) {
    const int r = 2 + rng.uniform_int(3), c = 2 + rng.uniform_int(3);
    Tensor t = Tensor::matrix(r, c);
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.normal(0.0, 0.8);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

TEST_CASE("elementary op values") {
  Tape tape;
  const Value z = tape.constant(Tensor({1, 3}, {0.0, 0.0, 0.0}));
  const Tensor& th = tape.value(tape.tanh(z));
  for (int i = 0; i < 3; ++i) CHECK(th[i] == 0.0);

  Tensor zeros4({1, 4}, {0.0, 0.0, 0.0, 0.0});
  Tensor sm;
  softmax_kernel(zeros4, sm);
  for (int i = 0; i < 4; ++i) CHECK(sm[i] == doctest::Approx(0.25).epsilon(1e-14));

  const Value a = tape.constant(Tensor({1, 2}, {1.0, 0.0}));
  const Value b = tape.constant(Tensor({1, 2}, {0.0, 0.0}));
  CHECK(tape.scalar_value(tape.sqdist_rows(a, b)) == 1.0);
}

TEST_CASE("backward on elementary graphs") {
  {
    // d(x^2)/dx = 2x = 6 at x = 3
    Tape tape;
    Tensor x = Tensor::scalar(3.0);
    const Value lx = tape.leaf(x, true);
    const Value root = tape.mul(lx, lx);
    tape.backward(root);
    CHECK(tape.grad(lx)[0] == doctest::Approx(6.0).epsilon(1e-15));
  }
  {
    // mean of n components: each gradient is 1/n
    Tape tape;
    Tensor x({1, 5}, {1.0, -2.0, 3.0, 0.5, 7.0});
    const Value lx = tape.leaf(x, true);
    tape.backward(tape.mean_all(lx));
    for (int i = 0; i < 5; ++i) CHECK(tape.grad(lx)[i] == doctest::Approx(0.2).epsilon(1e-15));
  }
}

TEST_CASE("grad_check identity map is exact at dyadic points") {
  Tensor w = Tensor::scalar(0.5);
  Tensor* params[] = {&w};
  auto f = [](Tape& t, std::span<const Value> ls) { return ls[0]; };
  const auto rep = grad_check(f, params, 0.0078125, 1e-12);
  CHECK(rep.worst == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("grad_check tanh MLP 4-8-1") {
  Rng rng(0);
  Mlp mlp = Mlp::init({.in = 4, .hidden = {8}, .out = 1, .act = Act::Tanh}, rng);
  Tensor x = Tensor::matrix(3, 4);
  for (int64_t i = 0; i < x.numel(); ++i) x[i] = rng.normal();
  std::vector<Tensor*> params;
  for (Tensor& t : mlp.params) params.push_back(&t);
  auto f = [&](Tape& tape, std::span<const Value> ls) {
    return tape.mean_all(mlp.forward(tape, tape.constant(x), ls));
  };
  const auto rep = grad_check(f, params, 1e-5, 1e-4);
  CHECK(rep.pass);
  CHECK(rep.worst < 1e-4);
}

TEST_CASE("grad_check softmax-log path") {
  Rng rng(7);
  Tensor w = Tensor::matrix(4, 5);
  for (int64_t i = 0; i < w.numel(); ++i) w[i] = rng.normal();
  Tensor* params[] = {&w};
  auto f = [](Tape& tape, std::span<const Value> ls) {
    const Value lsm = tape.log_softmax(ls[0]);
    return tape.mean_all(tape.mul(lsm, lsm));
  };
  const auto rep = grad_check(f, params, 1e-5, 1e-4);
  CHECK(rep.pass);
}

TEST_CASE("random graph gradients match finite differences") {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    auto tensors = random_params(seed * 101);
    std::vector<Tensor*> params;
    for (Tensor& t : tensors) params.push_back(&t);
    auto f = [seed](Tape& tape, std::span<const Value> ls) {
      return random_graph(tape, ls, seed);
    };
    const auto rep = grad_check(f, params, 1e-5, 1e-4);
    CAPTURE(seed);
    CHECK(rep.pass);
  }
}

TEST_CASE("three-layer MLP gradients match finite differences") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    Mlp mlp = Mlp::init({.in = 3, .hidden = {6, 6}, .out = 2, .act = Act::Tanh}, rng);
    Tensor x = Tensor::matrix(4, 3);
    for (int64_t i = 0; i < x.numel(); ++i) x[i] = rng.normal();
    std::vector<Tensor*> params;
    for (Tensor& t : mlp.params) params.push_back(&t);
    auto f = [&](Tape& tape, std::span<const Value> ls) {
      const Value y = mlp.forward(tape, tape.constant(x), ls);
      return tape.mean_all(tape.mul(y, y));
    };
    const auto rep = grad_check(f, params, 1e-5, 1e-4);
    CAPTURE(seed);
    CHECK(rep.pass);
  }
}

TEST_CASE("determinism: same seed gives bit-identical params, values, grads") {
  auto run = [](uint64_t seed) {
    Rng rng(seed);
    Mlp mlp = Mlp::init({.in = 4, .hidden = {8}, .out = 3}, rng);
    Tensor x = Tensor::matrix(2, 4);
    for (int64_t i = 0; i < x.numel(); ++i) x[i] = rng.normal();
    Tape tape;
    auto leaves = mlp.make_leaves(tape);
    const Value y = mlp.forward(tape, tape.constant(x), leaves);
    const Value root = tape.mean_all(tape.mul(y, y));
    tape.backward(root);
    std::vector<double> sig;
    sig.push_back(tape.scalar_value(root));
    for (Value l : leaves) {
      const Tensor& g = tape.grad(l);
      for (int64_t i = 0; i < g.numel(); ++i) sig.push_back(g[i]);
    }
    return sig;
  };
  const auto a = run(42), b = run(42);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("taped forward equals untaped eval bitwise") {
  Rng rng(3);
  Mlp mlp = Mlp::init({.in = 5, .hidden = {16, 16}, .out = 4, .act = Act::Relu}, rng);
  Tensor x = Tensor::matrix(7, 5);
  for (int64_t i = 0; i < x.numel(); ++i) x[i] = rng.normal();
  const Tensor direct = mlp.eval(x);
  Tape tape;
  auto leaves = mlp.make_leaves(tape);
  const Tensor& taped = tape.value(mlp.forward(tape, tape.constant(x), leaves));
  REQUIRE(direct.numel() == taped.numel());
  for (int64_t i = 0; i < direct.numel(); ++i) CHECK(direct[i] == taped[i]);
}

TEST_CASE("softmax rows sum to one and tolerate large magnitudes") {
  Rng rng(11);
  Tensor x = Tensor::matrix(6, 9);
  for (int64_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform(-1e3, 1e3);
  Tensor sm;
  softmax_kernel(x, sm);
  for (int i = 0; i < 6; ++i) {
    double s = 0.0;
    for (int j = 0; j < 9; ++j) {
      CHECK(std::isfinite(sm.at(i, j)));
      s += sm.at(i, j);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  Tensor lsm;
  log_softmax_kernel(x, lsm);
  CHECK(all_finite(lsm));
}

TEST_CASE("col_mean is exact under row permutation and repetition") {
  Rng rng(21);
  Tensor x = Tensor::matrix(50, 8);
  for (int64_t i = 0; i < x.numel(); ++i) x[i] = rng.normal(0.0, 3.0);
  Tensor base;
  col_mean_kernel(x, base);
  std::vector<int> perm(50);
  for (int i = 0; i < 50; ++i) perm[i] = i;
  for (int trial = 0; trial < 50; ++trial) {
    for (int i = 49; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    Tensor shuffled = Tensor::matrix(50, 8);
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 8; ++j) shuffled.at(i, j) = x.at(perm[i], j);
    }
    Tensor got;
    col_mean_kernel(shuffled, got);
    for (int j = 0; j < 8; ++j) CHECK(got[j] == base[j]);
  }
  // Mean of n identical rows is exactly that row, including awkward n.
  for (int n : {3, 7, 50}) {
    Tensor rep = Tensor::matrix(n, 8);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 8; ++j) rep.at(i, j) = x.at(0, j);
    }
    Tensor got;
    col_mean_kernel(rep, got);
    for (int j = 0; j < 8; ++j) CHECK(got[j] == x.at(0, j));
  }
}

TEST_CASE("shape and domain violations are rejected") {
  Tape tape;
  const Value a = tape.constant(Tensor::matrix(2, 3));
  const Value b = tape.constant(Tensor::matrix(3, 2));
  CHECK_THROWS(tape.add(a, b));
  CHECK_THROWS(tape.log(tape.constant(Tensor({1, 2}, {1.0, -0.5}))));
  CHECK_THROWS(tape.backward(a));  // non-scalar root
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Tensor w({2, 2}, {1.0, -2.0, 0.5, 3.0});
  const Tensor w0 = w;
  const Tensor* cps[] = {&w};
  Adam adam({}, cps, {"w"});
  Tensor g(w.shape());
  Tensor* ps[] = {&w};
  const Tensor* gs[] = {&g};
  for (int i = 0; i < 10; ++i) adam.step(ps, gs);
  for (int64_t i = 0; i < w.numel(); ++i) CHECK(w[i] == w0[i]);
}

TEST_CASE("adam: constant gradient drives parameter opposite its sign") {
  Tensor w = Tensor::scalar(0.0);
  const Tensor* cps[] = {&w};
  Adam adam({.lr = 1e-2}, cps, {"w"});
  Tensor g = Tensor::scalar(2.5);
  Tensor* ps[] = {&w};
  const Tensor* gs[] = {&g};
  double prev = 0.0;
  for (int i = 0; i < 100; ++i) {
    adam.step(ps, gs);
    CHECK(w[0] < prev);
    prev = w[0];
  }
}

TEST_CASE("adam: quadratic bowl converges from unit norm") {
  Tensor w({4}, {0.5, -0.5, 0.5, -0.5});  // ||w|| = 1
  const Tensor* cps[] = {&w};
  Adam adam({.lr = 3e-4}, cps, {"w"});
  Tensor* ps[] = {&w};
  for (int step = 0; step < 10000; ++step) {
    Tape tape;
    const Value lw = tape.leaf(w, true);
    const Value root = tape.sum_all(tape.mul(lw, lw));
    tape.backward(root);
    const Tensor* gs[] = {&tape.grad(lw)};
    adam.step(ps, gs);
  }
  double norm = 0.0;
  for (int i = 0; i < 4; ++i) norm += w[i] * w[i];
  CHECK(std::sqrt(norm) < 1e-3);
}

TEST_CASE("adam: NaN gradient aborts naming the tensor") {
  Tensor w = Tensor::scalar(1.0);
  const Tensor* cps[] = {&w};
  Adam adam({}, cps, {"encoder.W0"});
  Tensor g = Tensor::scalar(std::nan(""));
  Tensor* ps[] = {&w};
  const Tensor* gs[] = {&g};
  bool threw = false;
  try {
    adam.step(ps, gs);
  } catch (const numeric_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("encoder.W0") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("mlp init is reproducible and Xavier-bounded") {
  Rng a(5), b(5);
  const Mlp m1 = Mlp::init({.in = 6, .hidden = {10}, .out = 2}, a);
  const Mlp m2 = Mlp::init({.in = 6, .hidden = {10}, .out = 2}, b);
  REQUIRE(m1.params.size() == m2.params.size());
  for (size_t k = 0; k < m1.params.size(); ++k) {
    for (int64_t i = 0; i < m1.params[k].numel(); ++i) {
      CHECK(m1.params[k][i] == m2.params[k][i]);
    }
  }
  const double limit0 = std::sqrt(6.0 / (6 + 10));
  for (int64_t i = 0; i < m1.params[0].numel(); ++i) {
    CHECK(std::abs(m1.params[0][i]) <= limit0);
  }
  for (int64_t i = 0; i < m1.params[1].numel(); ++i) CHECK(m1.params[1][i] == 0.0);
}

TEST_CASE("weights file round-trip is byte-exact") {
  Rng rng(9);
  Mlp mlp = Mlp::init({.in = 3, .hidden = {4}, .out = 2}, rng);
  std::vector<NamedTensor> tensors;
  append_named(tensors, "net", mlp);
  tensors.push_back({"stats.scalar", Tensor::scalar(1.25)});

  const std::string p1 = "roundtrip_a.cmrlw";
  const std::string p2 = "roundtrip_b.cmrlw";
  save_weights(p1, tensors);
  auto loaded = load_weights(p1);
  REQUIRE(loaded.size() == tensors.size());
  for (size_t i = 0; i < tensors.size(); ++i) {
    CHECK(loaded[i].name == tensors[i].name);
    REQUIRE(loaded[i].t.shape() == tensors[i].t.shape());
    for (int64_t j = 0; j < tensors[i].t.numel(); ++j) {
      CHECK(loaded[i].t[j] == tensors[i].t[j]);
    }
  }
  save_weights(p2, loaded);
  // Saved bytes identical on rewrite.
  auto slurp = [](const std::string& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)),
                       std::istreambuf_iterator<char>());
  };
  CHECK(slurp(p1) == slurp(p2));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("restore_named puts parameters back into an mlp") {
  Rng rng(13);
  Mlp a = Mlp::init({.in = 4, .hidden = {5}, .out = 3}, rng);
  Mlp b = Mlp::init({.in = 4, .hidden = {5}, .out = 3}, rng);
  std::vector<NamedTensor> tensors;
  append_named(tensors, "m", a);
  restore_named(tensors, "m", b);
  for (size_t k = 0; k < a.params.size(); ++k) {
    for (int64_t i = 0; i < a.params[k].numel(); ++i) {
      CHECK(a.params[k][i] == b.params[k][i]);
    }
  }
}

TEST_CASE("affine outputs are row-position independent") {
  // The batched forward of a row must equal its standalone forward bit for
  // bit, whatever its position: context pooling relies on this.
  Rng rng(3111);
  Tensor w = Tensor::matrix(5, 6);
  Tensor b = Tensor::matrix(1, 6);
  for (int64_t i = 0; i < w.numel(); ++i) w[i] = rng.normal();
  for (int64_t i = 0; i < b.numel(); ++i) b[i] = rng.normal();
  Tensor row = Tensor::matrix(1, 5);
  for (int64_t i = 0; i < row.numel(); ++i) row[i] = rng.normal();

  Tensor single;
  affine_kernel(row, w, b, single);
  for (int n : {2, 5, 9}) {
    Tensor batch = Tensor::matrix(n, 5);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 5; ++j) batch.at(i, j) = i == n / 2 ? row.at(0, j)
                                                              : rng.normal();
    Tensor out;
    affine_kernel(batch, w, b, out);
    for (int j = 0; j < 6; ++j) CHECK(out.at(n / 2, j) == single.at(0, j));
  }
}
