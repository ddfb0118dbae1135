#include "comrl/mi_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "comrl/envs.hpp"
#include "comrl/tape.hpp"

namespace comrl {

namespace {

constexpr double kTol = 1e-10;

struct NeumaierSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double t = s + x;
    c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double result() const { return s + c; }
};

void require_stochastic(std::span<const double> table, int rows, int width,
                        const std::string& label) {
  COMRL_REQUIRE(static_cast<int64_t>(table.size()) ==
                    static_cast<int64_t>(rows) * width,
                label + " has the wrong size");
  for (int r = 0; r < rows; ++r) {
    NeumaierSum sum;
    for (int j = 0; j < width; ++j) {
      const double v = table[static_cast<size_t>(r) * width + j];
      COMRL_REQUIRE(v >= 0.0, label + " has a negative entry");
      sum.add(v);
    }
    COMRL_REQUIRE(std::abs(sum.result() - 1.0) <= 1e-12,
                  label + " row does not sum to one");
  }
}

// Entropies of one joint, memoized by the axis bitmask so every identity is
// evaluated from one canonical computation per variable set.
struct EntropyCache {
  static constexpr unsigned M = 1, XB = 2, XT = 4, Z = 8;

  const DiscreteJoint& joint;
  std::array<double, 16> h{};
  std::array<bool, 16> have{};

  double H(unsigned mask) {
    if (!have[mask]) {
      std::vector<int> axes;
      for (int ax = 0; ax < 4; ++ax) {
        if (mask >> ax & 1u) axes.push_back(ax);
      }
      h[mask] = entropy(joint, axes);
      have[mask] = true;
    }
    return h[mask];
  }
  double I(unsigned a, unsigned b) { return H(a) + H(b) - H(a | b); }
  double Ic(unsigned a, unsigned b, unsigned c) {
    return H(a | c) + H(b | c) - H(a | b | c) - H(c);
  }
};

BoundCheck check_ge(const std::string& name, double lhs, double rhs) {
  return {name, lhs, rhs, lhs - rhs, lhs >= rhs - kTol};
}

BoundCheck check_le(const std::string& name, double lhs, double rhs) {
  return {name, lhs, rhs, rhs - lhs, lhs <= rhs + kTol};
}

BoundCheck check_eq(const std::string& name, double lhs, double rhs) {
  return {name, lhs, rhs, lhs - rhs, std::abs(lhs - rhs) <= kTol};
}

// Strictly positive uniform draw, for exponential spacings on the simplex.
double positive_uniform(Rng& rng) {
  double u = rng.uniform();
  while (u == 0.0) u = rng.uniform();
  return u;
}

void fill_simplex_rows(std::vector<double>& table, int rows, int width,
                       Rng& rng) {
  table.resize(static_cast<size_t>(rows) * width);
  for (int r = 0; r < rows; ++r) {
    double total = 0.0;
    for (int j = 0; j < width; ++j) {
      const double e = -std::log(positive_uniform(rng));
      table[static_cast<size_t>(r) * width + j] = e;
      total += e;
    }
    for (int j = 0; j < width; ++j) {
      table[static_cast<size_t>(r) * width + j] /= total;
    }
  }
}

double entropy_of_counts(std::span<const int64_t> counts, int64_t n) {
  NeumaierSum clogc;
  for (int64_t c : counts) {
    if (c > 0) clogc.add(static_cast<double>(c) * std::log(static_cast<double>(c)));
  }
  return std::log(static_cast<double>(n)) - clogc.result() / static_cast<double>(n);
}

}  // namespace

void COMRLGenerativeModel::validate() const {
  COMRL_REQUIRE(n_m >= 1 && n_m <= DiscreteJoint::kMaxAlphabet &&
                    n_xb >= 1 && n_xb <= DiscreteJoint::kMaxAlphabet &&
                    n_xt >= 1 && n_xt <= DiscreteJoint::kMaxAlphabet &&
                    n_z >= 1 && n_z <= DiscreteJoint::kMaxAlphabet,
                "alphabet sizes must be between 1 and 16");
  require_stochastic(p_m, 1, n_m, "task prior");
  require_stochastic(p_xb_given_m, n_m, n_xb, "behavior conditional");
  require_stochastic(p_xt_given_xbm, n_m * n_xb, n_xt, "outcome conditional");
  require_stochastic(p_z_given_x, n_xb * n_xt, n_z, "encoder channel");
}

DiscreteJoint COMRLGenerativeModel::compose() const {
  validate();
  DiscreteJoint joint = DiscreteJoint::zeros(n_m, n_xb, n_xt, n_z);
  for (int m = 0; m < n_m; ++m) {
    for (int xb = 0; xb < n_xb; ++xb) {
      const double p_mb =
          p_m[m] * p_xb_given_m[static_cast<size_t>(m) * n_xb + xb];
      for (int xt = 0; xt < n_xt; ++xt) {
        const double p_mbt =
            p_mb * p_xt_given_xbm[(static_cast<size_t>(m) * n_xb + xb) * n_xt + xt];
        for (int z = 0; z < n_z; ++z) {
          joint.at(m, xb, xt, z) =
              p_mbt * p_z_given_x[(static_cast<size_t>(xb) * n_xt + xt) * n_z + z];
        }
      }
    }
  }
  joint.validate();
  return joint;
}

COMRLGenerativeModel random_comrl_model(int n_m, int n_xb, int n_xt, int n_z,
                                        Rng& rng) {
  COMRLGenerativeModel model;
  model.n_m = n_m;
  model.n_xb = n_xb;
  model.n_xt = n_xt;
  model.n_z = n_z;
  fill_simplex_rows(model.p_m, 1, n_m, rng);
  fill_simplex_rows(model.p_xb_given_m, n_m, n_xb, rng);
  fill_simplex_rows(model.p_xt_given_xbm, n_m * n_xb, n_xt, rng);
  fill_simplex_rows(model.p_z_given_x, n_xb * n_xt, n_z, rng);
  model.validate();
  return model;
}

bool MarkovBoundsReport::all_pass() const {
  for (const BoundCheck& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::string MarkovBoundsReport::to_csv() const {
  std::string out = "check,lhs,rhs,margin,pass\n";
  const auto row = [&out](const BoundCheck& c) {
    out += c.name + ',' + double_repr(c.lhs) + ',' + double_repr(c.rhs) + ',' +
           double_repr(c.margin) + ',' + (c.pass ? '1' : '0') + '\n';
  };
  row({"markov-residual", markov_residual, kTol,
       kTol - markov_residual, true});
  row({"interaction-M-Xb-Z", interaction_m_xb_z, 0.0, interaction_m_xb_z,
       true});
  for (const BoundCheck& c : checks) row(c);
  return out;
}

MarkovBoundsReport verify_markov_bounds(const DiscreteJoint& joint) {
  joint.validate();
  EntropyCache ec{joint};
  constexpr unsigned M = EntropyCache::M, XB = EntropyCache::XB,
                     XT = EntropyCache::XT, Z = EntropyCache::Z;

  MarkovBoundsReport rep;
  rep.markov_residual = ec.Ic(Z, M, XB | XT);
  if (!(rep.markov_residual <= kTol)) {
    throw config_error("joint is not Markov: I(Z;M|X) = " +
                       double_repr(rep.markov_residual));
  }
  rep.interaction_m_xb_z = ec.I(M, XB) - ec.Ic(M, XB, Z);

  rep.checks.push_back(check_le("data-processing", ec.I(Z, M), ec.I(Z, XB | XT)));
  rep.checks.push_back(check_ge("tradeoff-inequality",
                                ec.I(M, XB) - ec.Ic(M, XB, Z),
                                -ec.Ic(M, XT, XB) + ec.Ic(M, XT, XB | Z)));
  rep.checks.push_back(check_eq("task-residual-identity", ec.Ic(Z, M, XB),
                                ec.Ic(M, XT, XB) - ec.Ic(M, XT, XB | Z)));
  rep.checks.push_back(
      check_ge("task-residual-entropy-bound", ec.Ic(Z, M, XB),
               ec.Ic(M, XT, XB) - (ec.H(XT | Z | XB) - ec.H(Z | XB))));
  rep.checks.push_back(check_eq("mi-chain-rule", ec.I(XT, Z | XB),
                                ec.Ic(Z, XT, XB) + ec.I(XT, XB)));
  return rep;
}

MarkovBoundsReport verify_markov_bounds(const COMRLGenerativeModel& model) {
  return verify_markov_bounds(model.compose());
}

void GaussianTaskModel::validate() const {
  COMRL_REQUIRE(dim >= 1, "latent dimension must be positive");
  COMRL_REQUIRE(!tasks.empty(), "task family must be non-empty");
  COMRL_REQUIRE(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
  for (const GaussianTask& t : tasks) {
    COMRL_REQUIRE(static_cast<int>(t.mu.size()) == dim &&
                      static_cast<int>(t.var.size()) == dim,
                  "task moments must match the latent dimension");
    for (double v : t.var) {
      COMRL_REQUIRE(v > 0.0, "singular covariance: variances must be positive");
    }
  }
}

double GaussianTaskModel::task_entropy(int i) const {
  const GaussianTask& t = tasks[static_cast<size_t>(i)];
  double log_det = 0.0;
  for (double v : t.var) log_det += std::log(v);
  const double log_2pie = std::log(2.0 * std::numbers::pi) + 1.0;
  return 0.5 * (dim * log_2pie + log_det);
}

GaussianTaskModel random_gaussian_model(int n_tasks, int dim, double delta,
                                        Rng& rng) {
  GaussianTaskModel model;
  model.dim = dim;
  model.delta = delta;
  for (int i = 0; i < n_tasks; ++i) {
    GaussianTask t;
    for (int j = 0; j < dim; ++j) {
      t.mu.push_back(rng.normal());
      t.var.push_back(rng.uniform(0.2, 3.0));
    }
    model.tasks.push_back(std::move(t));
  }
  model.validate();
  return model;
}

std::string Theorem2Report::to_csv() const {
  std::string out = "n_m,threshold,frequency,median_err,mean_err\n";
  for (const Theorem2Row& r : rows) {
    out += std::to_string(r.n_m) + ',' + double_repr(r.threshold) + ',' +
           double_repr(r.frequency) + ',' + double_repr(r.median_err) + ',' +
           double_repr(r.mean_err) + '\n';
  }
  return out;
}

Theorem2Report theorem2_experiment(const GaussianTaskModel& model,
                                   std::span<const int> n_m_grid, int trials,
                                   uint64_t seed) {
  model.validate();
  COMRL_REQUIRE(trials >= 1000, "the concentration experiment needs >= 1000 trials");
  COMRL_REQUIRE(!n_m_grid.empty(), "empty sample-size grid");

  const int n = static_cast<int>(model.tasks.size());
  std::vector<double> h(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) h[static_cast<size_t>(i)] = model.task_entropy(i);

  Theorem2Report rep;
  // Error-free population statistics: the zero-variance family must produce
  // a threshold of exactly zero and errors of exactly zero.
  rep.pop_mean = exact_mean_strided(h.data(), n, 1);
  std::vector<double> sq(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double d = h[static_cast<size_t>(i)] - rep.pop_mean;
    sq[static_cast<size_t>(i)] = d * d;
  }
  rep.pop_var = exact_mean_strided(sq.data(), n, 1);

  Rng rng(seed);
  for (int n_m : n_m_grid) {
    COMRL_REQUIRE(n_m >= 1, "sample sizes must be positive");
    Theorem2Row row;
    row.n_m = n_m;
    row.threshold = std::sqrt(rep.pop_var / (n_m * model.delta));
    std::vector<double> draw(static_cast<size_t>(n_m));
    std::vector<double> errs(static_cast<size_t>(trials));
    int64_t hits = 0;
    for (int t = 0; t < trials; ++t) {
      for (int k = 0; k < n_m; ++k) {
        draw[static_cast<size_t>(k)] = h[static_cast<size_t>(rng.uniform_int(n))];
      }
      const double sample_mean = exact_mean_strided(draw.data(), n_m, 1);
      const double err = std::abs(sample_mean - rep.pop_mean);
      errs[static_cast<size_t>(t)] = err;
      if (err <= row.threshold) ++hits;
    }
    row.frequency = static_cast<double>(hits) / trials;
    std::sort(errs.begin(), errs.end());
    row.median_err = errs[static_cast<size_t>(trials) / 2];
    row.mean_err = exact_mean_strided(errs.data(), trials, 1);
    rep.rows.push_back(row);
  }
  return rep;
}

std::string MiGapReport::to_csv() const {
  std::string out =
      "i_zm,i_zxb,i_zxt_given_xb,i_zx,spurious_fraction,chain_residual,"
      "z_bins_used,zero_cell_fraction,undersampled\n";
  out += double_repr(i_zm) + ',' + double_repr(i_zxb) + ',' +
         double_repr(i_zxt_given_xb) + ',' + double_repr(i_zx) + ',' +
         double_repr(spurious_fraction) + ',' + double_repr(chain_residual) +
         ',' + std::to_string(z_bins_used) + ',' +
         double_repr(zero_cell_fraction) + ',' + (undersampled ? '1' : '0') +
         '\n';
  return out;
}

MiGapReport empirical_mi_gap(const Encoder& enc, const OfflineDataset& ds,
                             int z_bins, Rng& rng) {
  COMRL_REQUIRE(ds.family == Family::GridGoal,
                "the plug-in decomposition needs the enumerable grid family");
  COMRL_REQUIRE(z_bins >= 2 && z_bins <= 16, "z binning needs 2..16 cells");
  const int w = ds.row_width();
  COMRL_REQUIRE(enc.cfg.input_dim == w, "encoder width does not match the dataset");

  // Per-transition embeddings: each row encodes as a context of one.
  const int d = enc.cfg.latent_dim;
  int64_t total = 0;
  for (const TaskSpec& t : ds.tasks) total += ds.buffer_of(t.task_id).count;
  COMRL_REQUIRE(total >= z_bins, "fewer transitions than z bins");
  std::vector<double> zs(static_cast<size_t>(total) * d);
  std::vector<int> m_of(static_cast<size_t>(total));
  std::vector<int> xb_of(static_cast<size_t>(total));
  std::vector<int> xt_of(static_cast<size_t>(total));

  const auto cell_of = [](std::span<const double> s) {
    const int col = static_cast<int>(std::lround(s[0]));
    const int row = static_cast<int>(std::lround(s[1]));
    COMRL_CHECK(col >= 0 && col < 5 && row >= 0 && row < 5,
                "grid observation outside the board");
    return row * 5 + col;
  };

  int64_t idx = 0;
  Tensor one_row = Tensor::matrix(1, w);
  for (size_t ti = 0; ti < ds.tasks.size(); ++ti) {
    const TaskBuffer& buf = ds.buffer_of(ds.tasks[ti].task_id);
    for (int64_t i = 0; i < buf.count; ++i, ++idx) {
      const double* src = buf.data.data() + static_cast<size_t>(i) * w;
      std::copy(src, src + w, one_row.data());
      const std::vector<double> z = encode_eval(enc, one_row);
      std::copy(z.begin(), z.end(), zs.begin() + idx * d);
      const OfflineDataset::Row r = ds.row(ds.tasks[ti].task_id, i);
      m_of[static_cast<size_t>(idx)] = static_cast<int>(ti);
      xb_of[static_cast<size_t>(idx)] = cell_of(r.s) * 4 + grid_move_index(r.a);
      xt_of[static_cast<size_t>(idx)] =
          (r.r > 0.5 ? 1 : 0) * 25 + cell_of(r.s_next);
    }
  }

  return mi_gap_from_embeddings(zs, d, m_of, xb_of, xt_of, ds.n_tasks(),
                                z_bins, rng);
}

MiGapReport mi_gap_from_embeddings(std::span<const double> zs, int dim,
                                   std::span<const int> m_of,
                                   std::span<const int> xb_of,
                                   std::span<const int> xt_of, int n_tasks,
                                   int z_bins, Rng& rng) {
  COMRL_REQUIRE(z_bins >= 2 && z_bins <= 16, "z binning needs 2..16 cells");
  COMRL_REQUIRE(dim >= 1 && n_tasks >= 1, "empty embedding or task space");
  const int d = dim;
  const int64_t n = static_cast<int64_t>(m_of.size());
  COMRL_REQUIRE(n >= z_bins, "fewer samples than z bins");
  COMRL_REQUIRE(static_cast<int64_t>(zs.size()) == n * d &&
                    static_cast<int64_t>(xb_of.size()) == n &&
                    static_cast<int64_t>(xt_of.size()) == n,
                "embedding and id arrays disagree on the sample count");
  for (int64_t i = 0; i < n; ++i) {
    COMRL_REQUIRE(m_of[static_cast<size_t>(i)] >= 0 &&
                      m_of[static_cast<size_t>(i)] < n_tasks &&
                      xb_of[static_cast<size_t>(i)] >= 0 &&
                      xb_of[static_cast<size_t>(i)] < 100 &&
                      xt_of[static_cast<size_t>(i)] >= 0 &&
                      xt_of[static_cast<size_t>(i)] < 50,
                  "sample id out of range");
  }

  // Seeded k-means over the embeddings: farthest-mass seeding then Lloyd
  // iterations, ties resolved to the lowest index, so the binning is a
  // deterministic function of (embeddings, rng state).
  const int k = z_bins;
  std::vector<double> centers(static_cast<size_t>(k) * d);
  const auto dist2 = [&](int64_t i, const double* c) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = zs[static_cast<size_t>(i) * d + j] - c[j];
      s += diff * diff;
    }
    return s;
  };
  {
    const int64_t first = rng.uniform_int(static_cast<int>(n));
    std::copy(zs.begin() + first * d, zs.begin() + (first + 1) * d,
              centers.begin());
    std::vector<double> best(static_cast<size_t>(n));
    for (int c = 1; c < k; ++c) {
      double mass = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        double b = dist2(i, centers.data());
        for (int p = 1; p < c; ++p) {
          b = std::min(b, dist2(i, centers.data() + static_cast<size_t>(p) * d));
        }
        best[static_cast<size_t>(i)] = b;
        mass += b;
      }
      int64_t pick = 0;
      if (mass > 0.0) {
        const double target = rng.uniform() * mass;
        double acc = 0.0;
        pick = n - 1;
        for (int64_t i = 0; i < n; ++i) {
          acc += best[static_cast<size_t>(i)];
          if (acc >= target) {
            pick = i;
            break;
          }
        }
      }
      std::copy(zs.begin() + pick * d, zs.begin() + (pick + 1) * d,
                centers.begin() + static_cast<size_t>(c) * d);
    }
  }
  std::vector<int> bin(static_cast<size_t>(n), 0);
  for (int iter = 0; iter < 25; ++iter) {
    bool changed = false;
    for (int64_t i = 0; i < n; ++i) {
      int arg = 0;
      double best = dist2(i, centers.data());
      for (int c = 1; c < k; ++c) {
        const double v = dist2(i, centers.data() + static_cast<size_t>(c) * d);
        if (v < best) {
          best = v;
          arg = c;
        }
      }
      if (bin[static_cast<size_t>(i)] != arg) {
        bin[static_cast<size_t>(i)] = arg;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    std::vector<double> sums(static_cast<size_t>(k) * d, 0.0);
    std::vector<int64_t> counts(static_cast<size_t>(k), 0);
    for (int64_t i = 0; i < n; ++i) {
      const int c = bin[static_cast<size_t>(i)];
      ++counts[static_cast<size_t>(c)];
      for (int j = 0; j < d; ++j) {
        sums[static_cast<size_t>(c) * d + j] += zs[static_cast<size_t>(i) * d + j];
      }
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) continue;  // keep the old center
      for (int j = 0; j < d; ++j) {
        centers[static_cast<size_t>(c) * d + j] =
            sums[static_cast<size_t>(c) * d + j] /
            static_cast<double>(counts[static_cast<size_t>(c)]);
      }
    }
  }

  // Plug-in estimates from exact counts.
  const int nm = n_tasks, nxb = 100, nxt = 50;
  std::vector<int64_t> c_triple(static_cast<size_t>(k) * nxb * nxt, 0);
  std::vector<int64_t> c_zm(static_cast<size_t>(k) * nm, 0);
  for (int64_t i = 0; i < n; ++i) {
    const int z = bin[static_cast<size_t>(i)];
    ++c_triple[(static_cast<size_t>(z) * nxb + xb_of[static_cast<size_t>(i)]) *
                   nxt +
               xt_of[static_cast<size_t>(i)]];
    ++c_zm[static_cast<size_t>(z) * nm + m_of[static_cast<size_t>(i)]];
  }
  std::vector<int64_t> c_z(static_cast<size_t>(k), 0);
  std::vector<int64_t> c_m(static_cast<size_t>(nm), 0);
  std::vector<int64_t> c_xb(static_cast<size_t>(nxb), 0);
  std::vector<int64_t> c_x(static_cast<size_t>(nxb) * nxt, 0);
  std::vector<int64_t> c_zxb(static_cast<size_t>(k) * nxb, 0);
  for (int z = 0; z < k; ++z) {
    for (int xb = 0; xb < nxb; ++xb) {
      for (int xt = 0; xt < nxt; ++xt) {
        const int64_t c =
            c_triple[(static_cast<size_t>(z) * nxb + xb) * nxt + xt];
        c_z[static_cast<size_t>(z)] += c;
        c_xb[static_cast<size_t>(xb)] += c;
        c_x[static_cast<size_t>(xb) * nxt + xt] += c;
        c_zxb[static_cast<size_t>(z) * nxb + xb] += c;
      }
    }
  }
  for (int z = 0; z < k; ++z) {
    for (int m = 0; m < nm; ++m) {
      c_m[static_cast<size_t>(m)] += c_zm[static_cast<size_t>(z) * nm + m];
    }
  }

  MiGapReport rep;
  const double h_z = entropy_of_counts(c_z, n);
  const double h_xb = entropy_of_counts(c_xb, n);
  const double h_x = entropy_of_counts(c_x, n);
  const double h_zxb = entropy_of_counts(c_zxb, n);
  const double h_zx = entropy_of_counts(c_triple, n);
  rep.i_zm = h_z + entropy_of_counts(c_m, n) - entropy_of_counts(c_zm, n);
  rep.i_zxb = h_z + h_xb - h_zxb;
  rep.i_zxt_given_xb = h_zxb + h_x - h_zx - h_xb;
  rep.i_zx = h_z + h_x - h_zx;
  rep.chain_residual = rep.i_zx - rep.i_zxb - rep.i_zxt_given_xb;
  rep.spurious_fraction = rep.i_zx > 0.0 ? rep.i_zxb / rep.i_zx : 0.0;

  int64_t obs_xb = 0, obs_xt = 0, obs_z = 0, nonzero = 0;
  for (int64_t c : c_xb) obs_xb += c > 0;
  std::vector<int64_t> c_xt(static_cast<size_t>(nxt), 0);
  for (int xb = 0; xb < nxb; ++xb) {
    for (int xt = 0; xt < nxt; ++xt) {
      c_xt[static_cast<size_t>(xt)] += c_x[static_cast<size_t>(xb) * nxt + xt];
    }
  }
  for (int64_t c : c_xt) obs_xt += c > 0;
  for (int64_t c : c_z) obs_z += c > 0;
  for (int64_t c : c_triple) nonzero += c > 0;
  rep.z_bins_used = static_cast<int>(obs_z);
  const double grid_cells = static_cast<double>(obs_z) * obs_xb * obs_xt;
  rep.zero_cell_fraction =
      1.0 - static_cast<double>(nonzero) / std::max(grid_cells, 1.0);
  rep.undersampled = rep.zero_cell_fraction > 0.5;
  return rep;
}

}  // namespace comrl
