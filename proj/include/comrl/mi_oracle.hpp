#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comrl/discrete_info.hpp"
#include "comrl/encoder.hpp"
#include "comrl/rng.hpp"

namespace comrl {

// Factorized discrete model of the data-generating process: a task prior,
// a weak task-to-behavior coupling, a strong task-to-outcome coupling, and
// an encoder channel that reads only the transition. Composing the factors
// yields a joint in which M -> X -> Z is a Markov chain by construction.
struct COMRLGenerativeModel {
  int n_m = 0, n_xb = 0, n_xt = 0, n_z = 0;
  std::vector<double> p_m;             // [n_m]
  std::vector<double> p_xb_given_m;    // [n_m][n_xb]
  std::vector<double> p_xt_given_xbm;  // [n_m][n_xb][n_xt]
  std::vector<double> p_z_given_x;     // [n_xb][n_xt][n_z]

  // Every conditional row sums to one within 1e-12, entries non-negative.
  void validate() const;
  DiscreteJoint compose() const;
};

// Dense random model: every factor row drawn uniformly from the simplex.
COMRLGenerativeModel random_comrl_model(int n_m, int n_xb, int n_xt, int n_z,
                                        Rng& rng);

struct BoundCheck {
  std::string name;
  double lhs = 0.0, rhs = 0.0;
  // Slack for inequalities (lhs >= rhs or lhs <= rhs), signed difference
  // for identities; pass uses a 1e-10 tolerance either way.
  double margin = 0.0;
  bool pass = false;
};

struct MarkovBoundsReport {
  double markov_residual = 0.0;     // measured I(Z;M|X) of the joint
  double interaction_m_xb_z = 0.0;  // I(M;Xb) - I(M;Xb|Z), sign-indefinite
  std::vector<BoundCheck> checks;

  bool all_pass() const;
  std::string to_csv() const;  // header plus name,lhs,rhs,margin,pass rows
};

// Exact verification of the information-theoretic relations the task-loss
// family rests on: the data-processing bound, the behavior/outcome trade-off
// inequality, and the conditional chain-rule identities. Rejects joints that
// are not Markov (I(Z;M|X) > 1e-10), reporting the measured residual.
MarkovBoundsReport verify_markov_bounds(const DiscreteJoint& joint);
MarkovBoundsReport verify_markov_bounds(const COMRLGenerativeModel& model);

// Finite family of diagonal-Gaussian task posteriors p(z|M): the population
// a supervised encoder's I(Z;M) estimate concentrates over.
struct GaussianTask {
  std::vector<double> mu;
  std::vector<double> var;  // diagonal of the covariance, all positive
};

struct GaussianTaskModel {
  int dim = 0;
  std::vector<GaussianTask> tasks;
  double delta = 0.1;  // failure probability of the concentration bound

  void validate() const;
  // 0.5 * log((2 pi e)^dim * |Sigma|); diagonal, so |Sigma| = prod var.
  double task_entropy(int i) const;
};

GaussianTaskModel random_gaussian_model(int n_tasks, int dim, double delta,
                                        Rng& rng);

struct Theorem2Row {
  int n_m = 0;
  double threshold = 0.0;   // sqrt(Var(H(Z|M)) / (n_m * delta))
  double frequency = 0.0;   // fraction of trials with |err| <= threshold
  double median_err = 0.0;
  double mean_err = 0.0;
};

struct Theorem2Report {
  double pop_mean = 0.0;  // exact population mean of H(Z|M)
  double pop_var = 0.0;   // exact population variance of H(Z|M)
  std::vector<Theorem2Row> rows;

  std::string to_csv() const;
};

// Monte Carlo check of the concentration bound: per grid value, draws n_m
// tasks uniformly with replacement, forms the sample mean of the closed-form
// per-task entropies, and measures how often it stays within the Chebyshev
// radius of the population mean. Expected frequency >= 1 - delta.
Theorem2Report theorem2_experiment(const GaussianTaskModel& model,
                                   std::span<const int> n_m_grid, int trials,
                                   uint64_t seed);

struct MiGapReport {
  double i_zm = 0.0;
  double i_zxb = 0.0;           // spurious (behavior) information
  double i_zxt_given_xb = 0.0;  // causal (outcome) information
  double i_zx = 0.0;
  double spurious_fraction = 0.0;  // i_zxb / i_zx
  double chain_residual = 0.0;     // i_zx - i_zxb - i_zxt_given_xb
  int z_bins_used = 0;
  double zero_cell_fraction = 0.0;  // of the (z, xb, xt) observed-support grid
  bool undersampled = false;        // zero_cell_fraction > 0.5

  std::string to_csv() const;
};

// Plug-in decomposition of what a trained encoder's per-transition embedding
// carries: counts over (task, behavior cell, outcome cell, z bin) with z
// discretized by seeded k-means into at most 16 cells. GridGoal only, where
// states and quantized actions are exactly enumerable. Crude as an absolute
// estimate but order-faithful for paired comparisons between encoders.
MiGapReport empirical_mi_gap(const Encoder& enc, const OfflineDataset& ds,
                             int z_bins, Rng& rng);

// Core of empirical_mi_gap on precomputed embeddings, one sample per row:
// zs is [n, dim] flat, m/xb/xt are the discrete ids per sample (xb in
// [0,100), xt in [0,50)). Lets callers feed arbitrary representations, e.g.
// task one-hots as the sufficiency upper limit.
MiGapReport mi_gap_from_embeddings(std::span<const double> zs, int dim,
                                   std::span<const int> m_of,
                                   std::span<const int> xb_of,
                                   std::span<const int> xt_of, int n_tasks,
                                   int z_bins, Rng& rng);

}  // namespace comrl
