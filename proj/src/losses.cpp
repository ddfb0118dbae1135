#include "comrl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "comrl/common.hpp"

namespace comrl {

void LossWeights::validate() const {
  COMRL_REQUIRE(alpha >= 0.0 && alpha < 1.0,
                "alpha must lie in [0, 1); the mix coefficient alpha/(1-alpha) "
                "is undefined at alpha = 1");
  COMRL_REQUIRE(focal_beta > 0.0, "focal_beta must be positive");
  COMRL_REQUIRE(focal_exponent >= 2 && focal_exponent % 2 == 0,
                "focal_exponent must be a positive even integer");
  COMRL_REQUIRE(focal_eps > 0.0, "focal_eps must be positive");
  COMRL_REQUIRE(lambda_club >= 0.0, "lambda_club must be non-negative");
  COMRL_REQUIRE(tau > 0.0, "tau must be positive");
  COMRL_REQUIRE(kl_weight >= 0.0, "kl_weight must be non-negative");
}

Value focal_loss(Tape& tape, Value z, std::span<const int> task_ids,
                 const LossWeights& w) {
  w.validate();
  const Tensor& zv = tape.value(z);
  const int b = zv.rows();
  COMRL_REQUIRE(b >= 2, "focal_loss needs at least two latents");
  COMRL_REQUIRE(static_cast<int>(task_ids.size()) == b,
                "focal_loss: one task label per latent row required");

  std::vector<int> ai, bi;
  const int pairs = b * (b - 1);
  ai.reserve(pairs);
  bi.reserve(pairs);
  Tensor same = Tensor::matrix(pairs, 1);
  Tensor diff = Tensor::matrix(pairs, 1);
  int p = 0;
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) {
      if (i == j) continue;
      ai.push_back(i);
      bi.push_back(j);
      const bool same_task = task_ids[i] == task_ids[j];
      same[p] = same_task ? 1.0 : 0.0;
      diff[p] = same_task ? 0.0 : 1.0;
      ++p;
    }

  Value za = tape.gather_rows(z, std::move(ai));
  Value zb = tape.gather_rows(z, std::move(bi));
  Value d2 = tape.sqdist_rows(za, zb);

  Value attract = tape.mul(d2, tape.constant(std::move(same)));

  // ||z_i - z_j||^n as a power of the squared distance (n even).
  Value pw = d2;
  for (int h = 1; h < w.focal_exponent / 2; ++h) pw = tape.mul(pw, d2);
  Value denom = tape.add_const(pw, w.focal_eps);
  Value repulse = tape.mul(tape.scale(tape.reciprocal_pos(denom), w.focal_beta),
                           tape.constant(std::move(diff)));

  return tape.mean_all(tape.add(attract, repulse));
}

Value info_nce(Tape& tape, Value scores) {
  const Tensor& sv = tape.value(scores);
  COMRL_REQUIRE(sv.rank() == 2 && sv.rows() >= 1,
                "info_nce: scores must be a non-empty matrix");
  COMRL_REQUIRE(sv.cols() >= 2, "info_nce needs at least one negative");
  Value ls = tape.log_softmax(scores);
  Value pos = tape.slice_cols(ls, 0, 1);
  return tape.neg(tape.mean_all(pos));
}

CorroBatch build_corro_batch(const OfflineDataset& ds,
                             std::span<const ContextSegment> contexts,
                             int k_negatives, int anchors_per_task, Rng& rng) {
  COMRL_REQUIRE(!contexts.empty(), "contrastive batch needs contexts");
  COMRL_REQUIRE(k_negatives >= 1, "k_negatives must be positive");
  COMRL_REQUIRE(anchors_per_task >= 1, "anchors_per_task must be positive");
  COMRL_REQUIRE(k_negatives <= ds.n_tasks() - 1,
                "k_negatives exceeds the number of other tasks");

  const int w = ds.row_width();
  CorroBatch out;
  out.k = k_negatives;
  std::vector<double> rows;
  for (int ci = 0; ci < static_cast<int>(contexts.size()); ++ci) {
    const ContextSegment& seg = contexts[ci];
    const TaskSpec& own = ds.task_of(seg.task_id);
    // Candidate negative tasks: every other task id, in task order.
    std::vector<int> others;
    others.reserve(ds.n_tasks() - 1);
    for (const TaskSpec& t : ds.tasks)
      if (t.task_id != seg.task_id) others.push_back(t.task_id);

    const int anchors = std::min(anchors_per_task, seg.n);
    for (int a = 0; a < anchors; ++a) {
      const double* r = seg.data.data() + static_cast<int64_t>(a) * w;
      Transition tr;
      tr.s.assign(r, r + ds.dim_s);
      tr.a.assign(r + ds.dim_s, r + ds.dim_s + ds.dim_a);
      tr.r = r[ds.dim_s + ds.dim_a];
      tr.s_next.assign(r + ds.dim_s + ds.dim_a + 1, r + w);

      rows.insert(rows.end(), r, r + w);
      // Partial Fisher-Yates: the first k entries become a uniform
      // without-replacement draw of negative tasks.
      for (int k = 0; k < k_negatives; ++k) {
        const int pick = k + rng.uniform_int(static_cast<int>(others.size()) - k);
        std::swap(others[k], others[pick]);
        const Transition neg = relabel(tr, own, ds.task_of(others[k]));
        rows.insert(rows.end(), neg.s.begin(), neg.s.end());
        rows.insert(rows.end(), neg.a.begin(), neg.a.end());
        rows.push_back(neg.r);
        rows.insert(rows.end(), neg.s_next.begin(), neg.s_next.end());
      }
      out.group_task.push_back(ci);
      ++out.n_groups;
    }
  }
  out.rows = Tensor({out.n_groups * (1 + k_negatives), w}, rows);
  return out;
}

Value corro_loss(Tape& tape, const Encoder& enc, std::span<const Value> enc_leaves,
                 const CorroBatch& batch, Value z_batch, const LossWeights& w) {
  w.validate();
  COMRL_REQUIRE(batch.n_groups >= 1, "contrastive batch is empty");
  const Tensor& zv = tape.value(z_batch);
  COMRL_REQUIRE(zv.cols() == enc.cfg.latent_dim,
                "corro_loss expects latent rows of width latent_dim");
  COMRL_CHECK(static_cast<int>(enc_leaves.size()) == enc.n_leaves(),
              "corro_loss: leaf count mismatch");

  const auto phi_leaves = enc_leaves.subspan(0, enc.phi.params.size());
  const auto rho_leaves = enc_leaves.subspan(enc.phi.params.size());
  // g(x) for every anchor and negative at once. A single transition pools to
  // itself, so phi then rho on raw rows equals encoding length-1 contexts.
  Value x = tape.constant(batch.rows);
  Value g = enc.rho.forward(tape, enc.phi.forward(tape, x, phi_leaves), rho_leaves);
  if (enc.cfg.gaussian_head) g = tape.slice_cols(g, 0, enc.cfg.latent_dim);

  const int per_group = 1 + batch.k;
  std::vector<int> zidx(static_cast<size_t>(batch.n_groups) * per_group);
  for (int gi = 0; gi < batch.n_groups; ++gi) {
    COMRL_REQUIRE(batch.group_task[gi] >= 0 && batch.group_task[gi] < zv.rows(),
                  "corro_loss: group refers to a missing latent row");
    for (int r = 0; r < per_group; ++r)
      zidx[static_cast<size_t>(gi) * per_group + r] = batch.group_task[gi];
  }
  Value ze = tape.gather_rows(z_batch, std::move(zidx));
  Value scores = tape.scale(tape.row_sum(tape.mul(g, ze)), 1.0 / w.tau);
  return info_nce(tape, tape.reshape(scores, {batch.n_groups, per_group}));
}

ClubAux ClubAux::init(int xb_dim, int latent_dim, int width, Rng& rng) {
  COMRL_REQUIRE(xb_dim >= 1 && latent_dim >= 1 && width >= 1,
                "club aux dims must be positive");
  ClubAux aux;
  aux.latent_dim = latent_dim;
  MlpConfig cfg;
  cfg.in = xb_dim;
  cfg.hidden = {width};
  cfg.out = 2 * latent_dim;
  aux.net = Mlp::init(cfg, rng);
  return aux;
}

namespace {

// Row-wise diagonal-Gaussian log-likelihood log q(z | mu, lv), one scalar
// per row.
Value gaussian_row_ll(Tape& tape, Value zv, Value mu, Value lv, int d) {
  Value diff = tape.sub(zv, mu);
  Value sq = tape.mul(diff, diff);
  Value prec = tape.exp(tape.neg(lv));
  Value q = tape.add(tape.mul(sq, prec), lv);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  return tape.scale(tape.add_const(tape.row_sum(q), d * log2pi), -0.5);
}

struct AuxHeads {
  Value mu, lv;
};

AuxHeads aux_forward(Tape& tape, const ClubAux& aux,
                     std::span<const Value> leaves, const Tensor& xb) {
  COMRL_REQUIRE(xb.rank() == 2 && xb.cols() == aux.net.cfg.in,
                "club: behavior input width does not match the aux net");
  Value out = aux.net.forward(tape, tape.constant(xb), leaves);
  AuxHeads h;
  h.mu = tape.slice_cols(out, 0, aux.latent_dim);
  h.lv = tape.slice_cols(out, aux.latent_dim, 2 * aux.latent_dim);
  COMRL_NUMERIC(all_finite(tape.value(h.lv)),
                "club aux produced a non-finite log-variance");
  return h;
}

}  // namespace

Value club_loss(Tape& tape, const ClubAux& aux, Value z, const Tensor& xb) {
  const Tensor& zv = tape.value(z);
  const int b = zv.rows();
  const int d = aux.latent_dim;
  COMRL_REQUIRE(zv.cols() == d, "club: latent width mismatch");
  COMRL_REQUIRE(xb.rows() == b, "club: one behavior row per latent required");

  // The aux net enters as constants: the bound's gradient flows into z only.
  std::vector<Value> const_leaves;
  const_leaves.reserve(aux.net.params.size());
  for (const Tensor& t : aux.net.params) const_leaves.push_back(tape.constant(t));
  AuxHeads h = aux_forward(tape, aux, const_leaves, xb);

  // Matched log-likelihoods log q(z_i | xb_i), one per sample.
  Value ll_diag = gaussian_row_ll(tape, z, h.mu, h.lv, d);

  // All pairs log q(z_j | xb_i), row index r = i*b + j.
  std::vector<int> idx_i(static_cast<size_t>(b) * b), idx_j(idx_i.size());
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) {
      idx_i[static_cast<size_t>(i) * b + j] = i;
      idx_j[static_cast<size_t>(i) * b + j] = j;
    }
  Value zj = tape.gather_rows(z, std::move(idx_j));
  Value mi = tape.gather_rows(h.mu, idx_i);
  Value li = tape.gather_rows(h.lv, idx_i);
  Value ll_all = gaussian_row_ll(tape, zj, mi, li, d);

  // mean_i[ll_diag_i - mean_j ll_all_ij] as one exact mean of pairwise
  // differences: entries (i,j) and (j,i) cancel exactly when every xb row is
  // identical, so the bound is exactly zero there.
  Value tiled = tape.gather_rows(ll_diag, std::move(idx_i));
  return tape.mean_all(tape.sub(tiled, ll_all));
}

Value club_aux_nll(Tape& tape, const ClubAux& aux,
                   std::span<const Value> aux_leaves, const Tensor& xb,
                   const Tensor& z) {
  COMRL_REQUIRE(z.rank() == 2 && z.cols() == aux.latent_dim,
                "club fit: latent width mismatch");
  COMRL_REQUIRE(xb.rows() == z.rows(), "club fit: row count mismatch");
  AuxHeads h = aux_forward(tape, aux, aux_leaves, xb);
  Value ll = gaussian_row_ll(tape, tape.constant(z), h.mu, h.lv, aux.latent_dim);
  return tape.neg(tape.mean_all(ll));
}

Value csro_loss(Tape& tape, Value focal, Value club, const LossWeights& w) {
  w.validate();
  return tape.add(focal, tape.scale(club, w.lambda_club));
}

Value cross_entropy_loss(Tape& tape, Value logits, std::span<const int> labels) {
  const Tensor& lv = tape.value(logits);
  COMRL_REQUIRE(lv.rank() == 2 && lv.rows() >= 1, "cross_entropy: empty logits");
  const int b = lv.rows(), c = lv.cols();
  COMRL_REQUIRE(static_cast<int>(labels.size()) == b,
                "cross_entropy: one label per row required");
  Tensor onehot = Tensor::matrix(b, c);
  for (int i = 0; i < b; ++i) {
    COMRL_REQUIRE(labels[i] >= 0 && labels[i] < c,
                  "cross_entropy: label outside the class range");
    onehot.at(i, labels[i]) = 1.0;
  }
  Value ls = tape.log_softmax(logits);
  Value picked = tape.row_sum(tape.mul(ls, tape.constant(std::move(onehot))));
  return tape.neg(tape.mean_all(picked));
}

Value recon_loss(Tape& tape, const Mlp& decoder,
                 std::span<const Value> dec_leaves, Value z_batch,
                 std::span<const int> row_task, const Tensor& rows, int dim_s,
                 int dim_a) {
  const int w = dim_s + dim_a + 1 + dim_s;
  COMRL_REQUIRE(rows.rank() == 2 && rows.cols() == w,
                "recon_loss: transition width does not match the family dims");
  const int n = rows.rows();
  COMRL_REQUIRE(n >= 1, "recon_loss: empty transition batch");
  COMRL_REQUIRE(static_cast<int>(row_task.size()) == n,
                "recon_loss: one latent index per transition required");
  const Tensor& zv = tape.value(z_batch);
  COMRL_REQUIRE(decoder.cfg.in == zv.cols() + dim_s + dim_a,
                "decoder input dim must be latent_dim + dim_s + dim_a");
  COMRL_REQUIRE(decoder.cfg.out == 1 + dim_s,
                "decoder output dim must be 1 + dim_s");

  std::vector<int> idx(row_task.begin(), row_task.end());
  for (int i : idx)
    COMRL_REQUIRE(i >= 0 && i < zv.rows(),
                  "recon_loss: latent index out of range");
  Value zr = tape.gather_rows(z_batch, std::move(idx));
  Value xc = tape.constant(rows);
  Value sa = tape.slice_cols(xc, 0, dim_s + dim_a);
  std::vector<Value> parts = {zr, sa};
  Value pred = decoder.forward(tape, tape.concat_cols(parts), dec_leaves);
  Value target = tape.slice_cols(xc, dim_s + dim_a, w);
  Value diff = tape.sub(pred, target);
  return tape.mean_all(tape.mul(diff, diff));
}

Value unicorn_ss_loss(Tape& tape, Value recon, std::optional<Value> focal,
                      const LossWeights& w) {
  w.validate();
  if (w.alpha == 0.0) return recon;
  COMRL_REQUIRE(focal.has_value(),
                "unicorn_ss_loss with alpha > 0 needs the metric term");
  const double coef = w.alpha / (1.0 - w.alpha);
  return tape.add(recon, tape.scale(*focal, coef));
}

Value kl_penalty(Tape& tape, const Encoder& enc, const GaussianHead& head) {
  COMRL_REQUIRE(enc.cfg.gaussian_head,
                "kl_penalty requires the Gaussian encoder head");
  const int d = enc.cfg.latent_dim;
  Value t = tape.sub(tape.add(tape.exp(head.log_var),
                              tape.mul(head.mean, head.mean)),
                     head.log_var);
  Value m = tape.mean_all(tape.row_sum(t));
  return tape.add_const(tape.scale(m, 0.5), -0.5 * static_cast<double>(d));
}

}  // namespace comrl
