#include "comrl/meta.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "comrl/optim.hpp"

namespace comrl {

namespace {

// Position of a task id in the dataset's task list (classifier label space).
int task_index(const OfflineDataset& ds, int task_id) {
  for (size_t i = 0; i < ds.tasks.size(); ++i) {
    if (ds.tasks[i].task_id == task_id) return static_cast<int>(i);
  }
  throw internal_error("task id not in dataset");
}

std::vector<int> draw_task_batch(const OfflineDataset& ds, int n, Rng& rng) {
  std::vector<int> ids;
  ids.reserve(ds.tasks.size());
  for (const TaskSpec& t : ds.tasks) ids.push_back(t.task_id);
  for (int k = 0; k < n; ++k) {
    const int pick = k + rng.uniform_int(static_cast<int>(ids.size()) - k);
    std::swap(ids[k], ids[pick]);
  }
  ids.resize(n);
  return ids;
}

// Uniformly chosen (s, a) row of each context, pairing one behavior sample
// with the context's embedding for the mutual-information penalty.
Tensor behavior_rows(const OfflineDataset& ds,
                     std::span<const ContextSegment> segs, Rng& rng) {
  const int xb = ds.dim_s + ds.dim_a;
  const int w = ds.row_width();
  Tensor out = Tensor::matrix(static_cast<int>(segs.size()), xb);
  for (size_t i = 0; i < segs.size(); ++i) {
    const int r = rng.uniform_int(segs[i].n);
    const double* src = segs[i].data.data() + static_cast<int64_t>(r) * w;
    for (int j = 0; j < xb; ++j) out.data()[i * xb + j] = src[j];
  }
  return out;
}

// All context rows stacked, with each row mapped back to its context index.
struct StackedRows {
  Tensor rows;
  std::vector<int> row_ctx;
};

StackedRows stack_context_rows(const OfflineDataset& ds,
                               std::span<const ContextSegment> segs) {
  const int w = ds.row_width();
  int64_t n = 0;
  for (const ContextSegment& s : segs) n += s.n;
  StackedRows out;
  out.rows = Tensor::matrix(static_cast<int>(n), w);
  out.row_ctx.reserve(static_cast<size_t>(n));
  double* dst = out.rows.data();
  for (size_t i = 0; i < segs.size(); ++i) {
    const ContextSegment& s = segs[i];
    std::copy(s.data.begin(), s.data.end(), dst);
    dst += s.data.size();
    for (int r = 0; r < s.n; ++r) out.row_ctx.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<const Tensor*> grad_ptrs(const Tape& tape,
                                     std::span<const Value> leaves) {
  std::vector<const Tensor*> out;
  out.reserve(leaves.size());
  for (Value v : leaves) {
    out.push_back(tape.has_grad(v) ? &tape.grad(v) : nullptr);
  }
  return out;
}

std::vector<Tensor*> mlp_ptrs(Mlp& m) {
  std::vector<Tensor*> out;
  out.reserve(m.params.size());
  for (Tensor& p : m.params) out.push_back(&p);
  return out;
}

std::vector<std::string> mlp_names(const Mlp& m, const std::string& prefix) {
  std::vector<std::string> out;
  for (int i = 0; i < m.n_affine(); ++i) {
    out.push_back(prefix + ".W" + std::to_string(i));
    out.push_back(prefix + ".b" + std::to_string(i));
  }
  return out;
}

// Mean and population standard deviation across tasks.
std::pair<double, double> mean_std(std::span<const double> v) {
  const double mean = exact_mean_strided(v.data(), static_cast<int>(v.size()), 1);
  std::vector<double> sq(v.size());
  for (size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const double var =
      exact_mean_strided(sq.data(), static_cast<int>(sq.size()), 1);
  return {mean, std::sqrt(var)};
}

std::pair<double, double> eval_iid_return(const MetaModel& model,
                                          const OfflineDataset& ev, Rng& rng) {
  std::vector<double> per_task;
  per_task.reserve(ev.tasks.size());
  for (const TaskSpec& t : ev.tasks) {
    ContextSegment seg = sample_context(ev, t.task_id, ev.episode_len,
                                        ContextMode::IID, std::nullopt, rng);
    const std::vector<double> z = embed_context(model, ev, seg);
    per_task.push_back(policy_return(model.brac, t, z));
  }
  return mean_std(per_task);
}

std::pair<double, double> eval_ood_return(const MetaModel& model,
                                          const OfflineDataset& ev, Rng& rng) {
  std::vector<double> per_task;
  per_task.reserve(ev.tasks.size());
  for (const TaskSpec& t : ev.tasks) {
    const auto segs =
        ood_contexts_all_checkpoints(ev, t.task_id, ev.episode_len, rng);
    COMRL_CHECK(!segs.empty(), "OOD evaluation requires a checkpoint table");
    std::vector<double> per_ckpt;
    per_ckpt.reserve(segs.size());
    for (const ContextSegment& seg : segs) {
      const std::vector<double> z = embed_context(model, ev, seg);
      per_ckpt.push_back(policy_return(model.brac, t, z));
    }
    per_task.push_back(exact_mean_strided(
        per_ckpt.data(), static_cast<int>(per_ckpt.size()), 1));
  }
  return mean_std(per_task);
}

bool params_equal(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].numel() != b[i].numel()) return false;
    for (int64_t j = 0; j < a[i].numel(); ++j) {
      if (a[i][j] != b[i][j]) return false;
    }
  }
  return true;
}

}  // namespace

std::string loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::Focal: return "FOCAL";
    case LossKind::Corro: return "CORRO";
    case LossKind::Csro: return "CSRO";
    case LossKind::UnicornSup: return "UNICORN-SUP";
    case LossKind::UnicornSS: return "UNICORN-SS";
  }
  throw internal_error("unknown loss kind");
}

LossKind loss_kind_from_name(const std::string& s) {
  if (s == "FOCAL") return LossKind::Focal;
  if (s == "CORRO") return LossKind::Corro;
  if (s == "CSRO") return LossKind::Csro;
  if (s == "UNICORN-SUP") return LossKind::UnicornSup;
  if (s == "UNICORN-SS") return LossKind::UnicornSS;
  throw config_error("unknown loss selector: " + s);
}

void MetaConfig::validate(const OfflineDataset& ds) const {
  weights.validate();
  brac.validate();
  EncoderConfig ec = encoder;
  ec.input_dim = ds.row_width();
  ec.validate();
  COMRL_REQUIRE(steps >= 1, "steps must be positive");
  COMRL_REQUIRE(task_batch >= 1 && task_batch <= ds.n_tasks(),
                "task batch must fit within the dataset's tasks");
  COMRL_REQUIRE(contexts_per_task >= 1, "contexts_per_task must be positive");
  const bool uses_metric =
      loss == LossKind::Focal || loss == LossKind::Csro ||
      (loss == LossKind::UnicornSS && weights.alpha > 0.0);
  COMRL_REQUIRE(!uses_metric || contexts_per_task >= 2,
                "the metric loss needs two contexts per task for same-task pairs");
  COMRL_REQUIRE(context_len >= 1 && context_len <= ds.episode_len,
                "context_len must fit inside one episode");
  COMRL_REQUIRE(steps_per_task_batch >= 1, "steps_per_task_batch must be positive");
  COMRL_REQUIRE(lr_encoder >= 0.0 && lr_decoder >= 0.0 && lr_actor >= 0.0 &&
                    lr_critic >= 0.0,
                "learning rates must be non-negative");
  COMRL_REQUIRE(decoder_width >= 1, "decoder_width must be positive");
  if (loss == LossKind::Corro) {
    COMRL_REQUIRE(corro_anchors >= 1, "corro_anchors must be positive");
    COMRL_REQUIRE(corro_negatives >= 1 && corro_negatives <= ds.n_tasks() - 1,
                  "corro_negatives must leave enough distinct other tasks");
  }
  COMRL_REQUIRE(club_aux_steps >= 1, "club_aux_steps must be positive");
  COMRL_REQUIRE(ensemble_decoders >= 1, "ensemble_decoders must be positive");
  COMRL_REQUIRE(eval_interval >= 0, "eval_interval must be non-negative");
  COMRL_REQUIRE(weights.kl_weight == 0.0 || encoder.gaussian_head,
                "a KL penalty requires the Gaussian encoder head");
}

MetaModel init_meta_model(const MetaConfig& cfg, const OfflineDataset& ds) {
  Rng init_rng = Rng(cfg.seed).derive(1);
  MetaModel model;
  model.loss = cfg.loss;
  EncoderConfig ec = cfg.encoder;
  ec.input_dim = ds.row_width();
  {
    Rng r = init_rng.derive(10);
    model.encoder = Encoder::init(ec, r);
  }
  const int d = ec.latent_dim;
  if (cfg.loss == LossKind::UnicornSS) {
    MlpConfig dc;
    dc.in = d + ds.dim_s + ds.dim_a;
    dc.hidden = {cfg.decoder_width};
    dc.out = 1 + ds.dim_s;
    for (int k = 0; k < cfg.ensemble_decoders; ++k) {
      Rng r = init_rng.derive(20 + static_cast<uint64_t>(k));
      model.decoders.push_back(Mlp::init(dc, r));
    }
  } else if (cfg.loss == LossKind::UnicornSup) {
    MlpConfig dc;
    dc.in = d;
    dc.hidden = {cfg.decoder_width};
    dc.out = ds.n_tasks();
    Rng r = init_rng.derive(20);
    model.decoders.push_back(Mlp::init(dc, r));
  }
  if (cfg.loss == LossKind::Csro) {
    Rng r = init_rng.derive(30);
    model.club_aux =
        ClubAux::init(ds.dim_s + ds.dim_a, d, cfg.decoder_width, r);
  }
  {
    Rng r = init_rng.derive(40);
    model.brac = BRAC::init(ds.dim_s, ds.dim_a, d, cfg.brac, r);
  }
  return model;
}

MetaRunResult meta_train(const MetaConfig& cfg, const OfflineDataset& train,
                         const OfflineDataset* eval_ds) {
  cfg.validate(train);
  const OfflineDataset& ev = eval_ds ? *eval_ds : train;
  COMRL_REQUIRE(ev.family == train.family &&
                    ev.row_width() == train.row_width() &&
                    ev.episode_len == train.episode_len,
                "evaluation dataset must match the training family and layout");

  Rng master(cfg.seed);
  Rng data_rng = master.derive(2);
  Rng repr_rng = master.derive(3);
  Rng eval_rng = master.derive(4);

  MetaRunResult res;
  MetaModel& model = res.model;
  model = init_meta_model(cfg, train);
  const int d = cfg.encoder.latent_dim;

  // Optimizers own moment state for the whole run.
  std::vector<Tensor*> enc_ptrs = model.encoder.param_ptrs();
  Adam adam_enc(AdamConfig{cfg.lr_encoder, 0.9, 0.999, 1e-8},
                std::vector<const Tensor*>(enc_ptrs.begin(), enc_ptrs.end()),
                model.encoder.param_names("encoder"));
  std::vector<Tensor*> dec_ptrs;
  std::vector<std::string> dec_names;
  for (size_t k = 0; k < model.decoders.size(); ++k) {
    const auto ptrs = mlp_ptrs(model.decoders[k]);
    dec_ptrs.insert(dec_ptrs.end(), ptrs.begin(), ptrs.end());
    const auto names =
        mlp_names(model.decoders[k], "decoder" + std::to_string(k));
    dec_names.insert(dec_names.end(), names.begin(), names.end());
  }
  std::optional<Adam> adam_dec;
  if (!dec_ptrs.empty()) {
    adam_dec.emplace(AdamConfig{cfg.lr_decoder, 0.9, 0.999, 1e-8},
                     std::vector<const Tensor*>(dec_ptrs.begin(), dec_ptrs.end()),
                     dec_names);
  }
  std::optional<Adam> adam_aux;
  std::vector<Tensor*> aux_ptrs;
  if (model.club_aux) {
    aux_ptrs = mlp_ptrs(model.club_aux->net);
    adam_aux.emplace(AdamConfig{cfg.lr_decoder, 0.9, 0.999, 1e-8},
                     std::vector<const Tensor*>(aux_ptrs.begin(), aux_ptrs.end()),
                     mlp_names(model.club_aux->net, "club_aux"));
  }
  std::vector<Tensor*> actor_ptrs = mlp_ptrs(model.brac.actor);
  Adam adam_actor(AdamConfig{cfg.lr_actor, 0.9, 0.999, 1e-8},
                  std::vector<const Tensor*>(actor_ptrs.begin(), actor_ptrs.end()),
                  mlp_names(model.brac.actor, "actor"));
  std::vector<Tensor*> critic_ptrs = mlp_ptrs(model.brac.critic);
  Adam adam_critic(AdamConfig{cfg.lr_critic, 0.9, 0.999, 1e-8},
                   std::vector<const Tensor*>(critic_ptrs.begin(), critic_ptrs.end()),
                   mlp_names(model.brac.critic, "critic"));

  const int ntb = cfg.task_batch;
  const int cpt = cfg.contexts_per_task;
  std::vector<int> tasks_now;

  // Even split of the RL batch across the step's tasks; the first
  // (rl_batch mod ntb) tasks take one extra row.
  const int rl_base = cfg.brac.rl_batch / ntb;
  const int rl_extra = cfg.brac.rl_batch % ntb;

  for (int step = 0; step < cfg.steps; ++step) {
    if (step % cfg.steps_per_task_batch == 0) {
      tasks_now = draw_task_batch(train, ntb, data_rng);
    }

    // --- Representation phase: one step on the encoder and its heads. ---
    Tape tape;
    const std::vector<Value> enc_leaves = model.encoder.make_leaves(tape);
    std::vector<ContextSegment> segs;
    std::vector<Tensor> ctx;
    std::vector<int> z_task_ids;       // task id per context row
    std::vector<int> z_task_indices;   // classifier label per context row
    segs.reserve(static_cast<size_t>(ntb) * cpt);
    ctx.reserve(segs.capacity());
    for (int j = 0; j < ntb; ++j) {
      for (int k = 0; k < cpt; ++k) {
        ContextSegment seg =
            sample_context(train, tasks_now[j], cfg.context_len,
                           ContextMode::IID, std::nullopt, data_rng);
        ctx.push_back(context_matrix(train, seg));
        segs.push_back(std::move(seg));
        z_task_ids.push_back(tasks_now[j]);
        z_task_indices.push_back(task_index(train, tasks_now[j]));
      }
    }
    const Value head = encode_batch(tape, model.encoder, enc_leaves, ctx);
    std::optional<GaussianHead> gh;
    Value z = head;
    if (model.encoder.cfg.gaussian_head) {
      gh = split_gaussian(tape, model.encoder, head);
      z = reparam_sample(tape, model.encoder, *gh, repr_rng);
    }

    Value repr{};             // the objective the encoder minimizes
    Value root{};             // repr plus any auxiliary-head fits
    std::vector<Value> dec_leaves;
    Tensor xb;                // Csro behavior rows, reused by the aux fit
    switch (cfg.loss) {
      case LossKind::Focal: {
        repr = focal_loss(tape, z, z_task_ids, cfg.weights);
        root = repr;
        break;
      }
      case LossKind::Corro: {
        const CorroBatch cb =
            build_corro_batch(train, segs, cfg.corro_negatives,
                              cfg.corro_anchors, repr_rng);
        repr = corro_loss(tape, model.encoder, enc_leaves, cb, z, cfg.weights);
        root = repr;
        break;
      }
      case LossKind::Csro: {
        xb = behavior_rows(train, segs, repr_rng);
        const Value fv = focal_loss(tape, z, z_task_ids, cfg.weights);
        const Value cv = club_loss(tape, *model.club_aux, z, xb);
        repr = csro_loss(tape, fv, cv, cfg.weights);
        root = repr;
        break;
      }
      case LossKind::UnicornSup: {
        dec_leaves = model.decoders[0].make_leaves(tape);
        const Value logits = model.decoders[0].forward(tape, z, dec_leaves);
        repr = cross_entropy_loss(tape, logits, z_task_indices);
        root = repr;
        break;
      }
      case LossKind::UnicornSS: {
        const StackedRows sr = stack_context_rows(train, segs);
        dec_leaves = model.decoders[0].make_leaves(tape);
        const Value recon =
            recon_loss(tape, model.decoders[0], dec_leaves, z, sr.row_ctx,
                       sr.rows, train.dim_s, train.dim_a);
        std::optional<Value> fv;
        if (cfg.weights.alpha > 0.0) {
          fv = focal_loss(tape, z, z_task_ids, cfg.weights);
        }
        repr = unicorn_ss_loss(tape, recon, fv, cfg.weights);
        root = repr;
        // Extra ensemble members fit the same targets from their own
        // initializations; the embedding enters their graphs as data so the
        // encoder sees only the canonical objective.
        if (model.decoders.size() > 1) {
          const Value zc = tape.constant(tape.value(z));
          for (size_t k = 1; k < model.decoders.size(); ++k) {
            std::vector<Value> lk = model.decoders[k].make_leaves(tape);
            const Value rk =
                recon_loss(tape, model.decoders[k], lk, zc, sr.row_ctx,
                           sr.rows, train.dim_s, train.dim_a);
            dec_leaves.insert(dec_leaves.end(), lk.begin(), lk.end());
            root = tape.add(root, rk);
          }
        }
        break;
      }
    }
    if (cfg.weights.kl_weight > 0.0) {
      const Value kl = tape.scale(kl_penalty(tape, model.encoder, *gh),
                                  cfg.weights.kl_weight);
      repr = tape.add(repr, kl);
      root = tape.add(root, kl);
    }

    const double repr_val = tape.scalar_value(repr);
    COMRL_NUMERIC(std::isfinite(repr_val),
                  "non-finite " + loss_kind_name(cfg.loss) +
                      " representation loss at step " + std::to_string(step));
    tape.backward(root);
    {
      const auto eg = grad_ptrs(tape, enc_leaves);
      adam_enc.step(enc_ptrs, eg);
      if (adam_dec) {
        // dec_leaves pairs with dec_ptrs positionally; losses that use no
        // decoder leave it empty and the grads default to null (= zero).
        std::vector<const Tensor*> dg(dec_ptrs.size(), nullptr);
        const auto have = grad_ptrs(tape, dec_leaves);
        std::copy(have.begin(), have.end(), dg.begin());
        adam_dec->step(dec_ptrs, dg);
      }
    }

    // Detached task embeddings for the RL phase: plain tensors copied out of
    // the graph, one per task (its first context's row).
    Tensor z_values = tape.value(z);

    // Alternating fit of the variational net against the embeddings.
    if (cfg.loss == LossKind::Csro) {
      for (int t = 0; t < cfg.club_aux_steps; ++t) {
        Tape aux_tape;
        const std::vector<Value> aux_leaves =
            model.club_aux->net.make_leaves(aux_tape);
        const Value nll = club_aux_nll(aux_tape, *model.club_aux, aux_leaves,
                                       xb, z_values);
        COMRL_NUMERIC(std::isfinite(aux_tape.scalar_value(nll)),
                      "non-finite CLUB auxiliary loss at step " +
                          std::to_string(step));
        aux_tape.backward(nll);
        const auto ag = grad_ptrs(aux_tape, aux_leaves);
        adam_aux->step(aux_ptrs, ag);
      }
    }

    // --- RL phase: one actor and one critic step on detached embeddings. ---
    const std::vector<Tensor> enc_before = model.encoder.phi.params;
    const std::vector<Tensor> enc_before_rho = model.encoder.rho.params;

    TransitionBatch big;
    big.task_id = -1;
    big.batch_size = cfg.brac.rl_batch;
    big.data.reserve(static_cast<size_t>(cfg.brac.rl_batch) * train.row_width());
    Tensor z_rows = Tensor::matrix(cfg.brac.rl_batch, d);
    int row = 0;
    for (int j = 0; j < ntb; ++j) {
      const int nb = rl_base + (j < rl_extra ? 1 : 0);
      if (nb == 0) continue;
      const TransitionBatch part =
          sample_rl_batch(train, tasks_now[j], nb, data_rng);
      big.data.insert(big.data.end(), part.data.begin(), part.data.end());
      big.terminal.insert(big.terminal.end(), part.terminal.begin(),
                          part.terminal.end());
      const double* zrow =
          z_values.data() + static_cast<int64_t>(j) * cpt * z_values.cols();
      for (int i = 0; i < nb; ++i, ++row) {
        for (int c = 0; c < d; ++c) z_rows.data()[row * d + c] = zrow[c];
      }
    }
    COMRL_CHECK(row == cfg.brac.rl_batch, "RL batch split mismatch");

    Tape ct;
    const std::vector<Value> c_leaves = model.brac.critic.make_leaves(ct);
    const Value cl = critic_loss(ct, model.brac, c_leaves, big, z_rows);
    const double critic_val = ct.scalar_value(cl);
    COMRL_NUMERIC(std::isfinite(critic_val),
                  "non-finite critic loss at step " + std::to_string(step));
    ct.backward(cl);
    if (ct.n_grad_leaves() != static_cast<int>(c_leaves.size())) {
      ++res.detach_violations;
      throw internal_error("critic loss reached parameters beyond the critic");
    }

    Tape at;
    const std::vector<Value> a_leaves = model.brac.actor.make_leaves(at);
    const Value al = actor_loss(at, model.brac, a_leaves, big, z_rows);
    const double actor_val = at.scalar_value(al);
    COMRL_NUMERIC(std::isfinite(actor_val),
                  "non-finite actor loss at step " + std::to_string(step));
    at.backward(al);
    if (at.n_grad_leaves() != static_cast<int>(a_leaves.size())) {
      ++res.detach_violations;
      throw internal_error("actor loss reached parameters beyond the actor");
    }

    adam_actor.step(actor_ptrs, grad_ptrs(at, a_leaves));
    adam_critic.step(critic_ptrs, grad_ptrs(ct, c_leaves));
    model.brac.soft_update();

    if (!params_equal(enc_before, model.encoder.phi.params) ||
        !params_equal(enc_before_rho, model.encoder.rho.params)) {
      ++res.detach_violations;
      throw internal_error(
          "encoder parameters changed during the actor/critic phase");
    }

    const bool last = step + 1 == cfg.steps;
    const bool at_interval =
        cfg.eval_interval > 0 && (step + 1) % cfg.eval_interval == 0;
    if (at_interval || last) {
      MetaMetricsRow r;
      r.step = step + 1;
      r.repr_loss = repr_val;
      r.actor_loss = actor_val;
      r.critic_loss = critic_val;
      std::tie(r.iid_return, r.iid_std) = eval_iid_return(model, ev, eval_rng);
      std::tie(r.ood_return, r.ood_std) = eval_ood_return(model, ev, eval_rng);
      res.metrics.push_back(r);
    }
  }
  return res;
}

double policy_return(const BRAC& brac, const TaskSpec& task,
                     std::span<const double> z) {
  COMRL_CHECK(static_cast<int>(z.size()) == brac.dim_z,
              "policy_return: wrong latent dim");
  EnvState st = env_reset(task, 0);
  double total = 0.0;
  for (int t = 0; t < task.horizon; ++t) {
    const std::vector<double> obs = observe(task, st);
    COMRL_CHECK(static_cast<int>(obs.size()) == brac.dim_s,
                "policy_return: observation does not match the policy");
    const std::vector<double> a = brac.act(obs, z);
    const StepResult r = env_step(task, st, a);
    total += r.reward;
    st = r.next;
  }
  return total;
}

std::vector<double> embed_context(const MetaModel& model,
                                  const OfflineDataset& ds,
                                  const ContextSegment& seg) {
  return encode_eval(model.encoder, context_matrix(ds, seg));
}

double meta_test(const MetaModel& model, const OfflineDataset& ds, int task_id,
                 ContextMode mode, const std::optional<PolicyCheckpoint>& ckpt,
                 Rng& rng) {
  COMRL_REQUIRE(model.encoder.cfg.input_dim == ds.row_width(),
                "meta_test: context width does not match the encoder");
  COMRL_REQUIRE(model.brac.dim_s == ds.dim_s && model.brac.dim_a == ds.dim_a,
                "meta_test: dataset family does not match the policy");
  ContextSegment seg =
      sample_context(ds, task_id, ds.episode_len, mode, ckpt, rng);
  const std::vector<double> z = embed_context(model, ds, seg);
  return policy_return(model.brac, ds.task_of(task_id), z);
}

std::vector<NamedTensor> named_params(const MetaModel& model) {
  std::vector<NamedTensor> out;
  append_named(out, "encoder.phi", model.encoder.phi);
  append_named(out, "encoder.rho", model.encoder.rho);
  for (size_t k = 0; k < model.decoders.size(); ++k) {
    append_named(out, "decoder" + std::to_string(k), model.decoders[k]);
  }
  if (model.club_aux) append_named(out, "club_aux", model.club_aux->net);
  append_named(out, "actor", model.brac.actor);
  append_named(out, "critic", model.brac.critic);
  append_named(out, "critic_target", model.brac.critic_target);
  return out;
}

void restore_params(MetaModel& model, const std::vector<NamedTensor>& tensors) {
  restore_named(tensors, "encoder.phi", model.encoder.phi);
  restore_named(tensors, "encoder.rho", model.encoder.rho);
  for (size_t k = 0; k < model.decoders.size(); ++k) {
    restore_named(tensors, "decoder" + std::to_string(k), model.decoders[k]);
  }
  if (model.club_aux) restore_named(tensors, "club_aux", model.club_aux->net);
  restore_named(tensors, "actor", model.brac.actor);
  restore_named(tensors, "critic", model.brac.critic);
  restore_named(tensors, "critic_target", model.brac.critic_target);
}

}  // namespace comrl
