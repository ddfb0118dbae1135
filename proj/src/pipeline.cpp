#include "comrl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>

#include "comrl/collect.hpp"
#include "comrl/optim.hpp"

namespace comrl {

namespace {

std::vector<const Tensor*> grad_ptrs(const Tape& tape,
                                     std::span<const Value> leaves) {
  std::vector<const Tensor*> out;
  out.reserve(leaves.size());
  for (Value v : leaves) out.push_back(tape.has_grad(v) ? &tape.grad(v) : nullptr);
  return out;
}

std::vector<Tensor*> mlp_ptrs(Mlp& m) {
  std::vector<Tensor*> out;
  out.reserve(m.params.size());
  for (Tensor& t : m.params) out.push_back(&t);
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

double mean_of(std::span<const double> v) {
  COMRL_CHECK(!v.empty(), "mean of an empty range");
  return exact_mean_strided(v.data(), static_cast<int>(v.size()), 1);
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path p(path);
  if (!p.has_parent_path()) return;
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  COMRL_REQUIRE(!ec, "cannot create directory: " + p.parent_path().string());
}

// All rows of one pipeline invocation, MetaMetricsRow widened with the seed
// and the per-seed wall clock.
std::vector<MetricsRow> to_rows(std::span<const MetaMetricsRow> in,
                                uint64_t seed, double elapsed_s) {
  std::vector<MetricsRow> out;
  out.reserve(in.size());
  for (const MetaMetricsRow& m : in) {
    MetricsRow r;
    r.seed = seed;
    r.step = m.step;
    r.repr_loss = m.repr_loss;
    r.actor_loss = m.actor_loss;
    r.critic_loss = m.critic_loss;
    r.iid_mean = m.iid_return;
    r.iid_std = m.iid_std;
    r.ood_mean = m.ood_return;
    r.ood_std = m.ood_std;
    r.wall_clock_s = elapsed_s;
    out.push_back(r);
  }
  return out;
}

// Ensemble-mean prediction of (r, s') for one (z, s, a) input row.
std::vector<double> ensemble_mean_prediction(const MetaModel& model,
                                             std::span<const double> z,
                                             std::span<const double> s,
                                             std::span<const double> a) {
  const int in = static_cast<int>(z.size() + s.size() + a.size());
  Tensor x = Tensor::matrix(1, in);
  int c = 0;
  for (double v : z) x.data()[c++] = v;
  for (double v : s) x.data()[c++] = v;
  for (double v : a) x.data()[c++] = v;
  std::vector<double> mean;
  for (const Mlp& dec : model.decoders) {
    const Tensor out = dec.eval(x);
    if (mean.empty()) mean.assign(static_cast<size_t>(out.numel()), 0.0);
    for (int64_t j = 0; j < out.numel(); ++j) mean[static_cast<size_t>(j)] += out[j];
  }
  const double k = static_cast<double>(model.decoders.size());
  for (double& v : mean) v /= k;
  return mean;
}

}  // namespace

ExperimentData build_experiment_data(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<TaskSpec> all = make_task_set(
      cfg.family, cfg.n_train_tasks + cfg.n_test_tasks, cfg.task_seed,
      cfg.horizon);
  ExperimentData d;
  d.train_tasks.assign(all.begin(), all.begin() + cfg.n_train_tasks);
  d.test_tasks.assign(all.begin() + cfg.n_train_tasks, all.end());
  d.train = collect_dataset(d.train_tasks, cfg.tiers, cfg.episodes_per_tier,
                            cfg.data_seed);
  d.test = collect_dataset(d.test_tasks, cfg.tiers, cfg.episodes_per_tier,
                           cfg.data_seed + 1);
  return d;
}

double dataset_mean_return(const OfflineDataset& ds) {
  std::vector<double> per_episode;
  const int r_off = ds.dim_s + ds.dim_a;
  const int w = ds.row_width();
  for (const TaskBuffer& b : ds.buffers) {
    COMRL_CHECK(b.count % ds.episode_len == 0, "ragged episode buffer");
    for (int64_t e = 0; e < b.count / ds.episode_len; ++e) {
      double total = 0.0;
      for (int t = 0; t < ds.episode_len; ++t) {
        total += b.data[static_cast<size_t>((e * ds.episode_len + t) * w + r_off)];
      }
      per_episode.push_back(total);
    }
  }
  return mean_of(per_episode);
}

PipelineResult run_pipeline(const ExperimentConfig& cfg,
                            const std::string& out_dir) {
  cfg.validate();
  ExperimentData data = build_experiment_data(cfg);

  PipelineResult res;
  res.train_tasks = data.train_tasks;
  res.test_tasks = data.test_tasks;
  for (uint64_t seed : cfg.seeds) {
    MetaConfig mc = to_meta_config(cfg, seed);
    mc.encoder.input_dim = data.train.row_width();
    const auto t0 = std::chrono::steady_clock::now();
    MetaRunResult run = meta_train(mc, data.train, &data.test);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    COMRL_CHECK(run.detach_violations == 0,
                "meta-training reported a representation gradient leak");
    const auto rows = to_rows(run.metrics, seed, elapsed);
    res.rows.insert(res.rows.end(), rows.begin(), rows.end());

    const std::string ckpt =
        out_dir + "/checkpoint_seed" + std::to_string(seed) + ".bin";
    ensure_parent_dir(ckpt);
    save_weights(ckpt, named_params(run.model));
    res.checkpoint_paths.push_back(ckpt);
    res.models.push_back(std::move(run.model));
  }

  res.metrics_path = out_dir + "/metrics.csv";
  res.timings_path = out_dir + "/timings.csv";
  res.curve_path = out_dir + "/curves.svg";
  write_text_file(res.metrics_path, metrics_csv(res.rows));
  write_text_file(res.timings_path, timings_csv(res.rows));
  write_text_file(res.curve_path,
                  learning_curve_svg(res.rows, cfg.loss + " on " +
                                                   family_name(cfg.family)));
  return res;
}

QualityResult run_quality_sweep(const ExperimentConfig& cfg,
                                std::span<const Tier> tiers,
                                std::span<const int> episodes,
                                const std::string& out_dir) {
  cfg.validate();
  COMRL_REQUIRE(!tiers.empty(), "at least one tier is required");
  COMRL_REQUIRE(episodes.size() == tiers.size(),
                "one episode count per tier is required");
  for (int e : episodes) {
    COMRL_REQUIRE(e == episodes[0],
                  "tier datasets must have equal size: episode counts differ");
    COMRL_REQUIRE(e >= 1, "episode counts must be positive");
  }

  QualityResult res;
  std::string csv = "tier,dataset_return,final_iid,final_ood\n";
  for (size_t i = 0; i < tiers.size(); ++i) {
    ExperimentConfig tc = cfg;
    tc.tiers = {tiers[i]};
    tc.episodes_per_tier = episodes[i];
    const std::string sub = out_dir + "/" + tier_name(tiers[i]);
    const PipelineResult pr = run_pipeline(tc, sub);

    QualityTierResult t;
    t.tier = tiers[i];
    t.dataset_return = dataset_mean_return(build_experiment_data(tc).train);
    t.final_iid = final_iid_mean(pr.rows);
    t.final_ood = final_ood_mean(pr.rows);
    t.rows = pr.rows;
    csv += tier_name(t.tier) + ',' + double_repr(t.dataset_return) + ',' +
           double_repr(t.final_iid) + ',' + double_repr(t.final_ood) + '\n';
    res.tiers.push_back(std::move(t));
  }
  res.csv_path = out_dir + "/quality.csv";
  write_text_file(res.csv_path, csv);
  return res;
}

AlphaSweepResult run_alpha_sweep(const ExperimentConfig& cfg,
                                 std::span<const double> ratios,
                                 bool focal_endpoint,
                                 const std::string& out_dir) {
  cfg.validate();
  COMRL_REQUIRE(!ratios.empty() || focal_endpoint,
                "the sweep grid is empty");
  AlphaSweepResult res;
  std::string csv = "label,ratio,final_iid,final_ood\n";
  auto add_point = [&](const std::string& label, double ratio,
                       const ExperimentConfig& pc) {
    const PipelineResult pr = run_pipeline(pc, out_dir + "/" + label);
    AlphaPointResult p;
    p.label = label;
    p.ratio = ratio;
    p.final_iid = final_iid_mean(pr.rows);
    p.final_ood = final_ood_mean(pr.rows);
    csv += p.label + ',' + double_repr(p.ratio) + ',' +
           double_repr(p.final_iid) + ',' + double_repr(p.final_ood) + '\n';
    res.points.push_back(std::move(p));
  };

  for (double r : ratios) {
    COMRL_REQUIRE(std::isfinite(r) && r >= 0.0,
                  "alpha sweep ratios must be finite and non-negative");
    ExperimentConfig pc = cfg;
    pc.loss = "UNICORN-SS";
    pc.meta.weights.alpha = r / (1.0 + r);
    add_point("alpha_" + double_repr(r), r, pc);
  }
  if (focal_endpoint) {
    ExperimentConfig pc = cfg;
    pc.loss = "FOCAL";
    add_point("focal_only", std::numeric_limits<double>::infinity(), pc);
  }

  res.best_index = 0;
  for (size_t i = 1; i < res.points.size(); ++i) {
    if (res.points[i].final_ood > res.points[res.best_index].final_ood) {
      res.best_index = static_cast<int>(i);
    }
  }
  res.csv_path = out_dir + "/alpha_sweep.csv";
  write_text_file(res.csv_path, csv);
  return res;
}

std::vector<ImaginaryRow> imagine_rollouts(const MetaModel& model,
                                           const OfflineDataset& ds,
                                           int task_id,
                                           std::span<const double> z,
                                           std::span<const double> sigma,
                                           int n_rollouts, int rollout_len,
                                           Rng& rng) {
  COMRL_REQUIRE(!model.decoders.empty(),
                "imaginary rollouts need the reconstruction ensemble");
  COMRL_REQUIRE(sigma.size() == z.size(),
                "noise scale must have one entry per latent dimension");
  COMRL_REQUIRE(n_rollouts >= 1 && rollout_len >= 1,
                "rollout counts must be positive");
  const TaskBuffer& buf = ds.buffer_of(task_id);
  const int w = ds.row_width();

  std::vector<ImaginaryRow> out;
  out.reserve(static_cast<size_t>(n_rollouts) * rollout_len);
  for (int k = 0; k < n_rollouts; ++k) {
    const int64_t start =
        static_cast<int64_t>(rng.uniform_int(static_cast<int>(buf.count)));
    std::vector<double> s(buf.data.begin() + start * w,
                          buf.data.begin() + start * w + ds.dim_s);
    std::vector<double> zt(z.begin(), z.end());
    for (size_t j = 0; j < zt.size(); ++j) zt[j] += sigma[j] * rng.normal();
    for (int t = 0; t < rollout_len; ++t) {
      const std::vector<double> a = model.brac.act(s, zt);
      const std::vector<double> pred =
          ensemble_mean_prediction(model, zt, s, a);
      ImaginaryRow row;
      row.z = zt;
      row.row.reserve(static_cast<size_t>(w));
      row.row.insert(row.row.end(), s.begin(), s.end());
      row.row.insert(row.row.end(), a.begin(), a.end());
      row.row.insert(row.row.end(), pred.begin(), pred.end());
      out.push_back(std::move(row));
      s.assign(pred.begin() + 1, pred.end());
    }
  }
  return out;
}

double ensemble_disagreement(const MetaModel& model, const OfflineDataset& ds,
                             int task_id, std::span<const double> z,
                             int n_samples, Rng& rng) {
  COMRL_REQUIRE(model.decoders.size() >= 2,
                "disagreement needs at least 2 reconstruction heads");
  COMRL_REQUIRE(n_samples >= 1, "n_samples must be positive");
  const TaskBuffer& buf = ds.buffer_of(task_id);
  const int w = ds.row_width();
  const int d_out = 1 + ds.dim_s;
  const int in = static_cast<int>(z.size()) + ds.dim_s + ds.dim_a;

  std::vector<double> per_sample;
  per_sample.reserve(static_cast<size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const int64_t r =
        static_cast<int64_t>(rng.uniform_int(static_cast<int>(buf.count)));
    Tensor x = Tensor::matrix(1, in);
    int c = 0;
    for (double v : z) x.data()[c++] = v;
    for (int j = 0; j < ds.dim_s + ds.dim_a; ++j) {
      x.data()[c++] = buf.data[static_cast<size_t>(r * w + j)];
    }
    std::vector<std::vector<double>> preds;
    for (const Mlp& dec : model.decoders) {
      const Tensor out = dec.eval(x);
      preds.emplace_back(out.data(), out.data() + out.numel());
    }
    double acc = 0.0;
    for (int j = 0; j < d_out; ++j) {
      double m = 0.0;
      for (const auto& p : preds) m += p[static_cast<size_t>(j)];
      m /= static_cast<double>(preds.size());
      double var = 0.0;
      for (const auto& p : preds) {
        var += (p[static_cast<size_t>(j)] - m) * (p[static_cast<size_t>(j)] - m);
      }
      acc += std::sqrt(var / static_cast<double>(preds.size()));
    }
    per_sample.push_back(acc / static_cast<double>(d_out));
  }
  return mean_of(per_sample);
}

TaskOodResult run_taskood_modelbased(const ExperimentConfig& cfg,
                                     const std::string& out_dir) {
  cfg.validate();
  COMRL_REQUIRE(cfg.taskood_ensemble >= 2,
                "the model-based protocol needs an ensemble of at least 2 "
                "reconstruction heads");
  COMRL_REQUIRE(cfg.loss_kind() == LossKind::UnicornSS,
                "the model-based protocol trains the UNICORN-SS ensemble");

  // One pool sorted by the scalar task parameter; a contiguous window
  // trains, the extremes of the sorted order are held out.
  std::vector<TaskSpec> pool = make_task_set(
      cfg.family, cfg.n_train_tasks + cfg.n_test_tasks, cfg.task_seed,
      cfg.horizon);
  COMRL_REQUIRE(pool[0].params.size() == 1,
                "tasks are not sortable by a single scalar parameter");
  std::sort(pool.begin(), pool.end(),
            [](const TaskSpec& a, const TaskSpec& b) {
              return a.params[0] < b.params[0];
            });
  for (size_t i = 0; i < pool.size(); ++i) pool[i].task_id = static_cast<int>(i);

  const int n_total = static_cast<int>(pool.size());
  const int w = cfg.taskood_window > 0 ? cfg.taskood_window : cfg.n_train_tasks;
  COMRL_REQUIRE(w >= 1 && w < n_total,
                "the training window must leave held-out tasks");
  const int held = n_total - w;
  const int lo = held / 2;

  TaskOodResult res;
  for (int i = 0; i < n_total; ++i) {
    if (i >= lo && i < lo + w) res.window_tasks.push_back(pool[static_cast<size_t>(i)]);
    else res.heldout_tasks.push_back(pool[static_cast<size_t>(i)]);
  }
  const OfflineDataset train_ds = collect_dataset(
      res.window_tasks, cfg.tiers, cfg.episodes_per_tier, cfg.data_seed);
  const OfflineDataset held_ds = collect_dataset(
      res.heldout_tasks, cfg.tiers, cfg.episodes_per_tier, cfg.data_seed + 1);

  std::string csv =
      "seed,context_only,model_based,disagreement_window,"
      "disagreement_heldout\n";
  const int d = cfg.meta.encoder.latent_dim;
  for (uint64_t seed : cfg.seeds) {
    MetaConfig mc = to_meta_config(cfg, seed);
    mc.encoder.input_dim = train_ds.row_width();
    mc.ensemble_decoders = cfg.taskood_ensemble;
    const MetaRunResult run = meta_train(mc, train_ds, &held_ds);

    Rng h(seed);
    Rng ctx_rng = h.derive(201);
    Rng sig_rng = h.derive(202);
    Rng imag_rng = h.derive(203);
    Rng ft_rng = h.derive(204);
    Rng dis_rng = h.derive(205);

    // Noise scale: configured scalar, or 0.1 x the per-dimension std of the
    // training-window embeddings.
    std::vector<std::vector<double>> window_z;
    for (const TaskSpec& t : res.window_tasks) {
      const ContextSegment seg =
          sample_context(train_ds, t.task_id, train_ds.episode_len,
                         ContextMode::IID, std::nullopt, sig_rng);
      window_z.push_back(embed_context(run.model, train_ds, seg));
    }
    std::vector<double> sigma(static_cast<size_t>(d),
                              cfg.taskood_noise_scale);
    if (cfg.taskood_noise_scale < 0.0) {
      for (int j = 0; j < d; ++j) {
        std::vector<double> col;
        for (const auto& zv : window_z) col.push_back(zv[static_cast<size_t>(j)]);
        const double m = mean_of(col);
        double var = 0.0;
        for (double v : col) var += (v - m) * (v - m);
        var /= static_cast<double>(col.size());
        sigma[static_cast<size_t>(j)] = 0.1 * std::sqrt(var);
      }
    }

    TaskOodSeedResult sr;
    sr.seed = seed;
    std::vector<double> ctx_returns, mb_returns, dis_w, dis_h;
    for (size_t wi = 0; wi < res.window_tasks.size(); ++wi) {
      dis_w.push_back(ensemble_disagreement(run.model, train_ds,
                                            res.window_tasks[wi].task_id,
                                            window_z[wi], 64, dis_rng));
    }
    for (const TaskSpec& t : res.heldout_tasks) {
      const ContextSegment seg =
          sample_context(held_ds, t.task_id, held_ds.episode_len,
                         ContextMode::IID, std::nullopt, ctx_rng);
      const std::vector<double> z = embed_context(run.model, held_ds, seg);
      ctx_returns.push_back(policy_return(run.model.brac, t, z));
      dis_h.push_back(ensemble_disagreement(run.model, held_ds, t.task_id, z,
                                            64, dis_rng));

      const std::vector<ImaginaryRow> pool_rows = imagine_rollouts(
          run.model, held_ds, t.task_id, z, sigma, cfg.taskood_rollouts,
          cfg.taskood_rollout_len, imag_rng);

      // Fine-tune a copy of the actor-critic on mixed real/imagined batches.
      BRAC ft = run.model.brac;
      std::vector<Tensor*> a_ptrs = mlp_ptrs(ft.actor);
      std::vector<Tensor*> c_ptrs = mlp_ptrs(ft.critic);
      Adam adam_a(AdamConfig{cfg.meta.lr_actor, 0.9, 0.999, 1e-8},
                  std::vector<const Tensor*>(a_ptrs.begin(), a_ptrs.end()),
                  mlp_names(ft.actor, "actor"));
      Adam adam_c(AdamConfig{cfg.meta.lr_critic, 0.9, 0.999, 1e-8},
                  std::vector<const Tensor*>(c_ptrs.begin(), c_ptrs.end()),
                  mlp_names(ft.critic, "critic"));
      const int B = cfg.meta.brac.rl_batch;
      int n_im = static_cast<int>(
          std::lround(cfg.taskood_imaginary_fraction * B));
      n_im = std::clamp(n_im, 0, B);
      const int rw = held_ds.row_width();
      for (int step = 0; step < cfg.taskood_finetune_steps; ++step) {
        TransitionBatch b;
        b.task_id = t.task_id;
        b.batch_size = B;
        Tensor z_rows = Tensor::matrix(B, d);
        int row = 0;
        if (B - n_im > 0) {
          const TransitionBatch real =
              sample_rl_batch(held_ds, t.task_id, B - n_im, ft_rng);
          b.data = real.data;
          b.terminal = real.terminal;
          for (; row < B - n_im; ++row) {
            for (int c = 0; c < d; ++c) {
              z_rows.data()[row * d + c] = z[static_cast<size_t>(c)];
            }
          }
        }
        for (int i = 0; i < n_im; ++i, ++row) {
          const ImaginaryRow& ir = pool_rows[static_cast<size_t>(
              ft_rng.uniform_int(static_cast<int>(pool_rows.size())))];
          COMRL_CHECK(static_cast<int>(ir.row.size()) == rw,
                      "imaginary row width mismatch");
          b.data.insert(b.data.end(), ir.row.begin(), ir.row.end());
          b.terminal.push_back(0);
          for (int c = 0; c < d; ++c) {
            z_rows.data()[row * d + c] = ir.z[static_cast<size_t>(c)];
          }
        }

        Tape ct;
        const std::vector<Value> c_leaves = ft.critic.make_leaves(ct);
        const Value cl = critic_loss(ct, ft, c_leaves, b, z_rows);
        COMRL_NUMERIC(std::isfinite(ct.scalar_value(cl)),
                      "non-finite critic loss during task-OOD fine-tuning");
        ct.backward(cl);

        Tape at;
        const std::vector<Value> a_leaves = ft.actor.make_leaves(at);
        const Value al = actor_loss(at, ft, a_leaves, b, z_rows);
        COMRL_NUMERIC(std::isfinite(at.scalar_value(al)),
                      "non-finite actor loss during task-OOD fine-tuning");
        at.backward(al);

        adam_a.step(a_ptrs, grad_ptrs(at, a_leaves));
        adam_c.step(c_ptrs, grad_ptrs(ct, c_leaves));
        ft.soft_update();
      }
      mb_returns.push_back(policy_return(ft, t, z));
    }

    sr.context_only = mean_of(ctx_returns);
    sr.model_based = mean_of(mb_returns);
    sr.disagreement_window = mean_of(dis_w);
    sr.disagreement_heldout = mean_of(dis_h);
    csv += std::to_string(sr.seed) + ',' + double_repr(sr.context_only) + ',' +
           double_repr(sr.model_based) + ',' +
           double_repr(sr.disagreement_window) + ',' +
           double_repr(sr.disagreement_heldout) + '\n';
    res.per_seed.push_back(sr);
  }

  std::vector<double> co, mb;
  for (const TaskOodSeedResult& s : res.per_seed) {
    co.push_back(s.context_only);
    mb.push_back(s.model_based);
  }
  res.mean_context_only = mean_of(co);
  res.mean_model_based = mean_of(mb);
  res.csv_path = out_dir + "/taskood.csv";
  write_text_file(res.csv_path, csv);
  return res;
}

std::string export_embeddings(const EmbedFn& embed, int latent_dim,
                              const OfflineDataset& ds, int contexts_per_mode,
                              int context_len, uint64_t seed) {
  COMRL_REQUIRE(latent_dim >= 1, "latent_dim must be positive");
  COMRL_REQUIRE(contexts_per_mode >= 1, "contexts_per_mode must be positive");
  COMRL_REQUIRE(!ds.checkpoints.empty(),
                "OOD export needs the checkpoint table");
  std::string csv = "task_id,origin";
  for (int j = 1; j <= latent_dim; ++j) csv += ",z" + std::to_string(j);
  csv += '\n';

  Rng rng(seed);
  auto add_row = [&](int task_id, const char* origin,
                     const ContextSegment& seg) {
    const std::vector<double> z = embed(task_id, context_matrix(ds, seg));
    COMRL_REQUIRE(static_cast<int>(z.size()) == latent_dim,
                  "embedding width does not match latent_dim");
    csv += std::to_string(task_id);
    csv += ',';
    csv += origin;
    for (double v : z) csv += ',' + double_repr(v);
    csv += '\n';
  };
  for (const TaskSpec& t : ds.tasks) {
    for (int i = 0; i < contexts_per_mode; ++i) {
      add_row(t.task_id, "iid",
              sample_context(ds, t.task_id, context_len, ContextMode::IID,
                             std::nullopt, rng));
    }
    for (int i = 0; i < contexts_per_mode; ++i) {
      const PolicyCheckpoint& ckpt =
          ds.checkpoints[static_cast<size_t>(i) % ds.checkpoints.size()];
      add_row(t.task_id, "ood",
              sample_context(ds, t.task_id, context_len, ContextMode::OOD,
                             ckpt, rng));
    }
  }
  return csv;
}

std::string export_embeddings(const MetaModel& model, const OfflineDataset& ds,
                              int contexts_per_mode, int context_len,
                              uint64_t seed) {
  const EmbedFn f = [&model](int, const Tensor& m) {
    return encode_eval(model.encoder, m);
  };
  return export_embeddings(f, model.encoder.cfg.latent_dim, ds,
                           contexts_per_mode, context_len, seed);
}

}  // namespace comrl
