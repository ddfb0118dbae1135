#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "comrl/mi_oracle.hpp"
#include "comrl/pipeline.hpp"
#include "comrl/tape.hpp"

namespace {

using namespace comrl;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<uint64_t> seeds;
  std::string loss;
};

void add_common(CLI::App* sub, CommonArgs& a, bool needs_config) {
  auto* c = sub->add_option("--config", a.config_path,
                            "JSON experiment config file");
  if (needs_config) c->required();
  sub->add_option("--out", a.out_dir, "output directory");
  sub->add_option("--seed", a.seeds, "seed list override");
  sub->add_option("--loss", a.loss, "loss selector override");
}

ExperimentConfig load_with_overrides(const CommonArgs& a) {
  ExperimentConfig cfg = load_experiment_config(a.config_path);
  if (!a.seeds.empty()) cfg.seeds = a.seeds;
  if (!a.loss.empty()) cfg.loss = a.loss;
  cfg.validate();
  return cfg;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double m = exact_mean_strided(v.data(), static_cast<int>(v.size()), 1);
  std::vector<double> sq;
  for (double x : v) sq.push_back((x - m) * (x - m));
  return {m, std::sqrt(exact_mean_strided(sq.data(),
                                          static_cast<int>(sq.size()), 1))};
}

// Rebuilds the per-seed model from its saved checkpoint and re-runs the
// held-out-task evaluation (one adaptation episode per context).
void cmd_eval(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ExperimentData data = build_experiment_data(cfg);
  std::string csv = "seed,iid_mean,iid_std,ood_mean,ood_std\n";
  for (uint64_t seed : cfg.seeds) {
    MetaConfig mc = to_meta_config(cfg, seed);
    mc.encoder.input_dim = data.train.row_width();
    MetaModel model = init_meta_model(mc, data.train);
    const std::string ckpt =
        out_dir + "/checkpoint_seed" + std::to_string(seed) + ".bin";
    restore_params(model, load_weights(ckpt));

    Rng rng = Rng(seed).derive(4);
    std::vector<double> iid, ood;
    for (const TaskSpec& t : data.test_tasks) {
      iid.push_back(
          meta_test(model, data.test, t.task_id, ContextMode::IID, std::nullopt, rng));
      std::vector<double> per_ckpt;
      for (const PolicyCheckpoint& c : data.test.checkpoints) {
        per_ckpt.push_back(
            meta_test(model, data.test, t.task_id, ContextMode::OOD, c, rng));
      }
      ood.push_back(exact_mean_strided(per_ckpt.data(),
                                       static_cast<int>(per_ckpt.size()), 1));
    }
    const auto [im, is] = mean_std(iid);
    const auto [om, os] = mean_std(ood);
    csv += std::to_string(seed) + ',' + double_repr(im) + ',' +
           double_repr(is) + ',' + double_repr(om) + ',' + double_repr(os) +
           '\n';
    std::cout << "seed " << seed << ": IID " << im << " +- " << is << ", OOD "
              << om << " +- " << os << "\n";
  }
  write_text_file(out_dir + "/eval.csv", csv);
  std::cout << "wrote " << out_dir << "/eval.csv\n";
}

void cmd_oracle(const std::string& out_dir) {
  Rng rng(1);
  int models = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const COMRLGenerativeModel m = random_comrl_model(4, 4, 4, 4, rng);
    const MarkovBoundsReport rep = verify_markov_bounds(m);
    COMRL_CHECK(rep.all_pass(), "information bound violated on model " +
                                    std::to_string(trial));
    ++models;
  }
  Rng show(2);
  const MarkovBoundsReport rep =
      verify_markov_bounds(random_comrl_model(4, 4, 4, 4, show));
  write_text_file(out_dir + "/bounds.csv", rep.to_csv());

  Rng grng(3);
  const GaussianTaskModel gm = random_gaussian_model(12, 3, 0.1, grng);
  const std::vector<int> grid = {5, 20, 80};
  const Theorem2Report t2 = theorem2_experiment(gm, grid, 10000, 4);
  write_text_file(out_dir + "/theorem2.csv", t2.to_csv());

  std::cout << "verified information bounds on " << models
            << " random generative models\n";
  for (const Theorem2Row& r : t2.rows) {
    std::cout << "n_M=" << r.n_m << ": concentration frequency " << r.frequency
              << ", median error " << r.median_err << "\n";
  }
  std::cout << "wrote " << out_dir << "/bounds.csv and " << out_dir
            << "/theorem2.csv\n";
}

void cmd_export(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ExperimentData data = build_experiment_data(cfg);
  for (uint64_t seed : cfg.seeds) {
    MetaConfig mc = to_meta_config(cfg, seed);
    mc.encoder.input_dim = data.train.row_width();
    MetaModel model = init_meta_model(mc, data.train);
    const std::string ckpt =
        out_dir + "/checkpoint_seed" + std::to_string(seed) + ".bin";
    restore_params(model, load_weights(ckpt));
    const std::string path =
        out_dir + "/embeddings_seed" + std::to_string(seed) + ".csv";
    write_text_file(path, export_embeddings(model, data.test, 10,
                                            cfg.meta.context_len, seed));
    std::cout << "wrote " << path << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale laboratory for context-based offline meta-RL"};
  app.require_subcommand(1);

  CommonArgs a;
  CLI::App* collect = app.add_subcommand(
      "collect", "Collect the offline datasets and save them to disk");
  add_common(collect, a, true);
  CLI::App* train = app.add_subcommand(
      "train", "Meta-train per seed and evaluate on held-out tasks");
  add_common(train, a, true);
  CLI::App* eval = app.add_subcommand(
      "eval", "Re-evaluate saved checkpoints on the held-out tasks");
  add_common(eval, a, true);
  CLI::App* squal = app.add_subcommand(
      "sweep-quality", "Train once per behavior tier on equal-size datasets");
  add_common(squal, a, true);
  CLI::App* salpha = app.add_subcommand(
      "sweep-alpha", "Train across the metric-weight grid");
  add_common(salpha, a, true);
  CLI::App* taskood = app.add_subcommand(
      "taskood", "Window-trained model-based adaptation to held-out tasks");
  add_common(taskood, a, true);
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Run the exact information-theoretic verification suites");
  add_common(oracle, a, false);
  CLI::App* exporte = app.add_subcommand(
      "export-embeddings", "Write per-context embeddings of saved checkpoints");
  add_common(exporte, a, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (collect->parsed()) {
      const ExperimentConfig cfg = load_with_overrides(a);
      const ExperimentData data = build_experiment_data(cfg);
      write_text_file(a.out_dir + "/.keep", "");
      save_dataset(data.train, a.out_dir + "/train.ds");
      save_dataset(data.test, a.out_dir + "/test.ds");
      std::cout << "wrote " << a.out_dir << "/train.ds ("
                << data.train.n_tasks() << " tasks) and " << a.out_dir
                << "/test.ds (" << data.test.n_tasks() << " tasks)\n";
    } else if (train->parsed()) {
      const ExperimentConfig cfg = load_with_overrides(a);
      const PipelineResult res = run_pipeline(cfg, a.out_dir);
      std::cout << "final IID " << final_iid_mean(res.rows) << ", final OOD "
                << final_ood_mean(res.rows) << "\nwrote " << res.metrics_path
                << "\n";
    } else if (eval->parsed()) {
      cmd_eval(load_with_overrides(a), a.out_dir);
    } else if (squal->parsed()) {
      const ExperimentConfig cfg = load_with_overrides(a);
      const std::vector<int> episodes(
          cfg.tiers.size(),
          cfg.episodes_per_tier * static_cast<int>(cfg.tiers.size()));
      const QualityResult res =
          run_quality_sweep(cfg, cfg.tiers, episodes, a.out_dir);
      for (const QualityTierResult& t : res.tiers) {
        std::cout << tier_name(t.tier) << ": dataset return "
                  << t.dataset_return << ", final OOD " << t.final_ood << "\n";
      }
      std::cout << "wrote " << res.csv_path << "\n";
    } else if (salpha->parsed()) {
      const ExperimentConfig cfg = load_with_overrides(a);
      const AlphaSweepResult res =
          run_alpha_sweep(cfg, cfg.alpha_sweep_ratios,
                          cfg.alpha_sweep_focal_endpoint, a.out_dir);
      for (const AlphaPointResult& p : res.points) {
        std::cout << p.label << ": final OOD " << p.final_ood << "\n";
      }
      std::cout << "best point: " << res.points[res.best_index].label
                << "\nwrote " << res.csv_path << "\n";
    } else if (taskood->parsed()) {
      const ExperimentConfig cfg = load_with_overrides(a);
      const TaskOodResult res = run_taskood_modelbased(cfg, a.out_dir);
      std::cout << "context-only " << res.mean_context_only << ", model-based "
                << res.mean_model_based << "\nwrote " << res.csv_path << "\n";
    } else if (oracle->parsed()) {
      cmd_oracle(a.out_dir);
    } else if (exporte->parsed()) {
      cmd_export(load_with_overrides(a), a.out_dir);
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
