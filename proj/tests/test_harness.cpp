#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "comrl/collect.hpp"
#include "comrl/pipeline.hpp"

using namespace comrl;

namespace {

std::string thrown_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

// Minimal fast experiment: tiny nets, few steps, PointDir.
ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.family = Family::PointDir;
  c.n_train_tasks = 3;
  c.n_test_tasks = 2;
  c.episodes_per_tier = 2;
  c.loss = "UNICORN-SS";
  c.seeds = {1, 2};
  c.meta.steps = 6;
  c.meta.eval_interval = 2;
  c.meta.task_batch = 2;
  c.meta.contexts_per_task = 2;
  c.meta.context_len = 6;
  c.meta.encoder.latent_dim = 3;
  c.meta.encoder.embed_width = 12;
  c.meta.encoder.post_width = 12;
  c.meta.decoder_width = 12;
  c.meta.weights.alpha = 0.2;
  c.meta.brac.rl_batch = 8;
  c.meta.brac.actor_hidden = {12, 12};
  c.meta.brac.critic_hidden = {12, 12};
  return c;
}

std::string fresh_dir(const std::string& tag) {
  const std::string d =
      (std::filesystem::temp_directory_path() / ("comrl_harness_" + tag))
          .string();
  std::filesystem::remove_all(d);
  return d;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("config defaults and selector mapping") {
  const ExperimentConfig c = parse_experiment_config("{}");
  CHECK(c.n_train_tasks == 20);
  CHECK(c.n_test_tasks == 4);
  CHECK(c.seeds.size() == 6);
  CHECK(c.tiers.size() == 3);
  CHECK(c.loss == "UNICORN-SS");
  CHECK(c.loss_kind() == LossKind::UnicornSS);

  auto kind_of = [](const std::string& sel) {
    ExperimentConfig e;
    e.loss = sel;
    return e.loss_kind();
  };
  CHECK(kind_of("FOCAL") == LossKind::Focal);
  CHECK(kind_of("CORRO") == LossKind::Corro);
  CHECK(kind_of("CSRO") == LossKind::Csro);
  CHECK(kind_of("UNICORN-SUP") == LossKind::UnicornSup);
  CHECK(kind_of("UNICORN-SS-0") == LossKind::UnicornSS);
  CHECK_THROWS_AS(kind_of("SOFT-ACTOR"), config_error);
}

TEST_CASE("config keys round-trip into the meta view") {
  const ExperimentConfig c = parse_experiment_config(R"({
    "family": "GridGoal", "n_train_tasks": 5, "n_test_tasks": 3,
    "loss": "CSRO", "seeds": [7, 9], "steps": 123, "eval_interval": 10,
    "task_batch": 4, "context_len": 15, "latent_dim": 8, "alpha": 0.0,
    "lambda_club": 0.25, "gamma": 0.9, "rl_batch": 32, "gaussian_head": true,
    "kl_weight": 0.01, "actor_hidden": [8], "tiers": ["expert", "random"]
  })");
  CHECK(c.family == Family::GridGoal);
  CHECK(c.tiers == std::vector<Tier>{Tier::Expert, Tier::Random});
  const MetaConfig m = to_meta_config(c, 7);
  CHECK(m.loss == LossKind::Csro);
  CHECK(m.steps == 123);
  CHECK(m.task_batch == 4);
  CHECK(m.encoder.latent_dim == 8);
  CHECK(m.encoder.gaussian_head);
  CHECK(m.weights.lambda_club == 0.25);
  CHECK(m.weights.kl_weight == 0.01);
  CHECK(m.brac.gamma == 0.9);
  CHECK(m.brac.rl_batch == 32);
  CHECK(m.brac.actor_hidden == std::vector<int>{8});
  CHECK(m.seed == 7);
}

TEST_CASE("config rejections") {
  CHECK(thrown_message([] { parse_experiment_config("{not json"); })
            .find("config parse failed") != std::string::npos);
  CHECK(thrown_message([] { parse_experiment_config(R"({"bogus": 1})"); })
            .find("unknown config key: bogus") != std::string::npos);
  CHECK(thrown_message([] { parse_experiment_config(R"({"steps": "many"})"); })
            .find("config value error") != std::string::npos);
  CHECK_THROWS_AS(parse_experiment_config("[1,2]"), config_error);
  CHECK_THROWS_AS(
      parse_experiment_config(R"({"loss": "UNICORN-SS-0", "alpha": 0.2})"),
      config_error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"kl_weight": 0.1})"),
                  config_error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"seeds": []})"), config_error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"seeds": [3, 3]})"),
                  config_error);
  CHECK_THROWS_AS(
      parse_experiment_config(R"({"tiers": ["expert", "expert"]})"),
      config_error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"alpha_sweep_ratios": [-1]})"),
                  config_error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"family": "Mujoco"})"),
                  config_error);
  // The metric-off alias folds into UNICORN-SS with alpha pinned to zero.
  const ExperimentConfig ss0 =
      parse_experiment_config(R"({"loss": "UNICORN-SS-0"})");
  CHECK(to_meta_config(ss0, 1).weights.alpha == 0.0);
}

TEST_CASE("experiment data splits tasks disjointly") {
  const ExperimentConfig c = tiny_config();
  const ExperimentData d = build_experiment_data(c);
  REQUIRE(d.train_tasks.size() == 3);
  REQUIRE(d.test_tasks.size() == 2);
  for (const TaskSpec& tr : d.train_tasks) {
    for (const TaskSpec& te : d.test_tasks) CHECK(tr.task_id != te.task_id);
  }
  CHECK(d.train.n_tasks() == 3);
  CHECK(d.test.n_tasks() == 2);
  CHECK(d.train.row_width() == d.test.row_width());
  CHECK(d.test.checkpoints.size() == 2 * c.tiers.size());
}

TEST_CASE("metrics serialization") {
  std::vector<MetricsRow> rows(2);
  rows[0] = {1, 10, 0.5, -0.25, 1.5, 2.0, 0.1, 1.0, 0.2, 3.25};
  rows[1] = {2, 10, 0.5, -0.25, 1.5, 4.0, 0.1, 3.0, 0.2, 4.5};
  const std::string csv = metrics_csv(rows);
  CHECK(csv.rfind("seed,step,repr_loss,actor_loss,critic_loss,iid_mean,"
                  "iid_std,ood_mean,ood_std\n",
                  0) == 0);
  CHECK(count_lines(csv) == 3);
  CHECK(csv.find("1,10,0.5,-0.25,1.5,2,0.1,1,0.2\n") != std::string::npos);
  CHECK(csv.find("3.25") == std::string::npos);  // wall clock kept out

  const std::string t = timings_csv(rows);
  CHECK(t.rfind("seed,step,wall_clock_s\n", 0) == 0);
  CHECK(t.find("3.25") != std::string::npos);

  CHECK(final_iid_mean(rows) == 3.0);
  CHECK(final_ood_mean(rows) == 2.0);

  const std::string svg = learning_curve_svg(rows, "demo <title>");
  CHECK(svg.rfind("<svg ", 0) == 0);
  CHECK(svg.find("demo &lt;title&gt;") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), '<') ==
        std::count(svg.begin(), svg.end(), '>'));
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg == learning_curve_svg(rows, "demo <title>"));
  CHECK_THROWS_AS(learning_curve_svg({}, "x"), config_error);
}

TEST_CASE("pipeline writes one row per seed and eval point") {
  const ExperimentConfig c = tiny_config();  // 6 steps, interval 2, 2 seeds
  const std::string out = fresh_dir("pipeline");
  const PipelineResult res = run_pipeline(c, out);
  CHECK(res.rows.size() == 6);  // 2 seeds x eval points {2, 4, 6}
  CHECK(res.models.size() == 2);
  int idx = 0;
  for (uint64_t seed : c.seeds) {
    for (int step : {2, 4, 6}) {
      CHECK(res.rows[idx].seed == seed);
      CHECK(res.rows[idx].step == step);
      ++idx;
    }
  }
  CHECK(read_text_file(res.metrics_path) == metrics_csv(res.rows));
  CHECK(std::filesystem::exists(res.curve_path));
  CHECK(std::filesystem::exists(res.timings_path));
  REQUIRE(res.checkpoint_paths.size() == 2);

  SUBCASE("rerun is byte-identical, checkpoints included") {
    const std::string out2 = fresh_dir("pipeline_rerun");
    const PipelineResult res2 = run_pipeline(c, out2);
    CHECK(read_text_file(res.metrics_path) ==
          read_text_file(res2.metrics_path));
    CHECK(read_text_file(res.curve_path) == read_text_file(res2.curve_path));
    for (size_t i = 0; i < res.checkpoint_paths.size(); ++i) {
      CHECK(read_text_file(res.checkpoint_paths[i]) ==
            read_text_file(res2.checkpoint_paths[i]));
    }
  }

  SUBCASE("checkpoints restore the final model bitwise") {
    const ExperimentData d = build_experiment_data(c);
    MetaConfig mc = to_meta_config(c, c.seeds[0]);
    mc.encoder.input_dim = d.train.row_width();
    MetaModel fresh = init_meta_model(mc, d.train);
    restore_params(fresh, load_weights(res.checkpoint_paths[0]));
    const auto a = named_params(fresh), b = named_params(res.models[0]);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].name == b[i].name);
      REQUIRE(a[i].t.numel() == b[i].t.numel());
      for (int64_t j = 0; j < a[i].t.numel(); ++j) CHECK(a[i].t[j] == b[i].t[j]);
    }
  }

  SUBCASE("inconsistent config is rejected before any compute") {
    ExperimentConfig bad = c;
    bad.meta.weights.kl_weight = 0.5;  // no Gaussian head
    const std::string out3 = fresh_dir("pipeline_bad");
    CHECK_THROWS_AS(run_pipeline(bad, out3), config_error);
    CHECK(!std::filesystem::exists(out3));
  }
}

TEST_CASE("quality sweep orders tiers by dataset return") {
  ExperimentConfig c = tiny_config();
  c.meta.steps = 4;
  c.meta.eval_interval = 0;
  c.seeds = {1};
  const std::vector<Tier> tiers = {Tier::Random, Tier::Expert};
  const std::vector<int> episodes = {4, 4};
  const std::string out = fresh_dir("quality");
  const QualityResult res = run_quality_sweep(c, tiers, episodes, out);
  REQUIRE(res.tiers.size() == 2);
  CHECK(res.tiers[1].dataset_return > res.tiers[0].dataset_return);
  const std::string csv = read_text_file(res.csv_path);
  CHECK(csv.rfind("tier,dataset_return,final_iid,final_ood\n", 0) == 0);
  CHECK(count_lines(csv) == 3);

  const std::vector<int> unequal = {4, 5};
  CHECK(thrown_message([&] {
          run_quality_sweep(c, tiers, unequal, fresh_dir("quality_bad"));
        }).find("equal size") != std::string::npos);
}

TEST_CASE("alpha sweep: ratio zero equals the metric-off alias") {
  ExperimentConfig c = tiny_config();
  c.seeds = {1};
  const std::string sweep_out = fresh_dir("alpha_sweep");
  const std::vector<double> grid = {0.0};
  const AlphaSweepResult res = run_alpha_sweep(c, grid, true, sweep_out);
  REQUIRE(res.points.size() == 2);
  CHECK(res.points[0].label == "alpha_0");
  CHECK(res.points[0].ratio == 0.0);
  CHECK(res.points[1].label == "focal_only");
  CHECK(std::isinf(res.points[1].ratio));
  CHECK(res.best_index >= 0);
  CHECK(res.best_index < 2);

  ExperimentConfig ss0 = c;
  ss0.loss = "UNICORN-SS-0";
  ss0.meta.weights.alpha = 0.0;
  const PipelineResult base = run_pipeline(ss0, fresh_dir("alpha_base"));
  CHECK(read_text_file(sweep_out + "/alpha_0/metrics.csv") ==
        read_text_file(base.metrics_path));

  const std::string csv = read_text_file(res.csv_path);
  CHECK(csv.rfind("label,ratio,final_iid,final_ood\n", 0) == 0);
  CHECK(csv.find("focal_only,inf,") != std::string::npos);
}

TEST_CASE("imaginary rollouts reduce to the plain decoder when degenerate") {
  ExperimentConfig c = tiny_config();
  c.seeds = {1};
  const ExperimentData d = build_experiment_data(c);
  MetaConfig mc = to_meta_config(c, 1);
  mc.encoder.input_dim = d.train.row_width();
  mc.ensemble_decoders = 1;
  MetaModel model = init_meta_model(mc, d.train);
  model.decoders.push_back(model.decoders[0]);  // identical pair

  const std::vector<double> z = {0.3, -0.2, 0.5};
  const std::vector<double> sigma = {0.0, 0.0, 0.0};
  Rng rng(5);
  const auto rows = imagine_rollouts(model, d.train, 0, z, sigma, 3, 4, rng);
  REQUIRE(rows.size() == 12);
  const int w = d.train.row_width();
  for (const ImaginaryRow& r : rows) {
    REQUIRE(static_cast<int>(r.row.size()) == w);
    CHECK(r.z == z);  // sigma 0 leaves the embedding untouched
    // The prediction equals the single decoder applied to (z, s, a).
    Tensor x = Tensor::matrix(1, 3 + d.train.dim_s + d.train.dim_a);
    int col = 0;
    for (double v : r.z) x.data()[col++] = v;
    for (int j = 0; j < d.train.dim_s + d.train.dim_a; ++j) {
      x.data()[col++] = r.row[static_cast<size_t>(j)];
    }
    const Tensor pred = model.decoders[0].eval(x);
    for (int64_t j = 0; j < pred.numel(); ++j) {
      CHECK(r.row[static_cast<size_t>(d.train.dim_s + d.train.dim_a + j)] ==
            pred[j]);
    }
    // The action is the actor's own output at (s, z).
    const std::vector<double> a =
        model.brac.act(std::span<const double>(r.row.data(), d.train.dim_s),
                       r.z);
    for (int j = 0; j < d.train.dim_a; ++j) {
      CHECK(r.row[static_cast<size_t>(d.train.dim_s + j)] == a[static_cast<size_t>(j)]);
    }
  }
  // Rollouts chain: each step's state is the previous prediction's s'.
  CHECK(std::equal(rows[1].row.begin(), rows[1].row.begin() + d.train.dim_s,
                   rows[0].row.begin() + d.train.dim_s + d.train.dim_a + 1));

  const std::vector<double> bad_sigma = {0.0};
  Rng r2(5);
  CHECK_THROWS_AS(imagine_rollouts(model, d.train, 0, z, bad_sigma, 1, 1, r2),
                  config_error);
}

TEST_CASE("ensemble disagreement separates identical from distinct heads") {
  ExperimentConfig c = tiny_config();
  const ExperimentData d = build_experiment_data(c);
  MetaConfig mc = to_meta_config(c, 1);
  mc.encoder.input_dim = d.train.row_width();
  mc.ensemble_decoders = 1;
  MetaModel model = init_meta_model(mc, d.train);

  const std::vector<double> z0 = {0.0, 0.0, 0.0};
  Rng r1(9);
  CHECK_THROWS_AS(ensemble_disagreement(model, d.train, 0, z0, 8, r1),
                  config_error);

  model.decoders.push_back(model.decoders[0]);
  Rng r2(9);
  CHECK(ensemble_disagreement(model, d.train, 0, z0, 8, r2) == 0.0);

  model.decoders[1].params.back().data()[0] += 0.5;
  Rng r3(9);
  CHECK(ensemble_disagreement(model, d.train, 0, z0, 8, r3) > 0.0);
}

TEST_CASE("task-OOD protocol holds out the sorted extremes") {
  ExperimentConfig c = tiny_config();
  c.n_train_tasks = 4;
  c.n_test_tasks = 2;
  c.seeds = {1};
  c.meta.steps = 4;
  c.meta.eval_interval = 0;
  c.taskood_ensemble = 2;
  c.taskood_rollouts = 2;
  c.taskood_rollout_len = 2;
  c.taskood_finetune_steps = 2;
  const std::string out = fresh_dir("taskood");
  const TaskOodResult res = run_taskood_modelbased(c, out);
  REQUIRE(res.window_tasks.size() == 4);
  REQUIRE(res.heldout_tasks.size() == 2);
  double wlo = 1e300, whi = -1e300;
  for (const TaskSpec& t : res.window_tasks) {
    wlo = std::min(wlo, t.params[0]);
    whi = std::max(whi, t.params[0]);
  }
  for (const TaskSpec& t : res.heldout_tasks) {
    CHECK((t.params[0] < wlo || t.params[0] > whi));
  }
  REQUIRE(res.per_seed.size() == 1);
  CHECK(res.per_seed[0].disagreement_window > 0.0);
  CHECK(std::isfinite(res.mean_model_based));
  const std::string csv = read_text_file(res.csv_path);
  CHECK(csv.rfind("seed,context_only,model_based,disagreement_window,"
                  "disagreement_heldout\n",
                  0) == 0);

  SUBCASE("ensembles of one are rejected") {
    ExperimentConfig bad = c;
    bad.taskood_ensemble = 1;
    CHECK_THROWS_AS(run_taskood_modelbased(bad, fresh_dir("taskood_bad")),
                    config_error);
  }
  SUBCASE("multi-parameter families are not sortable") {
    ExperimentConfig bad = c;
    bad.family = Family::PointMassParam;
    CHECK(thrown_message([&] {
            run_taskood_modelbased(bad, fresh_dir("taskood_pmp"));
          }).find("sortable") != std::string::npos);
  }
  SUBCASE("non-reconstruction selectors are rejected") {
    ExperimentConfig bad = c;
    bad.loss = "FOCAL";
    CHECK_THROWS_AS(run_taskood_modelbased(bad, fresh_dir("taskood_focal")),
                    config_error);
  }
}

TEST_CASE("embedding export arithmetic and separability") {
  const std::vector<TaskSpec> tasks = make_task_set(Family::PointDir, 8, 33);
  const std::vector<Tier> tiers = {Tier::Expert};
  const OfflineDataset ds = collect_dataset(tasks, tiers, 2, 34);

  SUBCASE("8 tasks x 10 contexts x 2 modes gives 160 rows of 7 columns") {
    const EmbedFn f = [](int task_id, const Tensor& m) {
      return std::vector<double>{static_cast<double>(task_id),
                                 static_cast<double>(m.rows()), 0.0, 0.0, 1.5};
    };
    const std::string csv = export_embeddings(f, 5, ds, 10, 6, 99);
    CHECK(csv.rfind("task_id,origin,z1,z2,z3,z4,z5\n", 0) == 0);
    CHECK(count_lines(csv) == 161);
    const std::string first_data =
        csv.substr(csv.find('\n') + 1,
                   csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1);
    CHECK(std::count(first_data.begin(), first_data.end(), ',') == 6);
    CHECK(csv == export_embeddings(f, 5, ds, 10, 6, 99));
  }

  SUBCASE("a one-hot oracle is separable by task with zero overlap") {
    const EmbedFn onehot = [](int task_id, const Tensor&) {
      std::vector<double> z(8, 0.0);
      z[static_cast<size_t>(task_id)] = 1.0;
      return z;
    };
    const std::string csv = export_embeddings(onehot, 8, ds, 10, 6, 99);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      const int task_id = std::stoi(line.substr(0, line.find(',')));
      std::vector<std::string> cells;
      size_t pos = 0;
      while (pos != std::string::npos) {
        const size_t next = line.find(',', pos);
        cells.push_back(line.substr(
            pos, next == std::string::npos ? next : next - pos));
        pos = next == std::string::npos ? next : next + 1;
      }
      REQUIRE(cells.size() == 10);
      CHECK((cells[1] == "iid" || cells[1] == "ood"));
      for (int j = 0; j < 8; ++j) {
        CHECK(cells[static_cast<size_t>(2 + j)] ==
              (j == task_id ? "1" : "0"));
      }
    }
    CHECK(rows == 160);
  }

  SUBCASE("trained-model export matches the encoder evaluation") {
    ExperimentConfig c = tiny_config();
    const ExperimentData d = build_experiment_data(c);
    MetaConfig mc = to_meta_config(c, 1);
    mc.encoder.input_dim = d.train.row_width();
    const MetaModel model = init_meta_model(mc, d.train);
    const std::string csv = export_embeddings(model, d.test, 2, 5, 3);
    CHECK(csv.rfind("task_id,origin,z1,z2,z3\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 2 * 2 * 2);
  }
}

TEST_CASE("the command line round-trips a run") {
  namespace fs = std::filesystem;
  const fs::path self = fs::read_symlink("/proc/self/exe");
  const fs::path cli = self.parent_path() / "comrl";
  REQUIRE(fs::exists(cli));

  const std::string dir = fresh_dir("cli");
  fs::create_directories(dir);
  const std::string cfg_path = dir + "/exp.json";
  write_text_file(cfg_path, R"({
    "family": "PointDir", "n_train_tasks": 3, "n_test_tasks": 2,
    "episodes_per_tier": 2, "loss": "FOCAL", "seeds": [1], "steps": 4,
    "eval_interval": 0, "task_batch": 2, "contexts_per_task": 2,
    "context_len": 6, "rl_batch": 8, "latent_dim": 3, "embed_width": 12,
    "post_width": 12, "decoder_width": 12,
    "actor_hidden": [12], "critic_hidden": [12]
  })");

  auto run = [&](const std::string& args) {
    const std::string cmd = cli.string() + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };
  CHECK(run("train --config " + cfg_path + " --out " + dir + "/a") == 0);
  CHECK(run("train --config " + cfg_path + " --out " + dir + "/b") == 0);
  CHECK(read_text_file(dir + "/a/metrics.csv") ==
        read_text_file(dir + "/b/metrics.csv"));
  CHECK(read_text_file(dir + "/a/checkpoint_seed1.bin") ==
        read_text_file(dir + "/b/checkpoint_seed1.bin"));
  CHECK(run("eval --config " + cfg_path + " --out " + dir + "/a") == 0);
  CHECK(fs::exists(dir + "/a/eval.csv"));
  CHECK(run("export-embeddings --config " + cfg_path + " --out " + dir + "/a") == 0);
  CHECK(fs::exists(dir + "/a/embeddings_seed1.csv"));
  CHECK(run("oracle --out " + dir + "/oracle") == 0);
  CHECK(fs::exists(dir + "/oracle/theorem2.csv"));
  CHECK(run("collect --config " + cfg_path + " --out " + dir + "/ds") == 0);
  CHECK(fs::exists(dir + "/ds/train.ds"));

  // Config rejection and numeric aborts map to their own exit codes.
  write_text_file(dir + "/bad.json", R"({"nonsense": true})");
  CHECK(run("train --config " + dir + "/bad.json --out " + dir + "/x") == 2);
  CHECK(run("train --config " + dir + "/missing.json --out " + dir + "/x") == 2);
  // A huge encoder step drives the Gaussian head's log-variance to
  // overflow, which must surface as the numeric exit code.
  write_text_file(dir + "/explode.json", R"({
    "family": "PointDir", "n_train_tasks": 2, "n_test_tasks": 1,
    "episodes_per_tier": 2, "loss": "UNICORN-SS", "seeds": [1], "steps": 10,
    "eval_interval": 0, "task_batch": 2, "contexts_per_task": 2,
    "context_len": 6, "rl_batch": 8, "latent_dim": 3, "embed_width": 12,
    "post_width": 12, "decoder_width": 12, "gaussian_head": true,
    "kl_weight": 0.1, "lr_encoder": 1e9,
    "actor_hidden": [12], "critic_hidden": [12]
  })");
  CHECK(run("train --config " + dir + "/explode.json --out " + dir + "/x") == 3);
  CHECK(run("--definitely-not-a-flag") == 2);
}
