#include "comrl/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace comrl {

namespace {

using nlohmann::json;

std::vector<int> int_list(const json& v) {
  std::vector<int> out;
  for (const auto& e : v) out.push_back(e.get<int>());
  return out;
}

}  // namespace

LossKind ExperimentConfig::loss_kind() const {
  if (loss == "UNICORN-SS-0") return LossKind::UnicornSS;
  return loss_kind_from_name(loss);
}

void ExperimentConfig::validate() const {
  (void)loss_kind();  // rejects unknown selectors
  COMRL_REQUIRE(!(loss == "UNICORN-SS-0" && meta.weights.alpha != 0.0),
                "UNICORN-SS-0 pins alpha to zero");
  COMRL_REQUIRE(n_train_tasks >= 1, "n_train_tasks must be positive");
  COMRL_REQUIRE(n_test_tasks >= 1, "n_test_tasks must be positive");
  COMRL_REQUIRE(horizon >= 2, "horizon must be at least 2");
  COMRL_REQUIRE(episodes_per_tier >= 1, "episodes_per_tier must be positive");
  COMRL_REQUIRE(!tiers.empty(), "at least one behavior tier is required");
  for (size_t i = 0; i < tiers.size(); ++i) {
    for (size_t j = i + 1; j < tiers.size(); ++j) {
      COMRL_REQUIRE(tiers[i] != tiers[j], "duplicate behavior tier");
    }
  }
  COMRL_REQUIRE(!seeds.empty(), "at least one seed is required");
  for (size_t i = 0; i < seeds.size(); ++i) {
    for (size_t j = i + 1; j < seeds.size(); ++j) {
      COMRL_REQUIRE(seeds[i] != seeds[j], "duplicate seed");
    }
  }
  COMRL_REQUIRE(!(meta.weights.kl_weight > 0.0 && !meta.encoder.gaussian_head),
                "a KL weight requires the Gaussian encoder head");
  meta.weights.validate();
  meta.brac.validate();
  COMRL_REQUIRE(meta.steps >= 1, "steps must be positive");
  COMRL_REQUIRE(taskood_window >= 0, "taskood_window must be non-negative");
  COMRL_REQUIRE(taskood_rollout_len >= 1, "taskood_rollout_len must be positive");
  COMRL_REQUIRE(taskood_rollouts >= 1, "taskood_rollouts must be positive");
  COMRL_REQUIRE(taskood_finetune_steps >= 0,
                "taskood_finetune_steps must be non-negative");
  COMRL_REQUIRE(taskood_imaginary_fraction >= 0.0 &&
                    taskood_imaginary_fraction <= 1.0,
                "taskood_imaginary_fraction must lie in [0, 1]");
  for (double r : alpha_sweep_ratios) {
    COMRL_REQUIRE(std::isfinite(r) && r >= 0.0,
                  "alpha sweep ratios must be finite and non-negative");
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse failed: ") + e.what());
  }
  COMRL_REQUIRE(j.is_object(), "config root must be a JSON object");

  ExperimentConfig c;
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "family") c.family = family_from_name(v.get<std::string>());
      else if (k == "n_train_tasks") c.n_train_tasks = v.get<int>();
      else if (k == "n_test_tasks") c.n_test_tasks = v.get<int>();
      else if (k == "task_seed") c.task_seed = v.get<uint64_t>();
      else if (k == "data_seed") c.data_seed = v.get<uint64_t>();
      else if (k == "horizon") c.horizon = v.get<int>();
      else if (k == "episodes_per_tier") c.episodes_per_tier = v.get<int>();
      else if (k == "tiers") {
        c.tiers.clear();
        for (const auto& e : v) c.tiers.push_back(tier_from_name(e.get<std::string>()));
      } else if (k == "loss") c.loss = v.get<std::string>();
      else if (k == "seeds") {
        c.seeds.clear();
        for (const auto& e : v) c.seeds.push_back(e.get<uint64_t>());
      } else if (k == "steps") c.meta.steps = v.get<int>();
      else if (k == "task_batch") c.meta.task_batch = v.get<int>();
      else if (k == "contexts_per_task") c.meta.contexts_per_task = v.get<int>();
      else if (k == "context_len") c.meta.context_len = v.get<int>();
      else if (k == "steps_per_task_batch") c.meta.steps_per_task_batch = v.get<int>();
      else if (k == "eval_interval") c.meta.eval_interval = v.get<int>();
      else if (k == "lr_encoder") c.meta.lr_encoder = v.get<double>();
      else if (k == "lr_decoder") c.meta.lr_decoder = v.get<double>();
      else if (k == "lr_actor") c.meta.lr_actor = v.get<double>();
      else if (k == "lr_critic") c.meta.lr_critic = v.get<double>();
      else if (k == "decoder_width") c.meta.decoder_width = v.get<int>();
      else if (k == "corro_negatives") c.meta.corro_negatives = v.get<int>();
      else if (k == "corro_anchors") c.meta.corro_anchors = v.get<int>();
      else if (k == "club_aux_steps") c.meta.club_aux_steps = v.get<int>();
      else if (k == "ensemble_decoders") c.meta.ensemble_decoders = v.get<int>();
      else if (k == "latent_dim") c.meta.encoder.latent_dim = v.get<int>();
      else if (k == "embed_width") c.meta.encoder.embed_width = v.get<int>();
      else if (k == "post_width") c.meta.encoder.post_width = v.get<int>();
      else if (k == "gaussian_head") c.meta.encoder.gaussian_head = v.get<bool>();
      else if (k == "alpha") c.meta.weights.alpha = v.get<double>();
      else if (k == "focal_beta") c.meta.weights.focal_beta = v.get<double>();
      else if (k == "focal_exponent") c.meta.weights.focal_exponent = v.get<int>();
      else if (k == "focal_eps") c.meta.weights.focal_eps = v.get<double>();
      else if (k == "lambda_club") c.meta.weights.lambda_club = v.get<double>();
      else if (k == "tau") c.meta.weights.tau = v.get<double>();
      else if (k == "kl_weight") c.meta.weights.kl_weight = v.get<double>();
      else if (k == "gamma") c.meta.brac.gamma = v.get<double>();
      else if (k == "polyak") c.meta.brac.polyak = v.get<double>();
      else if (k == "adaptive_bc") c.meta.brac.adaptive_bc = v.get<bool>();
      else if (k == "bc_alpha") c.meta.brac.bc_alpha = v.get<double>();
      else if (k == "lambda_bc") c.meta.brac.lambda_bc = v.get<double>();
      else if (k == "rl_batch") c.meta.brac.rl_batch = v.get<int>();
      else if (k == "actor_hidden") c.meta.brac.actor_hidden = int_list(v);
      else if (k == "critic_hidden") c.meta.brac.critic_hidden = int_list(v);
      else if (k == "taskood_window") c.taskood_window = v.get<int>();
      else if (k == "taskood_noise_scale") c.taskood_noise_scale = v.get<double>();
      else if (k == "taskood_ensemble") c.taskood_ensemble = v.get<int>();
      else if (k == "taskood_rollout_len") c.taskood_rollout_len = v.get<int>();
      else if (k == "taskood_imaginary_fraction")
        c.taskood_imaginary_fraction = v.get<double>();
      else if (k == "taskood_rollouts") c.taskood_rollouts = v.get<int>();
      else if (k == "taskood_finetune_steps")
        c.taskood_finetune_steps = v.get<int>();
      else if (k == "alpha_sweep_ratios") {
        c.alpha_sweep_ratios.clear();
        for (const auto& e : v) c.alpha_sweep_ratios.push_back(e.get<double>());
      } else if (k == "alpha_sweep_focal_endpoint")
        c.alpha_sweep_focal_endpoint = v.get<bool>();
      else throw config_error("unknown config key: " + k);
    }
  } catch (const json::exception& e) {
    throw config_error(std::string("config value error: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  COMRL_REQUIRE(in.good(), "cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

MetaConfig to_meta_config(const ExperimentConfig& cfg, uint64_t seed) {
  MetaConfig m = cfg.meta;
  m.loss = cfg.loss_kind();
  if (cfg.loss == "UNICORN-SS-0") m.weights.alpha = 0.0;
  m.seed = seed;
  return m;
}

}  // namespace comrl
