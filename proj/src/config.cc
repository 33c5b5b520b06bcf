// Copyright 2026 The pilco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pilco/config.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "json_util.h"

namespace pilco {

using nlohmann::json;

std::string AblationName(ModelAblation a) {
  return a == ModelAblation::kBayesian ? "bayesian" : "deterministic_mean";
}

ModelAblation ParseAblation(const std::string& name) {
  if (name == "bayesian") return ModelAblation::kBayesian;
  if (name == "deterministic_mean") return ModelAblation::kDeterministicMean;
  throw DomainError("unknown model ablation: " + name);
}

void ExperimentConfig::Validate() const {
  if (schema_version != kConfigSchemaVersion)
    throw DomainError("config: unsupported schema_version " +
                      std::to_string(schema_version));
  env.Validate();
  if (episodes < 1) throw DomainError("config: episodes must be >= 1");
  if (test_rollouts < 0 || success_threshold < 0 ||
      success_threshold > test_rollouts)
    throw DomainError("config: need 0 <= success_threshold <= test_rollouts");
  if (policy_variant == PolicyVariant::kRbf && num_basis < 1)
    throw DomainError("config: num_basis must be >= 1");
  if (max_reseeds < 0) throw DomainError("config: max_reseeds must be >= 0");
  if (seeds.empty()) throw DomainError("config: seeds must not be empty");
  if (gp_restarts < 1) throw DomainError("config: gp restarts must be >= 1");
  if (!(policy_init.center_std_scale >= 0.0 && policy_init.target_std >= 0.0 &&
        policy_init.linear_std >= 0.0))
    throw DomainError("config: policy init scales must be non-negative");
  ValidateSettings(policy_optim);
  ValidateSettings(gp_optim);
}

ExperimentConfig DefaultConfig(EnvVariant variant) {
  ExperimentConfig c;
  if (variant == EnvVariant::kCartPole) {
    c.name = "cartpole";
    c.env = EnvSpec::CartPole();
    c.num_basis = 50;
  } else {
    c.name = "double_pendulum";
    c.env = EnvSpec::DoublePendulum();
    c.num_basis = 100;
    c.episodes = 30;
  }
  c.output_dir = "runs/" + c.name;
  return c;
}

namespace {

json OptimToJson(const OptimSettings& s) {
  return {{"max_iters", s.max_iters},
          {"grad_tol", s.grad_tol},
          {"sufficient_decrease", s.sufficient_decrease},
          {"curvature", s.curvature},
          {"history", s.history},
          {"max_line_search", s.max_line_search}};
}

OptimSettings OptimFromJson(const json& j, OptimSettings s) {
  json_util::RequireKeys(j, "optimizer",
                         {"max_iters", "grad_tol", "sufficient_decrease",
                          "curvature", "history", "max_line_search"});
  json_util::Get(j, "max_iters", &s.max_iters);
  json_util::Get(j, "grad_tol", &s.grad_tol);
  json_util::Get(j, "sufficient_decrease", &s.sufficient_decrease);
  json_util::Get(j, "curvature", &s.curvature);
  json_util::Get(j, "history", &s.history);
  json_util::Get(j, "max_line_search", &s.max_line_search);
  return s;
}

json EnvJson(const EnvSpec& e) {
  json j = {{"variant", EnvName(e.variant)},
            {"gravity", e.gravity},
            {"dt_control", e.dt_control},
            {"substeps", e.substeps},
            {"noise_var", json_util::ToJson(e.noise_var)},
            {"u_max", json_util::ToJson(e.u_max)},
            {"init_mean", json_util::ToJson(e.init_mean)},
            {"init_cov", json_util::ToJson(e.init_cov)},
            {"sigma_c", e.sigma_c},
            {"horizon_seconds", e.horizon_seconds},
            {"success_start", e.success_start},
            {"angle_dims", e.angle_dims}};
  if (e.variant == EnvVariant::kCartPole) {
    j["cart_mass"] = e.cart_mass;
    j["pole_mass"] = e.pole_mass;
    j["pole_length"] = e.pole_length;
    j["friction"] = e.friction;
  } else {
    j["mass1"] = e.mass1;
    j["mass2"] = e.mass2;
    j["length1"] = e.length1;
    j["length2"] = e.length2;
  }
  return j;
}

EnvSpec EnvFromJson(const json& j, EnvSpec e) {
  const bool cart = e.variant == EnvVariant::kCartPole;
  std::set<std::string> keys = {
      "variant",   "gravity",         "dt_control",    "substeps",
      "noise_var", "u_max",           "init_mean",     "init_cov",
      "sigma_c",   "horizon_seconds", "success_start", "angle_dims"};
  if (cart) {
    keys.insert({"cart_mass", "pole_mass", "pole_length", "friction"});
  } else {
    keys.insert({"mass1", "mass2", "length1", "length2"});
  }
  json_util::RequireKeys(j, "env", keys);
  json_util::Get(j, "gravity", &e.gravity);
  json_util::Get(j, "dt_control", &e.dt_control);
  json_util::Get(j, "substeps", &e.substeps);
  json_util::Get(j, "noise_var", &e.noise_var);
  json_util::Get(j, "u_max", &e.u_max);
  json_util::Get(j, "init_mean", &e.init_mean);
  json_util::Get(j, "init_cov", &e.init_cov);
  json_util::Get(j, "sigma_c", &e.sigma_c);
  json_util::Get(j, "horizon_seconds", &e.horizon_seconds);
  json_util::Get(j, "success_start", &e.success_start);
  json_util::Get(j, "angle_dims", &e.angle_dims);
  if (cart) {
    json_util::Get(j, "cart_mass", &e.cart_mass);
    json_util::Get(j, "pole_mass", &e.pole_mass);
    json_util::Get(j, "pole_length", &e.pole_length);
    json_util::Get(j, "friction", &e.friction);
  } else {
    json_util::Get(j, "mass1", &e.mass1);
    json_util::Get(j, "mass2", &e.mass2);
    json_util::Get(j, "length1", &e.length1);
    json_util::Get(j, "length2", &e.length2);
  }
  return e;
}

}  // namespace

std::string EnvToJson(const EnvSpec& env) { return EnvJson(env).dump(); }

std::string SpecHash(const EnvSpec& env) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : EnvToJson(env)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string ConfigToJson(const ExperimentConfig& c) {
  const json j = {{"schema_version", c.schema_version},
                  {"name", c.name},
                  {"env", EnvJson(c.env)},
                  {"policy",
                   {{"variant", VariantName(c.policy_variant)},
                    {"num_basis", c.num_basis},
                    {"init",
                     {{"center_std_scale", c.policy_init.center_std_scale},
                      {"target_std", c.policy_init.target_std},
                      {"log_length", c.policy_init.log_length},
                      {"linear_std", c.policy_init.linear_std}}}}},
                  {"inference", MethodName(c.method)},
                  {"model", AblationName(c.ablation)},
                  {"model_uses_features", c.model_uses_features},
                  {"ucb_kappa", c.ucb_kappa},
                  {"episodes", c.episodes},
                  {"test_rollouts", c.test_rollouts},
                  {"success_threshold", c.success_threshold},
                  {"stop_when_learned", c.stop_when_learned},
                  {"max_reseeds", c.max_reseeds},
                  {"seeds", c.seeds},
                  {"policy_optimizer", OptimToJson(c.policy_optim)},
                  {"gp",
                   {{"restarts", c.gp_restarts},
                    {"warm_start", c.gp_warm_start},
                    {"optimizer", OptimToJson(c.gp_optim)}}},
                  {"output_dir", c.output_dir}};
  return j.dump(2) + "\n";
}

ExperimentConfig ParseConfig(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("config: expected a JSON object");
  json_util::RequireKeys(
      j, "config",
      {"schema_version", "name", "env", "policy", "inference", "model",
       "model_uses_features", "ucb_kappa", "episodes", "test_rollouts",
       "success_threshold", "stop_when_learned", "max_reseeds", "seeds",
       "policy_optimizer", "gp", "output_dir"});
  if (!j.contains("schema_version"))
    throw DomainError("config: schema_version is required");

  EnvVariant variant = EnvVariant::kCartPole;
  if (j.contains("env") && j["env"].contains("variant"))
    variant = ParseEnv(j["env"]["variant"].get<std::string>());
  ExperimentConfig c = DefaultConfig(variant);
  try {
    json_util::Get(j, "schema_version", &c.schema_version);
    json_util::Get(j, "name", &c.name);
    if (j.contains("env")) c.env = EnvFromJson(j["env"], c.env);
    if (j.contains("policy")) {
      const json& p = j["policy"];
      json_util::RequireKeys(p, "policy", {"variant", "num_basis", "init"});
      if (p.contains("variant"))
        c.policy_variant = ParseVariant(p["variant"].get<std::string>());
      json_util::Get(p, "num_basis", &c.num_basis);
      if (p.contains("init")) {
        const json& i = p["init"];
        json_util::RequireKeys(
            i, "policy.init",
            {"center_std_scale", "target_std", "log_length", "linear_std"});
        json_util::Get(i, "center_std_scale", &c.policy_init.center_std_scale);
        json_util::Get(i, "target_std", &c.policy_init.target_std);
        json_util::Get(i, "log_length", &c.policy_init.log_length);
        json_util::Get(i, "linear_std", &c.policy_init.linear_std);
      }
    }
    if (j.contains("inference"))
      c.method = ParseMethod(j["inference"].get<std::string>());
    if (j.contains("model"))
      c.ablation = ParseAblation(j["model"].get<std::string>());
    json_util::Get(j, "model_uses_features", &c.model_uses_features);
    json_util::Get(j, "ucb_kappa", &c.ucb_kappa);
    json_util::Get(j, "episodes", &c.episodes);
    json_util::Get(j, "test_rollouts", &c.test_rollouts);
    json_util::Get(j, "success_threshold", &c.success_threshold);
    json_util::Get(j, "stop_when_learned", &c.stop_when_learned);
    json_util::Get(j, "max_reseeds", &c.max_reseeds);
    json_util::Get(j, "seeds", &c.seeds);
    if (j.contains("policy_optimizer"))
      c.policy_optim = OptimFromJson(j["policy_optimizer"], c.policy_optim);
    if (j.contains("gp")) {
      const json& g = j["gp"];
      json_util::RequireKeys(g, "gp", {"restarts", "warm_start", "optimizer"});
      json_util::Get(g, "restarts", &c.gp_restarts);
      json_util::Get(g, "warm_start", &c.gp_warm_start);
      if (g.contains("optimizer"))
        c.gp_optim = OptimFromJson(g["optimizer"], c.gp_optim);
    }
    json_util::Get(j, "output_dir", &c.output_dir);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

}  // namespace pilco
