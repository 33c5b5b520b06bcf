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

// Command-line front end: learn, oracle-check, grad-check, rollout, curves.
// Exit codes: 0 ok, 1 usage, 2 verification failure, 3 numerical failure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pilco/checks.h"
#include "pilco/config.h"
#include "pilco/harness.h"
#include "pilco/io.h"

namespace {

using namespace pilco;  // NOLINT(build/namespaces)

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kVerification = 2;
constexpr int kNumerical = 3;

struct LearnArgs {
  std::string config;
  int jobs = 1;
  std::vector<std::uint64_t> seeds;
  int episodes = 0;
  std::string output;
  bool artifacts = true;
};

int RunLearn(const LearnArgs& a) {
  ExperimentConfig c = LoadConfig(a.config);
  if (!a.seeds.empty()) c.seeds = a.seeds;
  if (a.episodes > 0) c.episodes = a.episodes;
  if (!a.output.empty()) c.output_dir = a.output;
  c.Validate();
  WriteFile(c.output_dir + "/config.json", ConfigToJson(c));
  JsonlLog log(c.output_dir + "/log.jsonl");
  LearnContext ctx;
  ctx.log = &log;
  ctx.write_artifacts = a.artifacts;
  const std::vector<LearningRecord> recs = LearnAll(c, a.jobs, ctx);
  std::printf("seed\tfirst_learned\tfinal_success\n");
  for (const LearningRecord& r : recs)
    std::printf("%llu\t%d\t%.3f\n", static_cast<unsigned long long>(r.seed),
                r.FirstLearned(), r.FinalSuccessRate());
  for (const std::string& p : EmitCurves(recs, c.output_dir))
    std::printf("wrote %s\n", p.c_str());
  return kOk;
}

int Report(const std::vector<CheckReport>& reports) {
  bool ok = true;
  for (const CheckReport& r : reports) {
    std::cout << r.Table();
    std::printf("%s %s worst=%.4g limit=%.4g\n", r.passed() ? "PASS" : "FAIL",
                r.subject.c_str(), r.worst(), r.limit);
    ok = ok && r.passed();
  }
  return ok ? kOk : kVerification;
}

int RunRollout(const std::string& policy_path, const std::string& config_path,
               const std::string& model_path, std::uint64_t seed,
               const std::string& out) {
  const ExperimentConfig c = LoadConfig(config_path);
  const Policy policy = PolicyFromJson(ReadFile(policy_path));
  const Episode ep = RunEpisode(c.env, &policy, seed);
  WriteFile(out + "/episode.tsv", EpisodeToTsv(ep, c.env));
  std::printf("success\t%d\n", Success(ep, c.env) ? 1 : 0);
  if (!model_path.empty()) {
    const GpModel model = ModelFromJson(ReadFile(model_path));
    const RolloutEngine engine(model, MakeRolloutSetup(c));
    const RolloutReport r =
        engine.Rollout(policy, GaussianBelief(c.env.init_mean, c.env.init_cov),
                       c.env.horizon_steps(), false);
    WriteFile(out + "/rollout.tsv", RolloutToTsv(r, c.env.dt_control));
    std::printf("predicted_cost\t%.6g\n", r.total_cost);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic model-based policy search"};
  app.require_subcommand(1);

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn", "Run the learning loop");
  learn_cmd->add_option("config", learn.config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  learn_cmd->add_option("--jobs", learn.jobs, "Seeds run in parallel")
      ->check(CLI::PositiveNumber);
  learn_cmd->add_option("--seeds", learn.seeds, "Override the config seeds");
  learn_cmd->add_option("--episodes", learn.episodes,
                        "Override the episode count");
  learn_cmd->add_option("--output", learn.output, "Override output_dir");
  learn_cmd->add_flag("!--no-artifacts", learn.artifacts,
                      "Skip per-episode policy, model and rollout files");

  std::string oracle_subject = "all";
  OracleOptions oracle;
  auto* oracle_cmd = app.add_subcommand(
      "oracle-check", "Closed-form moments against Monte Carlo");
  oracle_cmd->add_option("--subject", oracle_subject)
      ->check(CLI::IsMember(
          {"all", "moment_match", "squash_moments", "expected_cost", "step"}));
  oracle_cmd->add_option("--trials", oracle.trials);
  oracle_cmd->add_option("--samples", oracle.samples);
  oracle_cmd->add_option("--seed", oracle.seed);
  oracle_cmd->add_flag("--corrupt", oracle.corrupt,
                       "Perturb the closed forms (harness self-test)");

  std::string grad_subject = "all";
  GradOptions grad;
  auto* grad_cmd = app.add_subcommand(
      "grad-check", "Analytic gradients against finite differences");
  grad_cmd->add_option("--subject", grad_subject)
      ->check(CLI::IsMember(
          {"all", "rollout", "policy", "cost", "evidence", "inference"}));
  grad_cmd->add_option("--trials", grad.trials);
  grad_cmd->add_option("--seed", grad.seed);
  grad_cmd->add_option("--horizon", grad.horizon);

  std::string policy_path, config_path, model_path, rollout_out = ".";
  std::uint64_t rollout_seed = 0;
  auto* rollout_cmd = app.add_subcommand(
      "rollout", "Apply a saved policy to the plant and the model");
  rollout_cmd->add_option("--policy", policy_path)
      ->required()
      ->check(CLI::ExistingFile);
  rollout_cmd->add_option("--config", config_path)
      ->required()
      ->check(CLI::ExistingFile);
  rollout_cmd->add_option("--model", model_path, "Saved GP model")
      ->check(CLI::ExistingFile);
  rollout_cmd->add_option("--seed", rollout_seed);
  rollout_cmd->add_option("--out", rollout_out);

  std::string curves_dir, curves_out;
  auto* curves_cmd =
      app.add_subcommand("curves", "Learning curves from saved records");
  curves_cmd->add_option("dir", curves_dir)
      ->required()
      ->check(CLI::ExistingDirectory);
  curves_cmd->add_option("--out", curves_out, "Defaults to dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*learn_cmd) return RunLearn(learn);
    if (*oracle_cmd) {
      std::vector<CheckReport> reports;
      for (const char* s :
           {"moment_match", "squash_moments", "expected_cost", "step"})
        if (oracle_subject == "all" || oracle_subject == s)
          reports.push_back(OracleCheck(ParseOracleSubject(s), oracle));
      return Report(reports);
    }
    if (*grad_cmd) {
      std::vector<CheckReport> reports;
      for (const char* s :
           {"rollout", "policy", "cost", "evidence", "inference"})
        if (grad_subject == "all" || grad_subject == s)
          reports.push_back(GradCheck(ParseGradSubject(s), grad));
      return Report(reports);
    }
    if (*rollout_cmd)
      return RunRollout(policy_path, config_path, model_path, rollout_seed,
                        rollout_out);
    if (*curves_cmd) {
      const std::vector<LearningRecord> recs = LoadRecords(curves_dir);
      for (const std::string& p :
           EmitCurves(recs, curves_out.empty() ? curves_dir : curves_out))
        std::printf("wrote %s\n", p.c_str());
      return kOk;
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
