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

#include "pilco/io.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "json_util.h"
#include "pilco/config.h"

namespace pilco {

using nlohmann::json;

namespace {

json Parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string(what) + ": " + e.what());
  }
}

void CheckFormat(const json& j, const char* format, int version) {
  if (!j.is_object() || !j.contains("format") ||
      j["format"].get<std::string>() != format)
    throw DomainError(std::string("expected format '") + format + "'");
  if (j.value("version", -1) != version)
    throw DomainError(std::string(format) + ": unsupported version");
}

// Shortest round-trip representation.
std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string ModelToJson(const GpModel& model) {
  json hps = json::array();
  for (const GpHyperparams& hp : model.hyperparams()) {
    hps.push_back({{"length_scales", json_util::ToJson(hp.length_scales)},
                   {"signal_var", hp.signal_var},
                   {"noise_var", hp.noise_var}});
  }
  const json j = {{"format", "pilco.gp_model"},
                  {"version", kModelFormatVersion},
                  {"inputs", json_util::ToJson(model.inputs())},
                  {"targets", json_util::ToJson(model.targets())},
                  {"hyperparams", hps}};
  return j.dump() + "\n";
}

GpModel ModelFromJson(const std::string& text) {
  const json j = Parse(text, "model");
  CheckFormat(j, "pilco.gp_model", kModelFormatVersion);
  try {
    std::vector<GpHyperparams> hps;
    for (const json& h : j.at("hyperparams")) {
      GpHyperparams hp;
      hp.length_scales = json_util::VectorFromJson(h.at("length_scales"));
      hp.signal_var = h.at("signal_var").get<double>();
      hp.noise_var = h.at("noise_var").get<double>();
      hps.push_back(hp);
    }
    return GpModel::Build(json_util::MatrixFromJson(j.at("inputs")),
                          json_util::MatrixFromJson(j.at("targets")), hps);
  } catch (const json::exception& e) {
    throw DomainError(std::string("model: ") + e.what());
  }
}

std::string PolicyToJson(const Policy& policy) {
  const json j = {{"format", "pilco.policy"},
                  {"version", kPolicyFormatVersion},
                  {"variant", VariantName(policy.variant())},
                  {"input_dim", policy.input_dim()},
                  {"control_dim", policy.control_dim()},
                  {"num_basis", policy.num_basis()},
                  {"u_max", json_util::ToJson(policy.u_max())},
                  {"theta", json_util::ToJson(policy.params())}};
  return j.dump() + "\n";
}

Policy PolicyFromJson(const std::string& text) {
  const json j = Parse(text, "policy");
  CheckFormat(j, "pilco.policy", kPolicyFormatVersion);
  try {
    const PolicyVariant v = ParseVariant(j.at("variant").get<std::string>());
    const int d = j.at("input_dim").get<int>();
    const int f = j.at("control_dim").get<int>();
    const VectorXd u_max = json_util::VectorFromJson(j.at("u_max"));
    Policy p = v == PolicyVariant::kRbf
                   ? Policy::Rbf(d, f, j.at("num_basis").get<int>(), u_max)
                   : Policy::Linear(d, f, u_max);
    const VectorXd theta = json_util::VectorFromJson(j.at("theta"));
    if (theta.size() != p.num_params())
      throw DomainError("policy: parameter count does not match the shape");
    p.SetParams(theta);
    return p;
  } catch (const json::exception& e) {
    throw DomainError(std::string("policy: ") + e.what());
  }
}

std::string EpisodeToTsv(const Episode& episode, const EnvSpec& spec) {
  std::ostringstream out;
  out << "# env=" << EnvName(spec.variant) << " spec_hash=" << SpecHash(spec)
      << " seed=" << episode.seed << " clamped=" << episode.clamp_count << "\n";
  out << "time";
  for (int d = 0; d < episode.states.cols(); ++d) out << "\tx" << d;
  for (int f = 0; f < episode.controls.cols(); ++f) out << "\tu" << f;
  out << "\n";
  for (int t = 0; t < episode.states.rows(); ++t) {
    out << Num(t * spec.dt_control);
    for (int d = 0; d < episode.states.cols(); ++d)
      out << "\t" << Num(episode.states(t, d));
    for (int f = 0; f < episode.controls.cols(); ++f)
      out << "\t"
          << (t < episode.steps() ? Num(episode.controls(t, f)) : "nan");
    out << "\n";
  }
  return out.str();
}

std::string RolloutToTsv(const RolloutReport& report, double dt) {
  std::ostringstream out;
  const int d = report.beliefs.empty() ? 0 : report.beliefs[0].dim();
  out << "step\ttime";
  for (int i = 0; i < d; ++i) out << "\tmean" << i;
  for (int i = 0; i < d; ++i) out << "\tvar" << i;
  out << "\texpected_cost\tcost_std\n";
  for (size_t t = 0; t < report.beliefs.size(); ++t) {
    const GaussianBelief& b = report.beliefs[t];
    out << t << "\t" << Num(t * dt);
    for (int i = 0; i < d; ++i) out << "\t" << Num(b.mean()(i));
    for (int i = 0; i < d; ++i) out << "\t" << Num(b.cov()(i, i));
    out << "\t" << Num(report.step_costs[t]) << "\t" << Num(report.cost_std[t])
        << "\n";
  }
  return out.str();
}

std::string TraceSummaryJson(const OptimResult& result) {
  json j = {{"status", StatusName(result.status)},
            {"iterations", result.iterations},
            {"evaluations", result.evaluations},
            {"final_value", result.value}};
  if (!result.trace.empty()) {
    j["initial_value"] = result.trace.front().value;
    j["final_grad_norm"] = result.trace.back().grad_norm;
  }
  return j.dump();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  out << contents;
}

JsonlLog::JsonlLog(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw DomainError("cannot open log " + path);
}

void JsonlLog::Append(const std::string& json_object) {
  if (!out_.is_open()) return;
  const std::lock_guard<std::mutex> lock(mu_);
  out_ << json_object << "\n";
  out_.flush();
}

}  // namespace pilco
