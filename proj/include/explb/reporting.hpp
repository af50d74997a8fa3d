#pragma once

// Experiment-config JSON parsing and the file outputs: regret reports as
// JSON, traces and regret curves as CSV. Indices in these external formats
// are 1-based (t = 1..T, action/expert = 1..N); everything in memory is
// 0-based.

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "explb/harness.hpp"

namespace explb {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("config error at " + where + ": unknown key \"" + it.key() +
                                  "\"");
  }
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config error at " + where + "/" + key + ": " + e.what());
  }
}

}  // namespace detail

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config error: \"scenario\" must be an object");
  detail::reject_unknown_keys(
      j,
      {"kind", "num_experts", "horizon", "loss_model", "seed", "mu", "gap", "full_info_rounds",
       "bandit_rounds", "full_info_flags", "subset_size", "subsets", "slack_fraction", "loss_min",
       "loss_max", "slack_cap", "instance_path"},
      "/scenario");
  ScenarioSpec s;
  if (!j.contains("kind"))
    throw std::invalid_argument("config error at /scenario: \"kind\" is required");
  s.kind = parse_scenario_kind(detail::get_as<std::string>(j, "kind", "/scenario"));
  if (j.contains("num_experts"))
    s.num_experts = detail::get_as<int>(j, "num_experts", "/scenario");
  if (j.contains("horizon")) s.horizon = detail::get_as<int>(j, "horizon", "/scenario");
  if (j.contains("loss_model"))
    s.loss_model = parse_loss_model(detail::get_as<std::string>(j, "loss_model", "/scenario"));
  if (j.contains("seed")) s.seed = detail::get_as<std::uint64_t>(j, "seed", "/scenario");
  if (j.contains("mu")) s.mu = detail::get_as<double>(j, "mu", "/scenario");
  if (j.contains("gap")) s.gap = detail::get_as<double>(j, "gap", "/scenario");
  if (j.contains("full_info_rounds"))
    s.full_info_rounds = detail::get_as<long long>(j, "full_info_rounds", "/scenario");
  if (j.contains("bandit_rounds"))
    s.bandit_rounds = detail::get_as<long long>(j, "bandit_rounds", "/scenario");
  if (j.contains("full_info_flags"))
    s.full_info_flags = detail::get_as<std::vector<int>>(j, "full_info_flags", "/scenario");
  if (j.contains("subset_size")) s.subset_size = detail::get_as<int>(j, "subset_size", "/scenario");
  if (j.contains("subsets"))
    s.subsets = detail::get_as<std::vector<std::vector<int>>>(j, "subsets", "/scenario");
  if (j.contains("slack_fraction"))
    s.slack_fraction = detail::get_as<double>(j, "slack_fraction", "/scenario");
  if (j.contains("loss_min")) s.loss_min = detail::get_as<double>(j, "loss_min", "/scenario");
  if (j.contains("loss_max")) s.loss_max = detail::get_as<double>(j, "loss_max", "/scenario");
  if (j.contains("slack_cap")) s.slack_cap = detail::get_as<double>(j, "slack_cap", "/scenario");
  if (j.contains("instance_path"))
    s.instance_path = detail::get_as<std::string>(j, "instance_path", "/scenario");
  return s;
}

inline nlohmann::json scenario_to_json(const ScenarioSpec& s) {
  nlohmann::json j;
  j["kind"] = scenario_kind_name(s.kind);
  j["num_experts"] = s.num_experts;
  j["horizon"] = s.horizon;
  j["loss_model"] = loss_model_name(s.loss_model);
  j["seed"] = s.seed;
  switch (s.kind) {
    case ScenarioKind::mixed:
      if (s.full_info_flags)
        j["full_info_flags"] = *s.full_info_flags;
      else if (s.full_info_rounds >= 0)
        j["full_info_rounds"] = s.full_info_rounds;
      break;
    case ScenarioKind::variable_subset:
      if (s.subsets)
        j["subsets"] = *s.subsets;
      else
        j["subset_size"] = s.subset_size;
      break;
    case ScenarioKind::generic_lb:
      j["slack_fraction"] = s.slack_fraction;
      j["loss_min"] = s.loss_min;
      j["loss_max"] = s.loss_max;
      break;
    case ScenarioKind::upper_bound:
      j["slack_cap"] = s.slack_cap;
      break;
    default:
      break;
  }
  if (s.loss_model == LossModel::bernoulli_gap) {
    j["mu"] = s.mu;
    j["gap"] = s.gap;
  }
  if (s.loss_model == LossModel::adversarial_handcrafted) j["instance_path"] = s.instance_path;
  return j;
}

inline EtaPreset parse_eta_preset(const std::string& s) {
  if (s == "full_info") return EtaPreset::full_info;
  if (s == "bandit") return EtaPreset::bandit;
  if (s == "mixed") return EtaPreset::mixed;
  if (s == "variable_subset") return EtaPreset::variable_subset;
  throw std::invalid_argument("unknown eta_preset \"" + s + "\"");
}

inline BetaMode parse_beta_mode(const std::string& s) {
  if (s == "hp_i") return BetaMode::hp_i;
  if (s == "hp_ii") return BetaMode::hp_ii;
  if (s == "hp_iii") return BetaMode::hp_iii;
  throw std::invalid_argument("unknown beta mode \"" + s + "\" (expected hp_i|hp_ii|hp_iii)");
}

inline LearnerConfig learner_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config error: \"learner\" must be an object");
  detail::reject_unknown_keys(j, {"algorithm", "eta", "eta_preset", "beta"}, "/learner");
  LearnerConfig c;
  if (!j.contains("algorithm"))
    throw std::invalid_argument("config error at /learner: \"algorithm\" is required");
  c.algorithm = parse_algorithm(detail::get_as<std::string>(j, "algorithm", "/learner"));
  if (j.contains("eta")) {
    const auto& e = j.at("eta");
    if (e.is_string()) {
      if (e.get<std::string>() != "auto")
        throw std::invalid_argument("config error at /learner/eta: expected a number or \"auto\"");
    } else if (e.is_number()) {
      c.eta = e.get<double>();
    } else {
      throw std::invalid_argument("config error at /learner/eta: expected a number or \"auto\"");
    }
  }
  if (j.contains("eta_preset"))
    c.eta_preset = parse_eta_preset(detail::get_as<std::string>(j, "eta_preset", "/learner"));
  if (j.contains("beta")) {
    const auto& b = j.at("beta");
    if (b.is_number()) {
      c.beta = b.get<double>();
    } else if (b.is_object()) {
      detail::reject_unknown_keys(b, {"mode", "delta"}, "/learner/beta");
      if (!b.contains("mode"))
        throw std::invalid_argument("config error at /learner/beta: \"mode\" is required");
      c.beta_mode = parse_beta_mode(detail::get_as<std::string>(b, "mode", "/learner/beta"));
      if (b.contains("delta")) c.beta_delta = detail::get_as<double>(b, "delta", "/learner/beta");
    } else {
      throw std::invalid_argument(
          "config error at /learner/beta: expected a number or {\"mode\", \"delta\"}");
    }
  }
  return c;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config error: top level must be an object");
  detail::reject_unknown_keys(j, {"scenario", "learner", "replicates", "seed", "delta", "out"},
                              "/");
  if (!j.contains("scenario") || !j.contains("learner"))
    throw std::invalid_argument("config error: \"scenario\" and \"learner\" are required");
  ExperimentConfig c;
  c.scenario = scenario_from_json(j.at("scenario"));
  c.learner = learner_from_json(j.at("learner"));
  if (j.contains("replicates")) c.replicates = detail::get_as<int>(j, "replicates", "/");
  if (j.contains("seed")) c.seed = detail::get_as<std::uint64_t>(j, "seed", "/");
  if (j.contains("delta")) c.delta = detail::get_as<double>(j, "delta", "/");
  if (j.contains("out")) c.out_dir = detail::get_as<std::string>(j, "out", "/");
  return c;
}

// Parses a config file; syntax errors are reported with line and column.
inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw std::invalid_argument(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline nlohmann::json quantities_to_json(const BoundQuantities& q) {
  nlohmann::json j;
  j["q_lb"] = q.q_lb;
  j["sum_sq_slack"] = q.sum_sq_slack;
  j["hybrid"] = q.hybrid;
  j["Q_theorem"] = q.Q_theorem;
  j["Q_prime"] = q.Q_prime;
  if (q.Q_uh) j["Q_uh"] = *q.Q_uh;
  return j;
}

inline nlohmann::json report_to_json(const RegretReport& r) {
  nlohmann::json j;
  j["mean_pseudo_regret"] = r.mean_pseudo_regret;
  if (r.std_error)
    j["std_error"] = *r.std_error;
  else
    j["std_error"] = nullptr;  // undefined for a single replicate
  j["per_replicate_regret"] = r.per_replicate_regret;
  j["theoretical_bound"] = r.theoretical_bound;
  j["bound_kind"] = r.bound_kind;
  j["quantities"] = quantities_to_json(r.quantities);
  j["eta_used"] = r.eta_used;
  j["beta_used"] = r.beta_used;
  if (r.violation_fraction) j["violation_fraction"] = *r.violation_fraction;
  j["algorithm"] = r.algorithm;
  j["num_experts"] = r.num_experts;
  j["horizon"] = r.horizon;
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  j["delta"] = r.delta;
  j["q_tuning"] = r.q_tuning;
  j["q_substituted"] = r.q_substituted;
  j["best_expert"] = r.best_expert + 1;  // 1-based, as in the CSV outputs
  j["best_expert_cum_loss"] = r.best_expert_cum_loss;
  if (r.doubling_initial_guess) {
    j["doubling"] = {{"initial_guess", *r.doubling_initial_guess},
                     {"accumulator", r.doubling_accumulator}};
  }
  return j;
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Trace CSV: t,action,realized_loss,p_1..p_N,cum_regret. The trailing column
// is the cumulative realized loss minus the best expert's cumulative loss
// through round t.
inline void write_trace_csv(std::ostream& out, const RunTrace& trace,
                            const std::vector<double>& best_cumloss) {
  const int T = static_cast<int>(trace.actions.size());
  const int n = T > 0 ? trace.distributions[0].size() : 0;
  out << "t,action,realized_loss";
  for (int i = 1; i <= n; ++i) out << ",p_" << i;
  out << ",cum_regret\n";
  double cum = 0.0;
  for (int t = 0; t < T; ++t) {
    cum += trace.realized_losses[t];
    out << (t + 1) << ',' << (trace.actions[t] + 1) << ','
        << fmt_double(trace.realized_losses[t]);
    for (int i = 0; i < n; ++i) out << ',' << fmt_double(trace.distributions[t][i]);
    out << ',' << fmt_double(cum - best_cumloss[t]) << '\n';
  }
}

// Regret-curve CSV: round,mean_regret,stderr,bound.
inline void write_curve_csv(std::ostream& out, const RegretCurve& curve) {
  out << "round,mean_regret,stderr,bound\n";
  for (std::size_t t = 0; t < curve.mean_regret.size(); ++t)
    out << (t + 1) << ',' << fmt_double(curve.mean_regret[t]) << ','
        << fmt_double(curve.std_error[t]) << ',' << fmt_double(curve.bound[t]) << '\n';
}

// Sweep CSV: one row per grid value.
struct SweepRow {
  double value = 0.0;
  double mean_regret = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
};

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "value,mean_regret,stderr,bound\n";
  for (const auto& r : rows)
    out << fmt_double(r.value) << ',' << fmt_double(r.mean_regret) << ','
        << fmt_double(r.std_error) << ',' << fmt_double(r.bound) << '\n';
}

}  // namespace explb
