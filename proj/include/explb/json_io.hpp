#pragma once

// JSON serialization of game instances. The document layout is
//   {"num_experts": N, "horizon": T,
//    "losses": [[...], ...],         // one row per expert, length T
//    "lower_bounds": [[...], ...],
//    "upper_bounds": [[...], ...],   // optional
//    "slack_caps": [...]}            // optional, length T
// Row-per-expert orientation is normative for files; in memory the matrices
// are round-major.

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "explb/core.hpp"

namespace explb {

inline nlohmann::json matrix_to_json(const RoundMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : m.expert_rows()) rows.push_back(row);
  return rows;
}

inline RoundMatrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(what + " must be a non-empty array of per-expert rows");
  std::vector<std::vector<double>> rows;
  rows.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array()) throw std::invalid_argument(what + " rows must be arrays");
    rows.push_back(row.get<std::vector<double>>());
  }
  try {
    return RoundMatrix::from_expert_rows(rows);
  } catch (const std::exception& e) {
    throw std::invalid_argument(what + ": " + e.what());
  }
}

inline nlohmann::json instance_to_json(const GameInstance& inst) {
  nlohmann::json j;
  j["num_experts"] = inst.num_experts;
  j["horizon"] = inst.horizon;
  j["losses"] = matrix_to_json(inst.losses);
  j["lower_bounds"] = matrix_to_json(inst.lower_bounds);
  if (inst.upper_bounds) j["upper_bounds"] = matrix_to_json(*inst.upper_bounds);
  if (inst.slack_caps) j["slack_caps"] = *inst.slack_caps;
  return j;
}

inline GameInstance instance_from_json(const nlohmann::json& j) {
  for (const char* key : {"num_experts", "horizon", "losses", "lower_bounds"})
    if (!j.contains(key))
      throw std::invalid_argument(std::string("instance is missing \"") + key + "\"");
  GameInstance inst;
  inst.num_experts = j.at("num_experts").get<int>();
  inst.horizon = j.at("horizon").get<int>();
  inst.losses = matrix_from_json(j.at("losses"), "losses");
  inst.lower_bounds = matrix_from_json(j.at("lower_bounds"), "lower_bounds");
  if (j.contains("upper_bounds"))
    inst.upper_bounds = matrix_from_json(j.at("upper_bounds"), "upper_bounds");
  if (j.contains("slack_caps"))
    inst.slack_caps = j.at("slack_caps").get<std::vector<double>>();
  ValidationResult v = validate_instance(inst);
  if (!v.ok) throw std::invalid_argument("instance: " + v.message);
  return inst;
}

inline GameInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open instance file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return instance_from_json(j);
}

inline void save_instance_file(const GameInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file " + path);
  out << instance_to_json(inst).dump(2) << '\n';
}

}  // namespace explb
