#pragma once

/// JSON model files:
///   { "v_per": {"widths": [...], "values": [...]},
///     "f":     {"widths": [...], "values": [...]},
///     "mu":    {"atoms": [[value, probability], ...]} }
/// Widths cover [-1/2, 1/2]. Errors name the offending JSON path.

#include <fstream>
#include <sstream>
#include <string>

#include "alloy1d/model.hpp"
#include "json.hpp"

namespace alloy1d {

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw InvalidInput(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(path + "." + key + ": missing");
  return *it;
}

inline std::vector<double> number_array(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw InvalidInput(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidInput(path + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

inline PiecewisePotential potential_from_json(const nlohmann::json& j, const std::string& path) {
  PiecewisePotential p;
  p.x_start = -0.5;
  p.widths = number_array(require(j, "widths", path), path + ".widths");
  p.values = number_array(require(j, "values", path), path + ".values");
  p.validate(path, 1.0);
  return p;
}

inline nlohmann::json potential_to_json(const PiecewisePotential& p) {
  return {{"widths", p.widths}, {"values", p.values}};
}

}  // namespace detail

/// Parses and validates a model. `allow_zero_f` admits f = 0 (test use only).
inline ModelConfig model_from_json(const nlohmann::json& j, bool allow_zero_f = false) {
  ModelConfig m;
  m.v_per = detail::potential_from_json(detail::require(j, "v_per", "$"), "$.v_per");
  m.f = detail::potential_from_json(detail::require(j, "f", "$"), "$.f");
  const nlohmann::json& atoms = detail::require(detail::require(j, "mu", "$"), "atoms", "$.mu");
  if (!atoms.is_array()) throw InvalidInput("$.mu.atoms: expected an array of [value, probability] pairs");
  m.mu.atoms.clear();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string path = "$.mu.atoms[" + std::to_string(i) + "]";
    const std::vector<double> pair = detail::number_array(atoms[i], path);
    if (pair.size() != 2) throw InvalidInput(path + ": expected [value, probability]");
    m.mu.atoms.push_back({pair[0], pair[1]});
  }
  if (auto it = j.find("normalized"); it != j.end()) {
    if (!it->is_boolean()) throw InvalidInput("$.normalized: expected a boolean");
    m.normalized = it->get<bool>();
  }
  m.validate();
  if (!allow_zero_f && m.f.is_zero()) throw InvalidInput("$.f: single-site potential must not vanish identically");
  return m;
}

inline nlohmann::json model_to_json(const ModelConfig& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const Atom& a : m.mu.atoms) atoms.push_back({a.value, a.probability});
  return {{"v_per", detail::potential_to_json(m.v_per)},
          {"f", detail::potential_to_json(m.f)},
          {"mu", {{"atoms", atoms}}},
          {"normalized", m.normalized}};
}

inline ModelConfig load_model(const std::string& path, bool allow_zero_f = false) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("model file '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    return model_from_json(j, allow_zero_f);
  } catch (const InvalidInput& e) {
    throw InvalidInput("model file '" + path + "': " + e.message());
  }
}

}  // namespace alloy1d
