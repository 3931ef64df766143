#pragma once

// JSON encodings of Hamiltonians, forms and grids. Used for provenance
// records, cache keys and the run configuration.

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "wkam/errors.hpp"
#include "wkam/hamiltonian.hpp"
#include "wkam/torus.hpp"

namespace wkam {

inline nlohmann::json grid_json(const TorusGrid& g) {
  return {{"dim", g.dim}, {"n", g.n}, {"tau", g.tau}, {"v_max", g.v_max}};
}

inline nlohmann::json form_json(const OneForm& f) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : f.exact.terms)
    terms.push_back({t.wave[0], t.wave[1], t.cos_coeff, t.sin_coeff});
  return {{"c", f.c}, {"exact", {{"name", f.exact.name}, {"terms", terms}}}};
}

inline nlohmann::json spec_json(const HamiltonianSpec& h) {
  nlohmann::json j = {{"family", family_name(h.family)}, {"dim", h.dim}, {"name", h.name}};
  if (!h.params.empty()) j["params"] = h.params;
  if (!h.weights.empty()) j["weights"] = h.weights;
  if (!h.parts.empty()) {
    j["parts"] = nlohmann::json::array();
    for (const auto& p : h.parts) j["parts"].push_back(spec_json(p));
  }
  if (h.form_shift) j["form_shift"] = form_json(*h.form_shift);
  return j;
}

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) throw ConfigError("expected an object", path);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "'", path);
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError("missing key '" + key + "'", path);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value: ") + e.what(), path + "." + key);
  }
}

}  // namespace detail

/// Parses {"c": [...], "exact": "none" | "sin" | "random:<seed>"}.
inline OneForm form_from_json(const nlohmann::json& j, int dim, const std::string& path = "form") {
  detail::reject_unknown(j, {"c", "exact"}, path);
  OneForm f;
  f.c = detail::get_as<std::vector<double>>(j, "c", path);
  if (static_cast<int>(f.c.size()) != dim)
    throw ConfigError("c must have " + std::to_string(dim) + " components", path + ".c");
  std::string name = j.contains("exact") ? detail::get_as<std::string>(j, "exact", path) : "none";
  f.exact = make_exact_part(name, dim);
  return f;
}

using SpecResolver = std::function<HamiltonianSpec(const std::string&)>;

/// Parses a Hamiltonian block. A bare string refers to another named block.
///   {"family": "p_polynomial", "dim": d, "coeffs": [a0, a1, ...]}
///   {"family": "mechanical",   "dim": d, "potential": [a1, b1, ...] per axis}
///   {"family": "separable",    "axes": [spec, spec]}
///   {"family": "combination",  "of": [spec, ...], "weights": [w, ...]}
inline HamiltonianSpec spec_from_json(const nlohmann::json& j, const SpecResolver& resolve, const std::string& path,
                                      const std::string& name = {}) {
  if (j.is_string()) return resolve(j.get<std::string>());
  const auto family = detail::get_as<std::string>(j, "family", path);
  try {
    if (family == "p_polynomial") {
      detail::reject_unknown(j, {"family", "dim", "coeffs"}, path);
      return p_polynomial(detail::get_as<int>(j, "dim", path), detail::get_as<std::vector<double>>(j, "coeffs", path),
                          name);
    }
    if (family == "mechanical") {
      detail::reject_unknown(j, {"family", "dim", "potential"}, path);
      return mechanical(detail::get_as<int>(j, "dim", path),
                        detail::get_as<std::vector<double>>(j, "potential", path), name);
    }
    if (family == "separable") {
      detail::reject_unknown(j, {"family", "axes"}, path);
      std::vector<HamiltonianSpec> axes;
      const auto& arr = j.at("axes");
      if (!arr.is_array()) throw ConfigError("expected an array", path + ".axes");
      for (std::size_t i = 0; i < arr.size(); ++i)
        axes.push_back(spec_from_json(arr[i], resolve, path + ".axes[" + std::to_string(i) + "]"));
      return separable(std::move(axes), name);
    }
    if (family == "combination") {
      detail::reject_unknown(j, {"family", "of", "weights"}, path);
      std::vector<HamiltonianSpec> specs;
      const auto& arr = j.at("of");
      if (!arr.is_array()) throw ConfigError("expected an array", path + ".of");
      for (std::size_t i = 0; i < arr.size(); ++i)
        specs.push_back(spec_from_json(arr[i], resolve, path + ".of[" + std::to_string(i) + "]"));
      return combine(specs, detail::get_as<std::vector<double>>(j, "weights", path), name);
    }
  } catch (const InputError& e) {
    throw ConfigError(e.what(), path);
  }
  throw ConfigError("unknown family '" + family + "'", path + ".family");
}

}  // namespace wkam
