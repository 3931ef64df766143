#pragma once

// Run configuration: a single JSON document with named sections. Unknown keys
// are rejected with their key path before any computation starts.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "wkam/errors.hpp"
#include "wkam/hamiltonian.hpp"
#include "wkam/serialize.hpp"
#include "wkam/torus.hpp"
#include "wkam/verification.hpp"

namespace wkam {

// ---------------------------------------------------------------------------
// Built-in fixtures.

namespace fixtures {

inline HamiltonianSpec free_particle(int dim) { return p_polynomial(dim, {0.0, 0.0, 0.5}, "FREE"); }
inline HamiltonianSpec pendulum() { return mechanical(1, {1.0, 0.0}, "PEND"); }
inline HamiltonianSpec double_well() { return mechanical(1, {0.0, 0.0, 1.0, 0.0}, "DW"); }
inline HamiltonianSpec quartic(int dim) { return p_polynomial(dim, {0.0, 0.0, 0.0, 0.0, 0.25}, "QUARTIC"); }

/// f(q1,p1) = p1^2/2 + cos(2 pi q1), g(q2,p2) = p2^2/2.
inline HamiltonianSpec sep3_f() { return mechanical(1, {1.0, 0.0}, "f"); }
inline HamiltonianSpec sep3_g() { return p_polynomial(1, {0.0, 0.0, 0.5}, "g"); }
inline HamiltonianSpec sep3_h1() { return separable({sep3_f(), sep3_g()}, "SEP3.H1"); }
inline HamiltonianSpec sep3_h2() { return separable({combine({sep3_f()}, {2.0}, "2f"), sep3_g()}, "SEP3.H2"); }

inline HamiltonianSpec nc_h1() { return mechanical(2, {1.0, 0.0, 0.0, 0.0}, "NC.H1"); }
inline HamiltonianSpec nc_h2() { return mechanical(2, {0.0, 0.0, 1.0, 0.0}, "NC.H2"); }

inline PairFixture sep3() { return {"SEP3", sep3_h1(), sep3_h2()}; }
inline PairFixture nc() { return {"NC", nc_h1(), nc_h2()}; }
inline PairFixture free_pair(int dim) { return {"FREE", free_particle(dim), free_particle(dim)}; }
/// The double well with a rescaled copy of itself (any function of H commutes with H).
inline PairFixture double_well_pair() { return {"DW", double_well(), combine({double_well()}, {2.0}, "2DW")}; }

inline std::optional<HamiltonianSpec> hamiltonian(const std::string& name) {
  if (name == "FREE" || name == "FREE1") return free_particle(1);
  if (name == "FREE2") return free_particle(2);
  if (name == "PEND") return pendulum();
  if (name == "DW") return double_well();
  if (name == "QUARTIC" || name == "QUARTIC1") return quartic(1);
  if (name == "QUARTIC2") return quartic(2);
  if (name == "SEP3.f") return sep3_f();
  if (name == "SEP3.g") return sep3_g();
  if (name == "SEP3.H1") return sep3_h1();
  if (name == "SEP3.H2") return sep3_h2();
  if (name == "NC.H1") return nc_h1();
  if (name == "NC.H2") return nc_h2();
  return std::nullopt;
}

inline std::optional<PairFixture> pair(const std::string& name) {
  if (name == "SEP3") return sep3();
  if (name == "NC") return nc();
  if (name == "FREE" || name == "FREE2") return free_pair(2);
  if (name == "FREE1") return free_pair(1);
  if (name == "DW") return double_well_pair();
  return std::nullopt;
}

}  // namespace fixtures

// ---------------------------------------------------------------------------

struct GridBlock {
  int dim = 1;
  int n = 64;
  double tau = 0.1;
  double v_max = 4.0;
  TorusGrid build() const { return build_grid(dim, n, tau, v_max); }
};

struct AlphaSweep {
  std::string hamiltonian;
  std::vector<std::vector<double>> classes;
  std::string method = "karp";
};

struct BarrierBlock {
  std::string hamiltonian;
  std::uint64_t n_max = kDefaultBarrierSteps;
  std::uint64_t window = kDefaultBarrierWindow;
  std::optional<double> tol_zero;
  double tol_zero_factor = 10.0;
};

struct VerifyBlock {
  std::string pair;
  std::vector<std::string> checks;
  VerifySettings settings;
  bool expect_fail = false;
};

struct RunConfig {
  GridBlock grid;
  bool has_grid = false;
  std::map<std::string, nlohmann::json> hamiltonian_blocks;
  std::map<std::string, std::pair<std::string, std::string>> pair_blocks;
  OneForm form;
  bool has_form = false;
  std::optional<AlphaSweep> alpha;
  std::optional<BarrierBlock> barrier;
  std::optional<VerifyBlock> verify;
  std::string output = "out";
  CacheMode cache = CacheMode::ReadWrite;
  std::string cache_dir = ".wkam-cache";

  /// Named spec from the config, falling back to the built-in registry.
  HamiltonianSpec hamiltonian(const std::string& name) const {
    std::set<std::string> visiting;
    return resolve(name, visiting);
  }

  PairFixture pair(const std::string& name) const {
    if (auto it = pair_blocks.find(name); it != pair_blocks.end())
      return {name, hamiltonian(it->second.first), hamiltonian(it->second.second)};
    if (auto p = fixtures::pair(name)) return *p;
    throw ConfigError("unknown pair '" + name + "'", "verify.pair");
  }

  OneForm form_for(int dim) const {
    if (has_form) {
      if (form.dim() != dim) throw ConfigError("form dimension does not match", "form.c");
      return form;
    }
    return constant_form(std::vector<double>(dim, 0.0));
  }

 private:
  HamiltonianSpec resolve(const std::string& name, std::set<std::string>& visiting) const {
    if (auto it = hamiltonian_blocks.find(name); it != hamiltonian_blocks.end()) {
      if (!visiting.insert(name).second) throw ConfigError("cyclic reference to '" + name + "'", "hamiltonians");
      auto h = spec_from_json(
          it->second, [&](const std::string& n) { return resolve(n, visiting); }, "hamiltonians." + name, name);
      visiting.erase(name);
      return h;
    }
    if (auto h = fixtures::hamiltonian(name)) return *h;
    throw ConfigError("unknown hamiltonian '" + name + "'", "hamiltonians");
  }
};

namespace detail {

inline std::vector<double> as_vector(const nlohmann::json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw ConfigError("expected a number or an array", path);
  try {
    return j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("expected an array of numbers", path);
  }
}

/// {"values": [[c...], ...]} or {"from": [..], "to": [..], "count": k | [k..]}.
inline std::vector<std::vector<double>> parse_sweep(const nlohmann::json& j, int dim, const std::string& path) {
  std::vector<std::vector<double>> out;
  if (j.contains("values")) {
    const auto& v = j.at("values");
    if (!v.is_array()) throw ConfigError("expected an array", path + ".values");
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto c = as_vector(v[i], path + ".values[" + std::to_string(i) + "]");
      if (static_cast<int>(c.size()) != dim) throw ConfigError("class has the wrong dimension", path + ".values");
      out.push_back(c);
    }
  } else if (j.contains("from") || j.contains("to") || j.contains("count")) {
    auto from = as_vector(get_as<nlohmann::json>(j, "from", path), path + ".from");
    auto to = as_vector(get_as<nlohmann::json>(j, "to", path), path + ".to");
    auto cj = get_as<nlohmann::json>(j, "count", path);
    std::vector<int> count;
    if (cj.is_number_integer()) count.assign(dim, cj.get<int>());
    else if (cj.is_array()) count = cj.get<std::vector<int>>();
    else throw ConfigError("expected an integer or an array", path + ".count");
    if (static_cast<int>(from.size()) != dim || static_cast<int>(to.size()) != dim ||
        static_cast<int>(count.size()) != dim)
      throw ConfigError("from, to and count need one entry per axis", path);
    std::array<std::vector<double>, kMaxDim> axis;
    for (int i = 0; i < dim; ++i) {
      if (count[i] < 0) throw ConfigError("negative count", path + ".count");
      for (int k = 0; k < count[i]; ++k)
        axis[i].push_back(count[i] == 1 ? from[i] : from[i] + (to[i] - from[i]) * k / (count[i] - 1));
    }
    if (dim == 1) {
      for (double a : axis[0]) out.push_back({a});
    } else {
      for (double b : axis[1])
        for (double a : axis[0]) out.push_back({a, b});
    }
  }
  if (out.empty()) throw ConfigError("empty sweep", path);
  return out;
}

template <class T>
void read_opt(const nlohmann::json& j, const std::string& key, const std::string& path, T& into) {
  if (j.contains(key)) into = get_as<T>(j, key, path);
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  detail::reject_unknown(j, {"grid", "hamiltonians", "pairs", "form", "alpha", "barrier", "verify", "output", "cache",
                             "cache_dir"},
                         "$");
  RunConfig rc;
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::reject_unknown(g, {"dim", "n", "tau", "v_max"}, "grid");
    rc.grid.dim = detail::get_as<int>(g, "dim", "grid");
    rc.grid.n = detail::get_as<int>(g, "n", "grid");
    rc.grid.tau = detail::get_as<double>(g, "tau", "grid");
    rc.grid.v_max = detail::get_as<double>(g, "v_max", "grid");
    rc.grid.build();  // validates
    rc.has_grid = true;
  }
  if (j.contains("hamiltonians")) {
    const auto& hs = j.at("hamiltonians");
    if (!hs.is_object()) throw ConfigError("expected an object", "hamiltonians");
    for (auto it = hs.begin(); it != hs.end(); ++it) rc.hamiltonian_blocks[it.key()] = it.value();
    for (const auto& [name, _] : rc.hamiltonian_blocks) rc.hamiltonian(name);  // validates
  }
  if (j.contains("pairs")) {
    const auto& ps = j.at("pairs");
    if (!ps.is_object()) throw ConfigError("expected an object", "pairs");
    for (auto it = ps.begin(); it != ps.end(); ++it) {
      const std::string path = "pairs." + it.key();
      if (!it->is_array() || it->size() != 2 || !(*it)[0].is_string() || !(*it)[1].is_string())
        throw ConfigError("expected [name, name]", path);
      rc.pair_blocks[it.key()] = {(*it)[0].get<std::string>(), (*it)[1].get<std::string>()};
      auto p = rc.pair(it.key());
      if (p.h1.dim != p.h2.dim) throw ConfigError("pair members differ in dimension", path);
    }
  }
  const int dim = rc.grid.dim;
  if (j.contains("form")) {
    int fdim = dim;
    if (!rc.has_grid && j.at("form").contains("c") && j.at("form").at("c").is_array())
      fdim = static_cast<int>(j.at("form").at("c").size());
    rc.form = form_from_json(j.at("form"), fdim, "form");
    rc.has_form = true;
  }
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    detail::reject_unknown(a, {"hamiltonian", "values", "from", "to", "count", "method"}, "alpha");
    AlphaSweep s;
    s.hamiltonian = detail::get_as<std::string>(a, "hamiltonian", "alpha");
    const auto h = rc.hamiltonian(s.hamiltonian);
    s.classes = detail::parse_sweep(a, h.dim, "alpha");
    detail::read_opt(a, "method", "alpha", s.method);
    if (s.method != "karp" && s.method != "power-iteration")
      throw ConfigError("method must be karp or power-iteration", "alpha.method");
    rc.alpha = s;
  }
  if (j.contains("barrier")) {
    const auto& b = j.at("barrier");
    detail::reject_unknown(b, {"hamiltonian", "n_max", "window", "tol_zero", "tol_zero_factor"}, "barrier");
    BarrierBlock bb;
    bb.hamiltonian = detail::get_as<std::string>(b, "hamiltonian", "barrier");
    rc.hamiltonian(bb.hamiltonian);
    detail::read_opt(b, "n_max", "barrier", bb.n_max);
    detail::read_opt(b, "window", "barrier", bb.window);
    detail::read_opt(b, "tol_zero_factor", "barrier", bb.tol_zero_factor);
    if (b.contains("tol_zero")) bb.tol_zero = detail::get_as<double>(b, "tol_zero", "barrier");
    if (bb.window >= bb.n_max) throw ConfigError("window must be smaller than n_max", "barrier.window");
    rc.barrier = bb;
  }
  if (j.contains("verify")) {
    const auto& v = j.at("verify");
    detail::reject_unknown(v, {"pair", "checks", "resolutions", "tau", "tau_follows_spacing", "v_max",
                               "semigroup_time", "subsolution_steps", "n_max", "window", "tol_zero_factor",
                               "ratio_gate", "fine_threshold", "converged_floor", "exact_tol", "control_floor",
                               "control_ratio", "c_list", "gauge_exact", "seed", "record_runtime", "expect_fail"},
                           "verify");
    VerifyBlock vb;
    auto& s = vb.settings;
    vb.pair = detail::get_as<std::string>(v, "pair", "verify");
    const auto fx = rc.pair(vb.pair);
    vb.checks = check_names();
    detail::read_opt(v, "checks", "verify", vb.checks);
    for (const auto& c : vb.checks)
      if (std::find(check_names().begin(), check_names().end(), c) == check_names().end())
        throw ConfigError("unknown check '" + c + "'", "verify.checks");
    detail::read_opt(v, "resolutions", "verify", s.resolutions);
    detail::read_opt(v, "tau", "verify", s.tau);
    detail::read_opt(v, "tau_follows_spacing", "verify", s.tau_follows_spacing);
    detail::read_opt(v, "v_max", "verify", s.v_max);
    detail::read_opt(v, "semigroup_time", "verify", s.semigroup_time);
    detail::read_opt(v, "subsolution_steps", "verify", s.subsolution_steps);
    detail::read_opt(v, "n_max", "verify", s.n_max);
    detail::read_opt(v, "window", "verify", s.window);
    detail::read_opt(v, "tol_zero_factor", "verify", s.tol_zero_factor);
    detail::read_opt(v, "ratio_gate", "verify", s.ratio_gate);
    detail::read_opt(v, "fine_threshold", "verify", s.fine_threshold);
    detail::read_opt(v, "converged_floor", "verify", s.converged_floor);
    detail::read_opt(v, "exact_tol", "verify", s.exact_tol);
    detail::read_opt(v, "control_floor", "verify", s.control_floor);
    detail::read_opt(v, "control_ratio", "verify", s.control_ratio);
    detail::read_opt(v, "c_list", "verify", s.c_list);
    detail::read_opt(v, "gauge_exact", "verify", s.gauge_exact);
    detail::read_opt(v, "seed", "verify", s.seed);
    detail::read_opt(v, "record_runtime", "verify", s.record_runtime);
    detail::read_opt(v, "expect_fail", "verify", vb.expect_fail);
    if (s.resolutions.size() < 2) throw ConfigError("need at least two resolutions", "verify.resolutions");
    if (s.window >= s.n_max) throw ConfigError("window must be smaller than n_max", "verify.window");
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) grid_at(s, fx.dim(), lv);
    make_exact_part(s.gauge_exact, fx.dim());
    if (rc.has_form) s.c = rc.form.c;
    rc.verify = vb;
  }
  detail::read_opt(j, "output", "$", rc.output);
  if (j.contains("cache")) rc.cache = parse_cache_mode(detail::get_as<std::string>(j, "cache", "$"));
  detail::read_opt(j, "cache_dir", "$", rc.cache_dir);
  return rc;
}

inline RunConfig load_config(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open config file " + p.string(), "$");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "$");
  }
  return parse_config(j);
}

}  // namespace wkam
