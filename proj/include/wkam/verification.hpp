#pragma once

// Refinement checks for commuting Hamiltonian pairs. Each check computes its
// metrics at a coarse and a fine resolution and gates on the fine/coarse ratio.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wkam/errors.hpp"
#include "wkam/hamiltonian.hpp"
#include "wkam/matrix_io.hpp"
#include "wkam/minplus.hpp"
#include "wkam/serialize.hpp"
#include "wkam/torus.hpp"
#include "wkam/weak_kam.hpp"

namespace wkam {

enum class CacheMode { ReadWrite, ReadOnly, Off };

inline CacheMode parse_cache_mode(const std::string& s) {
  if (s == "rw") return CacheMode::ReadWrite;
  if (s == "ro") return CacheMode::ReadOnly;
  if (s == "off") return CacheMode::Off;
  throw ConfigError("cache mode must be rw, ro or off", "cache");
}

/// Calibrated models and barrier matrices keyed by (spec, form, grid). Barriers
/// are also persisted to disk when a directory is configured.
class ModelCache {
 public:
  explicit ModelCache(std::filesystem::path dir = {}, CacheMode mode = CacheMode::Off)
      : dir_(std::move(dir)), mode_(dir_.empty() ? CacheMode::Off : mode) {}

  std::shared_ptr<const CalibratedModel> model(const HamiltonianSpec& spec, const OneForm& form,
                                               const TorusGrid& grid) {
    const std::string key = key_of(spec, form, grid);
    {
      std::lock_guard lk(mu_);
      if (auto it = models_.find(key); it != models_.end()) return it->second;
    }
    auto m = std::make_shared<const CalibratedModel>(build_model(spec, form, grid));
    std::lock_guard lk(mu_);
    return models_.emplace(key, std::move(m)).first->second;
  }

  std::shared_ptr<const BarrierMatrix> barrier(const HamiltonianSpec& spec, const OneForm& form,
                                               const TorusGrid& grid, std::uint64_t n_max = kDefaultBarrierSteps,
                                               std::uint64_t window = kDefaultBarrierWindow) {
    auto m = model(spec, form, grid);
    nlohmann::json expected = m->cost.provenance;
    expected["kind"] = "h";
    expected["alpha"] = m->alpha.alpha;
    expected["n_max"] = n_max;
    expected["window"] = window;
    const std::string key = expected.dump();
    {
      std::lock_guard lk(mu_);
      if (auto it = barriers_.find(key); it != barriers_.end()) return it->second;
    }
    std::shared_ptr<const BarrierMatrix> out;
    const auto path = dir_ / (cache_key(expected) + ".bin");
    if (mode_ != CacheMode::Off) {
      if (auto hit = read_matrix(path, expected)) {
        BarrierMatrix b;
        b.alpha = m->alpha.alpha;
        b.n_max = n_max;
        b.window = window;
        b.step = shifted(m->cost, m->cost.tau * m->alpha.alpha);
        b.h = std::move(*hit);
        b.h.grid = grid;
        b.h.index_finite();
        out = std::make_shared<const BarrierMatrix>(std::move(b));
        ++hits_;
      }
    }
    if (!out) {
      out = std::make_shared<const BarrierMatrix>(peierls_barrier(m->cost, m->alpha.alpha, n_max, window));
      if (mode_ == CacheMode::ReadWrite) {
        try {
          write_matrix(path, out->h);
        } catch (const std::exception& e) {
          warn(std::string("cache write failed: ") + e.what());
        }
      }
    }
    std::lock_guard lk(mu_);
    return barriers_.emplace(key, std::move(out)).first->second;
  }

  std::size_t disk_hits() const { return hits_; }

 private:
  static std::string key_of(const HamiltonianSpec& spec, const OneForm& form, const TorusGrid& grid) {
    return nlohmann::json{{"grid", grid_json(grid)}, {"spec", spec_json(spec)}, {"form", form_json(form)}}.dump();
  }

  std::filesystem::path dir_;
  CacheMode mode_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const CalibratedModel>> models_;
  std::map<std::string, std::shared_ptr<const BarrierMatrix>> barriers_;
  std::size_t hits_ = 0;
};

// ---------------------------------------------------------------------------

struct PairFixture {
  std::string name;
  HamiltonianSpec h1;
  HamiltonianSpec h2;
  int dim() const { return h1.dim; }
};

/// Resolution policy and gate thresholds. Times are physical; step counts are
/// round(time / tau) at each resolution.
struct VerifySettings {
  std::vector<int> resolutions{16, 32};
  double tau = 0.25;              // time step at the coarsest resolution
  bool tau_follows_spacing = true;  // tau scales like the spacing under refinement
  double v_max = 4.0;
  double semigroup_time = 0.5;
  std::size_t subsolution_steps = 2;
  std::uint64_t n_max = kDefaultBarrierSteps;
  std::uint64_t window = kDefaultBarrierWindow;
  double tol_zero_factor = 10.0;
  double ratio_gate = 0.7;
  double fine_threshold = 0.25;
  double converged_floor = 1e-9;
  double exact_tol = 1e-9;
  double control_floor = 0.1;
  double control_ratio = 0.9;
  std::vector<double> c;            // cohomology class; zeros when empty
  std::vector<std::vector<double>> c_list;  // classes for the alpha check
  std::string gauge_exact = "sin";
  std::uint64_t seed = 7;
  bool record_runtime = true;
};

inline TorusGrid grid_at(const VerifySettings& s, int dim, std::size_t level) {
  const int n = s.resolutions.at(level);
  const double tau = s.tau_follows_spacing ? s.tau * s.resolutions.front() / n : s.tau;
  return build_grid(dim, n, tau, s.v_max);
}

inline std::size_t steps_for(double time, const TorusGrid& g) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(time / g.tau)));
}

inline OneForm settings_form(const VerifySettings& s, int dim) {
  auto c = s.c;
  if (c.empty()) c.assign(dim, 0.0);
  if (static_cast<int>(c.size()) != dim) throw ConfigError("form class has the wrong dimension", "form.c");
  return constant_form(c);
}

/// Smooth random field from the seeded trigonometric generator.
inline ScalarField random_field(const TorusGrid& g, std::uint64_t seed) {
  OneForm f{std::vector<double>(g.dim, 0.0), make_exact_part("random:" + std::to_string(seed), g.dim)};
  return sample_exact_part(f, g);
}

struct Metric {
  std::string name;
  std::vector<double> values;  // one per resolution
  bool gated = true;
};

struct VerificationReport {
  std::string check;
  std::string fixture;
  std::vector<int> resolutions;
  std::vector<Metric> metrics;
  double ratio = 0.0;
  bool pass = false;
  double runtime_ms = 0.0;
  std::string error;
  nlohmann::json extra = nlohmann::json::object();

  const Metric* find(const std::string& n) const {
    for (const auto& m : metrics)
      if (m.name == n) return &m;
    return nullptr;
  }

  nlohmann::json to_json() const {
    nlohmann::json mj = nlohmann::json::object();
    for (const auto& m : metrics) mj[m.name] = m.values;
    nlohmann::json j = {{"check", check},       {"fixture", fixture}, {"resolutions", resolutions},
                        {"metrics", mj},        {"ratio", ratio},     {"pass", pass},
                        {"runtime_ms", runtime_ms}};
    if (!error.empty()) j["error"] = error;
    if (!extra.empty()) j["diagnostics"] = extra;
    return j;
  }
};

/// fine/coarse, with metrics below `floor` at both levels counted as converged (0).
inline double metric_ratio(const Metric& m, double floor) {
  const double coarse = m.values.front(), fine = m.values.back();
  if (fine <= floor) return 0.0;
  if (coarse <= floor) return kInf;
  return fine / coarse;
}

/// Shrinkage gate: every gated metric shrinks by ratio_gate and ends below
/// fine_threshold.
inline void gate_shrinkage(VerificationReport& r, const VerifySettings& s) {
  r.ratio = 0.0;
  r.pass = true;
  for (const auto& m : r.metrics) {
    if (!m.gated) continue;
    const double q = metric_ratio(m, s.converged_floor);
    r.ratio = std::max(r.ratio, q);
    if (!(q <= s.ratio_gate && m.values.back() <= s.fine_threshold)) r.pass = false;
  }
}

/// A control run detects non-commutation when some gated metric stays above
/// control_floor at every resolution and does not shrink.
inline bool control_detected(const VerificationReport& r, const VerifySettings& s) {
  for (const auto& m : r.metrics) {
    if (!m.gated) continue;
    const bool floor_ok = std::all_of(m.values.begin(), m.values.end(), [&](double v) { return v >= s.control_floor; });
    if (floor_ok && metric_ratio(m, s.converged_floor) >= s.control_ratio) return true;
  }
  return false;
}

inline double sup_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;  // equal infinities included
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

/// Hausdorff distance between two grid point sets under the torus metric.
inline double hausdorff(const TorusGrid& g, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return kInf;
  auto directed = [&](const std::vector<std::size_t>& from, const std::vector<std::size_t>& to) {
    double worst = 0.0;
    for (std::size_t x : from) {
      double best = kInf;
      const Coord px = g.point(x);
      for (std::size_t y : to) best = std::min(best, torus_distance(px, g.point(y), g.dim));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

namespace detail {

template <class Body>
VerificationReport run_check(const std::string& check, const std::string& fixture, const VerifySettings& s,
                             Body&& body) {
  VerificationReport r;
  r.check = check;
  r.fixture = fixture;
  r.resolutions = s.resolutions;
  if (s.resolutions.size() < 2) throw ConfigError("need at least two resolutions", "verify.resolutions");
  const auto t0 = std::chrono::steady_clock::now();
  body(r);
  if (s.record_runtime)
    r.runtime_ms = std::round(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  return r;
}

inline Metric& metric(VerificationReport& r, const std::string& name, bool gated = true) {
  for (auto& m : r.metrics)
    if (m.name == name) return m;
  r.metrics.push_back({name, {}, gated});
  return r.metrics.back();
}

}  // namespace detail

/// T-_{H1,s} T-_{H2,r} u0 against T-_{H2,r} T-_{H1,s} u0, and the forward analogue.
inline VerificationReport verify_semigroup_commutation(const PairFixture& fx, const VerifySettings& s,
                                                       ModelCache& cache) {
  return detail::run_check("semigroup_commutation", fx.name, s, [&](VerificationReport& r) {
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) {
      const auto g = grid_at(s, fx.dim(), lv);
      const auto form = settings_form(s, fx.dim());
      auto m1 = cache.model(fx.h1, form, g);
      auto m2 = cache.model(fx.h2, form, g);
      const auto n = steps_for(s.semigroup_time, g);
      const auto u0 = random_field(g, s.seed);
      detail::metric(r, "backward").values.push_back(sup_diff(backward_semigroup(*m1, backward_semigroup(*m2, u0, n), n),
                                                              backward_semigroup(*m2, backward_semigroup(*m1, u0, n), n)));
      detail::metric(r, "forward").values.push_back(sup_diff(forward_semigroup(*m1, forward_semigroup(*m2, u0, n), n),
                                                             forward_semigroup(*m2, forward_semigroup(*m1, u0, n), n)));
    }
    r.extra["seed"] = s.seed;
    gate_shrinkage(r, s);
  });
}

/// T-_{H1,t} T-_{H2,t} u0 against T-_{H1+H2,t} u0.
inline VerificationReport verify_sum_semigroup(const PairFixture& fx, const VerifySettings& s, ModelCache& cache) {
  const auto sum = combine({fx.h1, fx.h2}, {1.0, 1.0}, fx.h1.name + "+" + fx.h2.name);
  return detail::run_check("sum_semigroup", fx.name, s, [&](VerificationReport& r) {
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) {
      const auto g = grid_at(s, fx.dim(), lv);
      const auto form = settings_form(s, fx.dim());
      auto m1 = cache.model(fx.h1, form, g);
      auto m2 = cache.model(fx.h2, form, g);
      auto ms = cache.model(sum, form, g);
      const auto n = steps_for(s.semigroup_time, g);
      const auto u0 = random_field(g, s.seed);
      detail::metric(r, "sum").values.push_back(
          sup_diff(backward_semigroup(*m1, backward_semigroup(*m2, u0, n), n), backward_semigroup(*ms, u0, n)));
    }
    r.extra["seed"] = s.seed;
    gate_shrinkage(r, s);
  });
}

/// Elementary solutions of H1 at every class representative, tested as fixed
/// points of the calibrated semigroups of H2.
inline VerificationReport verify_shared_weak_kam(const PairFixture& fx, const VerifySettings& s, ModelCache& cache) {
  return detail::run_check("shared_weak_kam", fx.name, s, [&](VerificationReport& r) {
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) {
      const auto g = grid_at(s, fx.dim(), lv);
      const auto form = settings_form(s, fx.dim());
      const double tz = default_tol_zero(g, s.tol_zero_factor);
      auto h1 = cache.barrier(fx.h1, form, g, s.n_max, s.window);
      auto m2 = cache.model(fx.h2, form, g);
      const auto data = analyze_aubry(*h1, tz);
      const auto n = steps_for(s.semigroup_time, g);
      double back = 0.0, fwd = 0.0;
      for (std::size_t xi : data.quotient.representatives) {
        auto e = elementary_solutions(*h1, xi, tz);
        back = std::max(back, sup_diff(backward_semigroup(*m2, e.u_minus, n), e.u_minus));
        fwd = std::max(fwd, sup_diff(forward_semigroup(*m2, e.u_plus, n), e.u_plus));
      }
      detail::metric(r, "backward_residual").values.push_back(back);
      detail::metric(r, "forward_residual").values.push_back(fwd);
    }
    gate_shrinkage(r, s);
  });
}

inline VerificationReport verify_barrier_equality(const PairFixture& fx, const VerifySettings& s, ModelCache& cache) {
  return detail::run_check("barrier_equality", fx.name, s, [&](VerificationReport& r) {
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) {
      const auto g = grid_at(s, fx.dim(), lv);
      const auto form = settings_form(s, fx.dim());
      const double tz = default_tol_zero(g, s.tol_zero_factor);
      const auto d1 = analyze_aubry(*cache.barrier(fx.h1, form, g, s.n_max, s.window), tz);
      const auto d2 = analyze_aubry(*cache.barrier(fx.h2, form, g, s.n_max, s.window), tz);
      detail::metric(r, "B").values.push_back(sup_diff(d1.B, d2.B));
      detail::metric(r, "b").values.push_back(sup_diff(d1.b, d2.b));
    }
    gate_shrinkage(r, s);
  });
}

/// Hausdorff distances between the zero sets; passes at <= 2 spacings on the
/// finest grid.
inline VerificationReport verify_set_equality(const PairFixture& fx, const VerifySettings& s, ModelCache& cache) {
  return detail::run_check("set_equality", fx.name, s, [&](VerificationReport& r) {
    double spacing = 0.0;
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) {
      const auto g = grid_at(s, fx.dim(), lv);
      spacing = g.spacing;
      const auto form = settings_form(s, fx.dim());
      const double tz = default_tol_zero(g, s.tol_zero_factor);
      const auto d1 = analyze_aubry(*cache.barrier(fx.h1, form, g, s.n_max, s.window), tz);
      const auto d2 = analyze_aubry(*cache.barrier(fx.h2, form, g, s.n_max, s.window), tz);
      detail::metric(r, "aubry_hausdorff").values.push_back(hausdorff(g, d1.aubry, d2.aubry));
      detail::metric(r, "mane_hausdorff").values.push_back(hausdorff(g, d1.mane, d2.mane));
    }
    r.ratio = 0.0;
    r.pass = true;
    for (const auto& m : r.metrics) {
      r.ratio = std::max(r.ratio, metric_ratio(m, s.converged_floor));
      if (m.values.back() > 2.0 * spacing + 1e-12) r.pass = false;
    }
    r.extra["bound"] = 2.0 * spacing;
  });
}

/// max over classes c of |alpha_{H1+H2}(c) - alpha_{H1}(c) - alpha_{H2}(c)|.
inline VerificationReport verify_alpha_quasilinearity(const PairFixture& fx, const VerifySettings& s,
                                                      ModelCache& cache) {
  const auto sum = combine({fx.h1, fx.h2}, {1.0, 1.0}, fx.h1.name + "+" + fx.h2.name);
  auto classes = s.c_list;
  if (classes.empty()) classes.push_back(settings_form(s, fx.dim()).c);
  return detail::run_check("alpha_quasilinearity", fx.name, s, [&](VerificationReport& r) {
    nlohmann::json alphas = nlohmann::json::array();
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) {
      const auto g = grid_at(s, fx.dim(), lv);
      double worst = 0.0;
      for (const auto& c : classes) {
        if (static_cast<int>(c.size()) != fx.dim()) throw ConfigError("class has the wrong dimension", "verify.c_list");
        const auto form = constant_form(c);
        const double a1 = cache.model(fx.h1, form, g)->alpha.alpha;
        const double a2 = cache.model(fx.h2, form, g)->alpha.alpha;
        const double as = cache.model(sum, form, g)->alpha.alpha;
        worst = std::max(worst, std::abs(as - a1 - a2));
        alphas.push_back({{"n", g.n}, {"c", c}, {"alpha1", a1}, {"alpha2", a2}, {"alpha_sum", as}});
      }
      detail::metric(r, "defect").values.push_back(worst);
    }
    r.extra["alphas"] = alphas;
    gate_shrinkage(r, s);
  });
}

/// Subsolution violations of u = T-_{H1,s} T-_{H2,r} u_plus for both Hamiltonians.
inline VerificationReport verify_common_subsolution(const PairFixture& fx, const VerifySettings& s,
                                                    ModelCache& cache) {
  return detail::run_check("common_subsolution", fx.name, s, [&](VerificationReport& r) {
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) {
      const auto g = grid_at(s, fx.dim(), lv);
      const auto form = settings_form(s, fx.dim());
      const double tz = default_tol_zero(g, s.tol_zero_factor);
      auto h1 = cache.barrier(fx.h1, form, g, s.n_max, s.window);
      const auto data = analyze_aubry(*h1, tz);
      auto cs = common_subsolution(*cache.model(fx.h1, form, g), *cache.model(fx.h2, form, g), *h1,
                                   s.subsolution_steps, s.subsolution_steps, data.quotient.representatives.front(), tz,
                                   0.0);
      detail::metric(r, "violation_h1").values.push_back(std::max(0.0, cs.first.max_violation));
      detail::metric(r, "violation_h2").values.push_back(std::max(0.0, cs.second.max_violation));
      detail::metric(r, "second_difference", false).values.push_back(cs.second_difference);
    }
    gate_shrinkage(r, s);
  });
}

/// Greedy matching of quotient classes by Hausdorff distance of their point
/// sets; returns match[i] = class of the second quotient matched to class i.
inline std::vector<std::size_t> match_classes(const TorusGrid& g, const QuotientAubry& a, const QuotientAubry& b) {
  const std::size_t k = a.class_count();
  std::vector<std::size_t> match(k, 0);
  std::vector<bool> used(b.class_count(), false);
  for (std::size_t i = 0; i < k; ++i) {
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < b.class_count(); ++j) {
      if (used[j]) continue;
      const double d = hausdorff(g, a.classes[i], b.classes[j]);
      if (d < best) best = d, arg = j;
    }
    used[arg] = true;
    match[i] = arg;
  }
  return match;
}

inline VerificationReport verify_quotient_isometry(const PairFixture& fx, const VerifySettings& s, ModelCache& cache) {
  return detail::run_check("quotient_isometry", fx.name, s, [&](VerificationReport& r) {
    bool counts_equal = true;
    nlohmann::json counts = nlohmann::json::array();
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) {
      const auto g = grid_at(s, fx.dim(), lv);
      const auto form = settings_form(s, fx.dim());
      const double tz = default_tol_zero(g, s.tol_zero_factor);
      const auto q1 = analyze_aubry(*cache.barrier(fx.h1, form, g, s.n_max, s.window), tz).quotient;
      const auto q2 = analyze_aubry(*cache.barrier(fx.h2, form, g, s.n_max, s.window), tz).quotient;
      const double diff = std::abs(static_cast<double>(q1.class_count()) - static_cast<double>(q2.class_count()));
      counts.push_back({q1.class_count(), q2.class_count()});
      detail::metric(r, "class_count_difference", false).values.push_back(diff);
      double worst = 0.0;
      if (diff == 0.0) {
        const auto match = match_classes(g, q1, q2);
        const std::size_t k = q1.class_count();
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j)
            worst = std::max(worst, std::abs(q1.class_distance[i * k + j] - q2.class_distance[match[i] * k + match[j]]));
      } else {
        counts_equal = false;
        worst = kInf;
      }
      detail::metric(r, "distance_mismatch").values.push_back(worst);
    }
    r.extra["class_counts"] = counts;
    gate_shrinkage(r, s);
    if (!counts_equal) r.pass = false;
  });
}

/// alpha, B, b with the form (c, 0) against (c, f); exact at grid level.
inline VerificationReport verify_gauge_invariance(const HamiltonianSpec& spec, const std::string& fixture,
                                                  const VerifySettings& s, ModelCache& cache) {
  return detail::run_check("gauge_invariance", fixture, s, [&](VerificationReport& r) {
    for (std::size_t lv = 0; lv < s.resolutions.size(); ++lv) {
      const auto g = grid_at(s, spec.dim, lv);
      const auto plain = settings_form(s, spec.dim);
      OneForm shifted_form = plain;
      shifted_form.exact = make_exact_part(s.gauge_exact, spec.dim);
      const double tz = default_tol_zero(g, s.tol_zero_factor);
      auto ha = cache.barrier(spec, plain, g, s.n_max, s.window);
      auto hb = cache.barrier(spec, shifted_form, g, s.n_max, s.window);
      const auto da = analyze_aubry(*ha, tz);
      const auto db = analyze_aubry(*hb, tz);
      detail::metric(r, "alpha").values.push_back(std::abs(ha->alpha - hb->alpha));
      detail::metric(r, "B").values.push_back(sup_diff(da.B, db.B));
      detail::metric(r, "b").values.push_back(sup_diff(da.b, db.b));
    }
    r.ratio = 0.0;
    r.pass = true;
    for (const auto& m : r.metrics) {
      r.ratio = std::max(r.ratio, metric_ratio(m, s.converged_floor));
      for (double v : m.values)
        if (v > s.exact_tol) r.pass = false;
    }
    r.extra["exact_part"] = s.gauge_exact;
  });
}

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"semigroup_commutation", "sum_semigroup",     "shared_weak_kam",
                                                 "barrier_equality",      "set_equality",      "alpha_quasilinearity",
                                                 "common_subsolution",    "quotient_isometry", "gauge_invariance"};
  return names;
}

/// Dispatches a check by name. Numeric errors are recorded in the report.
inline VerificationReport run_named_check(const std::string& name, const PairFixture& fx, const VerifySettings& s,
                                          ModelCache& cache) {
  try {
    if (name == "semigroup_commutation") return verify_semigroup_commutation(fx, s, cache);
    if (name == "sum_semigroup") return verify_sum_semigroup(fx, s, cache);
    if (name == "shared_weak_kam") return verify_shared_weak_kam(fx, s, cache);
    if (name == "barrier_equality") return verify_barrier_equality(fx, s, cache);
    if (name == "set_equality") return verify_set_equality(fx, s, cache);
    if (name == "alpha_quasilinearity") return verify_alpha_quasilinearity(fx, s, cache);
    if (name == "common_subsolution") return verify_common_subsolution(fx, s, cache);
    if (name == "quotient_isometry") return verify_quotient_isometry(fx, s, cache);
    if (name == "gauge_invariance") return verify_gauge_invariance(fx.h1, fx.name, s, cache);
  } catch (const NumericError& e) {
    VerificationReport r;
    r.check = name;
    r.fixture = fx.name;
    r.resolutions = s.resolutions;
    r.error = e.what();
    return r;
  }
  throw ConfigError("unknown check '" + name + "'", "verify.checks");
}

}  // namespace wkam
