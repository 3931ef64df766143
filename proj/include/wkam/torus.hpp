#pragma once

// Uniform grids on the flat unit torus T^d (d = 1, 2) and closed 1-forms
// c.dq + df on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wkam/errors.hpp"

namespace wkam {

inline constexpr int kMaxDim = 2;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Point, momentum or velocity in at most kMaxDim components. Components past
/// the active dimension are kept at zero.
using Coord = std::array<double, kMaxDim>;
using Cell = std::array<int, kMaxDim>;

/// Real-valued grid function, indexed like TorusGrid states.
using ScalarField = std::vector<double>;

inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

struct TorusGrid {
  int dim = 1;
  int n = 1;  // points per axis
  double spacing = 1.0;
  double tau = 1.0;
  double v_max = 1.0;

  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
    return s;
  }

  Cell cell(std::size_t idx) const {
    Cell c{0, 0};
    for (int i = 0; i < dim; ++i) {
      c[i] = static_cast<int>(idx % static_cast<std::size_t>(n));
      idx /= static_cast<std::size_t>(n);
    }
    return c;
  }

  std::size_t index(Cell c) const {
    std::size_t idx = 0;
    for (int i = dim - 1; i >= 0; --i) {
      int k = ((c[i] % n) + n) % n;
      idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(k);
    }
    return idx;
  }

  Coord point(std::size_t idx) const {
    Cell c = cell(idx);
    Coord q{0.0, 0.0};
    for (int i = 0; i < dim; ++i) q[i] = c[i] * spacing;
    return q;
  }

  /// Largest per-axis step, in cells, allowed by the speed cap.
  int max_step_cells() const {
    return static_cast<int>(std::floor(v_max * tau / spacing + 1e-9));
  }

  /// Signed per-axis displacement from y to x in cells, in (-n/2, n/2].
  /// The half-period tie resolves to the positive sign.
  Cell displacement_cells(std::size_t x, std::size_t y) const {
    Cell cx = cell(x), cy = cell(y), d{0, 0};
    for (int i = 0; i < dim; ++i) {
      int k = ((cx[i] - cy[i]) % n + n) % n;
      if (2 * k > n) k -= n;
      d[i] = k;
    }
    return d;
  }

  bool feasible(const Cell& d) const {
    const int kmax = max_step_cells();
    for (int i = 0; i < dim; ++i)
      if (std::abs(d[i]) > kmax) return false;
    return true;
  }
};

/// Validated grid constructor. The speed cap must allow at least one-cell moves.
inline TorusGrid build_grid(int dim, int n_per_axis, double tau, double v_max) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("dim must be 1 or 2", "grid.dim");
  if (n_per_axis < 1) throw ConfigError("n must be positive", "grid.n");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive", "grid.tau");
  if (!(v_max > 0.0)) throw ConfigError("v_max must be positive", "grid.v_max");
  TorusGrid g;
  g.dim = dim;
  g.n = n_per_axis;
  g.spacing = 1.0 / n_per_axis;
  g.tau = tau;
  g.v_max = v_max;
  if (g.max_step_cells() < 1)
    throw ConfigError("no motion possible: v_max*tau = " + std::to_string(v_max * tau) +
                          " < spacing = " + std::to_string(g.spacing),
                      "grid");
  return g;
}

/// Minimal displacement from y to x (per axis, magnitude <= 1/2).
inline Coord min_displacement(const TorusGrid& g, std::size_t x, std::size_t y) {
  Cell d = g.displacement_cells(x, y);
  Coord v{0.0, 0.0};
  for (int i = 0; i < g.dim; ++i) v[i] = d[i] * g.spacing;
  return v;
}

/// Midpoint of the minimal segment y -> x, wrapped into [0,1)^d.
inline Coord segment_midpoint(const TorusGrid& g, std::size_t y, std::size_t x) {
  Coord qy = g.point(y);
  Coord d = min_displacement(g, x, y);
  Coord m{0.0, 0.0};
  for (int i = 0; i < g.dim; ++i) m[i] = wrap_unit(qy[i] + 0.5 * d[i]);
  return m;
}

/// Flat-metric distance on the torus.
inline double torus_distance(const Coord& a, const Coord& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    double d = std::abs(wrap_unit(a[i] - b[i]));
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

/// One Fourier mode a*cos(2*pi*k.q) + b*sin(2*pi*k.q).
struct TrigTerm {
  Cell wave{0, 0};
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

/// Smooth periodic function f used as the exact part df of a 1-form.
struct ExactPart {
  std::string name = "none";
  std::vector<TrigTerm> terms;

  bool empty() const { return terms.empty(); }

  double value(const Coord& q) const {
    double s = 0.0;
    for (const auto& t : terms) {
      double ph = kTwoPi * (t.wave[0] * q[0] + t.wave[1] * q[1]);
      s += t.cos_coeff * std::cos(ph) + t.sin_coeff * std::sin(ph);
    }
    return s;
  }

  Coord gradient(const Coord& q) const {
    Coord g{0.0, 0.0};
    for (const auto& t : terms) {
      double ph = kTwoPi * (t.wave[0] * q[0] + t.wave[1] * q[1]);
      double d = -t.cos_coeff * std::sin(ph) + t.sin_coeff * std::cos(ph);
      for (int j = 0; j < kMaxDim; ++j) g[j] += kTwoPi * t.wave[j] * d;
    }
    return g;
  }

  /// hess[i][j] = d_i d_j f.
  std::array<Coord, kMaxDim> hessian(const Coord& q) const {
    std::array<Coord, kMaxDim> h{};
    for (const auto& t : terms) {
      double ph = kTwoPi * (t.wave[0] * q[0] + t.wave[1] * q[1]);
      double v = t.cos_coeff * std::cos(ph) + t.sin_coeff * std::sin(ph);
      for (int i = 0; i < kMaxDim; ++i)
        for (int j = 0; j < kMaxDim; ++j) h[i][j] -= kTwoPi * kTwoPi * t.wave[i] * t.wave[j] * v;
    }
    return h;
  }
};

/// Named exact parts: "none", "sin" (sum of sin(2 pi q_i)), "random:<seed>".
inline ExactPart make_exact_part(const std::string& name, int dim) {
  ExactPart f;
  f.name = name;
  if (name == "none" || name.empty()) {
    f.name = "none";
    return f;
  }
  if (name == "sin") {
    for (int i = 0; i < dim; ++i) {
      TrigTerm t;
      t.wave[i] = 1;
      t.sin_coeff = 1.0;
      f.terms.push_back(t);
    }
    return f;
  }
  if (name.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(name.substr(7));
    } catch (const std::exception&) {
      throw ConfigError("bad seed in exact part name '" + name + "'", "form.exact");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> harmonic(-3, 3);
    std::normal_distribution<double> coeff(0.0, 0.3);
    for (int k = 0; k < 4; ++k) {
      TrigTerm t;
      for (int i = 0; i < dim; ++i) t.wave[i] = harmonic(rng);
      if (t.wave[0] == 0 && t.wave[1] == 0) t.wave[0] = 1;
      t.cos_coeff = coeff(rng);
      t.sin_coeff = coeff(rng);
      f.terms.push_back(t);
    }
    return f;
  }
  throw ConfigError("unknown exact part '" + name + "'", "form.exact");
}

/// Closed 1-form c.dq + df on T^d. Its cohomology class is c.
struct OneForm {
  std::vector<double> c;
  ExactPart exact;

  int dim() const { return static_cast<int>(c.size()); }

  /// Covector eta_q = c + grad f(q).
  Coord at(const Coord& q) const {
    Coord e = exact.gradient(q);
    for (int i = 0; i < dim(); ++i) e[i] += c[i];
    return e;
  }
};

inline OneForm constant_form(std::vector<double> c) { return OneForm{std::move(c), {}}; }

/// Integral of the form over the minimal straight segment y -> x.
inline double form_pairing(const OneForm& form, std::size_t y, std::size_t x, const TorusGrid& g) {
  if (form.dim() != g.dim) throw InputError("form dimension does not match grid");
  Coord d = min_displacement(g, x, y);
  double s = 0.0;
  for (int i = 0; i < g.dim; ++i) s += form.c[i] * d[i];
  if (!form.exact.empty()) s += form.exact.value(g.point(x)) - form.exact.value(g.point(y));
  return s;
}

/// Samples the exact part of a form on the grid.
inline ScalarField sample_exact_part(const OneForm& form, const TorusGrid& g) {
  ScalarField f(g.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = form.exact.value(g.point(i));
  return f;
}

}  // namespace wkam
