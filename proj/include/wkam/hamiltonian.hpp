#pragma once

// Parametric Tonelli Hamiltonians on T^d with analytic derivatives and an
// exact (closed form or safeguarded Newton) Legendre transform.
//
// Every supported family reduces to the normal form
//
//   H(q, p) = sum_i sum_t w_t K_t(s_t p_i + shift_t(q)) + V(q),
//
// where each K_t is a univariate convex polynomial, s_t = +-1 and the shifts
// come from symmetrization against a 1-form. The fiber Hessian is therefore
// diagonal and the Legendre transform splits into one convex conjugate per axis.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "wkam/errors.hpp"
#include "wkam/torus.hpp"

namespace wkam {

enum class Family { PPolynomial, Mechanical, Separable, Combination, Symmetrized };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::PPolynomial: return "p_polynomial";
    case Family::Mechanical: return "mechanical";
    case Family::Separable: return "separable";
    case Family::Combination: return "combination";
    case Family::Symmetrized: return "symmetrized";
  }
  return "?";
}

namespace detail {

inline constexpr int kMaxDegree = 8;
using Poly = std::array<double, kMaxDegree + 1>;  // ascending coefficients

inline double poly_eval(const Poly& a, int deg, double x) {
  double s = 0.0;
  for (int k = deg; k >= 0; --k) s = s * x + a[k];
  return s;
}
inline double poly_d1(const Poly& a, int deg, double x) {
  double s = 0.0;
  for (int k = deg; k >= 1; --k) s = s * x + k * a[k];
  return s;
}
inline double poly_d2(const Poly& a, int deg, double x) {
  double s = 0.0;
  for (int k = deg; k >= 2; --k) s = s * x + k * (k - 1) * a[k];
  return s;
}

/// shift(q)_i = sum scale * eta_i(q).
struct Shift {
  double scale = 0.0;
  std::shared_ptr<const OneForm> form;
};

struct KineticTerm {
  double weight = 1.0;
  Poly poly{};
  int degree = 0;
  double sign = 1.0;
  std::vector<Shift> shifts;

  double shift(const Coord& q, int axis) const {
    double s = 0.0;
    for (const auto& sh : shifts) s += sh.scale * sh.form->at(q)[axis];
    return s;
  }
  bool q_dependent() const {
    return std::any_of(shifts.begin(), shifts.end(),
                       [](const Shift& s) { return !s.form->exact.empty(); });
  }
};

/// V_axis(q) = sum_k a_k cos(2 pi k q_axis) + b_k sin(2 pi k q_axis), k >= 1.
struct PotentialTerm {
  double weight = 1.0;
  int axis = 0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double value(const Coord& q) const {
    double s = 0.0;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
      double ph = kTwoPi * static_cast<double>(k + 1) * q[axis];
      s += cos_coeffs[k] * std::cos(ph) + sin_coeffs[k] * std::sin(ph);
    }
    return weight * s;
  }
  double derivative(const Coord& q) const {
    double s = 0.0;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
      double w = kTwoPi * static_cast<double>(k + 1);
      double ph = w * q[axis];
      s += w * (-cos_coeffs[k] * std::sin(ph) + sin_coeffs[k] * std::cos(ph));
    }
    return weight * s;
  }
};

struct NormalForm {
  int dim = 1;
  std::array<std::vector<KineticTerm>, kMaxDim> kinetic;
  std::vector<PotentialTerm> potential;

  double potential_value(const Coord& q) const {
    double s = 0.0;
    for (const auto& t : potential) s += t.value(q);
    return s;
  }

  bool axis_q_dependent(int axis) const {
    return std::any_of(kinetic[axis].begin(), kinetic[axis].end(),
                       [](const KineticTerm& t) { return t.q_dependent(); });
  }

  /// The axis kinetic part as a polynomial in p_i at fixed q.
  Poly axis_polynomial(const Coord& q, int axis, int& degree) const {
    Poly out{};
    degree = 0;
    for (const auto& t : kinetic[axis]) {
      const double s = t.shift(q, axis);
      // K(sign p + s) = sum_k a_k sum_j C(k,j) sign^j p^j s^(k-j)
      for (int k = 0; k <= t.degree; ++k) {
        if (t.poly[k] == 0.0) continue;
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
          if (j > 0) binom = binom * (k - j + 1) / j;
          double term = t.weight * t.poly[k] * binom * std::pow(t.sign, j) * std::pow(s, k - j);
          out[j] += term;
          if (term != 0.0) degree = std::max(degree, j);
        }
      }
    }
    return out;
  }
};

struct AxisConjugate {
  double value = 0.0;
  double p = 0.0;
};

/// sup_p (p v - g(p)) for a univariate convex polynomial g.
inline AxisConjugate convex_conjugate(const Poly& g, int deg, double v) {
  while (deg > 0 && g[deg] == 0.0) --deg;
  if (deg < 2 || deg % 2 != 0 || !(g[deg] > 0.0)) {
    std::ostringstream os;
    os << "kinetic polynomial of degree " << deg << " with leading coefficient " << g[deg]
       << " is not superlinear";
    throw NumericError(os.str());
  }
  if (deg == 2) {
    double p = (v - g[1]) / (2.0 * g[2]);
    return {p * v - poly_eval(g, deg, p), p};
  }
  bool monomial = true;
  for (int k = 1; k < deg; ++k) monomial = monomial && g[k] == 0.0;
  if (monomial) {
    double mag = std::pow(std::abs(v) / (deg * g[deg]), 1.0 / (deg - 1));
    double p = v < 0 ? -mag : mag;
    return {p * v - poly_eval(g, deg, p), p};
  }

  // Safeguarded Newton on g'(p) = v inside an expanding bracket.
  double lo = -1.0, hi = 1.0;
  int expand = 0;
  while (poly_d1(g, deg, hi) < v && expand++ < 200) hi *= 2.0;
  while (poly_d1(g, deg, lo) > v && expand++ < 400) lo *= 2.0;
  if (poly_d1(g, deg, hi) < v || poly_d1(g, deg, lo) > v)
    throw NumericError("Legendre transform: no bracket for v = " + std::to_string(v));
  double p = 0.5 * (lo + hi);
  const double tol = 1e-14 * (1.0 + std::abs(v));
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    double r = poly_d1(g, deg, p) - v;
    if (std::abs(r) <= tol) {
      converged = true;
      break;
    }
    if (r > 0) hi = p; else lo = p;
    double h = poly_d2(g, deg, p);
    double next = h > 0.0 ? p - r / h : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * (1.0 + std::abs(p))) {
      converged = true;
      break;
    }
    p = next;
  }
  if (!converged) {
    // Dense scan of the bracket followed by golden-section refinement.
    constexpr int kScan = 4096;
    double best_p = lo, best = -INFINITY;
    for (int i = 0; i <= kScan; ++i) {
      double x = lo + (hi - lo) * i / kScan;
      double val = x * v - poly_eval(g, deg, x);
      if (val > best) best = val, best_p = x;
    }
    double a = std::max(lo, best_p - (hi - lo) / kScan), b = std::min(hi, best_p + (hi - lo) / kScan);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      if (x1 * v - poly_eval(g, deg, x1) < x2 * v - poly_eval(g, deg, x2)) a = x1; else b = x2;
    }
    p = 0.5 * (a + b);
    double r = poly_d1(g, deg, p) - v;
    if (std::abs(r) > 1e-8 * (1.0 + std::abs(v)))
      throw NumericError("Legendre transform did not converge: v = " + std::to_string(v) +
                         ", p = " + std::to_string(p) + ", residual = " + std::to_string(r));
  }
  return {p * v - poly_eval(g, deg, p), p};
}

}  // namespace detail

/// Immutable Tonelli Hamiltonian description. Build through the factory
/// functions below; they fill the normal form used for evaluation.
struct HamiltonianSpec {
  Family family = Family::PPolynomial;
  int dim = 1;
  std::string name;
  std::vector<double> params;
  std::vector<HamiltonianSpec> parts;
  std::vector<double> weights;
  std::shared_ptr<const OneForm> form_shift;
  std::shared_ptr<const detail::NormalForm> normal;

  const detail::NormalForm& nf() const { return *normal; }
};

/// H(p) = sum_i sum_k coeffs[k] p_i^k.
inline HamiltonianSpec p_polynomial(int dim, std::vector<double> coeffs, std::string name = {}) {
  if (dim < 1 || dim > kMaxDim) throw InputError("dim must be 1 or 2");
  if (coeffs.empty() || coeffs.size() > detail::kMaxDegree + 1)
    throw InputError("p_polynomial: 1.." + std::to_string(detail::kMaxDegree + 1) + " coefficients");
  HamiltonianSpec h;
  h.family = Family::PPolynomial;
  h.dim = dim;
  h.name = std::move(name);
  h.params = coeffs;
  auto nf = std::make_shared<detail::NormalForm>();
  nf->dim = dim;
  detail::KineticTerm t;
  for (std::size_t k = 0; k < coeffs.size(); ++k) t.poly[k] = coeffs[k];
  t.degree = static_cast<int>(coeffs.size()) - 1;
  for (int i = 0; i < dim; ++i) nf->kinetic[i].push_back(t);
  h.normal = std::move(nf);
  return h;
}

/// H(q,p) = |p|^2/2 + sum_i V_i(q_i). `potential` is axis-major: for each axis
/// the pairs (a_1, b_1, a_2, b_2, ...) of cos/sin harmonics.
inline HamiltonianSpec mechanical(int dim, std::vector<double> potential, std::string name = {}) {
  if (dim < 1 || dim > kMaxDim) throw InputError("dim must be 1 or 2");
  if (potential.size() % (2 * static_cast<std::size_t>(dim)) != 0)
    throw InputError("mechanical: potential coefficients must be cos/sin pairs for each axis");
  HamiltonianSpec h;
  h.family = Family::Mechanical;
  h.dim = dim;
  h.name = std::move(name);
  h.params = potential;
  auto nf = std::make_shared<detail::NormalForm>();
  nf->dim = dim;
  detail::KineticTerm t;
  t.poly[2] = 0.5;
  t.degree = 2;
  const std::size_t per_axis = potential.size() / dim;
  for (int i = 0; i < dim; ++i) {
    nf->kinetic[i].push_back(t);
    detail::PotentialTerm v;
    v.axis = i;
    for (std::size_t k = 0; 2 * k + 1 < per_axis; ++k) {
      v.cos_coeffs.push_back(potential[i * per_axis + 2 * k]);
      v.sin_coeffs.push_back(potential[i * per_axis + 2 * k + 1]);
    }
    if (!v.cos_coeffs.empty()) nf->potential.push_back(std::move(v));
  }
  h.normal = std::move(nf);
  return h;
}

/// H(q,p) = sum_i f_i(q_i, p_i) with one-dimensional specs f_i.
inline HamiltonianSpec separable(std::vector<HamiltonianSpec> axes, std::string name = {}) {
  const int dim = static_cast<int>(axes.size());
  if (dim < 1 || dim > kMaxDim) throw InputError("separable: 1 or 2 axis terms");
  auto nf = std::make_shared<detail::NormalForm>();
  nf->dim = dim;
  for (int i = 0; i < dim; ++i) {
    const auto& part = axes[i].nf();
    if (axes[i].dim != 1) throw InputError("separable: axis terms must be one-dimensional");
    for (const auto& t : part.kinetic[0]) {
      if (!t.shifts.empty()) throw InputError("separable: symmetrize after assembling the sum");
      nf->kinetic[i].push_back(t);
    }
    for (auto v : part.potential) {
      v.axis = i;
      nf->potential.push_back(std::move(v));
    }
  }
  HamiltonianSpec h;
  h.family = Family::Separable;
  h.dim = dim;
  h.name = std::move(name);
  h.parts = std::move(axes);
  h.normal = std::move(nf);
  return h;
}

namespace detail {
inline void require_dim(const HamiltonianSpec& h, std::size_t n, const char* what) {
  if (static_cast<int>(n) != h.dim)
    throw InputError(std::string(what) + ": dimension " + std::to_string(n) +
                     " does not match Hamiltonian dimension " + std::to_string(h.dim));
}
inline Coord to_coord(std::span<const double> x) {
  Coord c{0.0, 0.0};
  for (std::size_t i = 0; i < x.size() && i < kMaxDim; ++i) c[i] = x[i];
  return c;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Evaluation. The Coord overloads skip dimension checks and are used by the
// grid code; the span overloads validate.

inline double hamiltonian_at(const HamiltonianSpec& h, const Coord& q, const Coord& p) {
  const auto& nf = h.nf();
  double s = nf.potential_value(q);
  for (int i = 0; i < nf.dim; ++i)
    for (const auto& t : nf.kinetic[i])
      s += t.weight * detail::poly_eval(t.poly, t.degree, t.sign * p[i] + t.shift(q, i));
  return s;
}

/// dH/dp_i.
inline Coord hamiltonian_dp(const HamiltonianSpec& h, const Coord& q, const Coord& p) {
  const auto& nf = h.nf();
  Coord g{0.0, 0.0};
  for (int i = 0; i < nf.dim; ++i)
    for (const auto& t : nf.kinetic[i])
      g[i] += t.weight * t.sign * detail::poly_d1(t.poly, t.degree, t.sign * p[i] + t.shift(q, i));
  return g;
}

/// Diagonal of the fiber Hessian (the off-diagonal entries vanish in normal form).
inline Coord hamiltonian_dpp(const HamiltonianSpec& h, const Coord& q, const Coord& p) {
  const auto& nf = h.nf();
  Coord g{0.0, 0.0};
  for (int i = 0; i < nf.dim; ++i)
    for (const auto& t : nf.kinetic[i])
      g[i] += t.weight * detail::poly_d2(t.poly, t.degree, t.sign * p[i] + t.shift(q, i));
  return g;
}

/// dH/dq_j.
inline Coord hamiltonian_dq(const HamiltonianSpec& h, const Coord& q, const Coord& p) {
  const auto& nf = h.nf();
  Coord g{0.0, 0.0};
  for (const auto& v : nf.potential) g[v.axis] += v.derivative(q);
  for (int i = 0; i < nf.dim; ++i) {
    for (const auto& t : nf.kinetic[i]) {
      if (!t.q_dependent()) continue;
      double k1 = t.weight * detail::poly_d1(t.poly, t.degree, t.sign * p[i] + t.shift(q, i));
      for (const auto& sh : t.shifts) {
        auto hess = sh.form->exact.hessian(q);
        for (int j = 0; j < nf.dim; ++j) g[j] += k1 * sh.scale * hess[i][j];
      }
    }
  }
  return g;
}

inline double eval_hamiltonian(const HamiltonianSpec& h, std::span<const double> q,
                               std::span<const double> p) {
  detail::require_dim(h, q.size(), "eval_hamiltonian(q)");
  detail::require_dim(h, p.size(), "eval_hamiltonian(p)");
  return hamiltonian_at(h, detail::to_coord(q), detail::to_coord(p));
}

struct LagrangianValue {
  double value = 0.0;
  Coord argmax_p{0.0, 0.0};
};

inline LagrangianValue lagrangian_at(const HamiltonianSpec& h, const Coord& q, const Coord& v) {
  const auto& nf = h.nf();
  LagrangianValue out;
  out.value = -nf.potential_value(q);
  for (int i = 0; i < nf.dim; ++i) {
    int deg = 0;
    auto g = nf.axis_polynomial(q, i, deg);
    auto c = detail::convex_conjugate(g, deg, v[i]);
    out.value += c.value;
    out.argmax_p[i] = c.p;
  }
  return out;
}

/// L_H(q,v) = sup_p (p.v - H(q,p)) and the maximizing momentum.
inline LagrangianValue eval_lagrangian(const HamiltonianSpec& h, std::span<const double> q,
                                       std::span<const double> v, double v_bound = 1e3) {
  detail::require_dim(h, q.size(), "eval_lagrangian(q)");
  detail::require_dim(h, v.size(), "eval_lagrangian(v)");
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (std::sqrt(norm) > v_bound)
    throw InputError("eval_lagrangian: |v| exceeds search bound " + std::to_string(v_bound));
  return lagrangian_at(h, detail::to_coord(q), detail::to_coord(v));
}

// ---------------------------------------------------------------------------
// Poisson bracket.

inline double poisson_bracket_at(const HamiltonianSpec& a, const HamiltonianSpec& b, const Coord& q,
                                 const Coord& p) {
  Coord ap = hamiltonian_dp(a, q, p), aq = hamiltonian_dq(a, q, p);
  Coord bp = hamiltonian_dp(b, q, p), bq = hamiltonian_dq(b, q, p);
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += ap[i] * bq[i] - aq[i] * bp[i];
  return s;
}

/// {H1,H2}(q,p) = sum_i dH1/dp_i dH2/dq_i - dH1/dq_i dH2/dp_i.
inline double poisson_bracket(const HamiltonianSpec& a, const HamiltonianSpec& b,
                              std::span<const double> q, std::span<const double> p) {
  if (a.dim != b.dim) throw InputError("poisson_bracket: dimension mismatch");
  detail::require_dim(a, q.size(), "poisson_bracket(q)");
  detail::require_dim(a, p.size(), "poisson_bracket(p)");
  return poisson_bracket_at(a, b, detail::to_coord(q), detail::to_coord(p));
}

/// Sample lattice: n_q points per axis in q, n_p points per axis in [-p_radius, p_radius].
struct PhaseLattice {
  int n_q = 32;
  int n_p = 9;
  double p_radius = 2.0;

  template <class Fn>
  void for_each(int dim, Fn&& fn) const {
    const int nq = dim == 1 ? n_q : n_q * n_q;
    const int np = dim == 1 ? n_p : n_p * n_p;
    for (int iq = 0; iq < nq; ++iq) {
      Coord q{static_cast<double>(iq % n_q) / n_q, dim == 2 ? static_cast<double>(iq / n_q) / n_q : 0.0};
      for (int ip = 0; ip < np; ++ip) {
        auto mom = [&](int k) { return n_p == 1 ? 0.0 : -p_radius + 2.0 * p_radius * k / (n_p - 1); };
        Coord p{mom(ip % n_p), dim == 2 ? mom(ip / n_p) : 0.0};
        fn(q, p);
      }
    }
  }
};

inline double max_poisson_bracket(const HamiltonianSpec& a, const HamiltonianSpec& b,
                                  const PhaseLattice& lattice = {}) {
  if (a.dim != b.dim) throw InputError("poisson_bracket: dimension mismatch");
  double m = 0.0;
  lattice.for_each(a.dim, [&](const Coord& q, const Coord& p) {
    m = std::max(m, std::abs(poisson_bracket_at(a, b, q, p)));
  });
  return m;
}

// ---------------------------------------------------------------------------
// Tonelli diagnostics.

struct TonelliReport {
  double min_hessian = 0.0;       // smallest diagonal fiber Hessian entry on the lattice
  double min_outer_slope = 0.0;   // smallest radial slope dH/d|p| at the test radius
  double test_radius = 0.0;
  bool convex = false;
  bool superlinear = false;
  bool ok() const { return convex && superlinear; }
};

/// Sampled check on 32^dim points in q. Superlinearity is tested as radial
/// slope > v_max at twice the largest momentum that realizes speed v_max.
inline TonelliReport check_tonelli(const HamiltonianSpec& h, double v_max, int n_q = 32) {
  TonelliReport r;
  r.min_hessian = INFINITY;
  r.min_outer_slope = INFINITY;
  double p_vmax = 0.0;
  PhaseLattice pts{n_q, 1, 0.0};
  pts.for_each(h.dim, [&](const Coord& q, const Coord&) {
    for (int i = 0; i < h.dim; ++i)
      for (double s : {-1.0, 1.0}) {
        Coord v{0.0, 0.0};
        v[i] = s * v_max;
        p_vmax = std::max(p_vmax, std::abs(lagrangian_at(h, q, v).argmax_p[i]));
      }
  });
  r.test_radius = 2.0 * std::max(p_vmax, 1e-3);
  PhaseLattice lattice{n_q, 9, r.test_radius};
  lattice.for_each(h.dim, [&](const Coord& q, const Coord& p) {
    Coord d = hamiltonian_dpp(h, q, p);
    for (int i = 0; i < h.dim; ++i) r.min_hessian = std::min(r.min_hessian, d[i]);
  });
  const int n_dir = h.dim == 1 ? 2 : 16;
  pts.for_each(h.dim, [&](const Coord& q, const Coord&) {
    for (int k = 0; k < n_dir; ++k) {
      double th = kTwoPi * k / n_dir;
      Coord e = h.dim == 1 ? Coord{k == 0 ? 1.0 : -1.0, 0.0} : Coord{std::cos(th), std::sin(th)};
      Coord p{r.test_radius * e[0], r.test_radius * e[1]};
      Coord g = hamiltonian_dp(h, q, p);
      r.min_outer_slope = std::min(r.min_outer_slope, g[0] * e[0] + g[1] * e[1]);
    }
  });
  r.convex = r.min_hessian > 0.0;
  r.superlinear = r.min_outer_slope > v_max;
  return r;
}

// ---------------------------------------------------------------------------
// Derived Hamiltonians.

/// Positive linear combination sum_j w_j H_j.
inline HamiltonianSpec combine(const std::vector<HamiltonianSpec>& specs, const std::vector<double>& weights,
                               std::string name = {}) {
  if (specs.empty() || specs.size() != weights.size())
    throw InputError("combine: need one positive weight per Hamiltonian");
  const int dim = specs.front().dim;
  auto nf = std::make_shared<detail::NormalForm>();
  nf->dim = dim;
  for (std::size_t j = 0; j < specs.size(); ++j) {
    if (!(weights[j] > 0.0))
      throw InputError("combine: weight " + std::to_string(weights[j]) + " is not positive");
    if (specs[j].dim != dim) throw InputError("combine: dimension mismatch");
    const auto& part = specs[j].nf();
    for (int i = 0; i < dim; ++i)
      for (auto t : part.kinetic[i]) {
        t.weight *= weights[j];
        nf->kinetic[i].push_back(std::move(t));
      }
    for (auto v : part.potential) {
      v.weight *= weights[j];
      nf->potential.push_back(std::move(v));
    }
  }
  HamiltonianSpec h;
  h.family = Family::Combination;
  h.dim = dim;
  h.name = std::move(name);
  h.parts = specs;
  h.weights = weights;
  h.normal = std::move(nf);
  double min_h = INFINITY;
  PhaseLattice{32, 9, 4.0}.for_each(dim, [&](const Coord& q, const Coord& p) {
    Coord d = hamiltonian_dpp(h, q, p);
    for (int i = 0; i < dim; ++i) min_h = std::min(min_h, d[i]);
  });
  if (!(min_h > 0.0)) throw InputError("combine: result is not fiberwise strictly convex on the sample lattice");
  return h;
}

/// Momentum reflection about eta: H_check(q, eta_q + p) = H(q, eta_q - p).
inline HamiltonianSpec symmetrize(const HamiltonianSpec& h, const OneForm& form) {
  if (form.dim() != h.dim) throw InputError("symmetrize: form dimension does not match");
  auto f = std::make_shared<const OneForm>(form);
  auto nf = std::make_shared<detail::NormalForm>(h.nf());
  for (int i = 0; i < nf->dim; ++i)
    for (auto& t : nf->kinetic[i]) {
      // K(s (2 eta - P) + shift) = K(-s P + shift + 2 s eta)
      t.shifts.push_back({2.0 * t.sign, f});
      t.sign = -t.sign;
    }
  HamiltonianSpec out;
  out.family = Family::Symmetrized;
  out.dim = h.dim;
  out.name = h.name.empty() ? std::string{} : h.name + "~";
  out.parts = {h};
  out.form_shift = f;
  out.normal = std::move(nf);
  return out;
}

}  // namespace wkam
