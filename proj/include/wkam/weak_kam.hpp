#pragma once

// Discrete weak KAM objects built on the min-plus engine: critical values,
// calibrated Lax-Oleinik semigroups, the Peierls barrier, the first and second
// barrier functions with their zero sets (projected Aubry and Mane sets), the
// pseudo-metric rho and its quotient classes, elementary weak KAM solutions and
// Hamilton-Jacobi subsolution checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wkam/errors.hpp"
#include "wkam/hamiltonian.hpp"
#include "wkam/minplus.hpp"
#include "wkam/torus.hpp"

namespace wkam {

enum class AlphaMethod { Karp, PowerIteration };

inline const char* method_name(AlphaMethod m) { return m == AlphaMethod::Karp ? "karp" : "power-iteration"; }

struct CriticalValue {
  double alpha = 0.0;
  AlphaMethod method = AlphaMethod::Karp;
  double residual = 0.0;  // drift spread per step (power iteration), 0 for Karp
  std::size_t iterations = 0;
  double tau = 0.0;
  TorusGrid grid;
};

/// alpha = -(minimum cycle mean of C) / tau.
///
/// The power iteration applies C repeatedly to 0 and stops once, for some
/// period p <= 64, the p-step increment u_{k} - u_{k-p} is constant up to
/// tol * p. Periodic critical cycles are handled by the period search.
inline CriticalValue critical_value(const CostMatrix& C, AlphaMethod method = AlphaMethod::Karp, double tol = 1e-10,
                                    std::size_t max_iter = 100000) {
  CriticalValue cv;
  cv.method = method;
  cv.tau = C.tau;
  cv.grid = C.grid;
  if (method == AlphaMethod::Karp) {
    cv.alpha = -karp_min_mean_cycle(C) / C.tau;
    cv.iterations = C.n;
    return cv;
  }
  constexpr std::size_t kMaxPeriod = 64;
  std::vector<MinPlusVector> ring(kMaxPeriod + 1);
  std::vector<double> offset(kMaxPeriod + 1, 0.0);
  MinPlusVector u(C.n, 0.0);
  double shift = 0.0;
  ring[0] = u;
  for (std::size_t k = 1; k <= max_iter; ++k) {
    u = minplus_apply(C, u);
    const double lo = *std::min_element(u.begin(), u.end());
    if (!std::isfinite(lo)) throw NumericError("power iteration: non-finite iterate");
    for (double& x : u) x -= lo;
    shift += lo;
    ring[k % (kMaxPeriod + 1)] = u;
    offset[k % (kMaxPeriod + 1)] = shift;
    for (std::size_t p = 1; p <= std::min(k, kMaxPeriod); ++p) {
      const auto& old = ring[(k - p) % (kMaxPeriod + 1)];
      const double ds = shift - offset[(k - p) % (kMaxPeriod + 1)];
      double mn = kInf, mx = -kInf;
      for (std::size_t x = 0; x < C.n; ++x) {
        double d = u[x] - old[x];
        mn = std::min(mn, d);
        mx = std::max(mx, d);
      }
      if (mx - mn <= tol * static_cast<double>(p)) {
        const double mean = (ds + 0.5 * (mn + mx)) / static_cast<double>(p);
        cv.alpha = -mean / C.tau;
        cv.residual = (mx - mn) / static_cast<double>(p);
        cv.iterations = k;
        return cv;
      }
    }
  }
  throw NumericError("power iteration did not converge in " + std::to_string(max_iter) +
                     " iterations; use the karp method");
}

/// A cost matrix together with its critical value.
struct CalibratedModel {
  HamiltonianSpec spec;
  OneForm form;
  TorusGrid grid;
  CostMatrix cost;
  CriticalValue alpha;

  double step_shift() const { return grid.tau * alpha.alpha; }
};

inline CalibratedModel build_model(const HamiltonianSpec& spec, const OneForm& form, const TorusGrid& grid) {
  CalibratedModel m{spec, form, grid, build_cost(grid, spec, form), {}};
  m.alpha = critical_value(m.cost, AlphaMethod::Karp);
  return m;
}

/// n steps of u <- min_y [u(y) + C(y,.)] + tau*alpha.
inline ScalarField backward_semigroup(const CalibratedModel& m, ScalarField u, std::size_t steps) {
  const double s = m.step_shift();
  for (std::size_t k = 0; k < steps; ++k) {
    u = minplus_apply(m.cost, u);
    for (double& x : u) x += s;
  }
  return u;
}

inline ScalarField backward_semigroup(const HamiltonianSpec& spec, const OneForm& form, const TorusGrid& grid,
                                      ScalarField u, std::size_t steps) {
  return backward_semigroup(build_model(spec, form, grid), std::move(u), steps);
}

/// n steps of u <- max_y [u(y) - C(.,y)] - tau*alpha.
inline ScalarField forward_semigroup(const CalibratedModel& m, ScalarField u, std::size_t steps) {
  const double s = m.step_shift();
  for (std::size_t k = 0; k < steps; ++k) {
    u = maxminus_apply(m.cost, u);
    for (double& x : u) x -= s;
  }
  return u;
}

inline ScalarField forward_semigroup(const HamiltonianSpec& spec, const OneForm& form, const TorusGrid& grid,
                                     ScalarField u, std::size_t steps) {
  return forward_semigroup(build_model(spec, form, grid), std::move(u), steps);
}

/// Forward semigroup through time reversal: -T^-_{H_check}(-u).
inline ScalarField forward_semigroup_symmetrized(const HamiltonianSpec& spec, const OneForm& form,
                                                 const TorusGrid& grid, ScalarField u, std::size_t steps) {
  for (double& x : u) x = -x;
  u = backward_semigroup(symmetrize(spec, form), form, grid, std::move(u), steps);
  for (double& x : u) x = -x;
  return u;
}

// ---------------------------------------------------------------------------
// Peierls barrier.

struct BarrierMatrix {
  CostMatrix h;           // h(x, y)
  CostMatrix step;        // calibrated one-step cost C + tau*alpha
  double alpha = 0.0;
  std::uint64_t n_max = 0;
  std::uint64_t window = 0;

  std::size_t size() const { return h.n; }
  double operator()(std::size_t x, std::size_t y) const { return h(x, y); }
};

inline constexpr std::uint64_t kDefaultBarrierSteps = 1u << 14;
inline constexpr std::uint64_t kDefaultBarrierWindow = 64;

/// h = min over n in [n_max - window, n_max] of (C + tau*alpha)^n.
///
/// Evaluated as Chat^(n_max - window) (x) (I (+) Chat)^window, which is the same
/// minimum because (I (+) A)^w = min_{j <= w} A^j in the min-plus semiring.
inline BarrierMatrix peierls_barrier(const CostMatrix& C, double alpha, std::uint64_t n_max = kDefaultBarrierSteps,
                                     std::uint64_t window = kDefaultBarrierWindow) {
  if (window >= n_max) throw InputError("peierls_barrier: window must be smaller than n_max");
  BarrierMatrix out;
  out.alpha = alpha;
  out.n_max = n_max;
  out.window = window;
  out.step = shifted(C, C.tau * alpha);
  CostMatrix head = minplus_power(out.step, n_max - window);
  if (window > 0) {
    CostMatrix lazy = minplus_sum(minplus_identity_like(out.step), out.step);
    head = minplus_product(head, minplus_power(lazy, window));
  }
  out.h = std::move(head);
  out.h.provenance = C.provenance;
  out.h.provenance["kind"] = "h";
  out.h.provenance["alpha"] = alpha;
  out.h.provenance["n_max"] = n_max;
  out.h.provenance["window"] = window;
  return out;
}

/// Zero-set threshold scaled with the one-step truncation order.
inline constexpr double kDefaultTolZeroFactor = 10.0;

inline double default_tol_zero(const TorusGrid& g, double factor = kDefaultTolZeroFactor) {
  return factor * g.spacing * g.spacing / g.tau;
}

struct FirstBarrier {
  ScalarField B;
  std::vector<std::size_t> aubry;
};

/// B(q) = h(q,q) and its zero set.
inline FirstBarrier aubry_set(const BarrierMatrix& hm, double tol_zero) {
  FirstBarrier out;
  const std::size_t n = hm.size();
  out.B.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    out.B[q] = hm(q, q);
    if (out.B[q] <= tol_zero) out.aubry.push_back(q);
  }
  if (out.aubry.empty())
    throw std::logic_error("aubry_set: empty zero set of h(q,q); calibration is inconsistent");
  return out;
}

struct SecondBarrier {
  ScalarField b;
  std::vector<std::size_t> mane;
};

/// b(q) = min over xi, zeta in the Aubry set of h(xi,q) + h(q,zeta) - h(xi,zeta).
inline SecondBarrier second_barrier(const BarrierMatrix& hm, const std::vector<std::size_t>& aubry, double tol_zero) {
  if (aubry.empty()) throw InputError("second_barrier: empty Aubry set");
  const std::size_t n = hm.size();
  SecondBarrier out;
  out.b.assign(n, kInf);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t q = b; q < e; ++q) {
      double best = kInf;
      for (std::size_t xi : aubry) {
        const double to_q = hm(xi, q);
        if (to_q == kInf) continue;
        double tail = kInf;
        for (std::size_t zeta : aubry) tail = std::min(tail, hm(q, zeta) - hm(xi, zeta));
        best = std::min(best, to_q + tail);
      }
      out.b[q] = best;
    }
  });
  for (std::size_t q = 0; q < n; ++q)
    if (out.b[q] <= tol_zero) out.mane.push_back(q);
  return out;
}

struct QuotientAubry {
  std::vector<std::size_t> points;                 // Aubry indices, ascending
  std::vector<double> rho;                         // |A| x |A|, row-major
  std::vector<std::vector<std::size_t>> classes;   // grid indices per class
  std::vector<std::size_t> representatives;        // lowest index per class
  std::vector<double> class_distance;              // k x k, min pair rho

  std::size_t class_count() const { return classes.size(); }
};

/// rho(x,y) = h(x,y) + h(y,x) on the Aubry set; classes are the connected
/// components of {rho <= tol_zero}.
inline QuotientAubry rho_quotient(const BarrierMatrix& hm, const std::vector<std::size_t>& aubry, double tol_zero) {
  if (aubry.empty()) throw InputError("rho_quotient: empty Aubry set");
  QuotientAubry out;
  out.points = aubry;
  std::sort(out.points.begin(), out.points.end());
  const std::size_t a = out.points.size();
  out.rho.resize(a * a);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < a; ++j)
      out.rho[i * a + j] = hm(out.points[i], out.points[j]) + hm(out.points[j], out.points[i]);

  std::vector<std::size_t> parent(a);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = i + 1; j < a; ++j)
      if (out.rho[i * a + j] <= tol_zero) {
        std::size_t ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
  std::vector<std::size_t> class_of(a);
  std::vector<std::size_t> root_to_class(a, a);
  for (std::size_t i = 0; i < a; ++i) {
    std::size_t r = find(i);
    if (root_to_class[r] == a) {
      root_to_class[r] = out.classes.size();
      out.classes.emplace_back();
      out.representatives.push_back(out.points[i]);
    }
    class_of[i] = root_to_class[r];
    out.classes[class_of[i]].push_back(out.points[i]);
  }
  const std::size_t k = out.classes.size();
  out.class_distance.assign(k * k, kInf);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < a; ++j) {
      double& d = out.class_distance[class_of[i] * k + class_of[j]];
      d = std::min(d, class_of[i] == class_of[j] ? 0.0 : out.rho[i * a + j]);
    }
  return out;
}

struct AubryData {
  ScalarField B;
  ScalarField b;
  std::vector<std::size_t> aubry;
  std::vector<std::size_t> mane;
  QuotientAubry quotient;
  double tol_zero = 0.0;
};

inline AubryData analyze_aubry(const BarrierMatrix& hm, double tol_zero) {
  AubryData d;
  d.tol_zero = tol_zero;
  auto first = aubry_set(hm, tol_zero);
  d.B = std::move(first.B);
  d.aubry = std::move(first.aubry);
  auto second = second_barrier(hm, d.aubry, tol_zero);
  d.b = std::move(second.b);
  d.mane = std::move(second.mane);
  d.quotient = rho_quotient(hm, d.aubry, tol_zero);
  return d;
}

struct ElementaryPair {
  ScalarField u_minus;  // h(xi, .)
  ScalarField u_plus;   // -h(., xi)
};

/// Backward/forward weak KAM solutions generated by the Aubry point xi.
inline ElementaryPair elementary_solutions(const BarrierMatrix& hm, std::size_t xi, double tol_zero) {
  const std::size_t n = hm.size();
  if (xi >= n) throw InputError("elementary_solutions: index out of range");
  if (!(hm(xi, xi) <= tol_zero))
    throw InputError("elementary_solutions: point " + std::to_string(xi) + " is not in the Aubry set (h = " +
                     std::to_string(hm(xi, xi)) + ")");
  ElementaryPair p;
  p.u_minus.resize(n);
  p.u_plus.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    p.u_minus[q] = hm(xi, q);
    p.u_plus[q] = -hm(q, xi);
  }
  if (step_cap_saturated(hm.step, p.u_minus))
    warn("speed cap v_max*tau is attained by an optimal step of the weak KAM solution from point " +
         std::to_string(xi) + "; minimizers may be truncated");
  return p;
}

/// max_x |T u - u| for one calibrated backward step of the barrier's cost.
inline double backward_residual(const CostMatrix& calibrated_step, const ScalarField& u) {
  auto v = minplus_apply(calibrated_step, u);
  double r = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) r = std::max(r, std::abs(v[i] - u[i]));
  return r;
}

// ---------------------------------------------------------------------------
// Gradients and subsolutions.

struct VectorField {
  int dim = 1;
  std::array<ScalarField, kMaxDim> component;
  std::string scheme = "central-2";

  Coord at(std::size_t i) const {
    Coord c{0.0, 0.0};
    for (int k = 0; k < dim; ++k) c[k] = component[k][i];
    return c;
  }
};

/// Central differences with periodic wrap.
inline VectorField gradient(const ScalarField& u, const TorusGrid& g) {
  if (u.size() != g.size()) throw InputError("gradient: field size does not match grid");
  VectorField out;
  out.dim = g.dim;
  for (int k = 0; k < g.dim; ++k) {
    out.component[k].resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      Cell c = g.cell(i), lo = c, hi = c;
      lo[k] -= 1;
      hi[k] += 1;
      out.component[k][i] = (u[g.index(hi)] - u[g.index(lo)]) / (2.0 * g.spacing);
    }
  }
  return out;
}

/// Largest |second difference| / spacing^2 over axes: a C^{1,1} proxy.
inline double max_second_difference(const ScalarField& u, const TorusGrid& g) {
  double m = 0.0;
  for (int k = 0; k < g.dim; ++k)
    for (std::size_t i = 0; i < u.size(); ++i) {
      Cell c = g.cell(i), lo = c, hi = c;
      lo[k] -= 1;
      hi[k] += 1;
      m = std::max(m, std::abs(u[g.index(hi)] - 2.0 * u[i] + u[g.index(lo)]) / (g.spacing * g.spacing));
    }
  return m;
}

struct SubsolutionReport {
  double max_violation = 0.0;               // max_q H(q, eta_q + Du(q)) - alpha
  std::vector<std::size_t> violating;       // points above tol
  std::string scheme;
  double tol = 0.0;
  bool pass() const { return max_violation <= tol; }
};

inline SubsolutionReport subsolution_check(const HamiltonianSpec& spec, const OneForm& form, double alpha,
                                           const ScalarField& u, double tol, const TorusGrid& g) {
  for (double x : u)
    if (!std::isfinite(x)) throw InputError("subsolution_check: u must be finite");
  auto du = gradient(u, g);
  SubsolutionReport r;
  r.scheme = du.scheme;
  r.tol = tol;
  r.max_violation = -kInf;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Coord q = g.point(i);
    Coord p = form.at(q);
    Coord d = du.at(i);
    for (int k = 0; k < g.dim; ++k) p[k] += d[k];
    const double v = hamiltonian_at(spec, q, p) - alpha;
    r.max_violation = std::max(r.max_violation, v);
    if (v > tol) r.violating.push_back(i);
  }
  return r;
}

struct CommonSubsolution {
  ScalarField u;
  SubsolutionReport first;
  SubsolutionReport second;
  double second_difference = 0.0;
};

/// u = T^-_{H1,s} T^-_{H2,r} u_plus with u_plus = -h_{H1}(., seed).
inline CommonSubsolution common_subsolution(const CalibratedModel& m1, const CalibratedModel& m2,
                                            const BarrierMatrix& h1, std::size_t s_steps, std::size_t r_steps,
                                            std::size_t seed, double tol_zero, double tol) {
  auto pair = elementary_solutions(h1, seed, tol_zero);
  CommonSubsolution out;
  out.u = backward_semigroup(m1, backward_semigroup(m2, pair.u_plus, r_steps), s_steps);
  out.first = subsolution_check(m1.spec, m1.form, m1.alpha.alpha, out.u, tol, m1.grid);
  out.second = subsolution_check(m2.spec, m2.form, m2.alpha.alpha, out.u, tol, m2.grid);
  out.second_difference = max_second_difference(out.u, m1.grid);
  return out;
}

}  // namespace wkam
