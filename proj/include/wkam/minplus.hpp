#pragma once

// Min-plus (tropical) linear algebra over extended reals: one-step action
// costs on a torus grid, vector application, matrix powers and Karp's minimum
// mean cycle. +infinity is the absorbing element; IEEE arithmetic saturates
// on it and no entry is ever -infinity.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "wkam/errors.hpp"
#include "wkam/hamiltonian.hpp"
#include "wkam/parallel.hpp"
#include "wkam/serialize.hpp"
#include "wkam/torus.hpp"

namespace wkam {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using MinPlusVector = std::vector<double>;

/// Dense square matrix of extended reals, entry(y, x) = cost of going from y
/// to x. A CSR index of the finite entries is kept for sparse application.
struct CostMatrix {
  std::size_t n = 0;
  std::vector<double> entries;
  double tau = 0.0;
  TorusGrid grid;
  nlohmann::json provenance = nlohmann::json::object();

  std::vector<std::size_t> row_start;
  std::vector<std::uint32_t> cols;

  double operator()(std::size_t y, std::size_t x) const { return entries[y * n + x]; }
  const double* row(std::size_t y) const { return entries.data() + y * n; }

  /// Rebuilds the finite-entry index; call after writing `entries`.
  void index_finite() {
    row_start.assign(n + 1, 0);
    cols.clear();
    std::size_t nnz = 0;
    for (double v : entries) nnz += std::isfinite(v) ? 1 : 0;
    if (nnz * 2 > n * n) return;  // dense enough: keep the index empty
    cols.reserve(nnz);
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x)
        if (std::isfinite(entries[y * n + x])) cols.push_back(static_cast<std::uint32_t>(x));
      row_start[y + 1] = cols.size();
    }
  }
  bool sparse() const { return !cols.empty(); }
};

/// entry(y,x) = tau * L(mid(y,x), dx/tau) - int_{y->x} eta for every step with
/// |dx_i| <= v_max * tau, +inf otherwise. L is evaluated at the segment midpoint.
inline CostMatrix build_cost(const TorusGrid& grid, const HamiltonianSpec& spec, const OneForm& form) {
  if (spec.dim != grid.dim) throw InputError("build_cost: Hamiltonian dimension does not match grid");
  if (form.dim() != grid.dim) throw InputError("build_cost: form dimension does not match grid");
  const auto& nf = spec.nf();
  const std::size_t n = grid.size();
  const int kmax = grid.max_step_cells();
  const int reach = std::min(kmax, grid.n / 2);

  // Per-axis kinetic conjugates by displacement when they do not depend on q.
  std::array<std::vector<double>, kMaxDim> table;
  std::array<bool, kMaxDim> tabulated{false, false};
  for (int i = 0; i < grid.dim; ++i) {
    if (nf.axis_q_dependent(i)) continue;
    tabulated[i] = true;
    table[i].resize(2 * reach + 1);
    for (int d = -reach; d <= reach; ++d) {
      int deg = 0;
      auto poly = nf.axis_polynomial(Coord{0.0, 0.0}, i, deg);
      table[i][d + reach] = detail::convex_conjugate(poly, deg, d * grid.spacing / grid.tau).value;
    }
  }
  ScalarField f_exact;
  if (!form.exact.empty()) f_exact = sample_exact_part(form, grid);

  CostMatrix C;
  C.n = n;
  C.tau = grid.tau;
  C.grid = grid;
  C.entries.assign(n * n, kInf);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t y = b; y < e; ++y) {
      const Coord qy = grid.point(y);
      for (std::size_t x = 0; x < n; ++x) {
        const Cell d = grid.displacement_cells(x, y);
        if (!grid.feasible(d)) continue;
        Coord mid{0.0, 0.0}, v{0.0, 0.0};
        double pair = 0.0;
        for (int i = 0; i < grid.dim; ++i) {
          const double dx = d[i] * grid.spacing;
          mid[i] = wrap_unit(qy[i] + 0.5 * dx);
          v[i] = dx / grid.tau;
          pair += form.c[i] * dx;
        }
        if (!f_exact.empty()) pair += f_exact[x] - f_exact[y];
        double lag = -nf.potential_value(mid);
        for (int i = 0; i < grid.dim; ++i) {
          if (tabulated[i]) {
            lag += table[i][d[i] + reach];
          } else {
            int deg = 0;
            auto poly = nf.axis_polynomial(mid, i, deg);
            lag += detail::convex_conjugate(poly, deg, v[i]).value;
          }
        }
        C.entries[y * n + x] = grid.tau * lag - pair;
      }
    }
  });
  for (std::size_t y = 0; y < n; ++y) assert(std::isfinite(C.entries[y * n + y]));
  C.index_finite();
  C.provenance = {{"kind", "cost"}, {"grid", grid_json(grid)}, {"spec", spec_json(spec)}, {"form", form_json(form)}};
  return C;
}

/// out(x) = min_y [u(y) + C(y,x)].
inline MinPlusVector minplus_apply(const CostMatrix& C, const MinPlusVector& u) {
  if (u.size() != C.n) throw InputError("minplus_apply: vector length does not match matrix");
  const std::size_t n = C.n;
  MinPlusVector out(n, kInf);
  if (C.sparse()) {
    for (std::size_t y = 0; y < n; ++y) {
      const double uy = u[y];
      if (uy == kInf) continue;
      const double* r = C.row(y);
      for (std::size_t k = C.row_start[y]; k < C.row_start[y + 1]; ++k) {
        const std::uint32_t x = C.cols[k];
        const double s = uy + r[x];
        out[x] = s < out[x] ? s : out[x];
      }
    }
  } else {
    for (std::size_t y = 0; y < n; ++y) {
      const double uy = u[y];
      if (uy == kInf) continue;
      const double* r = C.row(y);
      double* o = out.data();
      for (std::size_t x = 0; x < n; ++x) {
        const double s = uy + r[x];
        o[x] = s < o[x] ? s : o[x];
      }
    }
  }
  return out;
}

/// out(x) = max_y [u(y) - C(x,y)], the dual (forward) application.
inline MinPlusVector maxminus_apply(const CostMatrix& C, const MinPlusVector& u) {
  if (u.size() != C.n) throw InputError("maxminus_apply: vector length does not match matrix");
  const std::size_t n = C.n;
  MinPlusVector out(n, -kInf);
  for (std::size_t x = 0; x < n; ++x) {
    const double* r = C.row(x);
    double best = -kInf;
    if (C.sparse()) {
      for (std::size_t k = C.row_start[x]; k < C.row_start[x + 1]; ++k) {
        const std::uint32_t y = C.cols[k];
        const double s = u[y] - r[y];
        best = s > best ? s : best;
      }
    } else {
      for (std::size_t y = 0; y < n; ++y) {
        const double s = u[y] - r[y];
        best = s > best ? s : best;
      }
    }
    out[x] = best;
  }
  return out;
}

namespace detail {

inline void product_into(const std::vector<double>& A, const std::vector<double>& B, std::vector<double>& out,
                         std::size_t n) {
  out.assign(n * n, kInf);
  constexpr std::size_t kRowBlock = 16;
  const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
  parallel_for(
      blocks,
      [&](std::size_t bb, std::size_t be) {
        for (std::size_t blk = bb; blk < be; ++blk) {
          const std::size_t y0 = blk * kRowBlock, y1 = std::min(n, y0 + kRowBlock);
          for (std::size_t z = 0; z < n; ++z) {
            const double* b = B.data() + z * n;
            for (std::size_t y = y0; y < y1; ++y) {
              const double a = A[y * n + z];
              if (a == kInf) continue;
              double* c = out.data() + y * n;
              for (std::size_t x = 0; x < n; ++x) {
                const double s = a + b[x];
                c[x] = s < c[x] ? s : c[x];
              }
            }
          }
        }
      },
      1);
}

}  // namespace detail

/// (A (x) B)(y,x) = min_z A(y,z) + B(z,x).
inline CostMatrix minplus_product(const CostMatrix& A, const CostMatrix& B) {
  if (A.n != B.n) throw InputError("minplus_product: size mismatch");
  CostMatrix out;
  out.n = A.n;
  out.tau = A.tau;
  out.grid = A.grid;
  out.provenance = A.provenance;
  detail::product_into(A.entries, B.entries, out.entries, A.n);
  out.index_finite();
  return out;
}

/// Elementwise minimum (tropical sum).
inline CostMatrix minplus_sum(const CostMatrix& A, const CostMatrix& B) {
  if (A.n != B.n) throw InputError("minplus_sum: size mismatch");
  CostMatrix out = A;
  for (std::size_t i = 0; i < out.entries.size(); ++i)
    out.entries[i] = std::min(out.entries[i], B.entries[i]);
  out.index_finite();
  return out;
}

/// Tropical identity: 0 on the diagonal, +inf elsewhere.
inline CostMatrix minplus_identity_like(const CostMatrix& C) {
  CostMatrix I;
  I.n = C.n;
  I.tau = C.tau;
  I.grid = C.grid;
  I.provenance = C.provenance;
  I.entries.assign(C.n * C.n, kInf);
  for (std::size_t i = 0; i < C.n; ++i) I.entries[i * C.n + i] = 0.0;
  I.index_finite();
  return I;
}

/// C^steps by binary decomposition.
inline CostMatrix minplus_power(const CostMatrix& C, std::uint64_t steps) {
  if (steps < 1) throw InputError("minplus_power: exponent must be >= 1");
  CostMatrix base = C;
  CostMatrix result;
  bool have = false;
  while (true) {
    if (steps & 1u) {
      result = have ? minplus_product(result, base) : base;
      have = true;
    }
    steps >>= 1u;
    if (steps == 0) break;
    base = minplus_product(base, base);
  }
  result.provenance["power"] = result.provenance.value("power", 1);
  return result;
}

/// Adds s to every finite entry.
inline CostMatrix shifted(const CostMatrix& C, double s) {
  CostMatrix out = C;
  for (double& v : out.entries)
    if (v != kInf) v += s;
  return out;
}

/// Minimum cycle mean by Karp's recurrence over walks from a virtual source.
inline double karp_min_mean_cycle(const CostMatrix& C) {
  const std::size_t n = C.n;
  if (n == 0) throw InputError("karp_min_mean_cycle: empty matrix");
  std::vector<MinPlusVector> D;
  D.reserve(n + 1);
  D.emplace_back(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) D.push_back(minplus_apply(C, D.back()));
  double best = kInf;
  for (std::size_t x = 0; x < n; ++x) {
    const double dn = D[n][x];
    if (dn == kInf) continue;
    double worst = -kInf;
    for (std::size_t k = 0; k < n; ++k) {
      if (D[k][x] == kInf) continue;
      worst = std::max(worst, (dn - D[k][x]) / static_cast<double>(n - k));
    }
    best = std::min(best, worst);
  }
  if (!std::isfinite(best)) throw NumericError("karp_min_mean_cycle: graph has no cycle");
  return best;
}

/// True when some optimal one-step transition in min_y u(y) + C(y,x) uses the
/// full speed cap on an axis (the cap is then binding on minimizers).
inline bool step_cap_saturated(const CostMatrix& C, const MinPlusVector& u) {
  const TorusGrid& g = C.grid;
  const int kmax = g.max_step_cells();
  if (2 * kmax >= g.n) return false;  // the cap does not cut the torus
  for (std::size_t x = 0; x < C.n; ++x) {
    double best = kInf;
    std::size_t arg = x;
    for (std::size_t y = 0; y < C.n; ++y) {
      const double s = u[y] + C(y, x);
      if (s < best) best = s, arg = y;
    }
    Cell d = g.displacement_cells(x, arg);
    for (int i = 0; i < g.dim; ++i)
      if (std::abs(d[i]) == kmax) return true;
  }
  return false;
}

}  // namespace wkam
