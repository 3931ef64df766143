// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// indented underneath. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wkam/wkam.hpp"

using namespace wkam;
namespace fx = wkam::fixtures;

namespace {

constexpr double kFourOverPi = 4.0 / std::numbers::pi;

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)), t0_(std::chrono::steady_clock::now()) {}

  void expect(bool ok, const std::string& what) {
    ok_ = ok_ && ok;
    std::printf("    %s %s\n", ok ? "ok  " : "FAIL", what.c_str());
    std::fflush(stdout);
  }

  bool finish() const {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    std::printf("%s  %s  (%.1f s)\n", ok_ ? "PASS" : "FAIL", title_.c_str(), s);
    std::fflush(stdout);
    return ok_;
  }

 private:
  std::string title_;
  std::chrono::steady_clock::time_point t0_;
  bool ok_ = true;
};

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}
std::string fmt(const char* f, double a, double b, double c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

OneForm zero(int dim) { return constant_form(std::vector<double>(dim, 0.0)); }

double sup(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ScalarField random_u(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ScalarField u(n);
  for (double& x : u) x = d(rng);
  return u;
}

BarrierMatrix barrier_of(const HamiltonianSpec& h, const OneForm& f, const TorusGrid& g,
                         std::uint64_t n_max = kDefaultBarrierSteps) {
  const auto m = build_model(h, f, g);
  return peierls_barrier(m.cost, m.alpha.alpha, n_max);
}

// ---------------------------------------------------------------------------

bool exact_identities() {
  Criterion c("criterion 1: exact discrete identities (1e-9)");
  const double tol = 1e-9;

  double alpha_gap = 0.0;
  for (const auto& [h, f, g] : std::vector<std::tuple<HamiltonianSpec, OneForm, TorusGrid>>{
           {fx::pendulum(), zero(1), build_grid(1, 64, 0.1, 4.0)},
           {fx::pendulum(), constant_form({1.6}), build_grid(1, 64, 0.1, 4.0)},
           {fx::double_well(), OneForm{{0.4}, make_exact_part("random:8", 1)}, build_grid(1, 32, 0.1, 4.0)},
           {fx::free_particle(1), constant_form({0.37}), build_grid(1, 16, 0.25, 4.0)},
           {fx::nc_h1(), constant_form({0.5, -0.25}), build_grid(2, 8, 0.25, 4.0)},
           {fx::sep3_h2(), zero(2), build_grid(2, 8, 0.25, 4.0)}}) {
    const auto C = build_cost(g, h, f);
    alpha_gap = std::max(alpha_gap, std::abs(critical_value(C, AlphaMethod::Karp).alpha -
                                             critical_value(C, AlphaMethod::PowerIteration).alpha));
  }
  c.expect(alpha_gap <= tol, fmt("karp vs power iteration: max |diff| = %.3e", alpha_gap));

  std::mt19937_64 rng(2024);
  double route_gap = 0.0;
  {
    const auto g = build_grid(1, 64, 0.1, 4.0);
    for (const auto& f : {zero(1), constant_form({0.9})}) {
      const auto u = random_u(g.size(), rng);
      route_gap = std::max(route_gap, sup(forward_semigroup(fx::pendulum(), f, g, u, 10),
                                          forward_semigroup_symmetrized(fx::pendulum(), f, g, u, 10)));
    }
  }
  c.expect(route_gap <= tol, fmt("forward semigroup, direct vs symmetrized route: %.3e", route_gap));

  double power_gap = 0.0;
  {
    const auto g = build_grid(2, 8, 0.25, 4.0);
    const auto C = build_cost(g, fx::nc_h2(), OneForm{{0.2, 0.1}, make_exact_part("random:3", 2)});
    const auto P = minplus_power(C, 13);
    for (int trial = 0; trial < 10; ++trial) {
      auto u = random_u(g.size(), rng), it = u;
      for (int k = 0; k < 13; ++k) it = minplus_apply(C, it);
      power_gap = std::max(power_gap, sup(it, minplus_apply(P, u)));
    }
    const auto lhs = minplus_power(C, 8), rhs = minplus_product(minplus_power(C, 3), minplus_power(C, 5));
    for (std::size_t i = 0; i < lhs.entries.size(); ++i)
      power_gap = std::max(power_gap, std::abs(lhs.entries[i] - rhs.entries[i]));
  }
  c.expect(power_gap <= tol, fmt("min-plus power vs repeated apply: %.3e", power_gap));

  double gauge_gap = 0.0, min_diag = 0.0, worst_diag = 0.0, triangle = 0.0;
  {
    const auto g = build_grid(1, 48, 0.1, 4.0);
    for (const auto& h : {fx::pendulum(), fx::double_well()}) {
      const auto a = barrier_of(h, constant_form({0.3}), g);
      const auto b = barrier_of(h, OneForm{{0.3}, make_exact_part("random:5", 1)}, g);
      const double tz = default_tol_zero(g);
      const auto da = analyze_aubry(a, tz), db = analyze_aubry(b, tz);
      gauge_gap = std::max({gauge_gap, std::abs(a.alpha - b.alpha), sup(da.B, db.B), sup(da.b, db.b)});
      double md = kInf;
      for (std::size_t x = 0; x < g.size(); ++x) {
        md = std::min(md, a(x, x));
        worst_diag = std::min(worst_diag, a(x, x));
        for (std::size_t y = 0; y < g.size(); ++y)
          for (std::size_t z = 0; z < g.size(); ++z) triangle = std::max(triangle, a(x, z) - a(x, y) - a(y, z));
      }
      min_diag = std::max(min_diag, std::abs(md));
    }
  }
  c.expect(gauge_gap <= tol, fmt("gauge invariance of alpha, B, b: %.3e", gauge_gap));
  c.expect(min_diag <= tol && worst_diag >= -tol,
           fmt("min_q h(q,q) = %.3e, smallest diagonal %.3e", min_diag, worst_diag));
  c.expect(triangle <= tol, fmt("triangle inequality excess: %.3e", triangle));

  bool monotone = true;
  double expansion = 0.0;
  {
    const auto m = build_model(fx::pendulum(), constant_form({0.3}), build_grid(1, 32, 0.1, 4.0));
    std::uniform_real_distribution<double> bump(0.0, 0.5);
    for (int trial = 0; trial < 100; ++trial) {
      const auto a = random_u(32, rng), b = random_u(32, rng);
      auto hi = a;
      for (double& x : hi) x += bump(rng);
      const auto ta = backward_semigroup(m, a, 4), th = backward_semigroup(m, hi, 4);
      const auto fa = forward_semigroup(m, a, 4), fh = forward_semigroup(m, hi, 4);
      for (std::size_t i = 0; i < 32; ++i) monotone = monotone && ta[i] <= th[i] && fa[i] <= fh[i];
      expansion = std::max(expansion, sup(backward_semigroup(m, a, 4), backward_semigroup(m, b, 4)) - sup(a, b));
      expansion = std::max(expansion, sup(forward_semigroup(m, a, 4), forward_semigroup(m, b, 4)) - sup(a, b));
    }
  }
  c.expect(monotone, "semigroup monotony on 100 random pairs");
  c.expect(expansion <= tol, fmt("non-expansiveness on 100 random pairs, worst excess %.3e", expansion));
  return c.finish();
}

bool analytic_oracles() {
  Criterion c("criterion 2: analytic oracles");

  double free_err = 0.0;
  {
    const auto g = build_grid(1, 256, 0.25, 4.0);
    for (double cc : {-1.0, -0.5, -0.25, 0.0, 0.25, 0.75, 1.0, 2.0}) {
      const double a = critical_value(build_cost(g, fx::free_particle(1), constant_form({cc}))).alpha;
      free_err = std::max(free_err, std::abs(a - 0.5 * cc * cc));
    }
  }
  c.expect(free_err <= 1e-3, fmt("free alpha(c) = c^2/2 at N=256: max error %.3e", free_err));
  const double g2_err = std::abs(
      critical_value(build_cost(build_grid(1, 2, 0.5, 1.0), fx::free_particle(1), constant_form({1.0}))).alpha - 0.5);
  c.expect(g2_err == 0.0, fmt("free alpha(1) on the two-point grid: error %.3e", g2_err));

  std::vector<double> alpha_err;
  for (int n : {128, 256}) {
    const auto g = build_grid(1, n, 0.1, 4.0);
    alpha_err.push_back(std::abs(critical_value(build_cost(g, fx::pendulum(), zero(1))).alpha - 1.0));
  }
  c.expect(alpha_err[1] <= 0.05, fmt("pendulum alpha(0) at N=256: error %.3e", alpha_err[1]));
  const bool halving = alpha_err[1] <= 1e-12 || alpha_err[1] <= 0.5 * alpha_err[0];
  c.expect(halving, fmt("pendulum alpha(0) error N=128 -> 256: %.3e -> %.3e", alpha_err[0], alpha_err[1]) +
                        (alpha_err[1] <= 1e-12 ? " (exact at grid level)" : ""));

  double edge = NAN;
  {
    const auto g = build_grid(1, 256, 0.1, 6.0);
    for (int k = 0; k <= 100; ++k) {
      const double cc = 1.0 + 0.005 * k;
      const double a = critical_value(build_cost(g, fx::pendulum(), constant_form({cc}))).alpha;
      if (a > 1.0 + 1e-9) {
        edge = cc - 0.0025;
        break;
      }
    }
    double flat_inside = 0.0;
    for (double cc : {-1.2, -0.6, 0.0, 0.6, 1.2})
      flat_inside = std::max(flat_inside,
                             std::abs(critical_value(build_cost(g, fx::pendulum(), constant_form({cc}))).alpha - 1.0));
    c.expect(flat_inside <= 1e-12, fmt("pendulum alpha(c) = 1 for |c| <= 1.2: max deviation %.3e", flat_inside));
  }
  c.expect(std::abs(edge - kFourOverPi) <= 0.05,
           fmt("pendulum flat piece ends at c = %.4f (4/pi = %.4f)", edge, kFourOverPi));

  std::vector<double> eB, eb;
  std::vector<std::size_t> aubry_at_256;
  for (int n : {64, 128, 256}) {
    const auto g = build_grid(1, n, 0.1, 4.0);
    const auto hm = barrier_of(fx::pendulum(), zero(1), g);
    const auto d = analyze_aubry(hm, default_tol_zero(g));
    eB.push_back(std::abs(d.B[n / 2] - kFourOverPi));
    eb.push_back(std::abs(d.b[n / 2] - kFourOverPi));
    if (n == 256) aubry_at_256 = aubry_set(hm, 1e-6).aubry;
  }
  const bool mono = eB[0] >= eB[1] && eB[1] >= eB[2] && eb[0] >= eb[1] && eb[1] >= eb[2];
  c.expect(mono && eB[2] <= 0.1 && eb[2] <= 0.1,
           fmt("B(1/2) error at N=64,128,256: %.4f %.4f %.4f", eB[0], eB[1], eB[2]) +
               fmt("; b(1/2): %.4f %.4f %.4f", eb[0], eb[1], eb[2]));
  bool aubry_ok = !aubry_at_256.empty();
  for (auto i : aubry_at_256) aubry_ok = aubry_ok && (i <= 1 || i >= 255);
  c.expect(aubry_ok, "pendulum Aubry set at N=256 is {0} within one cell (" +
                         std::to_string(aubry_at_256.size()) + " point(s))");
  return c.finish();
}

VerifySettings suite_settings() {
  VerifySettings s;
  s.resolutions = {16, 32};
  s.tau = 0.25;
  s.tau_follows_spacing = true;
  s.v_max = 4.0;
  s.semigroup_time = 0.5;
  s.c_list = {{0.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}};
  return s;
}

std::string describe(const VerificationReport& r) {
  std::string out = r.check + ":";
  for (const auto& m : r.metrics) {
    out += " " + m.name + "=";
    for (std::size_t i = 0; i < m.values.size(); ++i) out += (i ? "->" : "") + fmt("%.3e", m.values[i]);
  }
  return out + fmt(" ratio=%.3f", r.ratio);
}

bool commuting_suite(ModelCache& cache) {
  Criterion c("criterion 3: commuting pair suite on SEP3, N 16 -> 32");
  const auto s = suite_settings();
  const auto pair = fx::sep3();
  for (const auto& name : check_names()) {
    if (name == "gauge_invariance") continue;
    const auto r = run_named_check(name, pair, s, cache);
    c.expect(r.error.empty() && r.pass, describe(r) + (r.error.empty() ? "" : " error: " + r.error));
  }
  return c.finish();
}

bool negative_control(ModelCache& cache) {
  Criterion c("criterion 4: non-commuting control NC, N 16 -> 32");
  const auto s = suite_settings();
  const auto pair = fx::nc();
  for (const char* name : {"semigroup_commutation", "barrier_equality", "set_equality"}) {
    const auto r = run_named_check(name, pair, s, cache);
    bool persists = r.error.empty() && !r.pass;
    for (const auto& m : r.metrics) {
      if (!m.gated) continue;
      for (double v : m.values) persists = persists && v >= s.control_floor;
      persists = persists && metric_ratio(m, s.converged_floor) >= s.control_ratio;
    }
    c.expect(persists, describe(r));
  }
  const PhaseLattice lattice;
  double analytic = 0.0;
  lattice.for_each(2, [&](const Coord& q, const Coord& p) {
    analytic = std::max(analytic, std::abs(kTwoPi * (p[0] * std::sin(kTwoPi * q[0]) - p[1] * std::sin(kTwoPi * q[1]))));
  });
  const double measured = max_poisson_bracket(pair.h1, pair.h2, lattice);
  c.expect(std::abs(measured - analytic) <= 1e-9,
           fmt("max |{H1,H2}| on the lattice = %.12f, analytic %.12f", measured, analytic));
  c.expect(max_poisson_bracket(fx::sep3_h1(), fx::sep3_h2(), lattice) == 0.0, "SEP3 bracket vanishes on the lattice");
  return c.finish();
}

/// Minimum cycle mean over simple cycles by subset dynamic programming.
double brute_min_mean_cycle(const CostMatrix& c) {
  const std::size_t n = c.n, full = std::size_t{1} << n;
  double best = kInf;
  std::vector<double> dp(full * n * (n + 1));
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dp.begin(), dp.end(), kInf);
    auto at = [&](std::size_t mask, std::size_t v, std::size_t len) -> double& {
      return dp[(mask * n + v) * (n + 1) + len];
    };
    at(std::size_t{1} << s, s, 0) = 0.0;
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (!(mask >> s & 1u) || (mask & ((std::size_t{1} << s) - 1))) continue;
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t len = 0; len < n; ++len) {
          const double cur = at(mask, v, len);
          if (cur == kInf) continue;
          if (c(v, s) != kInf) best = std::min(best, (cur + c(v, s)) / static_cast<double>(len + 1));
          for (std::size_t w = s + 1; w < n; ++w) {
            if (mask >> w & 1u || c(v, w) == kInf) continue;
            double& nxt = at(mask | std::size_t{1} << w, w, len + 1);
            nxt = std::min(nxt, cur + c(v, w));
          }
        }
    }
  }
  return best;
}

bool tiny_oracles() {
  Criterion c("criterion 5: oracle equivalence on grids with <= 12 states");
  std::vector<std::tuple<HamiltonianSpec, OneForm, TorusGrid>> cases;
  const std::vector<HamiltonianSpec> one_d = {fx::free_particle(1), fx::pendulum(), fx::double_well(), fx::quartic(1)};
  for (int n = 1; n <= 12; ++n)
    for (const auto& h : one_d)
      for (double v_max : {1.0, 3.0}) {
        const double tau = 0.25;
        if (v_max * tau * n < 1.0) continue;
        cases.push_back({h, OneForm{{0.35 * n - 2.0}, make_exact_part("random:" + std::to_string(n), 1)},
                         build_grid(1, n, tau, v_max)});
      }
  for (int n : {2, 3})
    for (const auto& h : {fx::nc_h1(), fx::sep3_h2(), fx::free_particle(2)})
      cases.push_back({h, OneForm{{0.6, -0.3}, make_exact_part("random:4", 2)}, build_grid(2, n, 0.5, 2.0)});

  double karp_gap = 0.0, h_gap = 0.0;
  for (const auto& [h, f, g] : cases) {
    const auto C = build_cost(g, h, f);
    const double k = karp_min_mean_cycle(C);
    karp_gap = std::max(karp_gap, std::abs(k - brute_min_mean_cycle(C)));

    // Calibrated walk costs for every horizon up to 2^10 by sequential DP.
    const double alpha = -k / C.tau;
    const auto step = shifted(C, C.tau * alpha);
    const std::uint64_t n_max = 1024, window = 64;
    const auto hm = peierls_barrier(C, alpha, n_max, window);
    std::vector<double> row(C.n * C.n, kInf), ref(C.n * C.n, kInf);
    for (std::size_t i = 0; i < C.n; ++i) row[i * C.n + i] = 0.0;
    for (std::uint64_t t = 1; t <= n_max; ++t) {
      std::vector<double> next(C.n * C.n, kInf);
      for (std::size_t x = 0; x < C.n; ++x)
        for (std::size_t z = 0; z < C.n; ++z) {
          const double a = row[x * C.n + z];
          if (a == kInf) continue;
          for (std::size_t y = 0; y < C.n; ++y) next[x * C.n + y] = std::min(next[x * C.n + y], a + step(z, y));
        }
      row.swap(next);
      if (t >= n_max - window)
        for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = std::min(ref[i], row[i]);
    }
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (ref[i] != hm.h.entries[i]) h_gap = std::max(h_gap, std::abs(ref[i] - hm.h.entries[i]));
  }
  c.expect(karp_gap <= 1e-9,
           fmt("karp vs simple-cycle enumeration over %.0f instances: max |diff| = %.3e", double(cases.size()),
               karp_gap));
  c.expect(h_gap <= 1e-9, fmt("barrier vs sequential DP over horizons <= 1024: max |diff| = %.3e", h_gap));
  return c.finish();
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  ModelCache cache;
  bool ok = true;
  ok = exact_identities() && ok;
  ok = analytic_oracles() && ok;
  ok = commuting_suite(cache) && ok;
  ok = negative_control(cache) && ok;
  ok = tiny_oracles() && ok;
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s  all criteria  (%.1f s)\n", ok ? "PASS" : "FAIL", s);
  return ok ? 0 : 1;
}
