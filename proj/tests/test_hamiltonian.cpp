#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "wkam/config.hpp"
#include "wkam/hamiltonian.hpp"

using namespace wkam;
using Catch::Approx;
namespace fx = wkam::fixtures;

namespace {

double H(const HamiltonianSpec& h, std::vector<double> q, std::vector<double> p) { return eval_hamiltonian(h, q, p); }

/// sup_p (p v - H(q, p)) by brute force on a fine momentum grid, refined once
/// around the best sample.
double dense_conjugate(const HamiltonianSpec& h, double q, double v, double radius) {
  double best = -INFINITY, arg = 0.0;
  const int n = 200000;
  for (int k = 0; k <= n; ++k) {
    const double p = -radius + 2.0 * radius * k / n;
    const double val = p * v - H(h, {q}, {p});
    if (val > best) best = val, arg = p;
  }
  const double h0 = 2.0 * radius / n;
  for (int k = -1000; k <= 1000; ++k) {
    const double p = arg + h0 * k / 1000.0;
    best = std::max(best, p * v - H(h, {q}, {p}));
  }
  return best;
}

}  // namespace

TEST_CASE("hamiltonian values at fixture points", "[hamiltonian]") {
  CHECK(H(fx::free_particle(1), {0.3}, {0.0}) == 0.0);
  CHECK(H(fx::free_particle(2), {0.3, 0.9}, {0.0, 0.0}) == 0.0);
  CHECK(H(fx::pendulum(), {0.0}, {0.0}) == Approx(1.0).margin(1e-15));
  CHECK(H(fx::sep3_h2(), {0.0, 0.0}, {1.0, 1.0}) == Approx(3.5).margin(1e-14));
  CHECK(H(fx::sep3_h1(), {0.0, 0.0}, {1.0, 1.0}) == Approx(2.0).margin(1e-14));
}

TEST_CASE("dimension mismatch is an input error", "[hamiltonian]") {
  std::vector<double> q1{0.0}, p2{0.0, 0.0};
  CHECK_THROWS_AS(eval_hamiltonian(fx::pendulum(), q1, p2), InputError);
  CHECK_THROWS_AS(poisson_bracket(fx::pendulum(), fx::nc_h1(), q1, q1), InputError);
}

TEST_CASE("lagrangian closed forms", "[hamiltonian][legendre]") {
  std::vector<double> q{0.0}, v1{1.0}, v0{0.0};
  CHECK(eval_lagrangian(fx::free_particle(1), q, v1).value == Approx(0.5).margin(1e-14));
  std::vector<double> half{0.5};
  CHECK(eval_lagrangian(fx::pendulum(), half, v0).value == Approx(1.0).margin(1e-14));
  // quartic: (3/4)|v|^(4/3)
  CHECK(eval_lagrangian(fx::quartic(1), q, v1).value == Approx(0.75).margin(1e-12));
  std::vector<double> big{2.0e3};
  CHECK_THROWS_AS(eval_lagrangian(fx::free_particle(1), q, big), InputError);
}

TEST_CASE("lagrangian matches dense momentum maximization", "[hamiltonian][legendre]") {
  // Frozen from the dense-grid oracle below; the quartic value is 3/4 * 2^(4/3).
  const auto quartic = fx::quartic(1);
  CHECK(dense_conjugate(quartic, 0.0, 1.0, 4.0) == Approx(0.75).margin(1e-9));
  for (double v : {-2.0, -0.3, 0.7, 2.0}) {
    std::vector<double> q{0.1}, vv{v};
    CHECK(eval_lagrangian(quartic, q, vv).value == Approx(dense_conjugate(quartic, 0.1, v, 4.0)).margin(1e-8));
  }
  const auto mixed = p_polynomial(1, {0.0, 0.3, 1.0, 0.0, 0.5}, "mixed");
  for (double v : {-1.5, 0.0, 0.4, 3.0}) {
    std::vector<double> q{0.0}, vv{v};
    CHECK(eval_lagrangian(mixed, q, vv).value == Approx(dense_conjugate(mixed, 0.0, v, 4.0)).margin(1e-8));
  }
}

TEST_CASE("legendre round trip on a lattice", "[hamiltonian][legendre][property]") {
  const std::vector<HamiltonianSpec> specs = {fx::pendulum(), fx::quartic(1), fx::sep3_h2(), fx::nc_h1(),
                                              p_polynomial(2, {0.0, -0.4, 0.7, 0.2, 0.3}, "poly")};
  for (const auto& h : specs) {
    PhaseLattice{8, 7, 3.0}.for_each(h.dim, [&](const Coord& q, const Coord& v) {
      const auto l = lagrangian_at(h, q, v);
      const Coord dp = hamiltonian_dp(h, q, l.argmax_p);
      for (int i = 0; i < h.dim; ++i) CHECK(dp[i] == Approx(v[i]).margin(1e-8));
      const double lhs = l.argmax_p[0] * v[0] + l.argmax_p[1] * v[1] - hamiltonian_at(h, q, l.argmax_p);
      CHECK(l.value == Approx(lhs).margin(1e-10));
    });
  }
}

TEST_CASE("non-superlinear kinetic terms are rejected by the transform", "[hamiltonian][legendre]") {
  std::vector<double> q{0.0}, v{0.5};
  CHECK_THROWS_AS(eval_lagrangian(p_polynomial(1, {0.0, 1.0}), q, v), NumericError);
  CHECK_THROWS_AS(eval_lagrangian(p_polynomial(1, {0.0, 0.0, 0.5, 1.0}), q, v), NumericError);
  CHECK_THROWS_AS(eval_lagrangian(p_polynomial(1, {0.0, 0.0, -0.5}), q, v), NumericError);
}

TEST_CASE("poisson bracket examples", "[hamiltonian][bracket]") {
  const auto h1 = fx::sep3_h1(), h2 = fx::sep3_h2();
  CHECK(max_poisson_bracket(h1, h2) == 0.0);
  CHECK(max_poisson_bracket(fx::nc_h1(), fx::nc_h1()) == 0.0);
  std::vector<double> q{0.25, 0.0}, p{1.0, 1.0};
  // 2 pi (p1 sin 2 pi q1 - p2 sin 2 pi q2)
  CHECK(poisson_bracket(fx::nc_h1(), fx::nc_h2(), q, p) == Approx(2.0 * std::numbers::pi).margin(1e-12));
}

TEST_CASE("poisson bracket antisymmetry is exact", "[hamiltonian][bracket][property]") {
  const auto a = fx::nc_h1(), b = fx::nc_h2();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uq(0.0, 1.0), up(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> q{uq(rng), uq(rng)}, p{up(rng), up(rng)};
    CHECK(poisson_bracket(a, b, q, p) == -poisson_bracket(b, a, q, p));
  }
}

TEST_CASE("max bracket of the control pair matches analytic differentiation", "[hamiltonian][bracket]") {
  const PhaseLattice lattice;
  double analytic = 0.0;
  lattice.for_each(2, [&](const Coord& q, const Coord& p) {
    analytic = std::max(analytic, std::abs(kTwoPi * (p[0] * std::sin(kTwoPi * q[0]) - p[1] * std::sin(kTwoPi * q[1]))));
  });
  CHECK(max_poisson_bracket(fx::nc_h1(), fx::nc_h2(), lattice) == Approx(analytic).margin(1e-9));
}

TEST_CASE("symmetrization", "[hamiltonian][symmetric]") {
  const auto zero1 = constant_form({0.0});
  for (const auto& h : {fx::free_particle(1), fx::pendulum()}) {
    const auto hs = symmetrize(h, zero1);
    PhaseLattice{16, 9, 2.0}.for_each(1, [&](const Coord& q, const Coord& p) {
      CHECK(hamiltonian_at(hs, q, p) == Approx(hamiltonian_at(h, q, p)).margin(1e-14));
    });
  }
  const auto cubic = p_polynomial(1, {0.0, 0.0, 0.5, 1.0}, "cubic");
  const auto cs = symmetrize(cubic, zero1);
  for (double p : {-0.2, 0.0, 0.1, 0.3}) CHECK(H(cs, {0.0}, {p}) == Approx(0.5 * p * p - p * p * p).margin(1e-15));
}

TEST_CASE("symmetrized lagrangian identity", "[hamiltonian][symmetric][property]") {
  const std::vector<OneForm> forms = {constant_form({0.7}),
                                      OneForm{{-0.4}, make_exact_part("sin", 1)},
                                      OneForm{{0.2}, make_exact_part("random:3", 1)}};
  for (const auto& h : {fx::pendulum(), fx::quartic(1), p_polynomial(1, {0.0, 0.2, 0.6, 0.1, 0.2})}) {
    for (const auto& eta : forms) {
      const auto hs = symmetrize(h, eta);
      PhaseLattice{12, 7, 2.5}.for_each(1, [&](const Coord& q, const Coord& v) {
        const double e = eta.at(q)[0];
        const double lhs = lagrangian_at(hs, q, v).value - e * v[0];
        const double rhs = lagrangian_at(h, q, Coord{-v[0], 0.0}).value + e * v[0];
        CHECK(lhs == Approx(rhs).margin(1e-8));
      });
    }
  }
}

TEST_CASE("combine", "[hamiltonian][combine]") {
  CHECK(H(combine({fx::free_particle(1)}, {2.0}), {0.0}, {1.0}) == Approx(1.0).margin(1e-15));
  const auto s = combine({fx::sep3_h1(), fx::sep3_h2()}, {1.0, 1.0});
  CHECK(H(s, {0.0, 0.4}, {0.0, 0.0}) == Approx(3.0).margin(1e-14));
  const auto f = fx::sep3_f(), g = fx::sep3_g();
  const auto same = combine({separable({f, g})}, {1.0});
  double diff = 0.0;
  PhaseLattice{16, 5, 2.0}.for_each(2, [&](const Coord& q, const Coord& p) {
    diff = std::max(diff, std::abs(hamiltonian_at(same, q, p) - hamiltonian_at(fx::sep3_h1(), q, p)));
  });
  CHECK(diff == 0.0);
  CHECK_THROWS_AS(combine({fx::pendulum()}, {0.0}), InputError);
  CHECK_THROWS_AS(combine({fx::pendulum()}, {-1.0}), InputError);
  CHECK_THROWS_AS(combine({fx::pendulum(), fx::nc_h1()}, {1.0, 1.0}), InputError);
}

TEST_CASE("combine is linear in evaluation", "[hamiltonian][combine][property]") {
  const std::vector<HamiltonianSpec> parts = {fx::nc_h1(), fx::nc_h2(), fx::quartic(2)};
  const std::vector<double> w = {0.3, 1.7, 2.5};
  const auto sum = combine(parts, w);
  PhaseLattice{8, 5, 2.0}.for_each(2, [&](const Coord& q, const Coord& p) {
    double ref = 0.0;
    for (std::size_t j = 0; j < parts.size(); ++j) ref += w[j] * hamiltonian_at(parts[j], q, p);
    CHECK(hamiltonian_at(sum, q, p) == Approx(ref).epsilon(1e-14).margin(1e-13));
  });
}

TEST_CASE("tonelli diagnostics", "[hamiltonian][tonelli]") {
  for (const auto& h : {fx::pendulum(), fx::sep3_h2(), fx::nc_h1()}) {
    const auto r = check_tonelli(h, 4.0);
    CHECK(r.convex);
    CHECK(r.superlinear);
  }
  // p^4/4 is superlinear but its fiber Hessian vanishes at p = 0
  const auto q = check_tonelli(fx::quartic(2), 4.0);
  CHECK(q.min_hessian == 0.0);
  CHECK(!q.convex);
  CHECK(q.superlinear);
}

TEST_CASE("analytic q-derivatives match finite differences", "[hamiltonian]") {
  const auto h = symmetrize(fx::nc_h1(), OneForm{{0.3, -0.2}, make_exact_part("random:5", 2)});
  const double e = 1e-6;
  PhaseLattice{5, 3, 1.5}.for_each(2, [&](const Coord& q, const Coord& p) {
    const Coord dq = hamiltonian_dq(h, q, p);
    for (int i = 0; i < 2; ++i) {
      Coord a = q, b = q;
      a[i] += e;
      b[i] -= e;
      CHECK(dq[i] == Approx((hamiltonian_at(h, a, p) - hamiltonian_at(h, b, p)) / (2 * e)).margin(1e-5));
    }
  });
}
