#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cycleperturb/model.hpp"

using namespace cycleperturb;

namespace {

// Brute-force support oracle: max of <d,.> over all vertex sign patterns.
double vertex_support(const Vec2& c, const std::vector<std::pair<Vec2, CoefficientInterval>>& gens,
                      const Vec2& d) {
  const int n = (int)gens.size();
  double best = -1e300;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vec2 v = c;
    for (int i = 0; i < n; ++i) {
      const double lam = (mask >> i) & 1 ? gens[i].second.hi : gens[i].second.lo;
      v += lam * gens[i].first;
    }
    best = std::max(best, dot(d, v));
  }
  return best;
}

SetValuedPerturbation fixed_zonotope(const Vec2& c,
                                     std::vector<std::pair<Vec2, CoefficientInterval>> gens) {
  SetValuedPerturbation p;
  p.center = [c](double, const Vec2&, double) { return c; };
  for (auto& [u, iv] : gens) {
    Generator g;
    g.direction = [u](double, const Vec2&) { return u; };
    g.coeff = [iv](double, const Vec2&, double) { return iv; };
    p.generators.push_back(g);
  }
  p.period = 1.0;
  return p;
}

}  // namespace

TEST_CASE("support: singleton zero set") {
  auto p = fixed_zonotope({0, 0}, {});
  CHECK(support(p, {3, -2}, 0, {0, 0}, 0) == doctest::Approx(0.0));
}

TEST_CASE("support: closed form for one generator") {
  // <d,c>=3, <d,u>=2 -> support 5 with interval [-1,1].
  const Vec2 d{1, 0}, c{3, 7}, u{2, -1};
  auto p = fixed_zonotope(c, {{u, {-1, 1}}});
  CHECK(support(p, d, 0, {0, 0}, 0) == doctest::Approx(5.0));
}

TEST_CASE("support & extremal_selection vs vertex enumeration on random zonotopes") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 c{U(rng), U(rng)};
    std::vector<std::pair<Vec2, CoefficientInterval>> gens;
    for (int i = 0; i < 3; ++i) {
      const double lo = U(rng);
      gens.push_back({{U(rng), U(rng)}, {lo, lo + std::abs(U(rng))}});
    }
    auto p = fixed_zonotope(c, gens);
    const Vec2 d{U(rng), U(rng)};
    const double s = support(p, d, 0, {0, 0}, 0);
    CHECK(s == doctest::Approx(vertex_support(c, gens, d)).epsilon(1e-12));
    const Vec2 v = extremal_selection(p, d, 0, {0, 0}, 0);
    CHECK(dot(d, v) == doctest::Approx(s).epsilon(1e-12));
    CHECK(contains(p, v, 0, {0, 0}, 0, 1e-9));
  }
}

TEST_CASE("support sublinearity and positive homogeneity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  auto p = fixed_zonotope({0.3, -0.2}, {{{1, 0.5}, {-1, 2}}, {{0, 1}, {0.5, 0.7}}});
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 d1{U(rng), U(rng)}, d2{U(rng), U(rng)};
    const double s1 = support(p, d1, 0, {0, 0}, 0), s2 = support(p, d2, 0, {0, 0}, 0);
    CHECK(support(p, d1 + d2, 0, {0, 0}, 0) <= s1 + s2 + 1e-12);
    const double lam = std::abs(U(rng));
    CHECK(support(p, lam * d1, 0, {0, 0}, 0) == doctest::Approx(lam * s1).epsilon(1e-12));
  }
}

TEST_CASE("extremal_selection: singleton and one-generator cases") {
  auto p0 = fixed_zonotope({1.5, -2.5}, {});
  const Vec2 v0 = extremal_selection(p0, {0, 1}, 0, {0, 0}, 0);
  CHECK(v0.x == doctest::Approx(1.5));
  CHECK(v0.y == doctest::Approx(-2.5));

  const Vec2 c{1, 1}, u{2, 0};
  auto p1 = fixed_zonotope(c, {{u, {-1, 1}}});
  const Vec2 v1 = extremal_selection(p1, {1, 0}, 0, {0, 0}, 0);  // <d,u> > 0 -> c+u
  CHECK(v1.x == doctest::Approx(3.0));
  CHECK(v1.y == doctest::Approx(1.0));
}

TEST_CASE("dry friction switching: interval collapses off the surface") {
  auto p = make_dry_friction(0.5, 2.0);
  // Off-surface: singleton -c*sign(x2)*e2.
  Vec2 v = extremal_selection(p, {0, 1}, 0.3, {0.0, 0.8}, 0.1);
  CHECK(v.y == doctest::Approx(-0.5));
  v = extremal_selection(p, {0, 1}, 0.3, {0.0, -0.8}, 0.1);
  CHECK(v.y == doctest::Approx(0.5));
  // On the surface: full interval [-c, c].
  CHECK(support(p, {0, 1}, 0.3, {0.0, 0.0}, 0.1) == doctest::Approx(0.5));
  CHECK(support(p, {0, -1}, 0.3, {0.0, 0.0}, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("combined perturbation is T-periodic in t") {
  const double T = 2.7;
  auto p = combine({make_forcing(1.3, T), make_dry_friction(0.4, T)}, T);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double t = U(rng);
    const Vec2 x{U(rng), U(rng)};
    const Vec2 d{U(rng), U(rng)};
    CHECK(support(p, d, t + T, x, 0.05) ==
          doctest::Approx(support(p, d, t, x, 0.05)).epsilon(1e-12));
  }
}

TEST_CASE("mu bound dominates the set sup-norm at samples") {
  const double T = 2.0;
  auto p = combine({make_forcing(1.0, T), make_dry_friction(0.5, T)}, T);
  const double mu = mu_bound(p, {-2, -2}, {2, 2}, 0.37, 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Vec2 x{U(rng), U(rng)};
    for (const Vec2& d : {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}})
      CHECK(support(p, d, 0.37, x, 0.0) <= mu + 1e-12);
  }
}

TEST_CASE("check_field: harmonic and duffing pass, divergent field fails") {
  auto rep = check_field(make_harmonic(), {-2, -2}, {2, 2});
  CHECK(rep.pass);
  CHECK(rep.max_trace_residual == doctest::Approx(0.0));

  rep = check_field(make_duffing(1.0), {-2, -2}, {2, 2});
  CHECK(rep.pass);
  CHECK(rep.symmetry_ok);

  PlanarField bad;
  bad.eval = [](const Vec2& x) { return x; };  // divergence 2
  rep = check_field(bad, {-1, -1}, {1, 1});
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_trace_residual == doctest::Approx(2.0));
}

TEST_CASE("pendulum catalog entry: Jacobian matches finite differences") {
  auto rep = check_field(make_pendulum(), {-1.5, -1.5}, {1.5, 1.5});
  CHECK(rep.pass);
}
