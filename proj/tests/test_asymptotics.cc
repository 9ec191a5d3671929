#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>
#include <random>

#include "cycleperturb/asymptotics.hpp"
#include "cycleperturb/cycle.hpp"
#include "cycleperturb/errors.hpp"
#include "cycleperturb/inclusion.hpp"
#include "cycleperturb/model.hpp"
#include "doctest.h"

using namespace cycleperturb;

namespace {

// Reference phase of the perturbed family (midpoint sign change of the
// set-valued Melnikov function for duffing k=1 with forcing 1 + friction 0.5).
constexpr double kTheta0 = 0.8015730812810132;
constexpr double kGamma = -0.9995258495192928;

struct Fix {
  PlanarField field;
  Cycle cyc0, cycR;
  AdjointBasis basis0, basisR;
  SetValuedPerturbation pert;
  double T = 0.0;
};

const Fix& fix() {
  static const Fix f = [] {
    Fix g;
    g.field = make_duffing(1.0);
    g.cyc0 = find_cycle(g.field, {1.0, 0.0});
    g.T = g.cyc0.period;
    g.pert = combine({make_forcing(1.0, g.T), make_dry_friction(0.5, g.T)}, g.T);
    g.basis0 = build_adjoint_basis(g.field, g.cyc0);
    g.cycR = rebase_cycle(g.cyc0, kTheta0);
    g.basisR = build_adjoint_basis(g.field, g.cycR);
    return g;
  }();
  return f;
}

// Interval-coefficient perturbation (nondegenerate value sets off any surface).
SetValuedPerturbation box_pert(double T) {
  SetValuedPerturbation p;
  p.period = T;
  p.name = "box";
  p.center = [T](double t, const Vec2&, double) {
    return Vec2{0.3 * std::cos(2.0 * M_PI * t / T), 0.0};
  };
  Generator g1;
  g1.direction = [](double, const Vec2&) { return Vec2{0.0, 1.0}; };
  g1.coeff = [](double, const Vec2&, double) { return CoefficientInterval{-0.3, 0.7}; };
  p.generators.push_back(std::move(g1));
  Generator g2;
  g2.direction = [](double, const Vec2&) { return Vec2{1.0, 0.5}; };
  g2.coeff = [](double, const Vec2&, double) { return CoefficientInterval{-0.2, 0.2}; };
  p.generators.push_back(std::move(g2));
  return p;
}

// --- independent quadrature helpers (deliberately not the library's) --------

double simpson(const std::function<double(double)>& fn, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = fn(a) + fn(b);
  for (int i = 1; i < n; ++i) s += fn(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

std::vector<double> bisect_zeros(const std::function<double(double)>& fn, double a, double b,
                                 int samples) {
  std::vector<double> zs;
  double tp = a, vp = fn(a);
  for (int i = 1; i <= samples; ++i) {
    const double t = a + (b - a) * i / samples, v = fn(t);
    if (vp == 0.0) zs.push_back(tp);
    if (vp * v < 0.0) {
      double lo = tp, hi = t, vl = vp;
      for (int k = 0; k < 80; ++k) {
        const double m = 0.5 * (lo + hi), vm = fn(m);
        if (vl * vm <= 0.0) hi = m;
        else lo = m, vl = vm;
      }
      zs.push_back(0.5 * (lo + hi));
    }
    tp = t, vp = v;
  }
  return zs;
}

// Oracle for the displacement interval: an explicit bang-bang selection whose
// structure (switching sign, argmax coefficient) is frozen per smooth piece at
// the piece midpoint, integrated by Simpson, then the gamma product. Assumes
// coefficient intervals constant along a piece (true for the perts used here).
Interval mperp_oracle(const Cycle& cyc, const AdjointBasis& basis,
                      const SetValuedPerturbation& pert, double t) {
  const double T = cyc.period;
  const double a = t - T, b = t;
  std::vector<double> edges{a, b};
  for (const auto& gen : pert.generators) {
    std::function<double(double)> kink;
    if (gen.switching)
      kink = [&](double tau) { return gen.switching(cyc.eval(tau)); };
    else
      kink = [&](double tau) { return dot(basis.zhat(tau), gen.direction(tau, cyc.eval(tau))); };
    auto zs = bisect_zeros(kink, a, b, 1024);
    edges.insert(edges.end(), zs.begin(), zs.end());
  }
  std::sort(edges.begin(), edges.end());
  auto leg = [&](double sgn) {  // +1: maximize <-zhat, h>; -1: minimize
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      const double ea = edges[i], eb = edges[i + 1];
      const double tm = 0.5 * (ea + eb);
      const Vec2 dm = basis.zhat(tm) * -sgn;
      std::vector<double> lam;
      for (const auto& gen : pert.generators) {
        if (gen.switching) {
          lam.push_back(gen.switching(cyc.eval(tm)) > 0.0 ? -1.0 : 1.0);
        } else {
          const CoefficientInterval iv = gen.coeff(tm, cyc.eval(tm), 0.0);
          lam.push_back(dot(dm, gen.direction(tm, cyc.eval(tm))) >= 0.0 ? iv.hi : iv.lo);
        }
      }
      total += simpson(
          [&](double tau) {
            const Vec2 x = cyc.eval(tau);
            Vec2 h = pert.center(tau, x, 0.0);
            for (std::size_t j = 0; j < lam.size(); ++j)
              h += pert.generators[j].direction(tau, x) * lam[j];
            return dot(basis.zhat(tau) * -1.0, h);
          },
          ea, eb, 512);
    }
    return total;
  };
  const double p1 = basis.gamma * leg(1.0), p2 = basis.gamma * leg(-1.0);
  return {std::min(p1, p2), std::max(p1, p2)};
}

struct OrbitsFix {
  MperpProfile prof;
  SectionSurface sec;
  PeriodicOrbit o02, o01;
};

const OrbitsFix& orbits() {
  static const OrbitsFix o = [] {
    const Fix& f = fix();
    OrbitsFix g;
    g.prof = build_mperp_profile(f.cycR, f.basisR, f.pert, -1.0, 1e-8, 128);
    g.sec = build_section(f.cycR);
    g.o02 = find_periodic(f.field, f.pert, 0.02, f.cycR.base_point, f.T);
    g.o01 = find_periodic(f.field, f.pert, 0.01, f.cycR.base_point, f.T);
    attach_section(g.o02, g.sec);
    attach_section(g.o01, g.sec);
    return g;
  }();
  return o;
}

double sup_inclusion_residual(const PeriodicOrbit& orbit) {
  const Fix& f = fix();
  const OrbitsFix& o = orbits();
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < o.prof.grid.size(); ++k)
    worst = std::max(worst, inclusion_residual(orbit, f.cycR, f.basisR, o.prof, o.prof.grid[k]));
  return worst;
}

}  // namespace

TEST_CASE("interval arithmetic") {
  const Interval I{-1.0, 2.0};
  CHECK(I.width() == doctest::Approx(3.0));
  CHECK(I.midpoint() == doctest::Approx(0.5));
  CHECK(I.contains(0.0));
  CHECK(I.contains(2.0));
  CHECK(!I.contains(2.1));
  CHECK(I.contains(2.1, 0.2));
  CHECK(I.dist(0.5) == 0.0);
  CHECK(I.dist(-1.5) == doctest::Approx(0.5));
  CHECK(I.dist(3.0) == doctest::Approx(1.0));
  const Interval J = I.scaled(-2.0);
  CHECK(J.lo == doctest::Approx(-4.0));
  CHECK(J.hi == doctest::Approx(2.0));
  CHECK(I.scaled(0.5).hi == doctest::Approx(1.0));
}

TEST_CASE("singleton perturbation gives a point interval matching direct quadrature") {
  const Fix& f = fix();
  const SetValuedPerturbation forcing = make_forcing(1.0, f.T);
  for (double t : {0.0, 0.37 * f.T, f.T}) {
    const Interval I = mperp(f.cyc0, f.basis0, forcing, t);
    CHECK(I.width() <= 2e-8);
    // smooth integrand: plain Simpson suffices for the oracle
    const double raw = simpson(
        [&](double tau) {
          const Vec2 h{std::cos(2.0 * M_PI * tau / f.T), 0.0};
          return dot(f.basis0.zhat(tau) * -1.0, h);
        },
        t - f.T, t, 4096);
    CHECK(std::abs(I.midpoint() - f.basis0.gamma * raw) <= 1e-7);
  }
}

TEST_CASE("zero perturbation gives the zero interval") {
  const Fix& f = fix();
  SetValuedPerturbation zero;
  zero.period = f.T;
  zero.center = [](double, const Vec2&, double) { return Vec2{0.0, 0.0}; };
  const Interval I = mperp(f.cyc0, f.basis0, zero, 1.0);
  CHECK(std::abs(I.lo) <= 1e-12);
  CHECK(std::abs(I.hi) <= 1e-12);
}

TEST_CASE("bang-bang oracle reproduces both endpoints (switching perturbation)") {
  const Fix& f = fix();
  for (int k = 0; k < 16; ++k) {
    const double t = f.T * k / 16.0;
    const Interval I = mperp(f.cycR, f.basisR, f.pert, t);
    const Interval O = mperp_oracle(f.cycR, f.basisR, f.pert, t);
    CHECK(std::abs(I.lo - O.lo) <= 5e-8);
    CHECK(std::abs(I.hi - O.hi) <= 5e-8);
    // forcing is a singleton and friction collapses off the surface
    CHECK(I.width() <= 5e-8);
  }
}

TEST_CASE("bang-bang oracle reproduces both endpoints (interval perturbation)") {
  const Fix& f = fix();
  const SetValuedPerturbation pert = box_pert(f.T);
  for (double t : {0.0, 0.31 * f.T, 0.77 * f.T}) {
    const Interval I = mperp(f.cyc0, f.basis0, pert, t);
    const Interval O = mperp_oracle(f.cyc0, f.basis0, pert, t);
    CHECK(std::abs(I.lo - O.lo) <= 5e-8);
    CHECK(std::abs(I.hi - O.hi) <= 5e-8);
    CHECK(I.width() > 0.1);  // genuinely set-valued
  }
}

TEST_CASE("Monte-Carlo admissible selections stay inside the interval") {
  const Fix& f = fix();
  const SetValuedPerturbation pert = box_pert(f.T);
  const double t = 0.6;
  const Interval I = mperp(f.cyc0, f.basis0, pert, t);
  const double a = t - f.T;
  const int panels = 256;
  std::mt19937 rng(20250817);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double seen_lo = 1e300, seen_hi = -1e300;
  for (int run = 0; run < 300; ++run) {
    double raw = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double pa = a + f.T * p / panels, pb = a + f.T * (p + 1) / panels;
      std::vector<double> lam;
      for (const auto& gen : pert.generators) {
        const CoefficientInterval iv = gen.coeff(0.5 * (pa + pb), f.cyc0.eval(0.5 * (pa + pb)), 0.0);
        lam.push_back(iv.lo + (iv.hi - iv.lo) * unif(rng));
      }
      raw += simpson(
          [&](double tau) {
            const Vec2 x = f.cyc0.eval(tau);
            Vec2 h = pert.center(tau, x, 0.0);
            for (std::size_t i = 0; i < lam.size(); ++i)
              h += pert.generators[i].direction(tau, x) * lam[i];
            return dot(f.basis0.zhat(tau) * -1.0, h);
          },
          pa, pb, 8);
    }
    const double val = f.basis0.gamma * raw;
    CHECK(val >= I.lo - 1e-5);
    CHECK(val <= I.hi + 1e-5);
    seen_lo = std::min(seen_lo, val);
    seen_hi = std::max(seen_hi, val);
  }
  // random draws fill a nondegenerate inner range
  CHECK(seen_hi - seen_lo > 0.01 * I.width());
}

TEST_CASE("profile interpolation, wrap, and switch times") {
  const Fix& f = fix();
  const MperpProfile prof = build_mperp_profile(f.cycR, f.basisR, f.pert, -1.0, 1e-8, 32);
  REQUIRE(prof.grid.size() == 33);
  REQUIRE(prof.values.size() == 33);
  CHECK(prof.period == doctest::Approx(f.cycR.period).epsilon(1e-14));
  for (int k = 0; k < 32; k += 8) {
    CHECK(prof.at(prof.grid[k]).lo == doctest::Approx(prof.values[k].lo).epsilon(1e-12));
    CHECK(prof.at(prof.grid[k]).hi == doctest::Approx(prof.values[k].hi).epsilon(1e-12));
  }
  // t=T wraps to the t=0 node; the two node values agree only up to the
  // window-shift remainder, which is tiny at the reference phase.
  CHECK(prof.at(prof.grid[32]).lo == doctest::Approx(prof.values[0].lo).epsilon(1e-12));
  CHECK(std::abs(prof.values[32].lo - prof.values[0].lo) <= 1e-5);
  for (double t : {0.4, 2.9}) {
    const Interval u = prof.at(t), w = prof.at(t + prof.period), v = prof.at(t - prof.period);
    CHECK(u.lo == doctest::Approx(w.lo).epsilon(1e-12));
    CHECK(u.hi == doctest::Approx(w.hi).epsilon(1e-12));
    CHECK(u.lo == doctest::Approx(v.lo).epsilon(1e-12));
  }
  const double mid = 0.5 * (prof.grid[4] + prof.grid[5]);
  CHECK(prof.at(mid).lo == doctest::Approx(0.5 * (prof.values[4].lo + prof.values[5].lo)));
  // friction switch times along the cycle = zeros of x2
  const auto zs = bisect_zeros([&](double tau) { return f.cycR.eval(tau).y; }, 0.0, f.T, 2048);
  for (double z : zs) {
    double best = 1e300;
    for (double s : prof.switch_times) best = std::min(best, std::abs(s - z));
    CHECK(best <= 1e-6);
  }
}

TEST_CASE("linearized perp solution satisfies the adjoint identity") {
  const Fix& f = fix();
  const DenseTrajectory y = lemma5_solution(f.cycR);
  CHECK(y.t_begin() == doctest::Approx(-f.cycR.period).epsilon(1e-12));
  CHECK(y.t_end() == doctest::Approx(2.0 * f.cycR.period).epsilon(1e-12));
  const Vec2 y0 = to_vec(y.eval(0.0));
  const Vec2 f0 = f.cycR.deriv(0.0);
  CHECK(norm(y0 - perp(f0)) <= 1e-12);
  // w = (y2,-y1) starts at f0 and solves the adjoint equation
  CHECK(norm(Vec2{y0.y, -y0.x} - f0) <= 1e-12);
  CHECK(lemma5_residual(f.cycR, y) <= 1e-7);
}

TEST_CASE("symmetric variant agrees with the generic formula") {
  const Fix& f = fix();
  const DenseTrajectory y = lemma5_solution(f.cycR, {1e-12, 1e-12, 0.0, 0.0});
  for (int k = 0; k < 6; ++k) {
    const double t = f.T * k / 6.0;
    const Interval A = mperp(f.cycR, f.basisR, f.pert, t);
    const Interval B = mperp_symmetric(f.cycR, y, f.pert, t);
    CHECK(std::abs(A.lo - B.lo) <= 2e-8);
    CHECK(std::abs(A.hi - B.hi) <= 2e-8);
  }
  const SetValuedPerturbation box = box_pert(f.T);
  const DenseTrajectory y0 = lemma5_solution(f.cyc0, {1e-12, 1e-12, 0.0, 0.0});
  for (double t : {0.2 * f.T, 0.9 * f.T}) {
    const Interval A = mperp(f.cyc0, f.basis0, box, t);
    const Interval B = mperp_symmetric(f.cyc0, y0, box, t);
    CHECK(std::abs(A.lo - B.lo) <= 2e-8);
    CHECK(std::abs(A.hi - B.hi) <= 2e-8);
  }
}

TEST_CASE("symmetric variant rejects non-symmetric fields") {
  const Fix& f = fix();
  const DenseTrajectory y = lemma5_solution(f.cycR);
  Cycle unflagged = f.cycR;
  unflagged.field.symmetric_flag = false;
  CHECK_THROWS_AS(mperp_symmetric(unflagged, y, f.pert, 0.0), NotSymmetric);
  Cycle broken = f.cycR;
  broken.field.eval = [](const Vec2& x) { return Vec2{x.y + 0.01 * x.x, -x.x - x.x * x.x * x.x}; };
  CHECK_THROWS_AS(mperp_symmetric(broken, y, f.pert, 0.0), NotSymmetric);
}

TEST_CASE("gauge rescaling leaves products and predictions invariant") {
  const Fix& f = fix();
  const OrbitsFix& o = orbits();
  const double c = -2.3;
  const AdjointBasis scaled = f.basisR.rescaled(c);
  const MperpProfile prof2 = build_mperp_profile(f.cycR, scaled, f.pert, -1.0, 1e-8, 128);
  CHECK(scaled.gamma == doctest::Approx(c * f.basisR.gamma).epsilon(1e-12));
  for (double t : {0.0, 1.3, 3.7}) {
    const double c1 = transversal_coefficient(o.o02, f.cycR, f.basisR, t);
    const double c2 = transversal_coefficient(o.o02, f.cycR, scaled, t);
    CHECK(c2 == doctest::Approx(c * c1).epsilon(1e-9));
    const DisplacementSegment s1 = predict_displacement(f.cycR, f.basisR, o.prof, o.o02, t);
    const DisplacementSegment s2 = predict_displacement(f.cycR, scaled, prof2, o.o02, t);
    CHECK(norm(s1.lo_end - s2.lo_end) <= 1e-9);
    CHECK(norm(s1.hi_end - s2.hi_end) <= 1e-9);
    const double r1 = inclusion_residual(o.o02, f.cycR, f.basisR, o.prof, t);
    const double r2 = inclusion_residual(o.o02, f.cycR, scaled, prof2, t);
    CHECK(r2 == doctest::Approx(std::abs(c) * r1).epsilon(1e-9));
  }
}

TEST_CASE("t* choice does not move gamma or the interval") {
  const Fix& f = fix();
  const auto cand = t_star_candidates(f.cycR);
  REQUIRE(cand.size() >= 2);
  AdjointBasisOptions oa, ob;
  oa.t_star_index = 0;
  ob.t_star_index = 1;
  const AdjointBasis A = build_adjoint_basis(f.field, f.cycR, oa);
  const AdjointBasis B = build_adjoint_basis(f.field, f.cycR, ob);
  CHECK(std::abs(A.gamma - B.gamma) <= 1e-6 * std::abs(A.gamma));
  for (double t : {0.0, 2.1}) {
    const Interval IA = mperp(f.cycR, A, f.pert, t);
    const Interval IB = mperp(f.cycR, B, f.pert, t);
    CHECK(std::abs(IA.lo - IB.lo) <= 3e-8);
    CHECK(std::abs(IA.hi - IB.hi) <= 3e-8);
  }
  CHECK(std::abs(f.basisR.gamma - kGamma) <= 1e-8);
}

TEST_CASE("melnikov interval: classical value, periodicity, zero case") {
  const Fix& f = fix();
  const SetValuedPerturbation forcing = make_forcing(1.0, f.T);
  for (double th : {0.0, 1.3}) {
    const Interval M = melnikov_interval(f.cyc0, f.basis0, forcing, th);
    CHECK(M.width() <= 2e-8);
    const double oracle = simpson(
        [&](double tau) {
          const Vec2 zt = perp(f.field.eval(f.cyc0.eval(tau + th)));
          return zt.x * std::cos(2.0 * M_PI * tau / f.T);
        },
        0.0, f.T, 4096);
    CHECK(std::abs(M.midpoint() - oracle) <= 1e-7);
  }
  const Interval M1 = melnikov_interval(f.cyc0, f.basis0, f.pert, 0.4);
  const Interval M2 = melnikov_interval(f.cyc0, f.basis0, f.pert, 0.4 + f.T);
  CHECK(std::abs(M1.lo - M2.lo) <= 2e-8);
  CHECK(std::abs(M1.hi - M2.hi) <= 2e-8);
  SetValuedPerturbation zero;
  zero.period = f.T;
  zero.center = [](double, const Vec2&, double) { return Vec2{0.0, 0.0}; };
  const Interval M0 = melnikov_interval(f.cyc0, f.basis0, zero, 0.7);
  CHECK(std::abs(M0.lo) <= 1e-12);
  CHECK(std::abs(M0.hi) <= 1e-12);
}

TEST_CASE("melnikov sign changes seed the reference phase") {
  const Fix& f = fix();
  const auto zs = melnikov_sign_changes(f.cyc0, f.basis0, f.pert);
  CHECK(zs.size() == 2);
  double best = 1e300;
  for (double z : zs) best = std::min(best, std::abs(z - kTheta0));
  CHECK(best <= 5e-6);
}

TEST_CASE("perturbed orbits: section data, sup ratio, residual halving") {
  const Fix& f = fix();
  const OrbitsFix& o = orbits();
  CHECK(o.o02.shooting_residual <= 1e-7);
  CHECK(o.o01.shooting_residual <= 1e-7);
  REQUIRE(o.o02.section_solved);
  REQUIRE(o.o01.section_solved);
  CHECK(o.o02.delta / 0.02 >= 1.4);
  CHECK(o.o02.delta / 0.02 <= 2.2);
  CHECK(std::abs(o.o02.v) / 0.02 >= 1.3);
  CHECK(std::abs(o.o02.v) / 0.02 <= 2.2);
  CHECK(std::abs(o.o01.delta / o.o02.delta - 0.5) <= 0.15);

  const double r2k = theorem1_ratio(o.o02, f.cycR);
  const double r4k = theorem1_ratio(o.o02, f.cycR, 4096);
  CHECK(r2k >= 3.0);
  CHECK(r2k <= 6.0);
  CHECK(std::abs(r2k - r4k) <= 0.01 * r2k);
  CHECK(theorem1_ratio(o.o01, f.cycR) <= 6.0);

  const double rho02 = sup_inclusion_residual(o.o02);
  const double rho01 = sup_inclusion_residual(o.o01);
  CHECK(rho02 >= 0.08);
  CHECK(rho02 <= 0.35);
  CHECK(rho02 / rho01 >= 1.5);
  CHECK(rho02 / rho01 <= 2.7);
}

TEST_CASE("reconstruction: transversal + tangential parts recover the displacement") {
  const Fix& f = fix();
  const OrbitsFix& o = orbits();
  for (int k = 0; k < 8; ++k) {
    const double t = f.T * k / 8.0;
    const Vec2 dx = o.o02.eval(t + o.o02.delta) - f.cycR.eval(t);
    const double c = transversal_coefficient(o.o02, f.cycR, f.basisR, t);
    const double a_tan = dot(f.basisR.zhat(t), dx);
    const Vec2 rebuilt = f.basisR.y(t) * (0.02 * c) + f.cycR.deriv(t) * a_tan;
    CHECK(norm(rebuilt - dx) <= 1e-9 * std::max(1.0, norm(dx)));
  }
  // prediction endpoints sit exactly eps*rho*|y| away from the measured point
  const double t = 1.1;
  const Vec2 dx = o.o02.eval(t + o.o02.delta) - f.cycR.eval(t);
  const DisplacementSegment seg = predict_displacement(f.cycR, f.basisR, o.prof, o.o02, t);
  const double rho = inclusion_residual(o.o02, f.cycR, f.basisR, o.prof, t);
  CHECK(norm(seg.lo_end - seg.hi_end) <= 1e-6);  // width-0 interval for this perturbation
  CHECK(std::abs(norm(dx - seg.lo_end) - 0.02 * rho * norm(f.basisR.y(t))) <= 1e-8);
}

TEST_CASE("transversal coefficient is zero for the unperturbed orbit") {
  const Fix& f = fix();
  ShootingOptions opt;
  opt.iopt = {1e-11, 1e-11, 0.0, 0.0};
  const PeriodicOrbit o0 =
      find_periodic(f.field, f.pert, 0.0, f.cycR.base_point, f.T, {}, opt);
  CHECK(transversal_coefficient(o0, f.cycR, f.basisR, 1.0) == 0.0);
  CHECK(theorem1_ratio(o0, f.cycR) <= 1e-6);
}
