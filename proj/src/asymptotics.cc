#include "cycleperturb/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "cycleperturb/errors.hpp"
#include "cycleperturb/numerics.hpp"

namespace cycleperturb {

namespace {

// Reduce t to [0,T] keeping exact endpoints (so t=T keeps the [0,T] window).
double reduce_phase(double t, double T) {
  if (t >= 0.0 && t <= T) return t;
  double r = std::fmod(t, T);
  if (r < 0.0) r += T;
  return r;
}

void append_roots(std::vector<double>* out, const std::function<double(double)>& fn, double a,
                  double b, int n = 512) {
  auto roots = scan_roots(fn, a, b, n);
  out->insert(out->end(), roots.begin(), roots.end());
}

std::vector<double> slice_sorted(const std::vector<double>& pts, double a, double b) {
  std::vector<double> out;
  for (double p : pts)
    if (p > a && p < b) out.push_back(p);
  return out;
}

// Kink times of tau -> support(pert, d(tau), tau, x0(tau), 0): switching-sign
// changes along the cycle plus sign changes of <d, u_i> for interval terms.
std::vector<double> support_breakpoints(const Cycle& cycle, const SetValuedPerturbation& pert,
                                        const std::function<Vec2(double)>& d, double a, double b,
                                        int n = 512) {
  std::vector<double> bps;
  for (const auto& gen : pert.generators) {
    if (gen.switching) {
      append_roots(&bps, [&](double tau) { return gen.switching(cycle.eval(tau)); }, a, b, n);
    } else {
      append_roots(&bps, [&](double tau) { return dot(d(tau), gen.direction(tau, cycle.eval(tau))); },
                   a, b, n);
    }
  }
  std::sort(bps.begin(), bps.end());
  return bps;
}

double checked_quad(const std::function<double(double)>& fn, double a, double b, double tol,
                    const std::vector<double>& bps) {
  QuadratureResult r = integrate_adaptive(fn, a, b, tol, bps);
  if (r.error > tol) throw NumericalError("support quadrature did not reach tolerance");
  return r.value;
}

// [min, max] of { integral_a^b <d(tau), h(tau)> dtau : h(tau) in g(tau,x0(tau),0) }.
Interval support_integral(const Cycle& cycle, const SetValuedPerturbation& pert,
                          const std::function<Vec2(double)>& d, double a, double b, double tol,
                          const std::vector<double>& bps) {
  auto hi_fn = [&](double tau) { return support(pert, d(tau), tau, cycle.eval(tau), 0.0); };
  auto lo_fn = [&](double tau) { return support(pert, d(tau) * -1.0, tau, cycle.eval(tau), 0.0); };
  double hi = checked_quad(hi_fn, a, b, 0.5 * tol, bps);
  double lo = -checked_quad(lo_fn, a, b, 0.5 * tol, bps);
  return {lo, hi};
}

Interval mperp_at(const Cycle& cycle, const AdjointBasis& basis, const SetValuedPerturbation& pert,
                  double t, double qtol, const std::vector<double>* precomputed_bps) {
  const double T = cycle.period;
  const double tr = reduce_phase(t, T);
  const double a = tr - T, b = tr;
  auto d = [&](double tau) { return basis.zhat(tau) * -1.0; };
  std::vector<double> bps = precomputed_bps
                                ? slice_sorted(*precomputed_bps, a, b)
                                : support_breakpoints(cycle, pert, d, a, b);
  const double tol = qtol / std::max(1.0, std::abs(basis.gamma));
  // Value set of integral <-zhat, h>, then the gamma factor (swap if negative).
  return support_integral(cycle, pert, d, a, b, tol, bps).scaled(basis.gamma);
}

}  // namespace

Interval mperp(const Cycle& cycle, const AdjointBasis& basis, const SetValuedPerturbation& pert,
               double t, double qtol) {
  return mperp_at(cycle, basis, pert, t, qtol, nullptr);
}

Interval MperpProfile::at(double t) const {
  if (grid.size() < 2) return values.empty() ? Interval{} : values.front();
  double tr = std::fmod(t, period);
  if (tr < 0.0) tr += period;
  const double h = period / static_cast<double>(grid.size() - 1);
  int k = static_cast<int>(std::floor(tr / h));
  k = std::clamp(k, 0, static_cast<int>(grid.size()) - 2);
  const double frac = std::clamp((tr - grid[k]) / h, 0.0, 1.0);
  const Interval& u = values[k];
  const Interval& w = values[k + 1];
  return {u.lo + frac * (w.lo - u.lo), u.hi + frac * (w.hi - u.hi)};
}

MperpProfile build_mperp_profile(const Cycle& cycle, const AdjointBasis& basis,
                                 const SetValuedPerturbation& pert, double sigma, double qtol,
                                 int nodes) {
  const double T = cycle.period;
  MperpProfile prof;
  prof.sigma = sigma;
  prof.qtol = qtol;
  prof.period = T;

  // One breakpoint scan over the union of all node windows [-T, T].
  auto d = [&](double tau) { return basis.zhat(tau) * -1.0; };
  std::vector<double> bps = support_breakpoints(cycle, pert, d, -T, T, 1024);
  prof.switch_times = slice_sorted(bps, 0.0, T);

  prof.grid.resize(nodes + 1);
  prof.values.resize(nodes + 1);
  for (int k = 0; k <= nodes; ++k) {
    prof.grid[k] = T * static_cast<double>(k) / nodes;
    prof.values[k] = mperp_at(cycle, basis, pert, prof.grid[k], qtol, &bps);
  }
  return prof;
}

DenseTrajectory lemma5_solution(const Cycle& cycle, const IntegratorOptions& iopt) {
  const double T = cycle.period;
  const Vec2 y0 = perp(cycle.deriv(0.0));
  return linearized_solve(cycle.field, cycle.traj, y0, -T, 2.0 * T, iopt);
}

double lemma5_residual(const Cycle& cycle, const DenseTrajectory& y, int grid) {
  const double a = y.t_begin(), b = y.t_end();
  double worst = 0.0;
  for (int k = 0; k <= grid; ++k) {
    const double t = a + (b - a) * static_cast<double>(k) / grid;
    const Vec2 yv = to_vec(y.eval(t));
    const Vec2 yd = to_vec(y.deriv(t));
    const Mat2 A = cycle.field.jacobian(cycle.eval(t));
    // w = (y2, -y1); residual of w' = -A^T w.
    const Vec2 wd{yd.y, -yd.x};
    const Vec2 w{yv.y, -yv.x};
    const Vec2 r{wd.x + A.a * w.x + A.c * w.y, wd.y + A.b * w.x + A.d * w.y};
    worst = std::max(worst, norm(r));
  }
  return worst;
}

Interval mperp_symmetric(const Cycle& cycle, const DenseTrajectory& y,
                         const SetValuedPerturbation& pert, double t, double qtol) {
  if (!cycle.field.symmetric_flag) throw NotSymmetric("field does not claim the symmetry");
  // Sampled check over the cycle's bounding box (10% padding).
  Vec2 lo = cycle.eval(0.0), hi = lo;
  for (int k = 0; k < 256; ++k) {
    const Vec2 p = cycle.eval(cycle.period * k / 256.0);
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const Vec2 pad = (hi - lo) * 0.05 + Vec2{1e-3, 1e-3};
  FieldCheckReport rep = check_field(cycle.field, lo - pad, hi + pad);
  if (!rep.trace_ok || !rep.symmetry_ok)
    throw NotSymmetric("sampled symmetry/trace checks failed on the cycle box");

  // t*: zero of xdot0_2 with the largest |xdot0_1|.
  const std::vector<double> cand = t_star_candidates(cycle);
  if (cand.empty()) throw NoTransversalZero("no zero of xdot0_2 along the cycle");
  double ts = cand.front();
  for (double c : cand)
    if (std::abs(cycle.deriv(c).x) > std::abs(cycle.deriv(ts).x)) ts = c;

  const double T = cycle.period;
  const double denom = to_vec(y.eval(T + ts)).x - to_vec(y.eval(ts)).x;
  if (std::abs(denom) < 1e-12) throw DegenerateCycle("shear gap of the linearized solution vanishes");
  const double pref = cycle.deriv(ts).x / denom;

  // Integrand direction w(tau) = (y2, -y1); value set of integral <w, h>.
  auto w = [&](double tau) {
    const Vec2 yv = to_vec(y.eval(tau));
    return Vec2{yv.y, -yv.x};
  };
  const double tr = reduce_phase(t, T);
  const double a = tr - T, b = tr;
  std::vector<double> bps = support_breakpoints(cycle, pert, w, a, b);
  const double tol = qtol / std::max(1.0, std::abs(pref));
  return support_integral(cycle, pert, w, a, b, tol, bps).scaled(pref);
}

double transversal_coefficient(const PeriodicOrbit& orbit, const Cycle& cycle,
                               const AdjointBasis& basis, double t) {
  if (orbit.eps == 0.0) return 0.0;
  const Vec2 dx = orbit.eval(t + orbit.delta) - cycle.eval(t);
  return dot(basis.ztilde(t), dx) / orbit.eps;
}

double inclusion_residual(const PeriodicOrbit& orbit, const Cycle& cycle,
                          const AdjointBasis& basis, const MperpProfile& profile, double t) {
  const double c = transversal_coefficient(orbit, cycle, basis, t);
  return profile.at(t).scaled(profile.sigma).dist(c);
}

DisplacementSegment predict_displacement(const Cycle& cycle, const AdjointBasis& basis,
                                         const MperpProfile& profile, const PeriodicOrbit& orbit,
                                         double t) {
  const Vec2 dx = orbit.eval(t + orbit.delta) - cycle.eval(t);
  const double a_tan = dot(basis.zhat(t), dx);  // tangential part is measured, never modeled
  const Vec2 tang = cycle.deriv(t) * a_tan;
  const Vec2 yv = basis.y(t);
  const Interval I = profile.at(t);
  const double s = orbit.eps * profile.sigma;
  return {yv * (s * I.lo) + tang, yv * (s * I.hi) + tang};
}

double theorem1_ratio(const PeriodicOrbit& orbit, const Cycle& cycle, int grid) {
  const double T = cycle.period;
  const double eps_eff = orbit.eps == 0.0 ? 1.0 : std::abs(orbit.eps);
  double worst = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double t = T * static_cast<double>(k) / grid;
    worst = std::max(worst, norm(orbit.eval(t + orbit.delta) - cycle.eval(t)));
  }
  return worst / eps_eff;
}

Interval melnikov_interval(const Cycle& cycle, const AdjointBasis& basis,
                           const SetValuedPerturbation& pert, double theta, double qtol) {
  const double T = cycle.period;
  // h ranges over g(tau, x0(tau+theta), 0); direction ztilde(tau+theta).
  auto d = [&](double tau) { return basis.ztilde(tau + theta); };
  auto x = [&](double tau) { return cycle.eval(tau + theta); };
  std::vector<double> bps;
  for (const auto& gen : pert.generators) {
    if (gen.switching) {
      append_roots(&bps, [&](double tau) { return gen.switching(x(tau)); }, 0.0, T);
    } else {
      append_roots(&bps, [&](double tau) { return dot(d(tau), gen.direction(tau, x(tau))); }, 0.0,
                   T);
    }
  }
  std::sort(bps.begin(), bps.end());
  auto hi_fn = [&](double tau) { return support(pert, d(tau), tau, x(tau), 0.0); };
  auto lo_fn = [&](double tau) { return support(pert, d(tau) * -1.0, tau, x(tau), 0.0); };
  const double hi = checked_quad(hi_fn, 0.0, T, 0.5 * qtol, bps);
  const double lo = -checked_quad(lo_fn, 0.0, T, 0.5 * qtol, bps);
  return {lo, hi};
}

std::vector<double> melnikov_sign_changes(const Cycle& cycle, const AdjointBasis& basis,
                                          const SetValuedPerturbation& pert, int n_scan,
                                          double qtol) {
  const double T = cycle.period;
  auto mid = [&](double theta) { return melnikov_interval(cycle, basis, pert, theta, qtol).midpoint(); };
  std::vector<double> zeros;
  double prev_t = 0.0, prev_v = mid(0.0);
  const double first_v = prev_v;
  for (int k = 1; k <= n_scan; ++k) {
    const double tk = T * static_cast<double>(k) / n_scan;
    const double vk = k == n_scan ? first_v : mid(tk);  // periodic wrap
    if (prev_v == 0.0) {
      zeros.push_back(prev_t);
    } else if (prev_v * vk < 0.0) {
      zeros.push_back(brent(mid, prev_t, tk, 1e-10));
    }
    prev_t = tk;
    prev_v = vk;
  }
  std::sort(zeros.begin(), zeros.end());
  // fold t=T hits back to 0 and dedupe
  std::vector<double> out;
  for (double z : zeros) {
    double r = std::fmod(z, T);
    if (r < 0.0) r += T;
    if (T - r < 1e-9) r = 0.0;
    if (out.empty() || r - out.back() > 1e-9) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cycleperturb
