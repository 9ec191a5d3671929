// Event-driven selection integration (crossing/sliding state machine), periodic
// orbits by shooting on the time-T map, and the two-parameter section solve.
#include "cycleperturb/inclusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "cycleperturb/errors.hpp"
#include "cycleperturb/numerics.hpp"

namespace cycleperturb {

SelectionPolicy SelectionPolicy::fixed(std::vector<std::function<double(double)>> profiles) {
  SelectionPolicy p;
  p.kind = Fixed;
  p.profiles = std::move(profiles);
  return p;
}

SelectionPolicy SelectionPolicy::extremal(const Vec2& d) {
  SelectionPolicy p;
  p.kind = Extremal;
  p.extremal_direction = d;
  return p;
}

namespace {

constexpr double kEventXtol = 1e-10;    // event-time location accuracy
constexpr double kEventMerge = 1e-12;   // events closer than this are merged
constexpr double kSurfaceTol = 1e-10;   // |s| below this counts as "on the surface"
constexpr int kChatteringLimit = 100000;
constexpr int kScanSub = 16;            // event sub-samples per accepted step

Vec2 switching_gradient(const std::function<double(const Vec2&)>& s, const Vec2& x) {
  const double h = 1e-6 * (1.0 + norm(x));
  return {(s({x.x + h, x.y}) - s({x.x - h, x.y})) / (2.0 * h),
          (s({x.x, x.y + h}) - s({x.x, x.y - h})) / (2.0 * h)};
}

// Selected right-hand side f + eps*(center + sum lambda_i u_i) with a mode per
// switching generator: on a branch (lambda = -sign s) or sliding (Filippov
// convex coefficient keeping the flow tangent to {s=0}).
class SelectionDriver {
 public:
  SelectionDriver(const PlanarField& field, const SetValuedPerturbation& pert, double eps,
                  const SelectionPolicy& policy, double dir)
      : field_(field), pert_(pert), eps_(eps), policy_(policy), dir_(dir),
        branch_(pert.generators.size(), 1) {}

  int sliding() const { return sliding_; }
  int branch(int i) const { return branch_[i]; }

  RhsN<2> rhs_fn() {
    return [this](double t, const StateN<2>& s, StateN<2>& ds) {
      const Vec2 v = rhs(t, {s[0], s[1]});
      ds[0] = v.x;
      ds[1] = v.y;
    };
  }

  Vec2 rhs(double t, const Vec2& x) const {
    Vec2 v = field_.eval(x);
    if (eps_ == 0.0) return v;
    Vec2 p = pert_.center ? pert_.center(t, x, eps_) : Vec2{0.0, 0.0};
    for (int i = 0; i < (int)pert_.generators.size(); ++i)
      p += pert_.generators[i].direction(t, x) * coefficient(i, t, x);
    return v + p * eps_;
  }

  // lambda_i at the current modes; sliding coefficient clamped to [-1,1].
  double coefficient(int i, double t, const Vec2& x) const {
    const Generator& g = pert_.generators[i];
    if (g.switching) {
      if (sliding_ == i) return std::clamp(sliding_raw(t, x), -1.0, 1.0);
      return -static_cast<double>(branch_[i]);  // -sign(s) on the current side
    }
    const CoefficientInterval iv = g.interval(t, x, eps_);
    switch (policy_.kind) {
      case SelectionPolicy::Fixed: {
        const double lam = (i < (int)policy_.profiles.size() && policy_.profiles[i])
                               ? policy_.profiles[i](t)
                               : 0.0;
        return std::clamp(lam, iv.lo, iv.hi);
      }
      case SelectionPolicy::Extremal: {
        const double du = dot(policy_.extremal_direction, g.direction(t, x));
        return du >= 0.0 ? iv.hi : iv.lo;
      }
      case SelectionPolicy::Filippov:
      default:
        return 0.5 * (iv.lo + iv.hi);
    }
  }

  // Full right-hand side with generator k removed.
  Vec2 rest_without(int k, double t, const Vec2& x) const {
    Vec2 p = pert_.center ? pert_.center(t, x, eps_) : Vec2{0.0, 0.0};
    for (int i = 0; i < (int)pert_.generators.size(); ++i)
      if (i != k) p += pert_.generators[i].direction(t, x) * coefficient(i, t, x);
    return field_.eval(x) + p * eps_;
  }

  // Unclamped Filippov coefficient for the sliding generator: <n, xdot> = 0.
  double sliding_raw(double t, const Vec2& x) const {
    const Generator& g = pert_.generators[sliding_];
    const Vec2 n = switching_gradient(g.switching, x);
    const Vec2 u = g.direction(t, x);
    const double denom = eps_ * dot(n, u);
    if (std::abs(denom) < 1e-300) return 2.0;  // degenerate: force an exit event
    return -dot(n, rest_without(sliding_, t, x)) / denom;
  }

  // Normal velocity of s_i along the integration direction if generator i were
  // on branch b (other generators keep their current modes).
  double sigma_hat(int i, int b, double t, const Vec2& x) const {
    const Generator& g = pert_.generators[i];
    const Vec2 n = switching_gradient(g.switching, x);
    const Vec2 v = rest_without(i, t, x) + g.direction(t, x) * (eps_ * -static_cast<double>(b));
    return dir_ * dot(n, v);
  }

  void set_branch(int i, int b) { branch_[i] = b; }
  void start_sliding(int i) {
    sliding_ = i;
    branch_[i] = 0;
  }
  void stop_sliding(int i, int exit_branch) {
    sliding_ = -1;
    branch_[i] = exit_branch;
  }

  // Newton-project x onto {s_i = 0}.
  Vec2 project(int i, Vec2 x) const {
    const auto& s = pert_.generators[i].switching;
    for (int it = 0; it < 3; ++it) {
      const double si = s(x);
      const Vec2 n = switching_gradient(s, x);
      const double n2 = norm_sq(n);
      if (n2 < 1e-300) break;
      x -= n * (si / n2);
    }
    return x;
  }

  // Decide the modes at the initial point; throws on genuinely ambiguous or
  // policy-incompatible surface starts.
  void init_modes(double t, const Vec2& x) {
    // First pass: off-surface signs (surface points get a provisional +1).
    std::vector<int> on_surface;
    for (int i = 0; i < (int)pert_.generators.size(); ++i) {
      const Generator& g = pert_.generators[i];
      if (!g.switching) continue;
      const double s = g.switching(x);
      if (std::abs(s) > kSurfaceTol) {
        branch_[i] = s > 0.0 ? 1 : -1;
      } else {
        branch_[i] = 1;
        on_surface.push_back(i);
      }
    }
    for (int i : on_surface) {
      const double sp = sigma_hat(i, +1, t, x);
      const double sm = sigma_hat(i, -1, t, x);
      if (sp < 0.0 && sm > 0.0) {  // attracting along the integration direction
        require_filippov("start on an attracting switching surface");
        if (sliding_ != -1)
          throw NumericalError("simultaneous sliding on two switching surfaces is unsupported");
        start_sliding(i);
      } else if (sp > 0.0 && sm < 0.0) {
        throw NumericalError(
            "start on a switching surface both branches leave: continuation is not unique");
      } else if (sp > 0.0) {
        branch_[i] = 1;
      } else if (sm < 0.0) {
        branch_[i] = -1;
      } else {
        branch_[i] = 1;  // degenerate tangency: keep the provisional side
      }
    }
  }

  void require_filippov(const char* what) const {
    if (policy_.kind != SelectionPolicy::Filippov)
      throw NumericalError(std::string(what) + " under a non-filippov selection policy");
  }

  const PlanarField& field_;
  const SetValuedPerturbation& pert_;
  double eps_;
  const SelectionPolicy& policy_;
  double dir_;
  std::vector<int> branch_;
  int sliding_ = -1;
};

struct EventHit {
  double t = 0.0;
  int generator = -1;
  bool exit = false;  // sliding-exit watcher (else branch-crossing watcher)
};

}  // namespace

SelectionTrajectory integrate_selection(const PlanarField& field, const SetValuedPerturbation& pert,
                                        double eps, const Vec2& x0, double t0, double t1,
                                        const SelectionPolicy& policy,
                                        const IntegratorOptions& opt) {
  if (eps == 0.0) return {integrate(field, x0, t0, t1, opt), {}};

  SelectionDriver driver(field, pert, eps, policy, t1 >= t0 ? 1.0 : -1.0);
  if (!pert.has_switching() || t0 == t1)
    return {integrate_ode<2>(driver.rhs_fn(), to_state(x0), t0, t1, opt), {}};

  const double dir = t1 > t0 ? 1.0 : -1.0;
  Vec2 xstart = x0;
  driver.init_modes(t0, xstart);
  if (driver.sliding() != -1) xstart = driver.project(driver.sliding(), xstart);

  IntegratorOptions eff = opt;
  const double cap = (pert.period > 0.0 ? pert.period : std::abs(t1 - t0)) / 16.0;
  eff.max_step = opt.max_step > 0.0 ? std::min(opt.max_step, cap) : cap;

  StepperDP5<2> stepper(driver.rhs_fn(), to_state(xstart), t0, dir, eff);
  std::vector<DenseSegment<2>> segs;
  std::vector<SwitchEvent> events;
  int applied = 0;
  double last_event_t = std::numeric_limits<double>::quiet_NaN();

  DenseSegment<2> seg;
  while (stepper.step(t1, &seg)) {
    const double a = dir > 0.0 ? seg.tmin() : seg.tmax();  // step start
    const double b = dir > 0.0 ? seg.tmax() : seg.tmin();  // step end

    // Watch q(t): crossing watchers m*s_i (positive on the current side) and,
    // while sliding, the exit watcher 1 - |lambda_raw|. First dip through zero
    // along the integration direction wins.
    EventHit hit;
    bool have_hit = false;
    auto consider = [&](const std::function<double(double)>& q, int gen, bool exit) {
      double prev_t = a, prev_q = q(a);
      for (int j = 1; j <= kScanSub; ++j) {
        const double t = a + (b - a) * j / kScanSub;
        const double qj = q(t);
        if (prev_q > 0.0 && qj <= 0.0) {
          const double lo = std::min(prev_t, t), hi = std::max(prev_t, t);
          const double root = qj == 0.0 ? t : brent(q, lo, hi, kEventXtol);
          if (!have_hit || (dir > 0.0 ? root < hit.t : root > hit.t)) {
            hit = {root, gen, exit};
            have_hit = true;
          }
          return;
        }
        prev_t = t;
        prev_q = qj;
      }
    };
    for (int i = 0; i < (int)pert.generators.size(); ++i) {
      const Generator& g = pert.generators[i];
      if (!g.switching) continue;
      if (driver.sliding() == i) {
        consider([&](double t) { return 1.0 - std::abs(driver.sliding_raw(t, to_vec(seg.eval(t)))); },
                 i, true);
      } else {
        const double m = driver.branch(i);
        consider([&](double t) { return m * g.switching(to_vec(seg.eval(t))); }, i, false);
      }
    }

    if (!have_hit) {
      segs.push_back(seg);
      continue;
    }

    // Truncate the accepted step at the event and restart from there.
    const double te = hit.t;
    if (dir > 0.0)
      seg.wb = te;
    else
      seg.wa = te;
    if (seg.wb - seg.wa > 0.0) segs.push_back(seg);
    Vec2 xe = to_vec(seg.eval(te));

    const bool merged = !std::isnan(last_event_t) && std::abs(te - last_event_t) < kEventMerge;
    SwitchEvent ev{te, hit.generator, SwitchEvent::Crossing};
    bool record = true;
    if (hit.exit) {
      const double raw = driver.sliding_raw(te, xe);
      driver.stop_sliding(hit.generator, raw <= 0.0 ? 1 : -1);
      ev.kind = SwitchEvent::SlideEnd;
    } else {
      const int m = driver.branch(hit.generator);
      const double sp = driver.sigma_hat(hit.generator, +1, te, xe);
      const double sm = driver.sigma_hat(hit.generator, -1, te, xe);
      if (sp < 0.0 && sm > 0.0) {
        driver.require_filippov("crossing into an attracting switching surface");
        if (driver.sliding() != -1)
          throw NumericalError("simultaneous sliding on two switching surfaces is unsupported");
        driver.start_sliding(hit.generator);
        xe = driver.project(hit.generator, xe);
        ev.kind = SwitchEvent::SlideStart;
      } else if (m == 1 ? sm < 0.0 : sp > 0.0) {
        driver.set_branch(hit.generator, -m);
        ev.kind = SwitchEvent::Crossing;
      } else {
        record = false;  // grazing touch: stay on the current side
      }
    }
    if (record && !merged) events.push_back(ev);
    last_event_t = te;
    if (++applied > kChatteringLimit)
      throw ChatteringLimit("more than " + std::to_string(kChatteringLimit) +
                            " switching events in one integration");
    stepper.reset(te, to_state(xe));
  }

  return {DenseTrajectoryN<2>(std::move(segs), opt.rtol), std::move(events)};
}

namespace {

// Derivative-free fallback: Nelder-Mead on phi(xi) = |P(xi)-xi|^2.
Vec2 nelder_mead(const std::function<double(const Vec2&)>& phi, Vec2 x0, double scale,
                 int budget) {
  struct V {
    Vec2 x;
    double f;
  };
  std::array<V, 3> s = {V{x0, phi(x0)},
                        V{x0 + Vec2{scale, 0.0}, phi(x0 + Vec2{scale, 0.0})},
                        V{x0 + Vec2{0.0, scale}, phi(x0 + Vec2{0.0, scale})}};
  auto order = [&] { std::sort(s.begin(), s.end(), [](const V& a, const V& b) { return a.f < b.f; }); };
  order();
  for (int it = 0; it < budget; ++it) {
    if (s[2].f - s[0].f < 1e-30) break;
    const Vec2 c = (s[0].x + s[1].x) * 0.5;
    const Vec2 xr = c + (c - s[2].x);
    const double fr = phi(xr);
    if (fr < s[0].f) {
      const Vec2 xe = c + (c - s[2].x) * 2.0;
      const double fe = phi(xe);
      s[2] = fe < fr ? V{xe, fe} : V{xr, fr};
    } else if (fr < s[1].f) {
      s[2] = {xr, fr};
    } else {
      const Vec2 xc = c + (s[2].x - c) * 0.5;
      const double fc = phi(xc);
      if (fc < s[2].f) {
        s[2] = {xc, fc};
      } else {  // shrink toward the best vertex
        for (int k = 1; k < 3; ++k) {
          s[k].x = s[0].x + (s[k].x - s[0].x) * 0.5;
          s[k].f = phi(s[k].x);
        }
      }
    }
    order();
  }
  return s[0].x;
}

}  // namespace

PeriodicOrbit find_periodic(const PlanarField& field, const SetValuedPerturbation& pert, double eps,
                            const Vec2& guess, double T, const SelectionPolicy& policy,
                            const ShootingOptions& opt) {
  if (policy.kind == SelectionPolicy::Extremal)
    throw NonPeriodicPolicy("extremal selections do not define a T-periodic time-T map");
  if (policy.kind == SelectionPolicy::Fixed) {
    for (const auto& p : policy.profiles) {
      if (!p) continue;
      for (int k = 0; k < 8; ++k) {
        const double t = T * k / 8.0;
        if (std::abs(p(t + T) - p(t)) > 1e-9)
          throw NonPeriodicPolicy("fixed coefficient profile is not T-periodic");
      }
    }
  }

  auto poincare = [&](const Vec2& xi) {
    return to_vec(
        integrate_selection(field, pert, eps, xi, 0.0, T, policy, opt.iopt).traj.eval(T));
  };
  auto resid = [&](const Vec2& xi) { return poincare(xi) - xi; };

  Vec2 xi = guess;
  Vec2 r = resid(xi);
  double best = norm(r);
  Vec2 best_xi = xi;
  const double fd = std::max(1e-6, 10.0 * opt.tol);
  bool tried_fallback = false;
  int it = 0;
  for (; it < opt.max_iterations && norm(r) > opt.tol; ++it) {
    // One-sided differences: the time-T map is only piecewise smooth at
    // grazing events, so straddling a kink with central stencils buys nothing.
    const Vec2 rx = resid(xi + Vec2{fd, 0.0});
    const Vec2 ry = resid(xi + Vec2{0.0, fd});
    const Mat2 J = Mat2::from_columns((rx - r) / fd, (ry - r) / fd);
    bool accepted = false;
    if (std::abs(J.det()) > 1e-12 * std::max(1.0, J.norm() * J.norm())) {
      Vec2 step = solve(J, -r);
      for (int halve = 0; halve < 8; ++halve) {
        const Vec2 trial = xi + step;
        const Vec2 rt = resid(trial);
        if (norm(rt) < norm(r)) {
          xi = trial;
          r = rt;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
    }
    if (!accepted) {
      if (tried_fallback) break;
      tried_fallback = true;
      const double scale = std::max(1e-4, 0.1 * norm(r));
      xi = nelder_mead([&](const Vec2& p) { return norm_sq(resid(p)); }, best_xi, scale, 150);
      r = resid(xi);
    }
    if (norm(r) < best) {
      best = norm(r);
      best_xi = xi;
    }
  }
  if (norm(r) > opt.tol) throw NoConvergence(it, best);

  PeriodicOrbit orbit;
  orbit.eps = eps;
  orbit.period = T;
  SelectionTrajectory fwd =
      integrate_selection(field, pert, eps, xi, 0.0, T + opt.pad, policy, opt.iopt);
  SelectionTrajectory bwd =
      integrate_selection(field, pert, eps, xi, 0.0, -opt.pad, policy, opt.iopt);
  orbit.traj = DenseTrajectory::merge(bwd.traj, fwd.traj);
  orbit.events = bwd.events;
  orbit.events.insert(orbit.events.end(), fwd.events.begin(), fwd.events.end());
  std::sort(orbit.events.begin(), orbit.events.end(),
            [](const SwitchEvent& a, const SwitchEvent& b) { return a.t < b.t; });
  orbit.shooting_residual = norm(to_vec(fwd.traj.eval(T)) - xi);
  return orbit;
}

Vec2 SectionSurface::S(double v) const {
  return to_vec(integrate(field, base + A1 * v, 0.0, T, iopt).eval(T));
}

SectionSurface build_section(const Cycle& cycle) {
  SectionSurface s;
  s.base = cycle.base_point;
  const Vec2 f0 = cycle.field.eval(cycle.base_point);
  s.A1 = perp(f0) / norm(f0);
  s.r0 = 0.1 * cycle.diameter();
  s.T = cycle.period;
  s.field = cycle.field;
  return s;
}

namespace {

struct SectionRoot {
  Vec2 p;            // (delta, v)
  double residual;
};

}  // namespace

SectionSolution solve_section(const DenseTrajectory& orbit_traj, const SectionSurface& section) {
  const double r0 = section.r0;
  auto F = [&](const Vec2& p) { return to_vec(orbit_traj.eval(p.x)) - section.S(p.y); };

  // The delta column of the Jacobian is the trajectory velocity (dense-output
  // derivative); the v column needs one central difference of S.
  auto jacobian = [&](const Vec2& p) {
    const Vec2 cd = to_vec(orbit_traj.deriv(p.x));
    const double dv = 1e-6 * std::max(1.0, std::abs(p.y));
    const Vec2 cv = (section.S(p.y + dv) - section.S(p.y - dv)) / (2.0 * dv) * -1.0;
    return Mat2::from_columns(cd, cv);
  };

  auto newton_from = [&](Vec2 p, SectionRoot* out) {
    Vec2 f = F(p);
    for (int it = 0; it < 40; ++it) {
      if (norm(f) <= 1e-10) break;
      const Mat2 J = jacobian(p);
      if (std::abs(J.det()) < 1e-14) break;
      Vec2 step = solve(J, -f);
      bool moved = false;
      for (int halve = 0; halve < 12; ++halve) {
        const Vec2 trial = p + step;
        if (std::abs(trial.x) > 2.0 * r0 || std::abs(trial.y) > 2.0 * r0) {
          step *= 0.5;  // keep iterates inside the trajectory's padded span
          continue;
        }
        const Vec2 ft = F(trial);
        if (norm(ft) < norm(f)) {
          p = trial;
          f = ft;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (norm(f) > 1e-10) return false;
    if (std::abs(p.x) > 1.001 * r0 || std::abs(p.y) > 1.001 * r0) return false;
    *out = {p, norm(f)};
    return true;
  };

  // Newton from the origin plus restarts from the best grid minima: together
  // they report every root the box holds at this resolution.
  std::vector<SectionRoot> roots;
  auto add_root = [&](const SectionRoot& cand) {
    for (const SectionRoot& r : roots)
      if (norm(r.p - cand.p) < 1e-8) return;
    roots.push_back(cand);
  };
  SectionRoot root;
  if (newton_from({0.0, 0.0}, &root)) add_root(root);

  const int n = 17;
  std::vector<Vec2> svals(n);
  for (int j = 0; j < n; ++j) svals[j] = section.S(-r0 + 2.0 * r0 * j / (n - 1));
  std::vector<std::vector<double>> phi(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    const Vec2 xe = to_vec(orbit_traj.eval(-r0 + 2.0 * r0 * i / (n - 1)));
    for (int j = 0; j < n; ++j) phi[i][j] = norm_sq(xe - svals[j]);
  }
  std::vector<std::pair<double, Vec2>> minima;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1 && is_min; ++dj) {
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= n || jj >= n || (di == 0 && dj == 0)) continue;
          if (phi[ii][jj] < phi[i][j]) is_min = false;
        }
      if (is_min)
        minima.push_back({phi[i][j], {-r0 + 2.0 * r0 * i / (n - 1), -r0 + 2.0 * r0 * j / (n - 1)}});
    }
  std::sort(minima.begin(), minima.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < minima.size() && k < 3; ++k)
    if (newton_from(minima[k].second, &root)) add_root(root);

  if (roots.empty())
    throw NoRootInBox("section equation has no root in the [-r0,r0]^2 box (r0=" +
                      std::to_string(r0) + ")");

  const SectionRoot* chosen = &roots[0];
  for (const SectionRoot& r : roots)
    if (std::abs(r.p.x) < std::abs(chosen->p.x)) chosen = &r;

  // Local uniqueness: conditioning of the Jacobian at the chosen root.
  const Mat2 J = jacobian(chosen->p);
  const Mat2 JtJ = {J.a * J.a + J.c * J.c, J.a * J.b + J.c * J.d,
                    J.a * J.b + J.c * J.d, J.b * J.b + J.d * J.d};
  const double tr = JtJ.a + JtJ.d, dt = JtJ.det();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - dt));
  const double smax = std::sqrt(std::max(0.0, tr / 2.0 + disc));
  const double smin = std::sqrt(std::max(0.0, tr / 2.0 - disc));
  if (smin <= 0.0 || smax / smin > 1e8)
    throw IllConditioned("section Jacobian nearly singular at the root (cond > 1e8)");

  // 64-point winding number of F around the box boundary.
  std::vector<Vec2> bps;
  for (int k = 0; k < 16; ++k) {
    const double u = -r0 + 2.0 * r0 * k / 16.0;
    bps.push_back({u, -r0});
  }
  for (int k = 0; k < 16; ++k) {
    const double u = -r0 + 2.0 * r0 * k / 16.0;
    bps.push_back({r0, u});
  }
  for (int k = 0; k < 16; ++k) {
    const double u = r0 - 2.0 * r0 * k / 16.0;
    bps.push_back({u, r0});
  }
  for (int k = 0; k < 16; ++k) {
    const double u = r0 - 2.0 * r0 * k / 16.0;
    bps.push_back({-r0, u});
  }
  double total = 0.0;
  Vec2 fprev = F(bps.back());
  for (const Vec2& p : bps) {
    const Vec2 fc = F(p);
    total += std::atan2(cross(fprev, fc), dot(fprev, fc));
    fprev = fc;
  }

  SectionSolution sol;
  sol.delta = chosen->p.x;
  sol.v = chosen->p.y;
  sol.residual = chosen->residual;
  sol.winding = (int)std::lround(total / (2.0 * M_PI));
  sol.root_count = (int)roots.size();
  return sol;
}

void attach_section(PeriodicOrbit& orbit, const SectionSurface& section) {
  const SectionSolution sol = solve_section(orbit.traj, section);
  orbit.delta = sol.delta;
  orbit.v = sol.v;
  orbit.section_solved = true;
}

}  // namespace cycleperturb
