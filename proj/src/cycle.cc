#include "cycleperturb/cycle.hpp"

#include <algorithm>
#include <cmath>

#include "cycleperturb/numerics.hpp"

namespace cycleperturb {

double Cycle::diameter() const {
  const int n = 128;
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = eval(period * i / n);
  double d = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) d = std::max(d, norm(pts[i] - pts[j]));
  return d;
}

Cycle find_cycle(const PlanarField& field_in, const Vec2& seed, const CycleOptions& opt) {
  const PlanarField field = with_default_jacobian(field_in);
  const Vec2 fseed = field.eval(seed);
  if (norm(fseed) < 1e-12) throw EquilibriumSeed("seed is an equilibrium of the field");
  const double t_max =
      opt.t_max_factor > 0.0 ? opt.t_max_factor : 100.0 * std::max(1.0, norm(seed));

  // Signed coordinate along the flow direction relative to the section line
  // through seed orthogonal to f(seed); positive-orientation crossings have
  // increasing sigma. The initial point itself is such a crossing, so the
  // first return is the next one.
  const Vec2 n = fseed / norm(fseed);
  auto sigma_of = [&](const Vec2& x) { return dot(x - seed, n); };

  IntegratorOptions iopt;
  iopt.rtol = iopt.atol = opt.tol;
  RhsN<2> rhs = [&field](double, const StateN<2>& x, StateN<2>& dx) {
    const Vec2 f = field.eval({x[0], x[1]});
    dx[0] = f.x;
    dx[1] = f.y;
  };
  StepperDP5<2> stepper(rhs, to_state(seed), 0.0, +1.0, iopt);
  DenseSegment<2> seg;
  double T = -1.0;
  while (stepper.step(t_max, &seg)) {
    // Sub-sample the accepted step for positive-orientation sign changes.
    const int sub = 8;
    double prev_t = seg.tmin(), prev_s = sigma_of(to_vec(seg.eval(prev_t)));
    for (int i = 1; i <= sub; ++i) {
      const double t = seg.tmin() + (seg.tmax() - seg.tmin()) * i / sub;
      const double s = sigma_of(to_vec(seg.eval(t)));
      if (prev_s < 0.0 && s >= 0.0 && t > 1e-8) {
        const double root = brent([&](double u) { return sigma_of(to_vec(seg.eval(u))); }, prev_t,
                                  t, 1e-14);
        const Vec2 xr = to_vec(seg.eval(root));
        if (dot(field.eval(xr), n) > 0.0) {
          T = root;
          break;
        }
      }
      prev_t = t;
      prev_s = s;
    }
    if (T > 0.0) break;
  }
  if (T < 0.0) throw NotACycle("no same-orientation return to the seed section before t_max");

  Cycle cyc;
  cyc.base_point = seed;
  cyc.period = T;
  cyc.field = field;
  IntegratorOptions store = iopt;
  store.max_step = T / 64.0;  // uniform-ish mesh for the modulo-T lookups
  cyc.traj = integrate(field, seed, 0.0, T, store);
  if (field.hamiltonian) {
    cyc.energy = field.hamiltonian(seed);
    cyc.has_energy = true;
  }
  const double closure = norm(to_vec(cyc.traj.eval(T)) - seed);
  if (closure > 1e-6 * (1.0 + norm(seed)))
    throw NotACycle("return point misses the seed: closure " + std::to_string(closure));
  return cyc;
}

Cycle rebase_cycle(const Cycle& cycle, double theta, const CycleOptions& opt) {
  return find_cycle(cycle.field, cycle.eval(theta), opt);
}

Monodromy monodromy(const PlanarField& field, const Cycle& cycle, const IntegratorOptions& iopt) {
  Monodromy m;
  const MatrixTrajectory Y = fundamental(field, cycle.traj, Mat2::identity(), 0.0, cycle.period,
                                         iopt);
  m.XT = Y.eval(cycle.period);
  m.multipliers = eigenvalues(m.XT);
  // Adapted basis: first column normal to the cycle, second along the flow.
  const Vec2 f0 = cycle.deriv(0.0);
  const Mat2 P = Mat2::from_columns(perp(f0) / norm(f0), f0);
  const Mat2 Xa = P.inverse() * m.XT * P;
  m.b = Xa.c;
  m.off_shear_residual = std::max({std::abs(Xa.a - 1.0), std::abs(Xa.b), std::abs(Xa.d - 1.0)});
  return m;
}

bool is_nondegenerate(const Monodromy& mono, double tol) {
  return (mono.XT - Mat2::identity()).norm() > tol;
}

std::vector<double> t_star_candidates(const Cycle& cycle) {
  // Zeros of ztilde_1 = -f_2(x0(t)) in [0,T).
  auto zt1 = [&](double t) { return -cycle.deriv(t).y; };
  std::vector<double> roots = scan_roots(zt1, 0.0, cycle.period, 2048, 1e-14);
  std::vector<double> out;
  for (double r : roots) {
    if (r >= cycle.period * (1.0 - 1e-12)) continue;  // alias of t=0
    if (!out.empty() && r - out.back() < 1e-9 * cycle.period) continue;
    out.push_back(r);
  }
  return out;
}

AdjointBasis build_adjoint_basis(const PlanarField& field, const Cycle& cycle,
                                 const AdjointBasisOptions& opt) {
  AdjointBasis basis;
  basis.cycle = cycle;
  basis.ztilde_scale = opt.ztilde_scale;
  basis.mono = monodromy(field, cycle, opt.iopt);

  const std::vector<double> zeros = t_star_candidates(cycle);
  if (zeros.empty())
    throw NoTransversalZero("ztilde_1 has no zero on the cycle (integration fault)");
  if (opt.t_star_index >= 0) {
    basis.t_star = zeros.at(opt.t_star_index);
  } else {
    double best = -1.0;
    for (double z : zeros) {
      const double mag = std::abs(basis.ztilde(z).y);
      if (mag > best * (1.0 + 1e-12)) {  // strict improvement; ties keep the earliest
        best = mag;
        basis.t_star = z;
      }
    }
  }
  const double zt2 = basis.ztilde(basis.t_star).y;
  if (std::abs(zt2) < 1e-6 * norm(basis.ztilde(basis.t_star)) + 1e-300)
    throw NoTransversalZero("ztilde_2 vanishes at t*: no transversal zero");

  const Vec2 f0 = cycle.deriv(0.0);
  const Vec2 zhat0 = f0 / norm_sq(f0);  // <x0'(0), zhat(0)> = 1, no ztilde component
  basis.zhat_traj = adjoint_solve(field, cycle.traj, zhat0, -cycle.period, 2.0 * cycle.period,
                                  opt.iopt);

  const double denom = basis.zhat(cycle.period + basis.t_star).y - basis.zhat(basis.t_star).y;
  if (std::abs(denom) < 1e-10)
    throw DegenerateCycle("gamma denominator below 1e-10: cycle degenerate for the basis");
  basis.gamma = zt2 / denom;
  basis.wronskian = cross(basis.zhat(0.0), basis.ztilde(0.0));
  return basis;
}

AdjointBasis AdjointBasis::rescaled(double c) const {
  AdjointBasis out = *this;
  out.ztilde_scale *= c;
  out.gamma *= c;
  out.wronskian *= c;
  return out;
}

double lemma1_residual(const AdjointBasis& basis, int grid) {
  double res = 0.0;
  const double T = basis.cycle.period;
  for (int i = 0; i <= grid; ++i) {
    const double t = T * i / grid;
    const Vec2 r = basis.zhat(t + T) - basis.zhat(t) - basis.ztilde(t) / basis.gamma;
    res = std::max(res, norm(r));
  }
  return res;
}

}  // namespace cycleperturb
