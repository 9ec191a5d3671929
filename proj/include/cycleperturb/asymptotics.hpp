#pragma once
// First-order displacement interval M_perp(t), the symmetric-system variant,
// transversal/tangential coefficient diagnostics against a perturbed periodic
// orbit, and the Melnikov-style seeding interval.
#include <vector>

#include "cycleperturb/cycle.hpp"
#include "cycleperturb/inclusion.hpp"
#include "cycleperturb/model.hpp"

namespace cycleperturb {

struct Interval {
  double lo = 0.0, hi = 0.0;

  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  // Point-to-interval distance rho.
  double dist(double v) const { return v < lo ? lo - v : (v > hi ? v - hi : 0.0); }
  // Scaling keeps lo <= hi (endpoints swap for negative factors).
  Interval scaled(double c) const {
    return c >= 0.0 ? Interval{lo * c, hi * c} : Interval{hi * c, lo * c};
  }
};

// M_perp(t) = gamma * { integral_{t-T}^{t} <-zhat(tau), h(tau)> dtau over
// admissible selections h of g(., x0(.), 0) }: pointwise extremal selections
// give the endpoints; adaptive quadrature splits panels at the perturbation's
// switching times along the cycle. Absolute endpoint error <= qtol.
Interval mperp(const Cycle& cycle, const AdjointBasis& basis, const SetValuedPerturbation& pert,
               double t, double qtol = 1e-8);

struct MperpProfile {
  std::vector<double> grid;           // nodes over [0, T]
  std::vector<Interval> values;       // I(t_k)
  double sigma = -1.0;                // sign convention applied by consumers
  double qtol = 1e-8;
  std::vector<double> switch_times;   // integrand kink times within [0, T)
  double period = 0.0;

  // Linear interpolation between nodes, t taken modulo the period.
  Interval at(double t) const;
};

MperpProfile build_mperp_profile(const Cycle& cycle, const AdjointBasis& basis,
                                 const SetValuedPerturbation& pert, double sigma = -1.0,
                                 double qtol = 1e-8, int nodes = 256);

// y(t): solution of the linearization along the cycle with y(0) = J f(x0(0)),
// stored over [-T, 2T]. For trace-free linearizations t -> (y2, -y1) solves
// the adjoint equation, which is what the symmetric M_perp formula exploits.
DenseTrajectory lemma5_solution(const Cycle& cycle,
                                const IntegratorOptions& iopt = {1e-12, 1e-12, 0.0, 0.0});

// sup over a grid of || d/dt (y2,-y1) + Df(x0(t))^T (y2,-y1) ||: how well the
// perp of the linearized solution satisfies the adjoint equation.
double lemma5_residual(const Cycle& cycle, const DenseTrajectory& y, int grid = 1024);

// Symmetric-system variant: prefactor xdot0_1(t*) / (y1(T+t*) - y1(t*)) with
// t* a zero of xdot0_2, integrand det(-y(tau), h(tau)). Requires the field's
// symmetry flag and the sampled symmetry checks to pass (NotSymmetric).
Interval mperp_symmetric(const Cycle& cycle, const DenseTrajectory& y,
                         const SetValuedPerturbation& pert, double t, double qtol = 1e-8);

// c_eps(t) = <ztilde(t), x_eps(t+Delta) - x0(t)> / eps (0 for an eps=0 orbit).
double transversal_coefficient(const PeriodicOrbit& orbit, const Cycle& cycle,
                               const AdjointBasis& basis, double t);

// rho(c_eps(t), sigma * I(t)).
double inclusion_residual(const PeriodicOrbit& orbit, const Cycle& cycle,
                          const AdjointBasis& basis, const MperpProfile& profile, double t);

// Predicted displacement set: the segment
//   { eps * m * sigma * y(t) + a_tan(t) * xdot0(t)  :  m in I(t) },
// with a_tan measured from the orbit (never modeled).
struct DisplacementSegment {
  Vec2 lo_end, hi_end;  // images of I(t).lo and I(t).hi
};
DisplacementSegment predict_displacement(const Cycle& cycle, const AdjointBasis& basis,
                                         const MperpProfile& profile, const PeriodicOrbit& orbit,
                                         double t);

// sup over `grid` times of ||x_eps(t + Delta) - x0(t)|| / eps (denominator 1
// for an eps=0 orbit).
double theorem1_ratio(const PeriodicOrbit& orbit, const Cycle& cycle, int grid = 2048);

// Set-valued Melnikov analogue { integral_0^T <ztilde(tau+theta), h(tau)> dtau }.
Interval melnikov_interval(const Cycle& cycle, const AdjointBasis& basis,
                           const SetValuedPerturbation& pert, double theta, double qtol = 1e-8);

// Phases in [0, T) where the interval midpoint changes sign (Brent-refined);
// used to seed find_periodic.
std::vector<double> melnikov_sign_changes(const Cycle& cycle, const AdjointBasis& basis,
                                          const SetValuedPerturbation& pert, int n_scan = 256,
                                          double qtol = 1e-8);

}  // namespace cycleperturb
