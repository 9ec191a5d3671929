#pragma once
// Event-driven integration of the perturbed inclusion through explicit
// selections, perturbed periodic orbits by shooting on the time-T map, and the
// section equation for (Delta_eps, v_eps).
#include <vector>

#include "cycleperturb/cycle.hpp"
#include "cycleperturb/model.hpp"
#include "cycleperturb/ode.hpp"

namespace cycleperturb {

struct SelectionPolicy {
  enum Kind {
    Filippov,  // sign-type terms take the crossing/sliding value; plain
               // interval generators take the interval midpoint
    Fixed,     // user coefficient profiles lambda_i(t), clamped pointwise into
               // the admissible interval
    Extremal,  // maximize <d, .> pointwise for a fixed direction d
  };
  Kind kind = Filippov;
  std::vector<std::function<double(double)>> profiles;  // Fixed
  Vec2 extremal_direction{1.0, 0.0};                    // Extremal

  static SelectionPolicy filippov() { return {}; }
  static SelectionPolicy fixed(std::vector<std::function<double(double)>> profiles);
  static SelectionPolicy extremal(const Vec2& d);
};

struct SwitchEvent {
  enum Kind { Crossing, SlideStart, SlideEnd };
  double t = 0.0;
  int generator = -1;
  Kind kind = Crossing;
};

struct SelectionTrajectory {
  DenseTrajectory traj;
  std::vector<SwitchEvent> events;
};

// Integrate x' = f(x) + eps*h(t,x) for the policy-selected h over [t0,t1]
// (backward if t1<t0). Switching-surface crossings are located on dense output
// to 1e-10 in time; attracting surfaces produce sliding segments that keep the
// flow on {s=0} while |lambda| <= 1.
SelectionTrajectory integrate_selection(const PlanarField& field, const SetValuedPerturbation& pert,
                                        double eps, const Vec2& x0, double t0, double t1,
                                        const SelectionPolicy& policy = {},
                                        const IntegratorOptions& opt = {1e-8, 1e-8, 0.0, 0.0});

struct PeriodicOrbit {
  double eps = 0.0;
  double period = 0.0;
  DenseTrajectory traj;  // spans [-pad, period+pad]
  std::vector<SwitchEvent> events;
  double shooting_residual = 0.0;
  // Section data; valid once solve_section ran.
  double delta = 0.0;
  double v = 0.0;
  bool section_solved = false;

  Vec2 eval(double t) const { return to_vec(traj.eval(t)); }
};

struct ShootingOptions {
  double tol = 1e-8;
  int max_iterations = 50;
  IntegratorOptions iopt{1e-8, 1e-8, 0.0, 0.0};
  double pad = 0.75;  // orbit stored over [-pad, T+pad]
};

// Fixed point of the time-T map of the selected flow, seeded at `guess`.
PeriodicOrbit find_periodic(const PlanarField& field, const SetValuedPerturbation& pert, double eps,
                            const Vec2& guess, double T, const SelectionPolicy& policy = {},
                            const ShootingOptions& opt = {});

struct SectionSurface {
  Vec2 base;        // x0(0)
  Vec2 A1;          // unit line direction, J f(x0(0)) / |f(x0(0))|
  double r0 = 0.0;  // parameter box radius
  double T = 0.0;
  PlanarField field;
  IntegratorOptions iopt{1e-10, 1e-10, 0.0, 0.0};

  // S(v) = Omega(T, 0, base + A1 v).
  Vec2 S(double v) const;
};

SectionSurface build_section(const Cycle& cycle);

struct SectionSolution {
  double delta = 0.0;
  double v = 0.0;
  double residual = 0.0;
  int winding = 0;      // winding number of F over the box boundary
  int root_count = 1;   // distinct roots found in the box
};

// Solve x_eps(Delta) = S(v) by damped Newton from (0,0) with a grid fallback;
// winding of F over the box boundary certifies uniqueness. Smallest-|Delta|
// root wins when several are found.
SectionSolution solve_section(const DenseTrajectory& orbit_traj, const SectionSurface& section);

// Convenience: solve and store the section data on the orbit.
void attach_section(PeriodicOrbit& orbit, const SectionSurface& section);

}  // namespace cycleperturb
