#pragma once
// Planar vector fields and set-valued T-periodic perturbations.
//
// Perturbation values are zonotopes: center(t,x,eps) plus interval-weighted
// generators. A generator may carry a switching function s(x); it then models a
// Filippov-convexified sign term -sign(s(x))*u: coefficient interval [-1,1] on
// {s=0} and the singleton {-sign(s(x))} elsewhere. Zonotopes give closed-form
// support functions and extremal selections, which is all the downstream
// quadratures need.
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cycleperturb/linalg.hpp"

namespace cycleperturb {

struct PlanarField {
  std::function<Vec2(const Vec2&)> eval;
  std::function<Mat2(const Vec2&)> jacobian;  // defaulted to central differences if absent
  std::function<double(const Vec2&)> hamiltonian;  // optional (empty if none)
  bool symmetric_flag = false;  // claim that f1 is even / f2 odd in x1 and the field is trace-free
  std::string name = "custom";

  Vec2 operator()(const Vec2& x) const { return eval(x); }
};

// Central finite-difference Jacobian with step cbrt(eps_machine)*max(1,|x|).
Mat2 fd_jacobian(const std::function<Vec2(const Vec2&)>& f, const Vec2& x);

// Wraps `field` so that jacobian falls back to finite differences when unset.
PlanarField with_default_jacobian(PlanarField field);

struct CoefficientInterval {
  double lo = 0.0, hi = 0.0;
};

struct Generator {
  std::function<Vec2(double, const Vec2&)> direction;
  // Coefficient interval [alpha,beta](t,x,eps); ignored when `switching` is set.
  std::function<CoefficientInterval(double, const Vec2&, double)> coeff;
  // Optional switching function for sign-type terms.
  std::function<double(const Vec2&)> switching;

  CoefficientInterval interval(double t, const Vec2& x, double eps) const;
};

struct SetValuedPerturbation {
  std::function<Vec2(double, const Vec2&, double)> center;
  std::vector<Generator> generators;
  double period = 0.0;
  std::string name = "custom";

  bool has_switching() const;
};

// max over v in g(t,x,eps) of <d,v>.
double support(const SetValuedPerturbation& pert, const Vec2& d, double t, const Vec2& x,
               double eps);

// A point of g(t,x,eps) attaining support(d); ties broken toward the upper bound.
Vec2 extremal_selection(const SetValuedPerturbation& pert, const Vec2& d, double t, const Vec2& x,
                        double eps);

// Exact membership test for the zonotope value set (polygon support check over
// generator directions and their normals), with additive tolerance.
bool contains(const SetValuedPerturbation& pert, const Vec2& v, double t, const Vec2& x, double eps,
              double tol);

// Coarse bound mu_B: sup over sampled x in the box of the set's sup-norm.
double mu_bound(const SetValuedPerturbation& pert, const Vec2& box_lo, const Vec2& box_hi, double t,
                double eps, int n_samples = 64);

struct FieldCheckReport {
  double max_trace_residual = 0.0;
  double max_jacobian_residual = 0.0;  // relative, against central differences
  double max_symmetry_residual = 0.0;  // only meaningful when symmetric_flag
  bool trace_ok = false;
  bool jacobian_ok = false;
  bool symmetry_ok = false;
  bool pass = false;
};

// Samples a quasi-random grid in [box_lo, box_hi] and reports residuals of the
// trace-free, Jacobian, and (if claimed) symmetry properties.
FieldCheckReport check_field(const PlanarField& field, const Vec2& box_lo, const Vec2& box_hi,
                             int n_samples = 256, double trace_tol = 1e-8,
                             double jac_tol = 1e-5, double sym_tol = 1e-8);

// --- catalog ---------------------------------------------------------------

PlanarField make_harmonic();          // f = (x2, -x1)
PlanarField make_duffing(double k);   // f = (x2, -x1 - k*x1^3)
PlanarField make_pendulum();          // f = (x2, -sin x1)

// a*cos(2*pi*t/T)*e1 as a singleton (center-only) term.
SetValuedPerturbation make_forcing(double a, double T);
// -c*sign(x2)*e2, Filippov-convexified on {x2=0}.
SetValuedPerturbation make_dry_friction(double c, double T);
// Pointwise sum of the value sets (centers add, generator lists concatenate).
SetValuedPerturbation combine(std::vector<SetValuedPerturbation> terms, double T);

}  // namespace cycleperturb
