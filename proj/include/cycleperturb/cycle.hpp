#pragma once
// Unperturbed-cycle location, nondegeneracy, and the adjoint basis
// (ztilde, zhat, y), t*, gamma, and the monodromy shear coefficient b.
#include <complex>
#include <vector>

#include "cycleperturb/model.hpp"
#include "cycleperturb/ode.hpp"

namespace cycleperturb {

struct Cycle {
  Vec2 base_point;
  double period = 0.0;
  DenseTrajectory traj;       // over [0, period]
  PlanarField field;          // the generating field (shared closures)
  double energy = 0.0;        // H(base_point) when a Hamiltonian is available
  bool has_energy = false;

  Vec2 eval(double t) const { return eval_mod(traj, t); }
  Vec2 deriv(double t) const { return field.eval(eval(t)); }
  // Max pairwise distance over a coarse sample of the orbit.
  double diameter() const;
};

struct Monodromy {
  Mat2 XT;                                    // fundamental matrix at one period, X(0)=I
  std::array<std::complex<double>, 2> multipliers;
  double b = 0.0;                             // shear entry in the adapted basis
  double off_shear_residual = 0.0;            // departure of adapted X(T) from [[1,0],[b,1]]
};

struct AdjointBasis {
  // ztilde(t) = J f(x0(t)): analytic T-periodic adjoint solution (scaled).
  // zhat: adjoint solution over [-T, 2T] with <x0'(0), zhat(0)> = 1 and zero
  // component along ztilde(0).
  DenseTrajectory zhat_traj;
  double t_star = 0.0;
  double gamma = 0.0;
  double ztilde_scale = 1.0;    // gauge factor c: basis holds c * (J f)
  double wronskian = 1.0;       // det of rows (zhat, ztilde); constant in t
  Monodromy mono;
  Cycle cycle;

  Vec2 ztilde(double t) const { return perp(cycle.deriv(t)) * ztilde_scale; }
  Vec2 zhat(double t) const { return to_vec(zhat_traj.eval(t)); }
  // y(t) = second column of the inverse of rows(zhat, ztilde): perp(zhat)/W.
  Vec2 y(double t) const { return perp(zhat(t)) / wronskian; }
  // Gauge variant: ztilde -> c*ztilde (gamma, wronskian, y rescale with it).
  AdjointBasis rescaled(double c) const;
};

struct CycleOptions {
  double tol = 1e-10;       // integration tolerance while locating/storing
  double t_max_factor = 0.0;  // return-time horizon; 0 -> 100*max(1,|seed|)
};

// Locate the cycle through `seed`: integrate until the first same-orientation
// return to the line through seed orthogonal to f(seed), refine the return
// time on dense output, and re-integrate [0,T] for a clean stored mesh.
Cycle find_cycle(const PlanarField& field, const Vec2& seed, const CycleOptions& opt = {});

// Same orbit re-based at x0(theta) (fresh location from that point).
Cycle rebase_cycle(const Cycle& cycle, double theta, const CycleOptions& opt = {});

Monodromy monodromy(const PlanarField& field, const Cycle& cycle,
                    const IntegratorOptions& iopt = {});

// True iff ||X(T) - I|| exceeds tol: the linearized system then has a
// non-T-periodic solution.
bool is_nondegenerate(const Monodromy& mono, double tol = 1e-6);

struct AdjointBasisOptions {
  IntegratorOptions iopt{};
  double nondegeneracy_tol = 1e-6;
  int t_star_index = -1;  // -1: pick the ztilde_1 zero maximizing |ztilde_2|
  double ztilde_scale = 1.0;
};

// Build (ztilde, zhat, y), t*, gamma along a nondegenerate cycle.
AdjointBasis build_adjoint_basis(const PlanarField& field, const Cycle& cycle,
                                 const AdjointBasisOptions& opt = {});

// Admissible t* choices: zeros of ztilde_1 in [0,T).
std::vector<double> t_star_candidates(const Cycle& cycle);

// max over t in [0,T] of ||zhat(t+T) - zhat(t) - (1/gamma) ztilde(t)||.
double lemma1_residual(const AdjointBasis& basis, int grid = 1024);

}  // namespace cycleperturb
