#pragma once
// Exception types for the numerical failure modes surfaced by the library.
#include <stdexcept>
#include <string>

namespace cycleperturb {

// Base class: all library-raised numerical failures derive from this, so the
// CLI can map them to a single exit code with a diagnostic payload.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// The adaptive step controller drove the step below the representable floor.
struct StepSizeUnderflow : NumericalError {
  double t;
  explicit StepSizeUnderflow(double at)
      : NumericalError("step size underflow at t=" + std::to_string(at)), t(at) {}
};

// No return to the seed section within the allotted horizon.
struct NotACycle : NumericalError {
  explicit NotACycle(const std::string& what) : NumericalError(what) {}
};

// Seed point is (numerically) an equilibrium of the field.
struct EquilibriumSeed : NumericalError {
  explicit EquilibriumSeed(const std::string& what) : NumericalError(what) {}
};

// gamma denominator vanished: the cycle behaves as degenerate for the basis.
struct DegenerateCycle : NumericalError {
  explicit DegenerateCycle(const std::string& what) : NumericalError(what) {}
};

// The first adjoint component never changes sign (signals an integration fault).
struct NoTransversalZero : NumericalError {
  explicit NoTransversalZero(const std::string& what) : NumericalError(what) {}
};

// Too many switching events within one period.
struct ChatteringLimit : NumericalError {
  explicit ChatteringLimit(const std::string& what) : NumericalError(what) {}
};

// Shooting failed to converge; carries the best residual seen.
struct NoConvergence : NumericalError {
  int iterations;
  double best_residual;
  NoConvergence(int iters, double best)
      : NumericalError("shooting did not converge after " + std::to_string(iters) +
                       " iterations (best residual " + std::to_string(best) + ")"),
        iterations(iters), best_residual(best) {}
};

// Time-T map undefined for the requested selection policy.
struct NonPeriodicPolicy : NumericalError {
  explicit NonPeriodicPolicy(const std::string& what) : NumericalError(what) {}
};

// Section equation has no root in the search box.
struct NoRootInBox : NumericalError {
  explicit NoRootInBox(const std::string& what) : NumericalError(what) {}
};

// Section Jacobian close to singular at the root.
struct IllConditioned : NumericalError {
  explicit IllConditioned(const std::string& what) : NumericalError(what) {}
};

// Symmetry-restricted operation called on a field failing the symmetry checks.
struct NotSymmetric : NumericalError {
  explicit NotSymmetric(const std::string& what) : NumericalError(what) {}
};

}  // namespace cycleperturb
