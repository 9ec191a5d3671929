#pragma once
// Scalar numerics: adaptive Gauss-Kronrod 7(15) quadrature with forced
// breakpoints, and Brent root bracketing/refinement.
#include <functional>
#include <vector>

namespace cycleperturb {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // accumulated |K15 - G7| estimate
  int panels = 0;
};

// Integrate fn over [a,b] (a<=b) to absolute tolerance tol. Panels are forced
// to split at the given breakpoints (integrand kinks); remaining error is
// driven down by bisecting the worst panel.
QuadratureResult integrate_adaptive(const std::function<double(double)>& fn, double a, double b,
                                    double tol, const std::vector<double>& breakpoints = {},
                                    int max_panels = 4000);

// Non-adaptive composite rule: splits [a,b] at the breakpoints, subdivides
// uniformly into at least min_panels, applies K15 per panel. Used by oracles
// that need a quadrature independent of the adaptive driver.
double integrate_composite(const std::function<double(double)>& fn, double a, double b,
                           const std::vector<double>& breakpoints = {}, int min_panels = 32);

// Root of fn in [a,b] with fn(a), fn(b) of opposite sign (Brent).
double brent(const std::function<double(double)>& fn, double a, double b, double xtol = 1e-13);

// All sign-change roots of fn on [a,b] found on an n-point scan, Brent-refined.
std::vector<double> scan_roots(const std::function<double(double)>& fn, double a, double b, int n,
                               double xtol = 1e-13);

}  // namespace cycleperturb
