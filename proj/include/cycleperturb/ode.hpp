#pragma once
// Adaptive Dormand-Prince 5(4) integration with 4th-order dense output, plus
// variational and adjoint solves along a stored trajectory.
//
// The stepper is generic over the flattened state dimension N so the same core
// drives state (N=2) and matrix (N=4) solves. Dense output is the classic
// quartic continuous extension; each accepted step stores five coefficient
// vectors, and evaluation works for forward and backward steps alike.
#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "cycleperturb/errors.hpp"
#include "cycleperturb/linalg.hpp"
#include "cycleperturb/model.hpp"

namespace cycleperturb {

template <std::size_t N>
using StateN = std::array<double, N>;

template <std::size_t N>
using RhsN = std::function<void(double, const StateN<N>&, StateN<N>&)>;

template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0;  // step start (h may be negative for backward sweeps)
  double h = 0.0;
  double wa = 0.0, wb = 0.0;  // valid window (ascending); events shrink it
  std::array<StateN<N>, 5> rcont;  // continuous-extension coefficients

  StateN<N> eval(double t) const {
    const double th = (t - t0) / h, th1 = 1.0 - th;
    StateN<N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = rcont[0][i] +
               th * (rcont[1][i] + th1 * (rcont[2][i] + th * (rcont[3][i] + th1 * rcont[4][i])));
    return out;
  }
  StateN<N> deriv(double t) const {
    const double th = (t - t0) / h;
    StateN<N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = (rcont[1][i] + (1.0 - 2.0 * th) * rcont[2][i] + th * (2.0 - 3.0 * th) * rcont[3][i] +
                2.0 * th * (1.0 - th) * (1.0 - 2.0 * th) * rcont[4][i]) /
               h;
    return out;
  }
  double tmin() const { return wa; }
  double tmax() const { return wb; }
  void set_full_window() {
    wa = h >= 0.0 ? t0 : t0 + h;
    wb = h >= 0.0 ? t0 + h : t0;
  }
};

template <std::size_t N>
class DenseTrajectoryN {
 public:
  DenseTrajectoryN() = default;
  DenseTrajectoryN(std::vector<DenseSegment<N>> segments, double achieved_tol);

  double t_begin() const { return ta_; }
  double t_end() const { return tb_; }
  double achieved_tol() const { return tol_; }
  const std::vector<DenseSegment<N>>& segments() const { return segs_; }

  StateN<N> eval(double t) const { return segment_at(t).eval(t); }
  StateN<N> deriv(double t) const { return segment_at(t).deriv(t); }

  // Merge two trajectories with touching/overlapping spans (e.g. a backward
  // and a forward sweep from the same initial point).
  static DenseTrajectoryN merge(const DenseTrajectoryN& a, const DenseTrajectoryN& b);

 private:
  const DenseSegment<N>& segment_at(double t) const;
  std::vector<DenseSegment<N>> segs_;  // sorted by tmin
  double ta_ = 0.0, tb_ = 0.0, tol_ = 0.0;
};

using DenseTrajectory = DenseTrajectoryN<2>;

inline Vec2 to_vec(const StateN<2>& s) { return {s[0], s[1]}; }
inline StateN<2> to_state(const Vec2& v) { return {v.x, v.y}; }
inline Mat2 to_mat(const StateN<4>& s) { return {s[0], s[1], s[2], s[3]}; }
inline StateN<4> to_state(const Mat2& m) { return {m.a, m.b, m.c, m.d}; }

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double max_step = 0.0;  // 0: no cap
  double initial_step = 0.0;  // 0: automatic
};

// Single-RHS driver; t1 < t0 integrates backward. Throws StepSizeUnderflow.
template <std::size_t N>
DenseTrajectoryN<N> integrate_ode(const RhsN<N>& rhs, const StateN<N>& x0, double t0, double t1,
                                  const IntegratorOptions& opt);

// One adaptive DP5 step of the RHS; exposed for event-driven drivers that must
// own the accept/reject loop. Returns the accepted segment and advances t/x/h.
template <std::size_t N>
class StepperDP5 {
 public:
  StepperDP5(RhsN<N> rhs, const StateN<N>& x0, double t0, double direction,
             const IntegratorOptions& opt);
  // Take one accepted step, not crossing t_limit. Returns false when t_limit
  // was already (us within roundoff) reached.
  bool step(double t_limit, DenseSegment<N>* out);
  double t() const { return t_; }
  const StateN<N>& x() const { return x_; }
  // Restart from a new state (after an event flip) keeping the step size.
  void reset(double t, const StateN<N>& x);

 private:
  RhsN<N> rhs_;
  StateN<N> x_, k1_;
  double t_, h_, dir_, span_scale_;
  bool have_k1_ = false;
  IntegratorOptions opt_;
};

// --- module operations -----------------------------------------------------

// Trajectory of x' = field(x) over [t0,t1].
DenseTrajectory integrate(const PlanarField& field, const Vec2& x0, double t0, double t1,
                          const IntegratorOptions& opt = {});

class MatrixTrajectory {
 public:
  MatrixTrajectory() = default;
  explicit MatrixTrajectory(DenseTrajectoryN<4> traj) : traj_(std::move(traj)) {}
  Mat2 eval(double t) const { return to_mat(traj_.eval(t)); }
  double t_begin() const { return traj_.t_begin(); }
  double t_end() const { return traj_.t_end(); }
  const DenseTrajectoryN<4>& raw() const { return traj_; }

 private:
  DenseTrajectoryN<4> traj_;
};

// Fundamental solution of Y' = f'(x0(t)) Y, Y(span.first) = A. The base
// trajectory is evaluated modulo its own span length (a cycle-shaped input).
MatrixTrajectory fundamental(const PlanarField& field, const DenseTrajectory& cycle_traj,
                             const Mat2& A, double t_from, double t_to,
                             const IntegratorOptions& opt = {});

// Adjoint solve z' = -f'(x0(t))^T z with z(0)=z0 over [t_from,t_to] containing 0.
// Integrated as one backward and one forward sweep from 0 and merged.
DenseTrajectory adjoint_solve(const PlanarField& field, const DenseTrajectory& cycle_traj,
                              const Vec2& z0, double t_from, double t_to,
                              const IntegratorOptions& opt = {});

// Vector linearized solve y' = f'(x0(t)) y with y(0)=y0, same span handling.
DenseTrajectory linearized_solve(const PlanarField& field, const DenseTrajectory& cycle_traj,
                                 const Vec2& y0, double t_from, double t_to,
                                 const IntegratorOptions& opt = {});

// Periodic lookup into a trajectory spanning [0,T).
Vec2 eval_mod(const DenseTrajectory& traj, double t);

}  // namespace cycleperturb
