#include "cycleperturb/ode.hpp"

#include <algorithm>
#include <cmath>

namespace cycleperturb {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// b - bhat (5th-order minus embedded 4th-order weights).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9, kShrink = 0.2, kGrow = 5.0;

}  // namespace

template <std::size_t N>
DenseTrajectoryN<N>::DenseTrajectoryN(std::vector<DenseSegment<N>> segments, double achieved_tol)
    : segs_(std::move(segments)), tol_(achieved_tol) {
  std::sort(segs_.begin(), segs_.end(),
            [](const DenseSegment<N>& a, const DenseSegment<N>& b) { return a.tmin() < b.tmin(); });
  ta_ = segs_.front().tmin();
  tb_ = segs_.back().tmax();
}

template <std::size_t N>
const DenseSegment<N>& DenseTrajectoryN<N>::segment_at(double t) const {
  const double slack = 1e-9 * std::max(1.0, tb_ - ta_);
  if (t < ta_ - slack || t > tb_ + slack)
    throw NumericalError("dense trajectory evaluated outside span");
  // Last segment whose tmin is <= t.
  std::size_t lo = 0, hi = segs_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (segs_[mid].tmin() <= t)
      lo = mid;
    else
      hi = mid;
  }
  return segs_[lo];
}

template <std::size_t N>
DenseTrajectoryN<N> DenseTrajectoryN<N>::merge(const DenseTrajectoryN& a, const DenseTrajectoryN& b) {
  std::vector<DenseSegment<N>> segs = a.segs_;
  segs.insert(segs.end(), b.segs_.begin(), b.segs_.end());
  return DenseTrajectoryN<N>(std::move(segs), std::max(a.tol_, b.tol_));
}

template <std::size_t N>
StepperDP5<N>::StepperDP5(RhsN<N> rhs, const StateN<N>& x0, double t0, double direction,
                          const IntegratorOptions& opt)
    : rhs_(std::move(rhs)), x_(x0), t_(t0), dir_(direction >= 0.0 ? 1.0 : -1.0), opt_(opt) {
  span_scale_ = 1.0;  // refined by the first step() call's limit
  if (opt_.initial_step > 0.0) {
    h_ = opt_.initial_step;
  } else {
    // Crude h0 from the state/derivative ratio; the controller corrects fast.
    StateN<N> f0;
    rhs_(t_, x_, f0);
    double nx = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      nx = std::max(nx, std::abs(x_[i]));
      nf = std::max(nf, std::abs(f0[i]));
    }
    h_ = 0.01 * (nx + opt_.atol) / (nf + 1e-6);
    h_ = std::clamp(h_, 1e-8, 1.0);
  }
}

template <std::size_t N>
void StepperDP5<N>::reset(double t, const StateN<N>& x) {
  t_ = t;
  x_ = x;
  have_k1_ = false;
}

template <std::size_t N>
bool StepperDP5<N>::step(double t_limit, DenseSegment<N>* out) {
  span_scale_ = std::max(span_scale_, std::abs(t_limit - t_));
  const double remaining = (t_limit - t_) * dir_;
  if (remaining <= 1e-14 * span_scale_) return false;

  if (!have_k1_) {
    rhs_(t_, x_, k1_);
    have_k1_ = true;
  }
  double h = std::min(h_, remaining);
  if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);

  StateN<N> k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
  for (;;) {
    if (h < 1e-14 * span_scale_) throw StepSizeUnderflow(t_);
    const double hs = h * dir_;
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = x_[i] + hs * a21 * k1_[i];
    rhs_(t_ + hs / 5.0, ytmp, k2);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = x_[i] + hs * (a31 * k1_[i] + a32 * k2[i]);
    rhs_(t_ + 3.0 * hs / 10.0, ytmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = x_[i] + hs * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
    rhs_(t_ + 4.0 * hs / 5.0, ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = x_[i] + hs * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs_(t_ + 8.0 * hs / 9.0, ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = x_[i] + hs * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs_(t_ + hs, ytmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = x_[i] + hs * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs_(t_ + hs, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      yerr[i] = hs * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt_.atol + opt_.rtol * std::max(std::abs(x_[i]), std::abs(ynew[i]));
      err += (yerr[i] / sc) * (yerr[i] / sc);
    }
    err = std::sqrt(err / N);
    if (!std::isfinite(err)) {  // overflow/NaN inside the trial step
      h *= kShrink;
      continue;
    }

    if (err <= 1.0) {
      if (out) {
        out->t0 = t_;
        out->h = hs;
        out->set_full_window();
        for (std::size_t i = 0; i < N; ++i) {
          const double ydiff = ynew[i] - x_[i];
          out->rcont[0][i] = x_[i];
          out->rcont[1][i] = ydiff;
          out->rcont[2][i] = hs * k1_[i] - ydiff;
          out->rcont[3][i] = ydiff - hs * k7[i] - out->rcont[2][i];
          out->rcont[4][i] = hs * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                   d6 * k6[i] + d7 * k7[i]);
        }
      }
      const bool clipped = h >= remaining;  // step was truncated by t_limit
      t_ = clipped ? t_limit : t_ + hs;
      x_ = ynew;
      k1_ = k7;  // FSAL
      const double factor =
          err > 0.0 ? std::clamp(kSafety * std::pow(err, -0.2), kShrink, kGrow) : kGrow;
      if (!clipped || factor < 1.0) h_ = h * factor;
      return true;
    }
    h *= std::clamp(kSafety * std::pow(err, -0.2), kShrink, 1.0);
  }
}

template <std::size_t N>
DenseTrajectoryN<N> integrate_ode(const RhsN<N>& rhs, const StateN<N>& x0, double t0, double t1,
                                  const IntegratorOptions& opt) {
  if (t0 == t1) {
    DenseSegment<N> seg;
    seg.t0 = t0;
    seg.h = 1.0;
    seg.set_full_window();
    seg.rcont[0] = x0;
    for (int r = 1; r < 5; ++r) seg.rcont[r].fill(0.0);
    return DenseTrajectoryN<N>({seg}, opt.rtol);
  }
  StepperDP5<N> stepper(rhs, x0, t0, t1 - t0, opt);
  std::vector<DenseSegment<N>> segs;
  DenseSegment<N> seg;
  while (stepper.step(t1, &seg)) segs.push_back(seg);
  return DenseTrajectoryN<N>(std::move(segs), opt.rtol);
}

DenseTrajectory integrate(const PlanarField& field, const Vec2& x0, double t0, double t1,
                          const IntegratorOptions& opt) {
  RhsN<2> rhs = [&field](double, const StateN<2>& x, StateN<2>& dx) {
    const Vec2 f = field.eval({x[0], x[1]});
    dx[0] = f.x;
    dx[1] = f.y;
  };
  return integrate_ode<2>(rhs, to_state(x0), t0, t1, opt);
}

Vec2 eval_mod(const DenseTrajectory& traj, double t) {
  const double ta = traj.t_begin(), T = traj.t_end() - ta;
  double tau = std::fmod(t - ta, T);
  if (tau < 0.0) tau += T;
  return to_vec(traj.eval(ta + tau));
}

MatrixTrajectory fundamental(const PlanarField& field_in, const DenseTrajectory& cycle_traj,
                             const Mat2& A, double t_from, double t_to,
                             const IntegratorOptions& opt) {
  const PlanarField field = with_default_jacobian(field_in);
  RhsN<4> rhs = [&field, &cycle_traj](double t, const StateN<4>& y, StateN<4>& dy) {
    const Mat2 Jf = field.jacobian(eval_mod(cycle_traj, t));
    const Mat2 Y = to_mat(y);
    const Mat2 dY = Jf * Y;
    dy = to_state(dY);
  };
  return MatrixTrajectory(integrate_ode<4>(rhs, to_state(A), t_from, t_to, opt));
}

DenseTrajectory adjoint_solve(const PlanarField& field_in, const DenseTrajectory& cycle_traj,
                              const Vec2& z0, double t_from, double t_to,
                              const IntegratorOptions& opt) {
  const PlanarField field = with_default_jacobian(field_in);
  RhsN<2> rhs = [&field, &cycle_traj](double t, const StateN<2>& z, StateN<2>& dz) {
    const Mat2 Jf = field.jacobian(eval_mod(cycle_traj, t));
    // z' = -Jf^T z
    dz[0] = -(Jf.a * z[0] + Jf.c * z[1]);
    dz[1] = -(Jf.b * z[0] + Jf.d * z[1]);
  };
  if (t_from >= 0.0) return integrate_ode<2>(rhs, to_state(z0), t_from, t_to, opt);
  // One backward and one forward sweep from 0, merged (no periodic stitching).
  DenseTrajectory back = integrate_ode<2>(rhs, to_state(z0), 0.0, t_from, opt);
  DenseTrajectory fwd = integrate_ode<2>(rhs, to_state(z0), 0.0, t_to, opt);
  return DenseTrajectory::merge(back, fwd);
}

DenseTrajectory linearized_solve(const PlanarField& field_in, const DenseTrajectory& cycle_traj,
                                 const Vec2& y0, double t_from, double t_to,
                                 const IntegratorOptions& opt) {
  const PlanarField field = with_default_jacobian(field_in);
  RhsN<2> rhs = [&field, &cycle_traj](double t, const StateN<2>& y, StateN<2>& dy) {
    const Mat2 Jf = field.jacobian(eval_mod(cycle_traj, t));
    dy[0] = Jf.a * y[0] + Jf.b * y[1];
    dy[1] = Jf.c * y[0] + Jf.d * y[1];
  };
  if (t_from >= 0.0) return integrate_ode<2>(rhs, to_state(y0), t_from, t_to, opt);
  DenseTrajectory back = integrate_ode<2>(rhs, to_state(y0), 0.0, t_from, opt);
  DenseTrajectory fwd = integrate_ode<2>(rhs, to_state(y0), 0.0, t_to, opt);
  return DenseTrajectory::merge(back, fwd);
}

template class DenseTrajectoryN<2>;
template class DenseTrajectoryN<4>;
template class StepperDP5<2>;
template class StepperDP5<4>;
template DenseTrajectoryN<2> integrate_ode<2>(const RhsN<2>&, const StateN<2>&, double, double,
                                              const IntegratorOptions&);
template DenseTrajectoryN<4> integrate_ode<4>(const RhsN<4>&, const StateN<4>&, double, double,
                                              const IntegratorOptions&);

}  // namespace cycleperturb
