#include "cycleperturb/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace cycleperturb {

Mat2 fd_jacobian(const std::function<Vec2(const Vec2&)>& f, const Vec2& x) {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, norm(x));
  const Vec2 e1{h, 0.0}, e2{0.0, h};
  const Vec2 dx1 = (f(x + e1) - f(x - e1)) / (2.0 * h);
  const Vec2 dx2 = (f(x + e2) - f(x - e2)) / (2.0 * h);
  return Mat2::from_columns(dx1, dx2);
}

PlanarField with_default_jacobian(PlanarField field) {
  if (!field.jacobian) {
    auto f = field.eval;
    field.jacobian = [f](const Vec2& x) { return fd_jacobian(f, x); };
  }
  return field;
}

CoefficientInterval Generator::interval(double t, const Vec2& x, double eps) const {
  if (switching) {
    const double s = switching(x);
    if (s > 0.0) return {-1.0, -1.0};
    if (s < 0.0) return {1.0, 1.0};
    return {-1.0, 1.0};
  }
  return coeff(t, x, eps);
}

bool SetValuedPerturbation::has_switching() const {
  return std::any_of(generators.begin(), generators.end(),
                     [](const Generator& g) { return bool(g.switching); });
}

double support(const SetValuedPerturbation& pert, const Vec2& d, double t, const Vec2& x,
               double eps) {
  double s = dot(d, pert.center(t, x, eps));
  for (const Generator& g : pert.generators) {
    const CoefficientInterval iv = g.interval(t, x, eps);
    const double du = dot(d, g.direction(t, x));
    s += std::max(iv.lo * du, iv.hi * du);
  }
  return s;
}

Vec2 extremal_selection(const SetValuedPerturbation& pert, const Vec2& d, double t, const Vec2& x,
                        double eps) {
  Vec2 v = pert.center(t, x, eps);
  for (const Generator& g : pert.generators) {
    const CoefficientInterval iv = g.interval(t, x, eps);
    const Vec2 u = g.direction(t, x);
    const double du = dot(d, u);
    v += (du >= 0.0 ? iv.hi : iv.lo) * u;  // ties toward the upper bound
  }
  return v;
}

bool contains(const SetValuedPerturbation& pert, const Vec2& v, double t, const Vec2& x, double eps,
              double tol) {
  // The value set is a polygon (possibly degenerate) whose edge directions are
  // the generator directions; testing the support inequality along each
  // generator direction, its normal, and the axes is exact up to tol.
  std::vector<Vec2> dirs = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  for (const Generator& g : pert.generators) {
    const Vec2 u = g.direction(t, x);
    const double nu = norm(u);
    if (nu < 1e-300) continue;
    dirs.push_back(u / nu);
    dirs.push_back(-(u / nu));
    dirs.push_back(perp(u) / nu);
    dirs.push_back(-(perp(u) / nu));
  }
  for (const Vec2& d : dirs) {
    if (dot(d, v) > support(pert, d, t, x, eps) + tol) return false;
  }
  return true;
}

double mu_bound(const SetValuedPerturbation& pert, const Vec2& box_lo, const Vec2& box_hi, double t,
                double eps, int n_samples) {
  // sup-norm of the set at x is max over the four axis directions of the
  // support function; an interval-hull bound would do, but the exact polygon
  // sup-norm costs the same here.
  double mu = 0.0;
  const double g1 = 0.7548776662466927, g2 = 0.5698402909980532;  // 2D golden lattice
  for (int i = 0; i < n_samples; ++i) {
    const double u = std::fmod(0.5 + g1 * (i + 1), 1.0), w = std::fmod(0.5 + g2 * (i + 1), 1.0);
    const Vec2 x{box_lo.x + u * (box_hi.x - box_lo.x), box_lo.y + w * (box_hi.y - box_lo.y)};
    for (const Vec2& d : {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}})
      mu = std::max(mu, support(pert, d, t, x, eps));
  }
  return mu;
}

FieldCheckReport check_field(const PlanarField& field_in, const Vec2& box_lo, const Vec2& box_hi,
                             int n_samples, double trace_tol, double jac_tol, double sym_tol) {
  const PlanarField field = with_default_jacobian(field_in);
  FieldCheckReport rep;
  const double g1 = 0.7548776662466927, g2 = 0.5698402909980532;
  for (int i = 0; i < n_samples; ++i) {
    const double u = std::fmod(0.5 + g1 * (i + 1), 1.0), w = std::fmod(0.5 + g2 * (i + 1), 1.0);
    const Vec2 x{box_lo.x + u * (box_hi.x - box_lo.x), box_lo.y + w * (box_hi.y - box_lo.y)};
    const Mat2 J = field.jacobian(x);
    rep.max_trace_residual = std::max(rep.max_trace_residual, std::abs(J.trace()));
    const Mat2 Jfd = fd_jacobian(field.eval, x);
    const double scale = std::max(1.0, Jfd.norm());
    rep.max_jacobian_residual = std::max(rep.max_jacobian_residual, (J - Jfd).norm() / scale);
    if (field.symmetric_flag) {
      const Vec2 fx = field.eval(x), fm = field.eval({-x.x, x.y});
      const double fscale = std::max(1.0, norm(fx));
      rep.max_symmetry_residual =
          std::max({rep.max_symmetry_residual, std::abs(fx.x - fm.x) / fscale,
                    std::abs(fx.y + fm.y) / fscale, std::abs(J.a + J.d) / std::max(1.0, J.norm())});
    }
  }
  rep.trace_ok = rep.max_trace_residual <= trace_tol;
  rep.jacobian_ok = rep.max_jacobian_residual <= jac_tol;
  rep.symmetry_ok = !field.symmetric_flag || rep.max_symmetry_residual <= sym_tol;
  rep.pass = rep.trace_ok && rep.jacobian_ok && rep.symmetry_ok;
  return rep;
}

PlanarField make_harmonic() {
  PlanarField f;
  f.eval = [](const Vec2& x) { return Vec2{x.y, -x.x}; };
  f.jacobian = [](const Vec2&) { return Mat2{0.0, 1.0, -1.0, 0.0}; };
  f.hamiltonian = [](const Vec2& x) { return 0.5 * (x.x * x.x + x.y * x.y); };
  f.symmetric_flag = true;
  f.name = "harmonic";
  return f;
}

PlanarField make_duffing(double k) {
  PlanarField f;
  f.eval = [k](const Vec2& x) { return Vec2{x.y, -x.x - k * x.x * x.x * x.x}; };
  f.jacobian = [k](const Vec2& x) { return Mat2{0.0, 1.0, -1.0 - 3.0 * k * x.x * x.x, 0.0}; };
  f.hamiltonian = [k](const Vec2& x) {
    return 0.5 * (x.x * x.x + x.y * x.y) + 0.25 * k * x.x * x.x * x.x * x.x;
  };
  f.symmetric_flag = true;
  f.name = "duffing";
  return f;
}

PlanarField make_pendulum() {
  PlanarField f;
  f.eval = [](const Vec2& x) { return Vec2{x.y, -std::sin(x.x)}; };
  f.jacobian = [](const Vec2& x) { return Mat2{0.0, 1.0, -std::cos(x.x), 0.0}; };
  f.hamiltonian = [](const Vec2& x) { return 0.5 * x.y * x.y + 1.0 - std::cos(x.x); };
  f.symmetric_flag = true;
  f.name = "pendulum";
  return f;
}

SetValuedPerturbation make_forcing(double a, double T) {
  SetValuedPerturbation p;
  p.center = [a, T](double t, const Vec2&, double) {
    return Vec2{a * std::cos(2.0 * M_PI * t / T), 0.0};
  };
  p.period = T;
  p.name = "forcing";
  return p;
}

SetValuedPerturbation make_dry_friction(double c, double T) {
  SetValuedPerturbation p;
  p.center = [](double, const Vec2&, double) { return Vec2{0.0, 0.0}; };
  Generator g;
  g.direction = [c](double, const Vec2&) { return Vec2{0.0, c}; };
  g.switching = [](const Vec2& x) { return x.y; };
  p.generators.push_back(std::move(g));
  p.period = T;
  p.name = "dry_friction";
  return p;
}

SetValuedPerturbation combine(std::vector<SetValuedPerturbation> terms, double T) {
  SetValuedPerturbation p;
  auto shared = std::make_shared<std::vector<SetValuedPerturbation>>(std::move(terms));
  p.center = [shared](double t, const Vec2& x, double eps) {
    Vec2 c{0.0, 0.0};
    for (const auto& term : *shared) c += term.center(t, x, eps);
    return c;
  };
  for (const auto& term : *shared)
    for (const auto& g : term.generators) p.generators.push_back(g);
  p.period = T;
  p.name = "combined";
  return p;
}

}  // namespace cycleperturb
