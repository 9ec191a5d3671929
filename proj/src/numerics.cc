#include "cycleperturb/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace cycleperturb {

namespace {

// Gauss-Kronrod 7(15) nodes and weights on [-1,1] (positive half; symmetric).
constexpr double xgk[8] = {0.991455371120812639206854697526329,
                           0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926,
                           0.741531185599394439863864773280788,
                           0.586087235467691130294144838258730,
                           0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245,
                           0.0};
constexpr double wgk[8] = {0.022935322010529224963732008058970,
                           0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518,
                           0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550,
                           0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649,
                           0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082,
                          0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975,
                          0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel eval_panel(const std::function<double(double)>& fn, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double fc = fn(mid);
  double k15 = wgk[7] * fc;
  double g7 = wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double fsum = fn(mid - half * xgk[i]) + fn(mid + half * xgk[i]);
    k15 += wgk[i] * fsum;
    if (i % 2 == 1) g7 += wg[i / 2] * fsum;
  }
  return {a, b, half * k15, half * std::abs(k15 - g7)};
}

std::vector<double> panel_edges(double a, double b, const std::vector<double>& breakpoints) {
  std::vector<double> edges = {a, b};
  for (double s : breakpoints)
    if (s > a + 1e-14 && s < b - 1e-14) edges.push_back(s);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double u, double v) { return std::abs(u - v) < 1e-14; }),
              edges.end());
  return edges;
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& fn, double a, double b,
                                    double tol, const std::vector<double>& breakpoints,
                                    int max_panels) {
  if (b <= a) return {0.0, 0.0, 0};
  std::priority_queue<Panel> heap;
  const std::vector<double> edges = panel_edges(a, b, breakpoints);
  double total = 0.0, err = 0.0;
  int n = 0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Panel p = eval_panel(fn, edges[i], edges[i + 1]);
    total += p.value;
    err += p.error;
    heap.push(p);
    ++n;
  }
  while (err > tol && n < max_panels) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // panel at roundoff width
    Panel left = eval_panel(fn, worst.a, mid), right = eval_panel(fn, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n;
  }
  return {total, err, n};
}

double integrate_composite(const std::function<double(double)>& fn, double a, double b,
                           const std::vector<double>& breakpoints, int min_panels) {
  if (b <= a) return 0.0;
  std::vector<double> edges = panel_edges(a, b, breakpoints);
  // Uniformly refine until at least min_panels, keeping breakpoint edges.
  std::vector<double> fine;
  const double target = (b - a) / min_panels;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const int sub = std::max(1, (int)std::ceil((edges[i + 1] - edges[i]) / target));
    for (int j = 0; j < sub; ++j)
      fine.push_back(edges[i] + (edges[i + 1] - edges[i]) * j / sub);
  }
  fine.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < fine.size(); ++i)
    total += eval_panel(fn, fine[i], fine[i + 1]).value;
  return total;
}

double brent(const std::function<double(double)>& fn, double a, double b, double xtol) {
  double fa = fn(a), fb = fn(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) throw std::invalid_argument("brent: root not bracketed");
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = fn(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  return b;
}

std::vector<double> scan_roots(const std::function<double(double)>& fn, double a, double b, int n,
                               double xtol) {
  std::vector<double> roots;
  double prev_t = a, prev_f = fn(a);
  for (int i = 1; i <= n; ++i) {
    const double t = a + (b - a) * i / n;
    const double f = fn(t);
    if (prev_f == 0.0)
      roots.push_back(prev_t);
    else if (prev_f * f < 0.0)
      roots.push_back(brent(fn, prev_t, t, xtol));
    prev_t = t;
    prev_f = f;
  }
  if (prev_f == 0.0) roots.push_back(prev_t);
  return roots;
}

}  // namespace cycleperturb
