#include "cycleperturb/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "cycleperturb/asymptotics.hpp"
#include "cycleperturb/cycle.hpp"
#include "cycleperturb/errors.hpp"
#include "cycleperturb/inclusion.hpp"
#include "cycleperturb/numerics.hpp"
#include "cycleperturb/ode.hpp"
#include "cycleperturb/svg.hpp"
#include "json.hpp"

namespace cycleperturb {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

std::string fmt17(double v) {
  char b[48];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

// Annotate numerical failures with the pipeline stage for the diagnostic JSON.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  }
}

IntegratorOptions iopt_of(const ExperimentConfig& cfg) {
  return {cfg.tol.integration, cfg.tol.integration, 0.0, 0.0};
}

// ---- shared pipeline -------------------------------------------------------

struct Pipeline {
  ExperimentConfig cfg;
  PlanarField field;
  Cycle cyc0;
  Monodromy mono;
  bool nondegenerate = false;
  // Valid only when nondegenerate:
  SetValuedPerturbation pert;
  AdjointBasis basis0;
  std::vector<double> melnikov_zeros;
  double theta0 = 0.0;
  Cycle cycR;  // re-based at theta0
  AdjointBasis basisR;
  MperpProfile profile;
  SectionSurface section;
};

Pipeline build_pipeline(const ExperimentConfig& cfg) {
  Pipeline P;
  P.cfg = cfg;
  P.field = field_from_config(cfg);
  P.cyc0 = stage("cycle",
                 [&] { return find_cycle(P.field, cfg.seed_point, {cfg.tol.integration, 0.0}); });
  logline("cycle located: T=" + fmt(P.cyc0.period) + " diameter=" + fmt(P.cyc0.diameter()));
  P.mono = stage("monodromy", [&] { return monodromy(P.field, P.cyc0, iopt_of(cfg)); });
  P.nondegenerate = is_nondegenerate(P.mono, cfg.tol.nondegeneracy);
  if (!P.nondegenerate) {
    logline("cycle is degenerate; downstream analysis does not apply");
    return P;
  }

  P.pert = perturbation_from_config(cfg, P.cyc0.period);
  AdjointBasisOptions bopt;
  bopt.iopt = iopt_of(cfg);
  bopt.nondegeneracy_tol = cfg.tol.nondegeneracy;
  P.basis0 = stage("adjoint-basis", [&] { return build_adjoint_basis(P.field, P.cyc0, bopt); });
  P.melnikov_zeros = stage("melnikov-scan", [&] {
    return melnikov_sign_changes(P.cyc0, P.basis0, P.pert, 256, cfg.tol.quadrature);
  });
  std::sort(P.melnikov_zeros.begin(), P.melnikov_zeros.end());
  // Deterministic phase rule: the first sign change in [0,T) seeds everything.
  P.theta0 = P.melnikov_zeros.empty() ? 0.0 : P.melnikov_zeros.front();
  P.cycR = P.melnikov_zeros.empty() ? P.cyc0 : stage("rebase", [&] {
    return rebase_cycle(P.cyc0, P.theta0, {cfg.tol.integration, 0.0});
  });
  P.basisR = stage("adjoint-basis", [&] { return build_adjoint_basis(P.field, P.cycR, bopt); });
  const double sigma_eff = cfg.paper_literal ? 1.0 : cfg.sigma;
  P.profile = stage("interval-profile", [&] {
    return build_mperp_profile(P.cycR, P.basisR, P.pert, sigma_eff, cfg.tol.quadrature,
                               cfg.profile_nodes);
  });
  // Literal reading: the membership interval carries the extra gamma factor.
  if (cfg.paper_literal)
    for (auto& val : P.profile.values) val = val.scaled(P.basisR.gamma);
  P.section = build_section(P.cycR);
  logline("phase: theta0=" + fmt(P.theta0) + " gamma=" + fmt(P.basisR.gamma) +
          " t_star=" + fmt(P.basisR.t_star));
  return P;
}

// ---- ladder ----------------------------------------------------------------

struct RungResult {
  LadderRow row;
  PeriodicOrbit orbit;
};

RungResult analyze_rung(const Pipeline& P, double eps) {
  RungResult r;
  ShootingOptions sopt;
  sopt.tol = P.cfg.tol.shooting;
  sopt.iopt = iopt_of(P.cfg);
  r.orbit = find_periodic(P.field, P.pert, eps, P.cycR.base_point, P.pert.period, {}, sopt);
  const SectionSolution sol = solve_section(r.orbit.traj, P.section);
  r.orbit.delta = sol.delta;
  r.orbit.v = sol.v;
  r.orbit.section_solved = true;
  r.row.eps = eps;
  r.row.delta = sol.delta;
  r.row.v = sol.v;
  r.row.winding = sol.winding;
  r.row.root_count = sol.root_count;
  r.row.section_residual = sol.residual;
  r.row.shooting_residual = r.orbit.shooting_residual;
  r.row.events = static_cast<int>(r.orbit.events.size());
  r.row.sup_ratio = theorem1_ratio(r.orbit, P.cycR, 2048);
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < P.profile.grid.size(); ++k)
    worst = std::max(worst,
                     inclusion_residual(r.orbit, P.cycR, P.basisR, P.profile, P.profile.grid[k]));
  r.row.sup_residual = worst;
  return r;
}

std::vector<RungResult> run_ladder(const Pipeline& P) {
  const auto& ladder = P.cfg.ladder;
  const int n = static_cast<int>(ladder.size());
  std::vector<RungResult> out(static_cast<std::size_t>(n));
  const int workers = std::max(1, std::min(P.cfg.threads, n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i)
      out[i] = stage("orbit", [&] { return analyze_rung(P, ladder[i]); });
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n));
    auto work = [&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          out[i] = stage("orbit", [&] { return analyze_rung(P, ladder[i]); });
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    // Report assembly stays deterministic: the lowest-index failure wins.
    for (int i = 0; i < n; ++i)
      if (errs[i]) std::rethrow_exception(errs[i]);
  }
  for (int i = 0; i < n; ++i)
    logline("rung eps=" + fmt(ladder[i]) + ": delta=" + fmt(out[i].row.delta) +
            " v=" + fmt(out[i].row.v) + " ratio=" + fmt(out[i].row.sup_ratio) +
            " residual=" + fmt(out[i].row.sup_residual));
  return out;
}

// ---- verdicts --------------------------------------------------------------

CheckVerdict skipped(const char* name, const std::string& why) {
  return {name, "skipped", 0.0, why};
}

// Criterion: Perron duality, orthogonality/normalization, area conservation,
// and the adjoint return identity, all along a tightly re-solved cycle.
CheckVerdict structural_check(const Pipeline& P) {
  const IntegratorOptions tight{1e-12, 1e-12, 0.0, 0.0};
  const Cycle cyc = find_cycle(P.field, P.cfg.seed_point, {1e-12, 0.0});
  AdjointBasisOptions bopt;
  bopt.iopt = tight;
  bopt.nondegeneracy_tol = P.cfg.tol.nondegeneracy;
  const AdjointBasis basis = build_adjoint_basis(P.field, cyc, bopt);
  const double T = cyc.period;
  const Mat2 A = Mat2::from_columns(basis.y(0.0), cyc.deriv(0.0));
  const MatrixTrajectory Y = fundamental(P.field, cyc.traj, A, 0.0, T, tight);
  const double det0 = A.det();
  double perron = 0.0, orth = 0.0, drift = 0.0, det_rel = 0.0;
  const int grid = 500;
  for (int i = 0; i <= grid; ++i) {
    const double t = T * i / grid;
    const Mat2 Yt = Y.eval(t);
    const Vec2 zh = basis.zhat(t), zt = basis.ztilde(t), xd = cyc.deriv(t);
    const Vec2 zy{dot(zh, Yt.col(0)), dot(zh, Yt.col(1))};
    perron = std::max(perron, norm(zy - Vec2{0.0, 1.0}));
    orth = std::max(orth, std::abs(dot(xd, zt)) / (norm(xd) * norm(zt)));
    drift = std::max(drift, std::abs(dot(xd, zh) - 1.0));
    det_rel = std::max(det_rel, std::abs(Yt.det() - det0) / std::abs(det0));
  }
  const double lem1 = lemma1_residual(basis);
  const bool ok =
      perron <= 1e-7 && orth <= 1e-8 && drift <= 1e-8 && det_rel <= 1e-8 && lem1 <= 1e-7;
  CheckVerdict v;
  v.name = "structural_invariants";
  v.status = ok ? "pass" : "fail";
  v.witness = std::max({perron, orth, drift, det_rel, lem1});
  v.detail = "perron=" + fmt(perron) + " orthogonality=" + fmt(orth) +
             " normalization=" + fmt(drift) + " det_drift=" + fmt(det_rel) +
             " lemma1=" + fmt(lem1);
  return v;
}

// Criterion: degenerate cycles are reported as such; nondegenerate ones have a
// genuine shear entry and unit multipliers.
CheckVerdict nondegeneracy_check(const Pipeline& P) {
  // Multipliers of a shear are defectively conditioned (error ~ sqrt of the
  // matrix error), so the monodromy is re-solved on a tight cycle mesh.
  const Cycle cyc = find_cycle(P.field, P.cfg.seed_point, {1e-12, 0.0});
  const Monodromy m = monodromy(P.field, cyc, {1e-12, 1e-12, 0.0, 0.0});
  const double dist = (m.XT - Mat2::identity()).norm();
  CheckVerdict v;
  v.name = "nondegeneracy";
  v.witness = dist;
  if (!is_nondegenerate(m, P.cfg.tol.nondegeneracy)) {
    v.status = "pass";
    v.detail = "nondegenerate=false dist_from_identity=" + fmt(dist);
    return v;
  }
  const double m1 = std::abs(m.multipliers[0] - 1.0);
  const double m2 = std::abs(m.multipliers[1] - 1.0);
  const bool ok = std::abs(m.b) > 1e-3 && std::max(m1, m2) <= 1e-6;
  v.status = ok ? "pass" : "fail";
  v.detail = "nondegenerate=true b=" + fmt(m.b) + " multiplier_dist=" + fmt(std::max(m1, m2)) +
             " off_shear=" + fmt(m.off_shear_residual);
  return v;
}

CheckVerdict theorem1_check(const std::vector<LadderRow>& rows) {
  if (rows.size() < 2) return skipped("theorem1_ratio", "needs at least two ladder entries");
  double rmin = rows[0].sup_ratio, rmax = rows[0].sup_ratio;
  for (const auto& r : rows) {
    rmin = std::min(rmin, r.sup_ratio);
    rmax = std::max(rmax, r.sup_ratio);
  }
  const std::size_t n = rows.size();
  double mx = 0.0, my = 0.0;
  for (const auto& r : rows) {
    mx += std::log(r.eps);
    my += std::log(r.sup_ratio);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    const double dx = std::log(r.eps) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(r.sup_ratio) - my);
  }
  const double slope = sxy / sxx;
  const bool ok = rmax / rmin <= 2.0 && std::abs(slope) <= 0.3;
  CheckVerdict v;
  v.name = "theorem1_ratio";
  v.status = ok ? "pass" : "fail";
  v.witness = rmax / rmin;
  v.detail = "r_min=" + fmt(rmin) + " r_max=" + fmt(rmax) + " loglog_slope=" + fmt(slope);
  return v;
}

CheckVerdict section_check(const std::vector<LadderRow>& rows) {
  if (rows.empty()) return skipped("section_roots", "empty ladder");
  bool ok = true;
  double vr_min = std::abs(rows[0].v) / rows[0].eps, vr_max = vr_min;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (std::abs(r.winding) != 1 || r.root_count < 1) ok = false;
    if (r.section_residual > 1e-6) ok = false;
    const double vr = std::abs(r.v) / r.eps;
    vr_min = std::min(vr_min, vr);
    vr_max = std::max(vr_max, vr);
    if (i > 0) {
      if (!(std::abs(r.delta) < std::abs(rows[i - 1].delta))) ok = false;
      if (!(std::abs(r.v) < std::abs(rows[i - 1].v))) ok = false;
    }
  }
  if (rows.size() >= 2 && vr_max / vr_min > 2.0) ok = false;
  CheckVerdict v;
  v.name = "section_roots";
  v.status = ok ? "pass" : "fail";
  v.witness = std::abs(rows.back().delta);
  v.detail = "delta_final=" + fmt(rows.back().delta) + " v_final=" + fmt(rows.back().v) +
             " v_over_eps=[" + fmt(vr_min) + "," + fmt(vr_max) + "]";
  return v;
}

CheckVerdict inclusion_check(const Pipeline& P, const std::vector<LadderRow>& rows) {
  if (rows.empty()) return skipped("inclusion_residual", "empty ladder");
  double supw = 0.0;
  for (const auto& val : P.profile.values) supw = std::max(supw, val.width());
  bool ok = true;
  std::string seq;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0) {
      // Residual must shrink at least like eps, with 20% slack.
      const double factor = rows[i].eps / rows[i - 1].eps;
      if (!(rows[i].sup_residual <= rows[i - 1].sup_residual * factor * 1.2)) ok = false;
      seq += ",";
    }
    seq += fmt(rows[i].sup_residual);
  }
  const double final_res = rows.back().sup_residual;
  if (!(final_res <= 0.1 * std::max(1.0, supw))) ok = false;
  CheckVerdict v;
  v.name = "inclusion_residual";
  v.status = ok ? "pass" : "fail";
  v.witness = final_res;
  v.detail = "residuals=[" + seq + "] sup_width=" + fmt(supw);
  return v;
}

// Panel decomposition of the window [t-T, t] for the selection oracle: edges
// at a uniform grid plus every kink of the selection structure, 5-point
// Gauss-Legendre weights per panel, coefficient intervals frozen per panel.
struct Panels {
  double center_total = 0.0;
  std::vector<std::vector<double>> gen_w;             // [panel][generator]
  std::vector<std::vector<CoefficientInterval>> iv;   // [panel][generator]
};

Panels build_panels(const Pipeline& P, double t_hi) {
  const double T = P.cycR.period;
  const double a = t_hi - T, b = t_hi;
  std::vector<double> edges;
  const int base = 512;
  edges.reserve(base + 8);
  for (int i = 0; i <= base; ++i) edges.push_back(a + (b - a) * i / base);
  auto x0 = [&](double tau) { return P.cycR.eval(tau); };
  auto mz = [&](double tau) { return -P.basisR.zhat(tau); };
  for (const auto& g : P.pert.generators) {
    std::function<double(double)> kink;
    if (g.switching)
      kink = [&](double tau) { return g.switching(x0(tau)); };
    else
      kink = [&](double tau) { return dot(mz(tau), g.direction(tau, x0(tau))); };
    for (double r : scan_roots(kink, a, b, 1024, 1e-12)) edges.push_back(r);
  }
  std::sort(edges.begin(), edges.end());
  static const double xg[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
  static const double wg[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                               0.4786286704993665, 0.2369268850561891};
  Panels out;
  const std::size_t ng = P.pert.generators.size();
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double e0 = edges[p], e1 = edges[p + 1];
    if (e1 - e0 < 1e-13) continue;
    const double mid = 0.5 * (e0 + e1), half = 0.5 * (e1 - e0);
    double cw = 0.0;
    std::vector<double> gw(ng, 0.0);
    for (int q = 0; q < 5; ++q) {
      const double tau = mid + half * xg[q];
      const Vec2 d = mz(tau), x = x0(tau);
      cw += wg[q] * dot(d, P.pert.center(tau, x, 0.0));
      for (std::size_t i = 0; i < ng; ++i)
        gw[i] += wg[q] * dot(d, P.pert.generators[i].direction(tau, x));
    }
    cw *= half;
    for (auto& w : gw) w *= half;
    std::vector<CoefficientInterval> piv(ng);
    for (std::size_t i = 0; i < ng; ++i)
      piv[i] = P.pert.generators[i].interval(mid, x0(mid), 0.0);
    out.center_total += cw;
    out.gen_w.push_back(std::move(gw));
    out.iv.push_back(std::move(piv));
  }
  return out;
}

// Criterion: random admissible piecewise-constant selections integrate into
// I(t) (inflated by the quadrature tolerance); the bang-bang selection attains
// each endpoint.
CheckVerdict oracle_check(const Pipeline& P) {
  const double T = P.cycR.period, qtol = P.cfg.tol.quadrature;
  const double gamma = P.basisR.gamma;
  double worst_violation = 0.0, worst_gap = 0.0;
  const int n_times = 16;
  for (int k = 0; k < n_times; ++k) {
    const double t = T * k / n_times;
    const Interval I = mperp(P.cycR, P.basisR, P.pert, t, qtol);
    const Panels pan = build_panels(P, t);
    double raw_hi = pan.center_total, raw_lo = pan.center_total;
    for (std::size_t p = 0; p < pan.gen_w.size(); ++p)
      for (std::size_t i = 0; i < pan.gen_w[p].size(); ++i) {
        const double w = pan.gen_w[p][i];
        const CoefficientInterval& c = pan.iv[p][i];
        raw_hi += w >= 0.0 ? c.hi * w : c.lo * w;
        raw_lo += w >= 0.0 ? c.lo * w : c.hi * w;
      }
    const double attained_hi = std::max(gamma * raw_hi, gamma * raw_lo);
    const double attained_lo = std::min(gamma * raw_hi, gamma * raw_lo);
    worst_gap = std::max({worst_gap, std::abs(attained_hi - I.hi), std::abs(attained_lo - I.lo)});
    std::seed_seq seq{static_cast<unsigned>(P.cfg.seed & 0xffffffffu),
                      static_cast<unsigned>(P.cfg.seed >> 32), static_cast<unsigned>(k)};
    std::mt19937 rng(seq);
    for (int d = 0; d < P.cfg.mc_draws; ++d) {
      double raw = pan.center_total;
      for (std::size_t p = 0; p < pan.gen_w.size(); ++p)
        for (std::size_t i = 0; i < pan.gen_w[p].size(); ++i) {
          const CoefficientInterval& c = pan.iv[p][i];
          double lambda = c.lo;
          if (c.hi > c.lo) {
            std::uniform_real_distribution<double> u(c.lo, c.hi);
            lambda = u(rng);
          }
          raw += lambda * pan.gen_w[p][i];
        }
      const double val = gamma * raw;
      const double excess = std::max(I.lo - val, val - I.hi);
      worst_violation = std::max(worst_violation, std::max(0.0, excess));
    }
  }
  const bool ok = worst_violation <= qtol && worst_gap <= 2.0 * qtol;
  CheckVerdict v;
  v.name = "selection_oracle";
  v.status = ok ? "pass" : "fail";
  v.witness = worst_violation;
  v.detail = "containment_excess=" + fmt(worst_violation) + " endpoint_gap=" + fmt(worst_gap) +
             " draws=" + std::to_string(P.cfg.mc_draws);
  return v;
}

// Criterion: for symmetric fields the Lemma-5 route reproduces the adjoint
// route, and the linearized solution satisfies its equation.
CheckVerdict symmetric_check(const Pipeline& P) {
  if (!P.field.symmetric_flag)
    return skipped("symmetric_cross_check", "field does not claim the symmetry");
  try {
    const DenseTrajectory y5 = lemma5_solution(P.cycR);
    const double res5 = lemma5_residual(P.cycR, y5);
    const double qtol = P.cfg.tol.quadrature;
    double dev = 0.0;
    for (int k = 0; k < 16; ++k) {
      const double t = P.cycR.period * k / 16.0;
      const Interval a = mperp_symmetric(P.cycR, y5, P.pert, t, qtol);
      const Interval b = mperp(P.cycR, P.basisR, P.pert, t, qtol);
      dev = std::max({dev, std::abs(a.lo - b.lo), std::abs(a.hi - b.hi)});
    }
    const bool ok = dev <= 2.0 * qtol && res5 <= 1e-7;
    CheckVerdict v;
    v.name = "symmetric_cross_check";
    v.status = ok ? "pass" : "fail";
    v.witness = dev;
    v.detail = "max_endpoint_dev=" + fmt(dev) + " lemma5_residual=" + fmt(res5);
    return v;
  } catch (const NotSymmetric& e) {
    return {"symmetric_cross_check", "fail", 0.0,
            std::string("claimed symmetry rejected: ") + e.what()};
  }
}

// Criterion: the predicted displacement is gauge invariant, and the interval
// does not depend on which transversal zero defines the basis.
CheckVerdict invariance_check(const Pipeline& P, const std::vector<RungResult>& rungs) {
  const double qtol = P.cfg.tol.quadrature;
  double gauge_dev = 0.0;
  bool have_gauge = false;
  if (!rungs.empty()) {
    have_gauge = true;
    const double c = -2.3;
    const AdjointBasis basis_g = P.basisR.rescaled(c);
    // Plain profiles on both sides: the literal-reading extra factor is not a
    // gauge covariant and is excluded from this comparison.
    const MperpProfile prof_0 =
        P.cfg.paper_literal ? build_mperp_profile(P.cycR, P.basisR, P.pert, P.profile.sigma, qtol,
                                                  P.cfg.profile_nodes)
                            : P.profile;
    const MperpProfile prof_g =
        build_mperp_profile(P.cycR, basis_g, P.pert, P.profile.sigma, qtol, P.cfg.profile_nodes);
    const PeriodicOrbit& orb = rungs.front().orbit;
    for (int k = 0; k < 8; ++k) {
      const double t = P.cycR.period * k / 8.0;
      const DisplacementSegment s0 = predict_displacement(P.cycR, P.basisR, prof_0, orb, t);
      const DisplacementSegment s1 = predict_displacement(P.cycR, basis_g, prof_g, orb, t);
      gauge_dev = std::max(
          {gauge_dev, norm(s0.lo_end - s1.lo_end), norm(s0.hi_end - s1.hi_end)});
    }
  }
  double tstar_dev = 0.0;
  bool have_tstar = false;
  if (t_star_candidates(P.cycR).size() >= 2) {
    have_tstar = true;
    AdjointBasisOptions bopt;
    bopt.iopt = iopt_of(P.cfg);
    bopt.nondegeneracy_tol = P.cfg.tol.nondegeneracy;
    bopt.t_star_index = 0;
    const AdjointBasis b0 = build_adjoint_basis(P.field, P.cycR, bopt);
    bopt.t_star_index = 1;
    const AdjointBasis b1 = build_adjoint_basis(P.field, P.cycR, bopt);
    for (int k = 0; k < 16; ++k) {
      const double t = P.cycR.period * k / 16.0;
      const Interval a = mperp(P.cycR, b0, P.pert, t, qtol);
      const Interval b = mperp(P.cycR, b1, P.pert, t, qtol);
      tstar_dev = std::max({tstar_dev, std::abs(a.lo - b.lo), std::abs(a.hi - b.hi)});
    }
  }
  const bool ok = (!have_gauge || gauge_dev <= 1e-9) && (!have_tstar || tstar_dev <= 3.0 * qtol);
  CheckVerdict v;
  v.name = "invariances";
  v.status = ok ? "pass" : "fail";
  v.witness = gauge_dev;
  v.detail = std::string("gauge_dev=") + (have_gauge ? fmt(gauge_dev) : "n/a") +
             " t_star_dev=" + (have_tstar ? fmt(tstar_dev) : "n/a");
  return v;
}

// ---- serialization helpers -------------------------------------------------

json row_json(const LadderRow& r) {
  json j;
  j["eps"] = r.eps;
  j["sup_ratio"] = r.sup_ratio;
  j["sup_residual"] = r.sup_residual;
  j["delta"] = r.delta;
  j["v"] = r.v;
  j["shooting_residual"] = r.shooting_residual;
  j["section_residual"] = r.section_residual;
  j["winding"] = r.winding;
  j["root_count"] = r.root_count;
  j["events"] = r.events;
  return j;
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

json provenance_json(const ExperimentConfig& cfg) {
  json j;
  j["config_hash"] = config_hash(cfg);
  j["version"] = kToolVersion;
  return j;
}

// ---- plots -----------------------------------------------------------------

std::string phase_svg(const Pipeline& P, const RungResult* rung) {
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  auto grow = [&](const Vec2& v) {
    xlo = std::min(xlo, v.x);
    xhi = std::max(xhi, v.x);
    ylo = std::min(ylo, v.y);
    yhi = std::max(yhi, v.y);
  };
  std::vector<Vec2> cyc_pts;
  for (int i = 0; i <= 600; ++i) {
    cyc_pts.push_back(P.cyc0.eval(P.cyc0.period * i / 600));
    grow(cyc_pts.back());
  }
  std::vector<Vec2> orb_pts;
  if (rung) {
    for (int i = 0; i <= 1200; ++i) {
      orb_pts.push_back(rung->orbit.eval(P.pert.period * i / 1200));
      grow(orb_pts.back());
    }
  }
  const double padx = 0.1 * (xhi - xlo) + 1e-6, pady = 0.1 * (yhi - ylo) + 1e-6;
  SvgPlot plot(640, 520, "phase portrait");
  plot.set_range(xlo - padx, xhi + padx, ylo - pady, yhi + pady);
  plot.axes("x1", "x2");
  plot.polyline(cyc_pts, "#1f77b4", 1.6);
  if (rung) {
    plot.polyline(orb_pts, "#d62728", 1.1);
    const SectionSurface& s = P.section;
    plot.line(s.base - s.A1 * s.r0, s.base + s.A1 * s.r0, "#2ca02c", 1.3, "5,4");
    plot.markers({s.base}, "#000000", 3.0);
    plot.label(0.72, 0.10, "cycle", "#1f77b4");
    plot.label(0.72, 0.135, "orbit eps=" + fmt(rung->row.eps), "#d62728");
    plot.label(0.72, 0.17, "section", "#2ca02c");
  } else {
    plot.label(0.72, 0.10, "cycle", "#1f77b4");
  }
  return plot.render();
}

std::string ladder_svg(const std::vector<LadderRow>& rows) {
  double ylo = 1e300, yhi = -1e300;
  std::vector<Vec2> ratio, resid, dmag;
  for (const auto& r : rows) {
    ratio.push_back({r.eps, r.sup_ratio});
    resid.push_back({r.eps, r.sup_residual});
    dmag.push_back({r.eps, std::abs(r.delta)});
    for (double v : {r.sup_ratio, r.sup_residual, std::abs(r.delta)}) {
      if (v > 0.0) {
        ylo = std::min(ylo, v);
        yhi = std::max(yhi, v);
      }
    }
  }
  SvgPlot plot(640, 520, "ladder metrics");
  plot.set_range(rows.back().eps * 0.8, rows.front().eps * 1.25, ylo * 0.5, yhi * 2.0, true, true);
  plot.axes("eps", "value");
  plot.polyline(ratio, "#1f77b4", 1.5);
  plot.markers(ratio, "#1f77b4", 3.0);
  plot.polyline(resid, "#d62728", 1.5);
  plot.markers(resid, "#d62728", 3.0);
  plot.polyline(dmag, "#2ca02c", 1.5);
  plot.markers(dmag, "#2ca02c", 3.0);
  plot.label(0.70, 0.10, "sup ratio", "#1f77b4");
  plot.label(0.70, 0.135, "sup residual", "#d62728");
  plot.label(0.70, 0.17, "|delta|", "#2ca02c");
  return plot.render();
}

}  // namespace

// ---- public API ------------------------------------------------------------

void logline(const std::string& msg) {
  static const bool on = [] {
    const char* e = std::getenv("CYCLEPERTURB_LOG");
    return e != nullptr && *e != '\0' && std::string(e) != "0";
  }();
  if (on) std::fprintf(stderr, "[cycleperturb] %s\n", msg.c_str());
}

VerifyReport run_verify(const ExperimentConfig& cfg) {
  VerifyReport rep;
  rep.config_hash = config_hash(cfg);
  rep.version = kToolVersion;
  const Pipeline P = build_pipeline(cfg);
  rep.nondegenerate = P.nondegenerate;
  if (!P.nondegenerate) {
    rep.verdicts.push_back(skipped("structural_invariants", "degenerate cycle"));
    rep.verdicts.push_back(nondegeneracy_check(P));
    for (const char* name : {"theorem1_ratio", "section_roots", "inclusion_residual",
                             "selection_oracle", "symmetric_cross_check", "invariances"})
      rep.verdicts.push_back(skipped(name, "degenerate cycle"));
    rep.all_pass = true;
    for (const auto& v : rep.verdicts)
      if (v.status == "fail") rep.all_pass = false;
    return rep;
  }
  std::vector<RungResult> rungs;
  const bool have_phase = !P.melnikov_zeros.empty();
  if (have_phase) rungs = run_ladder(P);
  rep.rows.reserve(rungs.size());
  for (const auto& r : rungs) rep.rows.push_back(r.row);

  rep.verdicts.push_back(stage("structural-check", [&] { return structural_check(P); }));
  rep.verdicts.push_back(stage("monodromy", [&] { return nondegeneracy_check(P); }));
  if (have_phase) {
    rep.verdicts.push_back(theorem1_check(rep.rows));
    rep.verdicts.push_back(section_check(rep.rows));
    rep.verdicts.push_back(inclusion_check(P, rep.rows));
  } else {
    const std::string why = "no sign change of the Melnikov interval";
    rep.verdicts.push_back(skipped("theorem1_ratio", why));
    rep.verdicts.push_back(skipped("section_roots", why));
    rep.verdicts.push_back(skipped("inclusion_residual", why));
  }
  rep.verdicts.push_back(stage("selection-oracle", [&] { return oracle_check(P); }));
  rep.verdicts.push_back(stage("symmetric-check", [&] { return symmetric_check(P); }));
  rep.verdicts.push_back(stage("invariance-check", [&] { return invariance_check(P, rungs); }));

  rep.all_pass = true;
  for (const auto& v : rep.verdicts)
    if (v.status == "fail") rep.all_pass = false;
  return rep;
}

std::string report_to_json(const VerifyReport& rep) {
  json j;
  j["version"] = rep.version;
  j["config_hash"] = rep.config_hash;
  j["nondegenerate"] = rep.nondegenerate;
  j["all_pass"] = rep.all_pass;
  j["verdicts"] = json::array();
  for (const auto& v : rep.verdicts)
    j["verdicts"].push_back(
        {{"name", v.name}, {"status", v.status}, {"witness", v.witness}, {"detail", v.detail}});
  j["ladder"] = json::array();
  for (const auto& r : rep.rows) j["ladder"].push_back(row_json(r));
  return j.dump(2) + "\n";
}

std::string ladder_csv(const std::vector<LadderRow>& rows) {
  std::string out = "eps,sup_ratio,sup_residual,delta,v\n";
  for (const auto& r : rows)
    out += fmt17(r.eps) + "," + fmt17(r.sup_ratio) + "," + fmt17(r.sup_residual) + "," +
           fmt17(r.delta) + "," + fmt17(r.v) + "\n";
  return out;
}

int cmd_cycle(const ExperimentConfig& cfg) {
  const Pipeline P = build_pipeline(cfg);
  json j = provenance_json(cfg);
  j["system"] = cfg.system_id;
  j["period"] = P.cyc0.period;
  j["base_point"] = {P.cyc0.base_point.x, P.cyc0.base_point.y};
  j["diameter"] = P.cyc0.diameter();
  if (P.cyc0.has_energy) j["energy"] = P.cyc0.energy;
  j["nondegenerate"] = P.nondegenerate;
  j["monodromy"] = {
      {"b", P.mono.b},
      {"off_shear_residual", P.mono.off_shear_residual},
      {"dist_from_identity", (P.mono.XT - Mat2::identity()).norm()},
      {"multipliers",
       {{P.mono.multipliers[0].real(), P.mono.multipliers[0].imag()},
        {P.mono.multipliers[1].real(), P.mono.multipliers[1].imag()}}}};
  if (P.nondegenerate) {
    j["theta0"] = P.theta0;
    j["melnikov_sign_changes"] = P.melnikov_zeros;
    j["gamma"] = P.basisR.gamma;
    j["t_star"] = P.basisR.t_star;
    j["wronskian"] = P.basisR.wronskian;
  }
  write_file(fs::path(cfg.output_dir) / "cycle.json", j.dump(2) + "\n");
  return 0;
}

int cmd_analyze(const ExperimentConfig& cfg, double eps_override) {
  double eps = eps_override;
  if (!(eps > 0.0)) {
    if (cfg.ladder.empty())
      throw ConfigError("analyze: no epsilon given (--eps) and the ladder is empty");
    eps = cfg.ladder.front();
  }
  const Pipeline P = build_pipeline(cfg);
  if (!P.nondegenerate)
    throw DegenerateCycle("analyze: the cycle is degenerate; only `cycle` and `verify` apply");
  const RungResult r = stage("orbit", [&] { return analyze_rung(P, eps); });
  json j = provenance_json(cfg);
  j["theta0"] = P.theta0;
  j["gamma"] = P.basisR.gamma;
  j["period"] = P.pert.period;
  j["row"] = row_json(r.row);
  write_file(fs::path(cfg.output_dir) / "analyze.json", j.dump(2) + "\n");
  std::string csv = "t,x1,x2\n";
  const int n = 2048;
  for (int i = 0; i < n; ++i) {
    const double t = P.pert.period * i / (n - 1);
    const Vec2 x = r.orbit.eval(t);
    csv += fmt17(t) + "," + fmt17(x.x) + "," + fmt17(x.y) + "\n";
  }
  write_file(fs::path(cfg.output_dir) / "orbit.csv", csv);
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const Pipeline P = build_pipeline(cfg);
  if (!P.nondegenerate)
    throw DegenerateCycle("sweep: the cycle is degenerate; only `cycle` and `verify` apply");
  if (P.melnikov_zeros.empty())
    throw NoTransversalZero("sweep: no sign change of the Melnikov interval");
  const std::vector<RungResult> rungs = run_ladder(P);
  std::vector<LadderRow> rows;
  rows.reserve(rungs.size());
  for (const auto& r : rungs) rows.push_back(r.row);
  json j = provenance_json(cfg);
  j["theta0"] = P.theta0;
  j["gamma"] = P.basisR.gamma;
  j["ladder"] = json::array();
  for (const auto& r : rows) j["ladder"].push_back(row_json(r));
  write_file(fs::path(cfg.output_dir) / "sweep.json", j.dump(2) + "\n");
  write_file(fs::path(cfg.output_dir) / "ladder.csv", ladder_csv(rows));
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyReport rep = run_verify(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  logline("verify wall time " + fmt(wall) + "s");
  write_file(fs::path(cfg.output_dir) / "report.json", report_to_json(rep));
  if (!rep.rows.empty())
    write_file(fs::path(cfg.output_dir) / "ladder.csv", ladder_csv(rep.rows));
  for (const auto& v : rep.verdicts) {
    const char* tag = v.status == "pass" ? "PASS" : (v.status == "fail" ? "FAIL" : "SKIP");
    std::printf("%s %-22s witness=%-12s %s\n", tag, v.name.c_str(), fmt(v.witness).c_str(),
                v.detail.c_str());
  }
  std::printf("%s: %zu checks, config %s\n", rep.all_pass ? "OK" : "FAILED",
              rep.verdicts.size(), rep.config_hash.c_str());
  return rep.all_pass ? 0 : 1;
}

int cmd_plot(const ExperimentConfig& cfg) {
  const Pipeline P = build_pipeline(cfg);
  if (!P.nondegenerate) {
    write_file(fs::path(cfg.output_dir) / "phase.svg", phase_svg(P, nullptr));
    return 0;
  }
  std::vector<RungResult> rungs;
  if (!P.melnikov_zeros.empty() && !cfg.ladder.empty()) rungs = run_ladder(P);
  write_file(fs::path(cfg.output_dir) / "phase.svg",
             phase_svg(P, rungs.empty() ? nullptr : &rungs.front()));
  if (!rungs.empty()) {
    std::vector<LadderRow> rows;
    for (const auto& r : rungs) rows.push_back(r.row);
    write_file(fs::path(cfg.output_dir) / "ladder.svg", ladder_svg(rows));
  }
  return 0;
}

}  // namespace cycleperturb
