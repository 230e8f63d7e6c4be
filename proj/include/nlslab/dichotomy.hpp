#pragma once
// dichotomy.hpp — the convergence/escape experiment around an unstable
// soliton. A perturbed soliton
//
//     u(0) = ( phi_omega0 + c+ Y+ + c- Y- + c_cont Pc(chi, 0) ) e^{i theta0},
//
// rescaled so the perturbation has size alpha in H^1 cap L^1, is evolved and
// tracked through the modulation decomposition. The run is classified as
//
//   Escaped    — the windowed distance  inf_{omega in I, theta}
//                ||u - phi_omega e^{i theta}||_{L^2(r < R0)}  reaches 2 alpha0,
//   Converged  — the horizon is reached, |b+(t)| <= alpha <t>^{-1} throughout
//                (<t> = sqrt(1+t^2)), and the fitted decay exponent of
//                ||eta||_{L^p} over the second half is <= -mu/2,
//   Undecided  — anything else at the horizon.
//
// For escaped runs the exponential growth rate of b+ is fitted over
// [T_crit, first |b+| >= alpha0] and compared against e+(omega(T_crit)), and
// the exit time is checked against
//
//     T_exit <= T_crit + (5 / (4 e2)) log( 3 alpha0 <T_crit> / alpha ).

#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nlslab/evolution.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"
#include "nlslab/modulation.hpp"
#include "nlslab/soliton.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

struct UnachievableAlpha : Error {
  explicit UnachievableAlpha(const std::string& m)
      : Error("unachievable_alpha", m) {}
};

struct ExperimentConfig {
  // Discretization.
  double R = 24.0;
  int M = 768;
  // Branch.
  double omega0 = 1.0;
  double theta0 = 0.0;
  double omega_lo = 0.5;
  double omega_hi = 1.5;
  // Perturbation: coefficients of Y+, Y-, and Pc(bump, 0).
  double c_plus = 0.0;
  double c_minus = 0.0;
  double c_cont = 0.0;
  double bump_center = 5.0;
  double bump_width = 2.0;
  double alpha_target = 0.0; // > 0: rescale the perturbation to this size
  // Classification scales.
  double alpha0 = 1e-2;
  double R0 = 10.0;
  // Time stepping.
  double dt = 1e-3;
  double t_max = 20.0;
  double obs_stride_t = 0.05;
  SpongeConfig sponge;
  double guard_factor = 1e3;
  double fp_tol = 1e-12;
};

enum class Classification { Converged, Escaped, Undecided };

inline const char* to_string(Classification c) {
  switch (c) {
  case Classification::Converged: return "converged";
  case Classification::Escaped: return "escaped";
  default: return "undecided";
  }
}

struct TrackRow {
  double t = 0.0, theta = 0.0, omega = 0.0;
  double b_plus = 0.0, b_minus = 0.0;
  double eta_l2 = 0.0, eta_lp = 0.0, eta_lq = 0.0;
  double dloc = 0.0;
  double orth_max = 0.0;
  int newton_iters = 0;
  bool tracked = true;
};

struct RunOutcome {
  Classification cls = Classification::Undecided;
  double alpha = 0.0;
  double alpha0 = 0.0;
  double t_crit = std::numeric_limits<double>::quiet_NaN();
  double t_exit = std::numeric_limits<double>::quiet_NaN();
  double omega_at_crit = 0.0;
  double e2 = 0.0; // e+ at omega(T_crit)
  double growth_rate = std::numeric_limits<double>::quiet_NaN();
  bool growth_in_window = false;
  double exit_bound = std::numeric_limits<double>::quiet_NaN();
  bool exit_within_bound = false;
  double b_plus_at_exit = std::numeric_limits<double>::quiet_NaN();
  double decay_exponent = std::numeric_limits<double>::quiet_NaN();
  double mu_half = 0.0;
  bool tracker_lost = false;
  double t_lost = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct WindowTooShort : Error {
  explicit WindowTooShort(const std::string& m) : Error("window_too_short", m) {}
};

// Least-squares slope of log|y| against t over [t0, t1]; requires >= 5
// samples and a decade of variation.
inline double growth_fit(const std::vector<double>& t,
                         const std::vector<double>& y, double t0, double t1) {
  std::vector<double> xs, ys;
  for (size_t k = 0; k < t.size(); ++k)
    if (t[k] >= t0 && t[k] <= t1 && std::abs(y[k]) > 0.0) {
      xs.push_back(t[k]);
      ys.push_back(std::log(std::abs(y[k])));
    }
  if (xs.size() < 5)
    throw WindowTooShort("growth fit needs at least 5 samples");
  const double span = *std::max_element(ys.begin(), ys.end()) -
                      *std::min_element(ys.begin(), ys.end());
  if (span < std::log(10.0))
    throw WindowTooShort("growth fit needs a decade of variation");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Log-log least-squares exponent of y against t over [t0, t1].
inline double decay_fit(const std::vector<double>& t,
                        const std::vector<double>& y, double t0, double t1) {
  std::vector<double> xs, ys;
  for (size_t k = 0; k < t.size(); ++k)
    if (t[k] >= t0 && t[k] <= t1 && y[k] > 0.0 && t[k] > 0.0) {
      xs.push_back(std::log(t[k]));
      ys.push_back(std::log(y[k]));
    }
  if (xs.size() < 5) throw WindowTooShort("decay fit needs at least 5 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Exit-time bound from the growth mechanism.
inline double exit_time_bound(double t_crit, double e2, double alpha,
                              double alpha0) {
  const double bracket = std::sqrt(1.0 + t_crit * t_crit);
  return t_crit + 5.0 / (4.0 * e2) * std::log(3.0 * alpha0 * bracket / alpha);
}

namespace detail {

// Windowed tube distance min_{omega, theta} ||u - phi_omega e^{i theta}||
// over r < R0, Gauss-Newton-polished from a starting guess (optionally
// seeded by a coarse grid search over the branch interval and phases).
inline double tube_distance(const ComplexField& u, SolitonBranch& branch,
                            double R0, double& omega_io, double& theta_io,
                            bool grid_seed) {
  const RadialGrid& g = branch.grid();
  const int M = g.M();
  auto objective = [&](const RealField& phi, double th) {
    double s = 0.0;
    const complexd ph = std::exp(complexd(0.0, th));
    for (int j = 0; j < M && g.r()[j] < R0; ++j)
      s += g.w()[j] * std::norm(u[j] - phi[j] * ph);
    return std::sqrt(s);
  };

  double om = std::min(std::max(omega_io, branch.omega_lo()), branch.omega_hi());
  double th = theta_io;
  SolitonProfile prof = branch.refine(om, branch.at_nearest(om));
  double best = objective(prof.phi, th);

  if (grid_seed) {
    for (int a = 0; a < 5; ++a) {
      const double omg = branch.omega_lo() +
                         (a + 0.5) / 5.0 *
                             (branch.omega_hi() - branch.omega_lo());
      const RealField& phig = branch.at(omg).profile.phi;
      for (int b = 0; b < 8; ++b) {
        const double thg = 2.0 * M_PI * b / 8.0;
        const double val = objective(phig, thg);
        if (val < best) {
          best = val;
          om = omg;
          th = thg;
        }
      }
    }
    prof = branch.refine(om, branch.at_nearest(om));
  }

  // Gauss-Newton on (omega, theta) with step halving.
  for (int it = 0; it < 6; ++it) {
    const RealField dphi = branch.dphi_of(prof);
    const complexd ph = std::exp(complexd(0.0, th));
    // Normal equations for residual rho_j = u_j - phi_j e^{i th} with
    // columns  d rho/d omega = -dphi e^{i th},  d rho/d theta = -i phi e^{i th}.
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (int j = 0; j < M && g.r()[j] < R0; ++j) {
      const complexd rho = u[j] - prof.phi[j] * ph;
      const complexd c1 = -dphi[j] * ph;
      const complexd c2 = complexd(0.0, -prof.phi[j]) * ph;
      a11 += g.w()[j] * std::norm(c1);
      a12 += g.w()[j] * (c1.real() * c2.real() + c1.imag() * c2.imag());
      a22 += g.w()[j] * std::norm(c2);
      b1 -= g.w()[j] * (c1.real() * rho.real() + c1.imag() * rho.imag());
      b2 -= g.w()[j] * (c2.real() * rho.real() + c2.imag() * rho.imag());
    }
    const double det = a11 * a22 - a12 * a12;
    if (det <= 0.0 || !std::isfinite(det)) break;
    double dom = (a22 * b1 - a12 * b2) / det;
    double dth = (-a12 * b1 + a11 * b2) / det;
    bool improved = false;
    for (int h = 0; h < 8; ++h) {
      double omn = std::min(std::max(om + dom, branch.omega_lo()),
                            branch.omega_hi());
      double thn = th + dth;
      try {
        SolitonProfile pn = branch.refine(omn, prof.phi);
        const double val = objective(pn.phi, thn);
        if (val < best) {
          best = val;
          om = omn;
          th = thn;
          prof = pn;
          improved = true;
          break;
        }
      } catch (const Error&) {
      }
      dom *= 0.5;
      dth *= 0.5;
    }
    if (!improved) break;
  }
  omega_io = om;
  theta_io = th;
  return best;
}

} // namespace detail

// Initial data with the perturbation rescaled to the requested size
// alpha = max( ||pert||_{H^1}, ||pert||_{L^1} ).
struct PreparedData {
  ComplexField u0;
  double alpha = 0.0;
};

inline PreparedData prepare_data(const ExperimentConfig& cfg,
                                 const RadialGrid& g, const BranchPoint& bp,
                                 const DiscreteSpectrum* spec,
                                 const Projections& proj) {
  const int M = g.M();
  TwoField pert = TwoField::zero(M);
  if (cfg.c_plus != 0.0 || cfg.c_minus != 0.0) {
    if (!spec)
      throw DomainError("mode perturbation requested on a branch without a "
                        "real eigenvalue pair");
    for (int j = 0; j < M; ++j) {
      pert.c1[j] += (cfg.c_plus + cfg.c_minus) * spec->Y_re[j];
      pert.c2[j] += (cfg.c_plus - cfg.c_minus) * spec->Y_im[j];
    }
  }
  if (cfg.c_cont != 0.0) {
    RealField bump(M);
    for (int j = 0; j < M; ++j) {
      const double x = (g.r()[j] - cfg.bump_center) / cfg.bump_width;
      bump[j] = std::exp(-x * x);
    }
    TwoField pc = proj.pc(TwoField{bump, RealField::Zero(M)});
    pert.c1 += cfg.c_cont * pc.c1;
    pert.c2 += cfg.c_cont * pc.c2;
  }
  ComplexField pc = pert.to_complex();
  const double h1 = g.h1(pc);
  const double l1 = g.lr_norm(pc, 1.0);
  double alpha = std::max(h1, l1);
  if (cfg.alpha_target > 0.0) {
    if (alpha <= 0.0)
      throw UnachievableAlpha("zero perturbation cannot be rescaled to a "
                              "positive size");
    const double s = cfg.alpha_target / alpha;
    pc *= s;
    alpha = cfg.alpha_target;
  }
  PreparedData out;
  out.u0 = (bp.profile.phi.cast<complexd>() + pc) *
           std::exp(complexd(0.0, cfg.theta0));
  out.alpha = alpha;
  return out;
}

struct RunResult {
  RunOutcome outcome;
  std::vector<TrackRow> rows;
};

inline RunResult run_experiment(const NonlinearityModel& model,
                                const ExperimentConfig& cfg) {
  RunResult res;
  RadialGrid g(model.N(), cfg.R, cfg.M);
  SolitonBranch branch(model, g, cfg.omega_lo, cfg.omega_hi);
  const BranchPoint& bp0 = branch.at(cfg.omega0);

  // Point spectrum at omega0 (absent on stable branches).
  std::optional<DiscreteSpectrum> spec;
  {
    EigenpairResult er =
        unstable_eigenpair(model, bp0.profile, g, bp0.dphi);
    if (er.status == EigenpairStatus::Found) spec = er.spectrum;
  }
  Projections proj =
      spec ? Projections(g, bp0.profile.phi, bp0.dphi, bp0.slope, *spec)
           : Projections(g, bp0.profile.phi, bp0.dphi, bp0.slope);

  PreparedData prep = prepare_data(cfg, g, bp0, spec ? &*spec : nullptr, proj);
  const double alpha = prep.alpha;
  res.outcome.alpha = alpha;
  res.outcome.alpha0 = cfg.alpha0;

  // mu from the admissibility arithmetic; the L^p decay target is -mu/2.
  const double p = model.m2() + 1.0;
  double mu;
  double lq = 0.0;
  try {
    AdmissibilityReport rep =
        admissibility(model.N(), model.m1(), model.m2());
    mu = rep.admissible ? rep.mu : sigma_r(model.N(), p);
    if (rep.admissible) lq = rep.q;
  } catch (const Error&) {
    mu = sigma_r(model.N(), p);
  }
  res.outcome.mu_half = 0.5 * mu;

  DecomposeOptions dopts;
  dopts.keep_fields = false;
  dopts.lp_p = p;
  dopts.lq_q = lq;
  ModulationTracker tracker(branch, spec, model, dopts);
  tracker.seed(cfg.theta0, cfg.omega0);

  EvolveOptions eopts;
  eopts.dt = cfg.dt;
  eopts.t_end = cfg.t_max;
  eopts.fp_tol = cfg.fp_tol;
  eopts.guard_factor = cfg.guard_factor;
  eopts.sponge = cfg.sponge;
  eopts.observer_stride = std::max(1, int(std::lround(cfg.obs_stride_t / cfg.dt)));

  RunOutcome& oc = res.outcome;
  double dloc_om = cfg.omega0, dloc_th = cfg.theta0;
  bool exited = false;

  auto observer = [&](double t, const ComplexField& u) -> bool {
    TrackRow row;
    row.t = t;
    if (!oc.tracker_lost) {
      try {
        ModulationState st = tracker.feed(t, u);
        row.theta = st.theta;
        row.omega = st.omega;
        row.b_plus = st.b_plus;
        row.b_minus = st.b_minus;
        row.eta_l2 = st.eta_l2;
        row.eta_lp = st.eta_lp;
        row.eta_lq = st.eta_lq;
        row.newton_iters = st.newton_iters;
        for (double o : st.orth)
          row.orth_max = std::max(row.orth_max, std::abs(o));
        dloc_om = st.omega;
        dloc_th = st.theta;
        // First violation of the convergence envelope |b+| <= alpha <t>^-1.
        if (std::isnan(oc.t_crit) &&
            std::abs(st.b_plus) > alpha / std::sqrt(1.0 + t * t)) {
          oc.t_crit = t;
          oc.omega_at_crit = st.omega;
        }
      } catch (const Error& e) {
        oc.tracker_lost = true;
        oc.t_lost = t;
        oc.detail += std::string("tracker lost at t=") + std::to_string(t) +
                     " (" + e.type() + "); ";
        row.tracked = false;
      }
    } else {
      row.tracked = false;
    }
    row.dloc = detail::tube_distance(u, branch, cfg.R0, dloc_om, dloc_th,
                                     /*grid_seed=*/oc.tracker_lost);
    if (row.tracked) {
      row.omega = row.omega == 0.0 && t == 0.0 ? dloc_om : row.omega;
    } else {
      row.omega = dloc_om;
      row.theta = dloc_th;
    }
    res.rows.push_back(row);
    if (row.dloc >= 2.0 * cfg.alpha0) {
      oc.t_exit = t;
      oc.b_plus_at_exit = row.b_plus;
      exited = true;
      return false; // stop the run
    }
    return true;
  };

  evolve(model, g, prep.u0, eopts, observer);

  std::vector<double> ts, bps, etas;
  for (const TrackRow& r : res.rows) {
    ts.push_back(r.t);
    bps.push_back(r.b_plus);
    etas.push_back(r.eta_lp);
  }

  if (exited) {
    oc.cls = Classification::Escaped;
    // A run that exits without ever violating the envelope exits through
    // the continuum; T_crit defaults to the exit sample for the bound.
    const double tc = std::isnan(oc.t_crit) ? oc.t_exit : oc.t_crit;
    if (std::isnan(oc.t_crit)) oc.omega_at_crit = dloc_om;
    // e2 = e+ at omega(T_crit).
    if (spec) {
      const BranchPoint& bpc = branch.at(oc.omega_at_crit);
      DiscreteSpectrum sc = refine_eigenpair(model, bpc.profile, g, bpc.dphi,
                                             *spec);
      oc.e2 = sc.e_plus;
      oc.exit_bound = exit_time_bound(tc, oc.e2, alpha, cfg.alpha0);
      oc.exit_within_bound = oc.t_exit <= oc.exit_bound;
      try {
        double t_hit = oc.t_exit;
        for (size_t k = 0; k < ts.size(); ++k)
          if (std::abs(bps[k]) >= cfg.alpha0) {
            t_hit = ts[k];
            break;
          }
        oc.growth_rate = growth_fit(ts, bps, tc, t_hit);
        oc.growth_in_window =
            oc.growth_rate >= 0.8 * oc.e2 && oc.growth_rate <= 1.2 * oc.e2;
      } catch (const WindowTooShort& e) {
        oc.detail += std::string("growth fit: ") + e.what() + "; ";
      }
    }
    return res;
  }

  // Horizon reached.
  const bool envelope_ok = std::isnan(oc.t_crit) && !oc.tracker_lost;
  bool decay_ok = false;
  try {
    oc.decay_exponent = decay_fit(ts, etas, 0.5 * cfg.t_max, cfg.t_max);
    decay_ok = oc.decay_exponent <= -oc.mu_half;
  } catch (const WindowTooShort& e) {
    oc.detail += std::string("decay fit: ") + e.what() + "; ";
  }
  oc.cls = (envelope_ok && decay_ok) ? Classification::Converged
                                     : Classification::Undecided;
  return res;
}

// ---------------------------------------------------------------------------
// Sweep: run a list of configurations on a small thread pool; results are
// reported in configuration order regardless of scheduling.
// ---------------------------------------------------------------------------
struct SweepEntry {
  size_t index = 0;
  bool ok = false;
  RunOutcome outcome;
  std::string error;
};

inline std::vector<SweepEntry>
sweep(const NonlinearityModel& model, const std::vector<ExperimentConfig>& cfgs,
      int parallelism) {
  std::vector<SweepEntry> out(cfgs.size());
  std::atomic<size_t> next{0};
  const int nthreads =
      std::max(1, std::min<int>(parallelism, int(cfgs.size())));
  auto worker = [&]() {
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= cfgs.size()) return;
      out[k].index = k;
      try {
        RunResult rr = run_experiment(model, cfgs[k]);
        out[k].outcome = rr.outcome;
        out[k].ok = true;
      } catch (const Error& e) {
        out[k].error = std::string(e.type()) + ": " + e.what();
      } catch (const std::exception& e) {
        out[k].error = std::string("error: ") + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

} // namespace nlslab
