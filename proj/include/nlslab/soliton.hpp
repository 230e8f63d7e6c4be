#pragma once
// soliton.hpp — ground-state profiles of the stationary equation
//
//     Laplacian(phi) - omega phi + f(phi^2) phi = 0,  phi > 0 radial,
//
// solved in two stages: (1) shooting on the amplitude a = phi(0) of the
// radial ODE  phi'' + (N-1)/r phi' = omega phi - g(phi), with bisection
// between "crosses zero" (amplitude too high) and "turns back up /
// diverges" (too low); (2) a damped Newton iteration on the discrete
// boundary-value problem on the target grid, started from the shooting
// trajectory. The Newton Jacobian is the tridiagonal matrix
// A - omega + diag(g'(phi)) = -L+, so the linearized operator comes for
// free and kernel relations (L- phi = 0, L+ d_omega phi = -phi) hold to
// solver precision.
//
// Branch bookkeeping: omega-derivatives by direct L+ solve (cross-checked
// against centered differences), the slope <d_omega phi, phi> that decides
// orbital stability, and tail/scaling diagnostics.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"
#include "nlslab/tridiag.hpp"

namespace nlslab {

struct NoGroundState : Error {
  explicit NoGroundState(const std::string& m) : Error("no_ground_state", m) {}
};
struct NoConvergence : Error {
  explicit NoConvergence(const std::string& m) : Error("no_convergence", m) {}
};

struct SolitonProfile {
  double omega = 0.0;
  RealField phi;   // nodal values, positive, decreasing
  double phi0 = 0.0;     // shooting amplitude phi(0)
  double residual = 0.0; // sup norm of the discrete equation residual
};

namespace detail {

// Existence precondition: G(u) > (omega/2) u^2 for some u > 0, scanned on a
// log grid. Focusing pure powers always pass; defocusing models fail.
inline bool existence_scan(const NonlinearityModel& model, double omega) {
  for (int k = 0; k <= 2400; ++k) {
    const double u = std::pow(10.0, -4.0 + 8.0 * k / 2400.0);
    if (model.G(u) > 0.5 * omega * u * u) return true;
  }
  return false;
}

// Radial ODE right-hand side for y = (phi, phi').
struct ShootTraj {
  std::vector<double> r, phi;
};

// RK4 integration from r0 ~ 0 with the series start phi ~ a + c2 r^2,
// c2 = (omega a - g(a)) / (2N).
//
// Classification relies on the particle analogy phi'' = -V'(phi) - friction
// with V(u) = G(u) - (omega/2) u^2. Inside the energy window {V > 0} (see
// shoot_amplitude) friction keeps non-escaping trajectories below their
// initial amplitude, so:
//   -1 (high): phi crossed zero, or grew past 1.05 a (rolled outward over
//              the potential hump -- the blow-up side of two-term models)
//   +1 (low) : phi turned upward while positive after descending
inline int shoot_once(const NonlinearityModel& model, double omega, double a,
                      double rmax, double dr, ShootTraj* traj = nullptr) {
  const int N = model.N();
  auto rhs = [&](double r, double p, double q, double& dp, double& dq) {
    dp = q;
    dq = omega * p - model.g(p) - (N - 1) / r * q;
  };
  double r = 1e-6;
  const double c2 = (omega * a - model.g(a)) / (2.0 * N);
  double p = a + c2 * r * r, q = 2.0 * c2 * r;
  bool descended = false;
  if (traj) {
    traj->r.clear();
    traj->phi.clear();
    traj->r.push_back(r);
    traj->phi.push_back(p);
  }
  double k1p, k1q, k2p, k2q, k3p, k3q, k4p, k4q;
  while (r < rmax) {
    rhs(r, p, q, k1p, k1q);
    rhs(r + 0.5 * dr, p + 0.5 * dr * k1p, q + 0.5 * dr * k1q, k2p, k2q);
    rhs(r + 0.5 * dr, p + 0.5 * dr * k2p, q + 0.5 * dr * k2q, k3p, k3q);
    rhs(r + dr, p + dr * k3p, q + dr * k3q, k4p, k4q);
    p += dr / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    q += dr / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    r += dr;
    if (traj) {
      traj->r.push_back(r);
      traj->phi.push_back(p);
    }
    if (p < 0.0) return -1;
    if (p > 1.05 * a) return -1;
    if (p < 0.7 * a) descended = true;
    if (descended && q > 0.0 && r > 10.0 * dr) return +1;
  }
  return (p > 1e-8 * a) ? +1 : -1;
}

inline double shoot_amplitude(const NonlinearityModel& model, double omega,
                              double rmax, double dr) {
  // Energy window: the amplitudes with V(a) = G(a) - (omega/2) a^2 > 0,
  // bounded by the roots of psi(a) = 2 G(a)/a^2 - omega on the existence-scan
  // grid. Only window amplitudes can land at phi = 0+; below it trajectories
  // oscillate into the potential well, above it (two-term models) they roll
  // outward immediately. Restricting the bracket search to the window makes
  // the +-1 classification of shoot_once monotone in a.
  auto psi = [&](double a) { return 2.0 * model.G(a) / (a * a) - omega; };
  double win_lo = 0.0, win_hi = std::numeric_limits<double>::infinity();
  double prev = 1e-4, prev_psi = psi(prev);
  for (int k = 1; k <= 2400; ++k) {
    const double u = std::pow(10.0, -4.0 + 8.0 * k / 2400.0);
    const double pu = psi(u);
    if (win_lo == 0.0 && prev_psi <= 0.0 && pu > 0.0) {
      double lo = prev, hi = u;  // psi(lo) <= 0 < psi(hi)
      for (int i = 0; i < 90; ++i) {
        const double mid = 0.5 * (lo + hi);
        (psi(mid) > 0.0 ? hi : lo) = mid;
      }
      win_lo = hi;  // just inside the window
    } else if (win_lo > 0.0 && prev_psi > 0.0 && pu <= 0.0) {
      double lo = prev, hi = u;  // psi(lo) > 0 >= psi(hi)
      for (int i = 0; i < 90; ++i) {
        const double mid = 0.5 * (lo + hi);
        (psi(mid) > 0.0 ? lo : hi) = mid;
      }
      win_hi = lo;  // just inside the window
      break;
    }
    prev = u;
    prev_psi = pu;
  }
  if (win_lo == 0.0)
    throw NoGroundState("no amplitude satisfies G(u) > (omega/2) u^2");

  // N = 1 has no friction term: the first integral (phi')^2 = omega phi^2 -
  // 2 G(phi) pins the central amplitude exactly at the window floor.
  if (model.N() == 1) return win_lo;

  const double margin = 1e-9;
  auto clip = [&](double x) {
    x = std::max(x, win_lo * (1.0 + margin));
    if (std::isfinite(win_hi)) x = std::min(x, win_hi * (1.0 - margin));
    return x;
  };
  // Seed from the 1D sech amplitude (omega (m+1)/2)^{1/(m-1)} for the
  // dominant exponent, clipped into the window.
  const double m = model.m1();
  const double a0 =
      clip(std::pow(omega * (m + 1.0) / 2.0, 1.0 / (m - 1.0)));
  double lo = 0.0, hi = 0.0;
  double x = a0;
  for (int k = 0; k < 300; ++k) {
    if (shoot_once(model, omega, x, rmax, dr) > 0) {
      lo = x;
      break;
    }
    if (x <= win_lo * (1.0 + 2.0 * margin)) break;
    x = clip(win_lo + 0.7 * (x - win_lo));
  }
  if (lo == 0.0)
    throw NoConvergence("shooting: no under-shoot amplitude in the window");
  x = clip(std::max(a0, lo * (1.0 + 1e-7)));
  for (int k = 0; k < 300; ++k) {
    if (shoot_once(model, omega, x, rmax, dr) < 0) {
      hi = x;
      break;
    }
    if (std::isfinite(win_hi)) {
      if (x >= win_hi * (1.0 - 2.0 * margin)) break;
      x = clip(win_hi - 0.7 * (win_hi - x));
    } else {
      x *= 1.25;
    }
  }
  if (hi == 0.0) throw NoConvergence("shooting: no over-shoot amplitude found");
  for (int k = 0; k < 110 && (hi - lo) > 1e-15 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (shoot_once(model, omega, mid, rmax, dr) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace detail

// Damped Newton iteration on the discrete BVP  A phi - omega phi + g(phi) = 0
// from a given starting profile. Returns the sup-norm residual.
inline double soliton_newton(const NonlinearityModel& model, double omega,
                             const RadialGrid& grid, RealField& phi,
                             double tol = 1e-11, int max_iter = 100) {
  const int M = grid.M();
  auto resid = [&](const RealField& p) -> RealField {
    RealField F = grid.lap(p) - omega * p;
    for (int j = 0; j < M; ++j) F[j] += model.g(p[j]);
    return F;
  };
  RealField F = resid(phi);
  for (int it = 0; it < max_iter; ++it) {
    // Jacobian rows: lap + diag(-omega + g'(phi)).
    RealField dia = grid.lap_dia();
    for (int j = 0; j < M; ++j)
      dia[j] += -omega + model.dg_real(phi[j]);
    RealField step =
        tridiag_solve<double>(grid.lap_sub(), dia, grid.lap_sup(), RealField(-F));
    const double n0 = F.abs().maxCoeff();
    double lam = 1.0;
    RealField cand, Fc;
    while (lam > 1e-8) {
      cand = phi + lam * step;
      Fc = resid(cand);
      if (Fc.abs().maxCoeff() < n0) break;
      lam *= 0.5;
    }
    phi = cand;
    F = Fc;
    if ((lam * step).abs().maxCoeff() <
        tol * std::max(1.0, phi.abs().maxCoeff()))
      break;
  }
  return F.abs().maxCoeff();
}

// Full solve: existence scan -> shooting -> Newton refinement.
inline SolitonProfile solve_profile(const NonlinearityModel& model,
                                    double omega, const RadialGrid& grid,
                                    double tol = 1e-10) {
  if (!(omega > 0.0)) throw NoGroundState("existence requires omega > 0");
  if (!detail::existence_scan(model, omega))
    throw NoGroundState("existence scan failed: G(u) <= (omega/2) u^2 "
                        "for all scanned amplitudes");
  const double rmax =
      std::min(grid.R() + grid.h(), 30.0 / std::sqrt(omega));
  const double dr = std::min(1e-3 / std::sqrt(omega), 0.5 * grid.h());
  const double amp = detail::shoot_amplitude(model, omega, rmax, dr);

  // Sample the bisected trajectory onto the grid; where it has left the
  // monotone-decay regime, extend with the exponential tail e^{-sqrt(omega) r}.
  detail::ShootTraj traj;
  detail::shoot_once(model, omega, amp, rmax, dr, &traj);
  double rlim = traj.r.back();
  for (size_t k = 0; k < traj.r.size(); ++k)
    if (traj.phi[k] <= 0.0) {
      rlim = traj.r[k];
      break;
    }
  const int M = grid.M();
  RealField phi(M);
  for (int j = 0; j < M; ++j) {
    const double r = grid.r()[j];
    if (r <= traj.r.front()) {
      phi[j] = traj.phi.front();
    } else if (r < traj.r.back()) {
      const auto it =
          std::lower_bound(traj.r.begin(), traj.r.end(), r);
      const size_t k = it - traj.r.begin();
      const double t = (r - traj.r[k - 1]) / (traj.r[k] - traj.r[k - 1]);
      phi[j] = traj.phi[k - 1] * (1.0 - t) + traj.phi[k] * t;
    } else {
      phi[j] = 0.0;
    }
  }
  int i0 = 1;
  while (i0 < M && grid.r()[i0] <= rlim - 0.5) ++i0;
  const double sq = std::sqrt(omega);
  for (int j = i0; j < M; ++j)
    phi[j] = phi[i0 - 1] * std::exp(-sq * (grid.r()[j] - grid.r()[i0 - 1]));
  for (int j = 0; j < M; ++j) phi[j] = std::max(phi[j], 0.0);

  SolitonProfile prof;
  prof.omega = omega;
  prof.residual = soliton_newton(model, omega, grid, phi, 1e-12);
  prof.phi = phi;
  prof.phi0 = amp;
  // Round-off floor of the defect evaluation: eps times the operator row
  // magnitude (dominated by 1/h^2) times the field amplitude. On fine grids
  // this sits above any fixed tolerance.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                       grid.lap_dia().abs().maxCoeff() *
                       std::max(1.0, phi.abs().maxCoeff());
  if (!(prof.residual <= std::max(tol, floor)))
    throw NoConvergence("profile Newton stalled at residual " +
                        std::to_string(prof.residual));
  return prof;
}

// ---------------------------------------------------------------------------
// Branch data at one omega: profile, d_omega phi (L+ solve), d2_omega phi
// (centered difference of profiles), slope <d_omega phi, phi>.
// ---------------------------------------------------------------------------
struct BranchPoint {
  SolitonProfile profile;
  RealField dphi;   // d_omega phi, from the L+ solve
  RealField d2phi;  // centered second difference
  double slope = 0.0;
};

enum class Stability { Stable, Unstable, Degenerate };

inline Stability stability_classification(double slope, double phi_l2sq,
                                          double tol = 1e-3) {
  if (std::abs(slope) < tol * phi_l2sq) return Stability::Degenerate;
  return slope > 0.0 ? Stability::Stable : Stability::Unstable;
}

class SolitonBranch {
public:
  SolitonBranch(NonlinearityModel model, const RadialGrid& grid,
                double omega_lo, double omega_hi, double h_omega_rel = 1e-3)
      : model_(std::move(model)), grid_(grid), lo_(omega_lo), hi_(omega_hi),
        h_omega_rel_(h_omega_rel) {
    if (!(0.0 < lo_ && lo_ < hi_))
      throw DomainError("branch interval must satisfy 0 < omega_lo < omega_hi");
  }

  const NonlinearityModel& model() const { return model_; }
  const RadialGrid& grid() const { return grid_; }
  double omega_lo() const { return lo_; }
  double omega_hi() const { return hi_; }
  bool contains(double omega) const { return lo_ <= omega && omega <= hi_; }

  // Profile at omega, warm-started from the nearest cached branch point.
  // Cache writes are exclusive; reads are made under the same lock (cheap
  // compared to the solves).
  const BranchPoint& at(double omega) {
    if (!contains(omega))
      throw DomainError("omega outside the branch interval");
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(omega);
    if (it != cache_.end()) return *it->second;
    auto bp = std::make_unique<BranchPoint>(compute_locked(omega));
    auto* raw = bp.get();
    cache_.emplace(omega, std::move(bp));
    return *raw;
  }

  // Starting guess for refine(): the phi of the nearest cached branch point,
  // or a cold solve at omega if the cache is empty.
  RealField at_nearest(double omega) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (!cache_.empty()) {
        auto it = cache_.lower_bound(omega);
        if (it == cache_.end()) return std::prev(it)->second->profile.phi;
        if (it == cache_.begin()) return it->second->profile.phi;
        auto prev = std::prev(it);
        return (omega - prev->first < it->first - omega)
                   ? prev->second->profile.phi
                   : it->second->profile.phi;
      }
    }
    return at(omega).profile.phi;
  }

  // Solve at omega warm-started from a given profile (no caching); used by
  // trackers that sweep omega continuously.
  SolitonProfile refine(double omega, RealField phi_start) const {
    SolitonProfile prof;
    prof.omega = omega;
    prof.residual = soliton_newton(model_, omega, grid_, phi_start, 1e-12);
    prof.phi = phi_start;
    prof.phi0 = phi_start[0];
    if (!(prof.residual <= 1e-8))
      throw NoConvergence("warm profile solve stalled");
    return prof;
  }

  // d_omega phi by direct solve of L+ x = -phi for a given profile.
  RealField dphi_of(const SolitonProfile& prof) const {
    const int M = grid_.M();
    // L+ = -lap + omega - dg_real(phi): rows negated from the Newton matrix.
    RealField dia = -grid_.lap_dia();
    for (int j = 0; j < M; ++j)
      dia[j] += prof.omega - model_.dg_real(prof.phi[j]);
    return tridiag_solve<double>(RealField(-grid_.lap_sub()), dia,
                                 RealField(-grid_.lap_sup()),
                                 RealField(-prof.phi));
  }

private:
  BranchPoint compute_locked(double omega) const {
    BranchPoint bp;
    bool warm = false;
    if (!cache_.empty()) {
      // Try a warm Newton from the nearest cached neighbour first.
      auto it = cache_.lower_bound(omega);
      if (it == cache_.end()) --it;
      else if (it != cache_.begin() &&
               omega - std::prev(it)->first < it->first - omega)
        --it;
      if (std::abs(it->first - omega) < 0.25 * omega) {
        RealField phi = it->second->profile.phi;
        try {
          const double res = soliton_newton(model_, omega, grid_, phi, 1e-12);
          if (res <= 1e-8 && phi.maxCoeff() > 0.0) {
            bp.profile = SolitonProfile{omega, phi, phi[0], res};
            warm = true;
          }
        } catch (const Error&) {
        }
      }
    }
    if (!warm) bp.profile = solve_profile(model_, omega, grid_);
    bp.dphi = dphi_of(bp.profile);
    // Cross-validate the solve against a centered difference, and build
    // d2phi from the same neighbours.
    const double d = h_omega_rel_ * omega;
    RealField pp = bp.profile.phi, pm = bp.profile.phi;
    soliton_newton(model_, omega + d, grid_, pp, 1e-12);
    soliton_newton(model_, omega - d, grid_, pm, 1e-12);
    const RealField fd = (pp - pm) / (2.0 * d);
    const double rel =
        std::sqrt(grid_.inner(RealField(fd - bp.dphi), RealField(fd - bp.dphi)) /
                  std::max(1e-300, grid_.inner(bp.dphi, bp.dphi)));
    if (rel > std::max(1e-4, 10.0 * d * d))
      throw SolveFailure("d_omega phi cross-validation failed: rel diff " +
                         std::to_string(rel));
    bp.d2phi = (pp - 2.0 * bp.profile.phi + pm) / (d * d);
    bp.slope = grid_.inner(bp.dphi, bp.profile.phi);
    return bp;
  }

  NonlinearityModel model_;
  const RadialGrid& grid_;
  double lo_, hi_, h_omega_rel_;
  std::mutex mu_;
  std::map<double, std::unique_ptr<BranchPoint>> cache_;
};

// Tail diagnostic: least-squares slope of log(phi) over the window
// [0.55 R, 0.80 R] (inside the wall's influence zone), expected near
// -sqrt(omega) for exponentially decaying profiles.
inline double tail_log_slope(const RadialGrid& grid, const RealField& phi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() *
                       phi.abs().maxCoeff();
  for (int j = 0; j < grid.M(); ++j) {
    const double r = grid.r()[j];
    if (r < 0.55 * grid.R() || r > 0.80 * grid.R()) continue;
    if (phi[j] <= floor) continue;
    const double y = std::log(phi[j]);
    sx += r;
    sy += y;
    sxx += r * r;
    sxy += r * y;
    ++n;
  }
  if (n < 4) throw SolveFailure("tail window has too few usable nodes");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace nlslab
