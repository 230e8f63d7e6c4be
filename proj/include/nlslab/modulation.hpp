#pragma once
// modulation.hpp — decomposition of a field near the soliton family,
//
//     u = e^{i theta} ( phi_omega + b+ Y+ + b- Y- + eta ),
//
// with (theta, omega) fixed by the orthogonality conditions
//
//     <eps_re, phi_omega> = 0,   <eps_im, d_omega phi_omega> = 0,
//     eps = u e^{-i theta} - phi_omega,
//
// (a Newton solve with warm-started profile re-solves), b+- read off by the
// symplectic pairings against J Y-+, and eta the spectrally continuous rest.
//
// Also: the nonlinear remainder N(eps) = g(phi+eps) - g(phi) - Dg(phi) eps
// with its envelope constant, and the finite-difference verification of the
// modulation ODEs. Writing v = (eps_re, eps_im), s = <d_omega phi, phi>,
// the semi-discrete flow obeys exactly (see the derivation in the tests):
//
//   omega_dot s       = omega_dot <eps1, d_omega phi>
//                       + (theta_dot - omega) <eps2, phi> - <N2, phi>
//   (theta_dot-omega)s = omega_dot <eps2, d2_omega phi>
//                       - (theta_dot - omega) <eps1, d_omega phi>
//                       + <N1, d_omega phi>
//   bpm_dot = +-e+ bpm -+ (1/n) [ (theta_dot-omega) <v, Y-+> - <N, Y-+>
//                                 + omega_dot <v, J d_omega Y-+> ]
//
// so the residuals of these identities, evaluated with centered differences
// in t, vanish at O(dt^2).

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"
#include "nlslab/soliton.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

struct NewtonDiverged : Error {
  explicit NewtonDiverged(const std::string& m) : Error("newton_diverged", m) {}
};
struct OutOfBranch : Error {
  double omega;
  explicit OutOfBranch(const std::string& m, double om)
      : Error("out_of_branch", m), omega(om) {}
};

struct ModulationState {
  double t = 0.0;
  double theta = 0.0;
  double omega = 0.0;
  double b_plus = 0.0;
  double b_minus = 0.0;
  double eta_l2 = 0.0;
  double eta_lp = 0.0;  // L^{m2+1}
  double eta_lq = 0.0;  // L^q from the admissibility arithmetic (if finite)
  double orth[4] = {0, 0, 0, 0}; // <eta1,phi>, <eta2,dphi>, <eta1,Yim>, <eta2,Yre>
  int newton_iters = 0;
  ComplexField eps;  // u e^{-i theta} - phi (kept only when requested)
  ComplexField eta;
};

struct DecomposeOptions {
  double tol = 1e-14;      // on |r1|+|r2| relative to max(1, |slope|)
  int max_iter = 25;
  double domega_cap = 0.1; // damping of the omega Newton step
  bool keep_fields = true;
  double lp_p = 4.0;       // exponent for eta_lp
  double lq_q = 0.0;       // exponent for eta_lq; <= 0 disables
};

// One modulation solve. `spec` may be null (stable branch: b+- = 0, eta = eps).
inline ModulationState decompose(const ComplexField& u, double t,
                                 double theta_guess, double omega_guess,
                                 SolitonBranch& branch,
                                 const DiscreteSpectrum* spec,
                                 const DecomposeOptions& opt = {}) {
  const RadialGrid& g = branch.grid();
  double th = theta_guess, om = omega_guess;
  if (!branch.contains(om))
    throw OutOfBranch("omega guess outside the branch interval", om);

  SolitonProfile prof = branch.refine(om, branch.at_nearest(om));
  RealField dphi = branch.dphi_of(prof);
  double slope = g.inner(dphi, prof.phi);

  ModulationState st;
  st.t = t;
  int it = 0;
  ComplexField eps(g.M());
  for (; it < opt.max_iter; ++it) {
    const complexd ph = std::exp(complexd(0.0, -th));
    eps = u * ph - prof.phi.cast<complexd>();
    const RealField e1 = eps.real(), e2 = eps.imag();
    const double r1 = g.inner(e1, prof.phi);
    const double r2 = -g.inner(e2, dphi);
    const double sc = std::max(1.0, std::abs(slope));
    if (std::abs(r1) / sc + std::abs(r2) / sc < opt.tol) break;

    const double J11 = g.inner(e2, prof.phi);
    const double J12 = -slope + g.inner(e1, dphi);
    const double J21 = slope + g.inner(e1, dphi);
    const double J22 = 0.0;
    const double det = J11 * J22 - J12 * J21;
    if (det == 0.0 || !std::isfinite(det))
      throw NewtonDiverged("singular modulation Jacobian");
    double dth = -(J22 * r1 - J12 * r2) / det;
    double dom = -(-J21 * r1 + J11 * r2) / det;
    if (std::abs(dom) > opt.domega_cap)
      dom = (dom > 0 ? 1.0 : -1.0) * opt.domega_cap;
    if (!std::isfinite(dth) || !std::isfinite(dom))
      throw NewtonDiverged("non-finite modulation Newton step");
    // The residuals bottom out at the accuracy of the warm profile
    // re-solves; once the Newton step is below that floor, stop.
    if (std::abs(dth) + std::abs(dom) < 1e-13 * std::max(1.0, std::abs(th) + om))
      break;
    th += dth;
    om += dom;
    if (!branch.contains(om))
      throw OutOfBranch("modulation Newton left the branch interval", om);
    prof = branch.refine(om, prof.phi);
    dphi = branch.dphi_of(prof);
    slope = g.inner(dphi, prof.phi);
  }
  if (it >= opt.max_iter)
    throw NewtonDiverged("modulation Newton did not converge");

  st.newton_iters = it;
  st.theta = th;
  st.omega = om;
  const RealField e1 = eps.real(), e2 = eps.imag();

  ComplexField eta = eps;
  if (spec) {
    const double n = spec->normalization;
    const double a = g.inner(e1, spec->Y_im);
    const double b = g.inner(e2, spec->Y_re);
    st.b_plus = (a + b) / n;
    st.b_minus = (a - b) / n;
    const double cre = st.b_plus + st.b_minus;
    const double cim = st.b_plus - st.b_minus;
    for (int j = 0; j < g.M(); ++j)
      eta[j] = eps[j] - complexd(cre * spec->Y_re[j], cim * spec->Y_im[j]);
    st.orth[2] = g.inner(RealField(eta.real()), spec->Y_im);
    st.orth[3] = g.inner(RealField(eta.imag()), spec->Y_re);
  }
  st.orth[0] = g.inner(RealField(eta.real()), prof.phi);
  st.orth[1] = g.inner(RealField(eta.imag()), dphi);
  st.eta_l2 = g.l2(eta);
  st.eta_lp = g.lr_norm(eta, opt.lp_p);
  if (opt.lq_q > 0.0) st.eta_lq = g.lr_norm(eta, opt.lq_q);
  if (opt.keep_fields) {
    st.eps = eps;
    st.eta = eta;
  }
  return st;
}

// ---------------------------------------------------------------------------
// Tracking along an evolution: warm starts, unwrapped theta, eigenpair
// refresh when omega drifts.
// ---------------------------------------------------------------------------
class ModulationTracker {
public:
  ModulationTracker(SolitonBranch& branch, std::optional<DiscreteSpectrum> spec,
                    const NonlinearityModel& model,
                    const DecomposeOptions& opts = {},
                    double refresh_rel = 1e-3)
      : branch_(&branch), spec_(std::move(spec)), model_(model), opts_(opts),
        refresh_rel_(refresh_rel) {
    if (spec_) omega_ref_ = -1.0; // force a coherent ref on first feed
  }

  // theta/omega guesses for the first sample.
  void seed(double theta0, double omega0) {
    th_ = theta0;
    om_ = omega0;
  }

  ModulationState feed(double t, const ComplexField& u) {
    if (spec_ && omega_ref_ < 0.0) refresh(om_);
    ModulationState st =
        decompose(u, t, th_, om_, *branch_, spec_ ? &*spec_ : nullptr, opts_);
    th_ = st.theta;
    om_ = st.omega;
    if (spec_) {
      const double width = branch_->omega_hi() - branch_->omega_lo();
      if (std::abs(om_ - omega_ref_) > refresh_rel_ * width) {
        refresh(om_);
        // Re-read the mode amplitudes against the refreshed eigenpair.
        st = decompose(u, t, th_, om_, *branch_, &*spec_, opts_);
        th_ = st.theta;
        om_ = st.omega;
      }
    }
    return st;
  }

  const DiscreteSpectrum* spectrum() const { return spec_ ? &*spec_ : nullptr; }
  double omega() const { return om_; }
  double theta() const { return th_; }

  // Refresh the eigenpair at omega by warm Newton refinement.
  void refresh(double omega) {
    if (!spec_) return;
    const BranchPoint& bp = branch_->at(omega);
    *spec_ = refine_eigenpair(model_, bp.profile, branch_->grid(), bp.dphi,
                              *spec_);
    omega_ref_ = omega;
  }

private:
  SolitonBranch* branch_;
  std::optional<DiscreteSpectrum> spec_;
  NonlinearityModel model_;
  DecomposeOptions opts_;
  double refresh_rel_;
  double th_ = 0.0, om_ = 0.0, omega_ref_ = -1.0;
};

// ---------------------------------------------------------------------------
// Nonlinear remainder N(eps) = g(phi + eps) - g(phi) - Dg(phi) eps and its
// pointwise envelope
//     |N| <= C ( A1 phi^{m1-2} |eps|^2 + A2 phi^{m2-2} |eps|^2
//                + |eps|^{m1} + |eps|^{m2} ),   A_j = |c_j| [m_j > 2].
// ---------------------------------------------------------------------------
struct RemainderReport {
  ComplexField N;
  double C_fit = 0.0; // smallest C making the envelope valid node-wise
  double A1 = 0.0, A2 = 0.0;
};

inline RemainderReport nonlinear_remainder(const ComplexField& eps,
                                           const RealField& phi,
                                           const NonlinearityModel& model) {
  const int M = static_cast<int>(phi.size());
  RemainderReport rep;
  rep.N.resize(M);
  rep.A1 = (model.m1() > 2.0) ? std::abs(model.c1()) : 0.0;
  rep.A2 = (model.m2() > 2.0) ? std::abs(model.c2()) : 0.0;
  double cmax = 0.0;
  for (int j = 0; j < M; ++j) {
    const complexd up = complexd(phi[j], 0.0) + eps[j];
    const double s = phi[j] * phi[j];
    const complexd lin =
        model.f(s) * eps[j] + model.sfp(s) * (eps[j] + std::conj(eps[j]));
    const complexd gp = model.g(up);
    const complexd gm = complexd(model.g(phi[j]), 0.0);
    rep.N[j] = gp - gm - lin;
    const double ae = std::abs(eps[j]);
    double env = std::pow(ae, model.m1()) + std::pow(ae, model.m2());
    if (rep.A1 > 0.0) env += rep.A1 * std::pow(phi[j], model.m1() - 2.0) * ae * ae;
    if (rep.A2 > 0.0) env += rep.A2 * std::pow(phi[j], model.m2() - 2.0) * ae * ae;
    // In the far tail the remainder is a difference of terms it cannot
    // resolve; fit C only where N stands clear of its own round-off.
    const double ro = 32.0 * std::numeric_limits<double>::epsilon() *
                      (std::abs(gp) + std::abs(gm) + std::abs(lin));
    if (env > 1e-300 && std::abs(rep.N[j]) > ro)
      cmax = std::max(cmax, std::abs(rep.N[j]) / env);
  }
  rep.C_fit = cmax;
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-difference verification of the modulation ODEs along a tracked
// series (uniform sample spacing required). For each interior sample the
// four residuals are evaluated with centered differences; all are O(dt^2).
// ---------------------------------------------------------------------------
struct DynamicResiduals {
  double t = 0.0;
  double r_omega = 0.0;
  double r_theta = 0.0;
  double r_bplus = 0.0;
  double r_bminus = 0.0;
  double remainder_C = 0.0;
};

// The series must keep fields (eps). `delta_omega_rel` sets the step for the
// omega-derivatives of the eigenpair.
inline std::vector<DynamicResiduals>
dynamic_residuals(const std::vector<ModulationState>& series,
                  SolitonBranch& branch, const NonlinearityModel& model,
                  const DiscreteSpectrum& spec0,
                  double delta_omega_rel = 1e-3) {
  std::vector<DynamicResiduals> out;
  if (series.size() < 3) return out;
  const RadialGrid& g = branch.grid();
  const double dt = series[1].t - series[0].t;

  DiscreteSpectrum spec = spec0;
  for (size_t k = 1; k + 1 < series.size(); ++k) {
    const ModulationState& sm = series[k - 1];
    const ModulationState& s0 = series[k];
    const ModulationState& sp = series[k + 1];
    const double om = s0.omega;

    const BranchPoint& bp = branch.at(om);
    const double slope = bp.slope;
    // Refresh the eigenpair at this sample's omega (warm from the previous).
    spec = refine_eigenpair(model, bp.profile, g, bp.dphi, spec);
    const double e = spec.e_plus;
    const double n = spec.normalization;

    // d/d_omega of the eigenpair by centered warm refinements.
    const double d = delta_omega_rel * om;
    RealField dyre(g.M()), dyim(g.M());
    double de_dom = 0.0;
    {
      const BranchPoint& bpp = branch.at(om + d);
      const BranchPoint& bpm = branch.at(om - d);
      DiscreteSpectrum sp_p = refine_eigenpair(model, bpp.profile, g, bpp.dphi, spec);
      DiscreteSpectrum sp_m = refine_eigenpair(model, bpm.profile, g, bpm.dphi, spec);
      dyre = (sp_p.Y_re - sp_m.Y_re) / (2.0 * d);
      dyim = (sp_p.Y_im - sp_m.Y_im) / (2.0 * d);
      de_dom = (sp_p.e_plus - sp_m.e_plus) / (2.0 * d);
    }
    (void)de_dom;

    // Centered time derivatives of the modulation parameters.
    const double om_dot = (sp.omega - sm.omega) / (2.0 * dt);
    const double th_dot = (sp.theta - sm.theta) / (2.0 * dt);
    const double bp_dot = (sp.b_plus - sm.b_plus) / (2.0 * dt);
    const double bm_dot = (sp.b_minus - sm.b_minus) / (2.0 * dt);
    const double gauge = th_dot - om;

    const RealField e1 = s0.eps.real(), e2 = s0.eps.imag();
    RemainderReport rem = nonlinear_remainder(s0.eps, bp.profile.phi, model);
    const RealField N1 = rem.N.real(), N2 = rem.N.imag();

    DynamicResiduals rr;
    rr.t = s0.t;
    rr.remainder_C = rem.C_fit;
    rr.r_omega = om_dot * slope -
                 (om_dot * g.inner(e1, bp.dphi) +
                  gauge * g.inner(e2, bp.profile.phi) -
                  g.inner(N2, bp.profile.phi));
    rr.r_theta = gauge * slope -
                 (om_dot * g.inner(e2, bp.d2phi) -
                  gauge * g.inner(e1, bp.dphi) + g.inner(N1, bp.dphi));

    // <v, Y+-> and <N, Y+->, plus <v, J d_omega Y+->.
    const double vyp = g.inner(e1, spec.Y_re) + g.inner(e2, spec.Y_im);
    const double vym = g.inner(e1, spec.Y_re) - g.inner(e2, spec.Y_im);
    const double Nyp = g.inner(N1, spec.Y_re) + g.inner(N2, spec.Y_im);
    const double Nym = g.inner(N1, spec.Y_re) - g.inner(N2, spec.Y_im);
    const TwoField v{e1, e2};
    const TwoField dyp{dyre, dyim};
    const TwoField dym{dyre, RealField(-dyim)};
    const double vJdyp = j_pair(g, v, dyp);
    const double vJdym = j_pair(g, v, dym);

    rr.r_bplus = bp_dot - (e * s0.b_plus -
                           (gauge * vym - Nym + om_dot * vJdym) / n);
    rr.r_bminus = bm_dot - (-e * s0.b_minus +
                            (gauge * vyp - Nyp + om_dot * vJdyp) / n);
    out.push_back(rr);
  }
  return out;
}

} // namespace nlslab
