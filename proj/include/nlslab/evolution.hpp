#pragma once
// evolution.hpp — Crank–Nicolson (implicit midpoint) integrator for the
// radial focusing NLS
//
//     i u_t + Laplacian(u) + f(|u|^2) u = 0,
//
// optionally with an absorbing sponge -i sigma(r) u on the outer part of the
// domain. One step solves
//
//     A(v) u+ = B(v) u,   A = i/dt - H(v)/2,  B = i/dt + H(v)/2,
//     H(v) u  = -Laplacian(u) - f(|v|^2) u - i sigma u,
//
// with the midpoint field v = (u + u+)/2 obtained by fixed-point relaxation.
// With sigma = 0 the map u -> u+ is a Cayley transform of a self-adjoint
// operator for the *converged* v, so the discrete mass (1/2) sum w |u|^2 is
// conserved to round-off; the discrete energy
//
//     E = (1/2) sum w |grad u|^2 - sum w G(|u|)
//
// drifts only at the truncation order. The scheme is time-reversible
// (dt < 0 runs backwards).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"
#include "nlslab/tridiag.hpp"

namespace nlslab {

struct NonConvergence : Error {
  explicit NonConvergence(const std::string& m) : Error("non_convergence", m) {}
};
struct NumericalBlowupSuspected : Error {
  double t;
  explicit NumericalBlowupSuspected(const std::string& m, double t_)
      : Error("numerical_blowup_suspected", m), t(t_) {}
};

struct SpongeConfig {
  bool enabled = false;
  double strength = 3.0;   // sigma_0
  double start_frac = 0.9; // sponge occupies [start_frac * R, R]
};

struct EvolveOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  double fp_tol = 1e-12;      // sup-norm tolerance of the midpoint relaxation
  int fp_max = 50;
  double guard_factor = 1e3;  // abort when max|u| exceeds guard * initial max
  SpongeConfig sponge;
  int observer_stride = 1;    // observer called every `stride` steps (and at t=0)
};

struct ConservedQuantities {
  double mass = 0.0;
  double energy = 0.0;
};

inline RealField sponge_profile(const RadialGrid& g, const SpongeConfig& sc) {
  RealField sig = RealField::Zero(g.M());
  if (!sc.enabled) return sig;
  const double rs = sc.start_frac * g.R();
  for (int j = 0; j < g.M(); ++j)
    if (g.r()[j] > rs) {
      const double x = (g.r()[j] - rs) / (g.R() - rs);
      sig[j] = sc.strength * x * x;
    }
  return sig;
}

class Stepper {
public:
  Stepper(const NonlinearityModel& model, const RadialGrid& grid,
          const EvolveOptions& opts)
      : model_(model), grid_(&grid), opts_(opts),
        sigma_(sponge_profile(grid, opts.sponge)) {}

  // Capture the reference amplitude for the overflow guard.
  void set_reference(const ComplexField& u0) {
    init_max_ = u0.abs().maxCoeff();
  }

  ConservedQuantities conserved(const ComplexField& u) const {
    const RadialGrid& g = *grid_;
    ConservedQuantities c;
    c.mass = 0.5 * (g.w() * u.abs2()).sum();
    double pot = 0.0;
    for (int j = 0; j < g.M(); ++j)
      pot += g.w()[j] * model_.G(std::abs(u[j]));
    c.energy = 0.5 * g.grad_sq(u) - pot;
    return c;
  }

  // One Crank–Nicolson step. Throws NonConvergence / NumericalBlowupSuspected.
  ComplexField step(const ComplexField& u, double t) const {
    const RadialGrid& g = *grid_;
    const int M = g.M();
    const double dt = opts_.dt;
    const complexd idt = complexd(0.0, 1.0) / dt;

    ComplexField v = u;
    ComplexField unew = u;
    Eigen::ArrayXcd sub(M), dia(M), sup(M), rhs(M);
    bool converged = false;
    for (int k = 0; k < opts_.fp_max; ++k) {
      // H(v) = -lap - f(|v|^2) - i sigma; assemble A = i/dt - H/2 and B u.
      for (int j = 0; j < M; ++j) {
        const double Vj = model_.f(std::norm(v[j]));
        dia[j] = idt + 0.5 * (g.lap_dia()[j] + Vj) +
                 complexd(0.0, 0.5 * sigma_[j]);
        sub[j] = complexd(0.5 * g.lap_sub()[j], 0.0);
        sup[j] = complexd(0.5 * g.lap_sup()[j], 0.0);
      }
      const ComplexField lap_u = g.lap(u);
      for (int j = 0; j < M; ++j) {
        const double Vj = model_.f(std::norm(v[j]));
        const complexd Hu = -lap_u[j] - Vj * u[j] -
                            complexd(0.0, sigma_[j]) * u[j];
        rhs[j] = idt * u[j] + 0.5 * Hu;
      }
      Eigen::ArrayXcd sol =
          tridiag_solve<complexd>(sub, dia, sup, rhs.matrix()).array();
      unew = sol;
      ComplexField vn = 0.5 * (u + unew);
      const double dv = (vn - v).abs().maxCoeff();
      v = vn;
      if (dv < opts_.fp_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      if (u.abs().maxCoeff() >= 2.0 * init_max_)
        throw NumericalBlowupSuspected(
            "midpoint relaxation diverged with growing amplitude", t);
      throw NonConvergence("midpoint relaxation failed to converge");
    }
    if (unew.abs().maxCoeff() > opts_.guard_factor * init_max_)
      throw NumericalBlowupSuspected("amplitude exceeded the overflow guard",
                                     t + dt);
    return unew;
  }

  const RealField& sigma() const { return sigma_; }
  double initial_max() const { return init_max_; }

private:
  NonlinearityModel model_;
  const RadialGrid* grid_;
  EvolveOptions opts_;
  RealField sigma_;
  double init_max_ = 1.0;
};

// Evolve u0 to t_end. The observer (if any) is called at t = 0 and then
// every observer_stride steps and at the final step; returning false stops
// the run early. Returns the final field.
inline ComplexField
evolve(const NonlinearityModel& model, const RadialGrid& grid,
       const ComplexField& u0, const EvolveOptions& opts,
       const std::function<bool(double, const ComplexField&)>& observer = {}) {
  Stepper st(model, grid, opts);
  st.set_reference(u0);
  ComplexField u = u0;
  const long nsteps = std::lround(opts.t_end / opts.dt);
  if (observer && !observer(0.0, u)) return u;
  for (long n = 0; n < nsteps; ++n) {
    const double t = double(n) * opts.dt;
    u = st.step(u, t);
    if (observer && ((n + 1) % opts.observer_stride == 0 || n + 1 == nsteps)) {
      if (!observer(double(n + 1) * opts.dt, u)) return u;
    }
  }
  return u;
}

} // namespace nlslab
