#pragma once
// spectral.hpp — linearized operators, the real eigenpair, and the spectral
// projections.
//
// Around a profile phi of Laplacian(phi) - omega phi + g(phi) = 0 the
// linearization of the flow in the rotating frame u = e^{i omega t}(phi+eps)
// is eps_dot = JL eps with two self-adjoint pieces acting on (re, im) parts:
//
//     L+ = -Laplacian + omega - (f(phi^2) + 2 phi^2 f'(phi^2)),
//     L- = -Laplacian + omega -  f(phi^2),
//     JL = [[0, L-], [-L+, 0]],  J(v1, v2) = (v2, -v1).
//
// Kernel relations: L- phi = 0, L+ d_omega phi = -phi. On an unstable branch
// JL has one simple real pair +-e+ with eigenvectors Y+- = (Y_re, +-Y_im),
//
//     L- Y_im = e+ Y_re,   L+ Y_re = -e+ Y_im,   2 <Y_re, Y_im> = +1.
//
// Strategy: eliminate to the composed problem (-L- L+) Y_re = e+^2 Y_re,
// which in the weight-conjugated symmetric form Ms = Lm^{1/2} Lp Lm^{1/2}
// (tilde operators D A D^{-1}, D = diag(sqrt(w))) is a symmetric eigenproblem
// whose most negative eigenvalue is -e+^2. A dense solve at a coarse
// resolution discovers the pair; a bordered Newton iteration on the full
// nonlinear eigensystem refines it on the production grid to near round-off.
// The 2M x 2M block eigensolve is retained as an independent oracle.
//
// Projections (two-component real fields f = (f1, f2), s = <d_omega phi, phi>,
// n = 2 <Y_re, Y_im>):
//
//     P0 f = (<f1, phi>/s) (d_omega phi, 0) + (<f2, d_omega phi>/s) (0, phi)
//     P1 f = ( -<f, J Y-> Y+  +  <f, J Y+> Y- ) / n
//     Pc   = Id - P0 - P1
//
// with signs fixed by requiring P0, P1 to restrict to the identity on their
// invariant subspaces (and hence idempotent).

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"
#include "nlslab/soliton.hpp"
#include "nlslab/tridiag.hpp"

namespace nlslab {

struct DegenerateNormalization : Error {
  explicit DegenerateNormalization(const std::string& m)
      : Error("degenerate_normalization", m) {}
};
struct DegenerateSlope : Error {
  explicit DegenerateSlope(const std::string& m)
      : Error("degenerate_slope", m) {}
};

// ---------------------------------------------------------------------------
// Linearized operators. Potentials are stored with the +omega shift folded
// in, so L+- f = -lap(f) + v+- .* f.
// ---------------------------------------------------------------------------
struct LinearizedOperators {
  const RadialGrid* grid = nullptr;
  double omega = 0.0;
  RealField vp; // omega - (f(phi^2) + 2 phi^2 f'(phi^2))
  RealField vm; // omega - f(phi^2)

  RealField apply_p(const RealField& f) const {
    return RealField(-grid->lap(f) + vp * f);
  }
  RealField apply_m(const RealField& f) const {
    return RealField(-grid->lap(f) + vm * f);
  }
};

inline LinearizedOperators build_operators(const SolitonProfile& prof,
                                           const NonlinearityModel& model,
                                           const RadialGrid& grid) {
  LinearizedOperators ops;
  ops.grid = &grid;
  ops.omega = prof.omega;
  const int M = grid.M();
  ops.vp.resize(M);
  ops.vm.resize(M);
  for (int j = 0; j < M; ++j) {
    const double s = prof.phi[j] * prof.phi[j];
    ops.vp[j] = prof.omega - model.dg_real(prof.phi[j]);
    ops.vm[j] = prof.omega - model.f(s);
  }
  return ops;
}

// ---------------------------------------------------------------------------
// Discrete point spectrum.
// ---------------------------------------------------------------------------
struct DiscreteSpectrum {
  double e_plus = 0.0;             // e- = -e+ by Hamiltonian symmetry
  RealField Y_re, Y_im;
  double normalization = 0.0;      // 2 <Y_re, Y_im> after normalization
  double pre_norm_value = 0.0;     // 2 <Y_re, Y_im> before normalization
  double gap_to_continuum = 0.0;   // sqrt of the next Ms eigenvalue
  double residual = 0.0;           // sup norm of the two eigen relations
  double simplicity_ratio = 0.0;   // candidate-2 / candidate-1 residual
};

enum class EigenpairStatus { Found, NoRealEigenvalue };

struct EigenpairResult {
  EigenpairStatus status = EigenpairStatus::NoRealEigenvalue;
  DiscreteSpectrum spectrum; // valid when status == Found
  double mu_min = 0.0;       // most negative Ms eigenvalue at discovery scale
};

struct EigenpairOptions {
  int coarse_M = 512;        // discovery resolution (dense solve)
  double detect_tol = 1e-3;  // found when mu_min < -detect_tol * omega^2
  int newton_max = 25;
  double newton_tol = 1e-11; // on the sup residual, relative to |Y|
};

namespace detail {

// Dense weight-conjugated symmetric matrices of L+- on a given grid.
inline void dense_sym_ops(const LinearizedOperators& ops, Eigen::MatrixXd& Lp,
                          Eigen::MatrixXd& Lm) {
  const RadialGrid& g = *ops.grid;
  const int M = g.M();
  Eigen::VectorXd d(M);
  for (int j = 0; j < M; ++j) d[j] = std::sqrt(g.w()[j]);
  Lp.setZero(M, M);
  Lm.setZero(M, M);
  for (int j = 0; j < M; ++j) {
    Lp(j, j) = -g.lap_dia()[j] + ops.vp[j];
    Lm(j, j) = -g.lap_dia()[j] + ops.vm[j];
    if (j > 0) {
      Lp(j, j - 1) = -g.lap_sub()[j] * d[j] / d[j - 1];
      Lm(j, j - 1) = Lp(j, j - 1);
    }
    if (j < M - 1) {
      Lp(j, j + 1) = -g.lap_sup()[j] * d[j] / d[j + 1];
      Lm(j, j + 1) = Lp(j, j + 1);
    }
  }
  // Conjugated matrices are symmetric to round-off; symmetrize exactly.
  Lp = 0.5 * (Lp + Lp.transpose()).eval();
  Lm = 0.5 * (Lm + Lm.transpose()).eval();
}

// Sup-norm residual of the eigen relations for a candidate pair.
inline double pair_residual(const LinearizedOperators& ops, const RealField& yre,
                            const RealField& yim, double e) {
  const RealField r1 = ops.apply_m(yim) - e * yre;
  const RealField r2 = ops.apply_p(yre) + e * yim;
  return std::max(r1.abs().maxCoeff(), r2.abs().maxCoeff());
}

// Bordered Newton refinement of (Y_re, Y_im, e) on the production grid:
//   F = (L- Y_im - e Y_re,  L+ Y_re + e Y_im,  2<Y_re,Y_im> - 1) = 0.
// The (2M+1) x (2M+1) Jacobian is solved by block elimination: two sparse
// solves against the 2M x 2M leading block per iteration.
inline bool newton_refine(const LinearizedOperators& ops, RealField& yre,
                          RealField& yim, double& e,
                          const EigenpairOptions& opt) {
  const RadialGrid& g = *ops.grid;
  const int M = g.M();
  using Trip = Eigen::Triplet<double>;
  for (int it = 0; it < opt.newton_max; ++it) {
    RealField F1 = ops.apply_m(yim) - e * yre;
    RealField F2 = ops.apply_p(yre) + e * yim;
    const double fn = 2.0 * g.inner(yre, yim) - 1.0;
    const double scale = std::max(1.0, std::max(yre.abs().maxCoeff(),
                                                yim.abs().maxCoeff()));
    if (std::max(F1.abs().maxCoeff(), F2.abs().maxCoeff()) <
            opt.newton_tol * scale * std::max(1.0, e) &&
        std::abs(fn) < 1e-14)
      return true;

    // Leading block A = [[-e I, L-], [L+, e I]] in interleaved ordering
    // (x_{2j} = dYre_j, x_{2j+1} = dYim_j) to keep the bandwidth small.
    std::vector<Trip> trips;
    trips.reserve(8 * M);
    auto idr = [](int j) { return 2 * j; };
    auto idi = [](int j) { return 2 * j + 1; };
    for (int j = 0; j < M; ++j) {
      trips.emplace_back(idr(j), idr(j), -e);
      trips.emplace_back(idr(j), idi(j), -g.lap_dia()[j] + ops.vm[j]);
      if (j > 0) trips.emplace_back(idr(j), idi(j - 1), -g.lap_sub()[j]);
      if (j < M - 1) trips.emplace_back(idr(j), idi(j + 1), -g.lap_sup()[j]);
      trips.emplace_back(idi(j), idi(j), e);
      trips.emplace_back(idi(j), idr(j), -g.lap_dia()[j] + ops.vp[j]);
      if (j > 0) trips.emplace_back(idi(j), idr(j - 1), -g.lap_sub()[j]);
      if (j < M - 1) trips.emplace_back(idi(j), idr(j + 1), -g.lap_sup()[j]);
    }
    Eigen::SparseMatrix<double> A(2 * M, 2 * M);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) return false;

    Eigen::VectorXd Fv(2 * M), bv(2 * M), cv(2 * M);
    for (int j = 0; j < M; ++j) {
      Fv[idr(j)] = F1[j];
      Fv[idi(j)] = F2[j];
      bv[idr(j)] = -yre[j]; // dF1/de
      bv[idi(j)] = yim[j];  // dF2/de
      cv[idr(j)] = 2.0 * g.w()[j] * yim[j]; // d fn / d Yre
      cv[idi(j)] = 2.0 * g.w()[j] * yre[j]; // d fn / d Yim
    }
    const Eigen::VectorXd u = lu.solve(Fv);
    const Eigen::VectorXd v = lu.solve(bv);
    const double denom = cv.dot(v);
    if (denom == 0.0) return false;
    const double de = (fn - cv.dot(u)) / denom;
    const Eigen::VectorXd dx = -u - de * v;
    for (int j = 0; j < M; ++j) {
      yre[j] += dx[idr(j)];
      yim[j] += dx[idi(j)];
    }
    e += de;
    if (!(e > 0.0) || !std::isfinite(e)) return false;
  }
  return pair_residual(ops, yre, yim, e) <
         10.0 * opt.newton_tol *
             std::max(yre.abs().maxCoeff(), yim.abs().maxCoeff());
}

} // namespace detail

// Unstable eigenpair of JL: coarse dense discovery, fine Newton refinement,
// orthogonality cleanup against the generalized kernel, paper normalization.
// `dphi` is d_omega phi on the production grid (for the Orthog0 cleanup).
inline EigenpairResult
unstable_eigenpair(const NonlinearityModel& model, const SolitonProfile& prof,
                   const RadialGrid& grid, const RealField& dphi,
                   const EigenpairOptions& opt = {}) {
  EigenpairResult res;

  // --- discovery on a coarse grid (dense symmetric solves) ---
  const int Mc = std::min(opt.coarse_M, grid.M());
  RadialGrid gc(grid.N(), grid.R(), Mc);
  RealField phic(Mc);
  for (int j = 0; j < Mc; ++j)
    phic[j] = interp_node(grid, prof.phi, gc.r()[j]);
  const double resc = soliton_newton(model, prof.omega, gc, phic, 1e-12);
  if (!(resc <= 1e-8))
    throw SolveFailure("coarse profile re-solve failed in eigenpair discovery");
  SolitonProfile profc{prof.omega, phic, phic[0], resc};
  LinearizedOperators opsc = build_operators(profc, model, gc);

  Eigen::MatrixXd Lp, Lm;
  detail::dense_sym_ops(opsc, Lp, Lm);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esm(Lm);
  Eigen::VectorXd lam = esm.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd Lh =
      esm.eigenvectors() * lam.asDiagonal() * esm.eigenvectors().transpose();
  Eigen::MatrixXd Ms = Lh * Lp * Lh;
  Ms = 0.5 * (Ms + Ms.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esM(Ms);
  const Eigen::VectorXd mu = esM.eigenvalues();
  res.mu_min = mu[0];

  const double om2 = opsc.omega * opsc.omega;
  if (!(mu[0] < -opt.detect_tol * om2)) {
    res.status = EigenpairStatus::NoRealEigenvalue;
    return res;
  }

  // Candidate pair on the coarse grid.
  double e = std::sqrt(-mu[0]);
  Eigen::VectorXd z = esM.eigenvectors().col(0);
  RealField yre_c(Mc), yim_c(Mc);
  {
    const Eigen::VectorXd zr = Lh * z;
    for (int j = 0; j < Mc; ++j) yre_c[j] = zr[j] / std::sqrt(gc.w()[j]);
    yim_c = RealField(-opsc.apply_p(yre_c) / e);
  }
  const double cand1_res = detail::pair_residual(opsc, yre_c, yim_c, e) /
                           std::max(yre_c.abs().maxCoeff(),
                                    yim_c.abs().maxCoeff());

  // Simplicity: the next candidate, treated the same way, must be worse by
  // a factor >= 1e3.
  {
    const double e2c = std::sqrt(std::abs(mu[1]));
    RealField y2re(Mc), y2im(Mc);
    const Eigen::VectorXd z2 = Lh * esM.eigenvectors().col(1);
    for (int j = 0; j < Mc; ++j) y2re[j] = z2[j] / std::sqrt(gc.w()[j]);
    const double denom = std::max(1e-300, double(e2c));
    y2im = RealField(-opsc.apply_p(y2re) / denom);
    const double cand2_res =
        detail::pair_residual(opsc, y2re, y2im, e2c) /
        std::max(1e-300, std::max(y2re.abs().maxCoeff(), y2im.abs().maxCoeff()));
    res.spectrum.simplicity_ratio = cand2_res / std::max(1e-300, cand1_res);
  }
  // Spectral gap above the generalized kernel: skip the (numerically tiny)
  // kernel eigenvalue of Ms and report sqrt of the next one, which sits at
  // the continuum onset ~ omega^2.
  res.spectrum.gap_to_continuum = 0.0;
  for (int k = 1; k < mu.size(); ++k)
    if (mu[k] > 1e-6 * std::abs(mu[0])) {
      res.spectrum.gap_to_continuum = std::sqrt(mu[k]);
      break;
    }

  // --- prolong to the production grid and Newton-refine ---
  RealField yre(grid.M()), yim(grid.M());
  for (int j = 0; j < grid.M(); ++j) {
    yre[j] = interp_node(gc, yre_c, grid.r()[j]);
    yim[j] = interp_node(gc, yim_c, grid.r()[j]);
  }
  LinearizedOperators ops = build_operators(prof, model, grid);
  // Pre-normalize the start so the Newton normalization row is well scaled.
  {
    const double nn = 2.0 * grid.inner(yre, yim);
    if (nn <= 0.0)
      throw DegenerateNormalization(
          "2<Y_re,Y_im> <= 0 before normalization (discretization failure)");
    const double s = 1.0 / std::sqrt(nn);
    yre *= s;
    yim *= s;
  }
  if (!detail::newton_refine(ops, yre, yim, e, opt)) {
    // Refinement failed to lock onto a real pair: report absence.
    res.status = EigenpairStatus::NoRealEigenvalue;
    return res;
  }

  // --- Orthog0 cleanup and final normalization ---
  const RealField& phi = prof.phi;
  yre -= RealField(grid.inner(yre, phi) / grid.inner(phi, phi) * phi);
  yim -= RealField(grid.inner(yim, dphi) / grid.inner(dphi, dphi) * dphi);
  const double nn = 2.0 * grid.inner(yre, yim);
  res.spectrum.pre_norm_value = nn;
  if (nn <= 0.0)
    throw DegenerateNormalization(
        "2<Y_re,Y_im> <= 0 before normalization (discretization failure)");
  const double s = 1.0 / std::sqrt(nn);
  yre *= s;
  yim *= s;

  res.status = EigenpairStatus::Found;
  res.spectrum.e_plus = e;
  res.spectrum.Y_re = yre;
  res.spectrum.Y_im = yim;
  res.spectrum.normalization = 2.0 * grid.inner(yre, yim);
  res.spectrum.residual = detail::pair_residual(ops, yre, yim, e);
  return res;
}

// Warm refinement of an existing eigenpair at a nearby profile (used when
// omega drifts during tracking and for d/d_omega of the eigenpair).
inline DiscreteSpectrum
refine_eigenpair(const NonlinearityModel& model, const SolitonProfile& prof,
                 const RadialGrid& grid, const RealField& dphi,
                 const DiscreteSpectrum& start,
                 const EigenpairOptions& opt = {}) {
  LinearizedOperators ops = build_operators(prof, model, grid);
  RealField yre = start.Y_re, yim = start.Y_im;
  double e = start.e_plus;
  if (!detail::newton_refine(ops, yre, yim, e, opt))
    throw SolveFailure("warm eigenpair refinement diverged");
  yre -= RealField(grid.inner(yre, prof.phi) / grid.inner(prof.phi, prof.phi) *
                   prof.phi);
  yim -= RealField(grid.inner(yim, dphi) / grid.inner(dphi, dphi) * dphi);
  DiscreteSpectrum out = start;
  const double nn = 2.0 * grid.inner(yre, yim);
  if (nn <= 0.0)
    throw DegenerateNormalization("warm refinement lost the normalization sign");
  const double s = 1.0 / std::sqrt(nn);
  yre *= s;
  yim *= s;
  // Keep the eigenvector family continuous in omega.
  if (grid.inner(yre, start.Y_re) < 0.0) {
    yre = -yre;
    yim = -yim;
  }
  out.pre_norm_value = nn;
  out.e_plus = e;
  out.Y_re = yre;
  out.Y_im = yim;
  out.normalization = 2.0 * grid.inner(yre, yim);
  out.residual = detail::pair_residual(ops, yre, yim, e);
  return out;
}

// Full spectrum of the block [[0, L-], [-L+, 0]] (weight-conjugated) on a
// coarse grid: the independent oracle for eigenvalue symmetry, the absence
// of real pairs on stable branches, and continuum gap checks.
inline std::vector<complexd> block_spectrum(const NonlinearityModel& model,
                                            double omega,
                                            const RadialGrid& grid_like,
                                            int Mc) {
  RadialGrid gc(grid_like.N(), grid_like.R(), Mc);
  SolitonProfile profc = solve_profile(model, omega, gc);
  LinearizedOperators opsc = build_operators(profc, model, gc);
  Eigen::MatrixXd Lp, Lm;
  detail::dense_sym_ops(opsc, Lp, Lm);
  Eigen::MatrixXd B(2 * Mc, 2 * Mc);
  B.setZero();
  B.block(0, 0, Mc, Mc).setZero();
  B.block(0, Mc, Mc, Mc) = Lm;
  B.block(Mc, 0, Mc, Mc) = -Lp;
  Eigen::EigenSolver<Eigen::MatrixXd> es(B, /*computeEigenvectors=*/false);
  std::vector<complexd> out(2 * Mc);
  for (int k = 0; k < 2 * Mc; ++k) out[k] = es.eigenvalues()[k];
  return out;
}

// ---------------------------------------------------------------------------
// Two-component fields and the spectral projections.
// ---------------------------------------------------------------------------
struct TwoField {
  RealField c1, c2;

  static TwoField zero(int M) {
    TwoField f;
    f.c1 = RealField::Zero(M);
    f.c2 = RealField::Zero(M);
    return f;
  }
  static TwoField of(const ComplexField& u) {
    TwoField f;
    f.c1 = u.real();
    f.c2 = u.imag();
    return f;
  }
  ComplexField to_complex() const {
    ComplexField u(c1.size());
    for (int j = 0; j < c1.size(); ++j) u[j] = complexd(c1[j], c2[j]);
    return u;
  }
  TwoField operator+(const TwoField& o) const {
    return {RealField(c1 + o.c1), RealField(c2 + o.c2)};
  }
  TwoField operator-(const TwoField& o) const {
    return {RealField(c1 - o.c1), RealField(c2 - o.c2)};
  }
  TwoField operator*(double a) const {
    return {RealField(a * c1), RealField(a * c2)};
  }
};

// <f, g> = sum w (f1 g1 + f2 g2).
inline double inner2(const RadialGrid& g, const TwoField& f, const TwoField& h) {
  return g.inner(f.c1, h.c1) + g.inner(f.c2, h.c2);
}
inline double norm2(const RadialGrid& g, const TwoField& f) {
  return std::sqrt(inner2(g, f, f));
}
// J f = (f2, -f1).
inline TwoField applyJ(const TwoField& f) {
  return {f.c2, RealField(-f.c1)};
}
// <f, J h> = sum w (f1 h2 - f2 h1), term-wise so <f, J f> = 0 exactly.
inline double j_pair(const RadialGrid& g, const TwoField& f, const TwoField& h) {
  double s = 0.0;
  for (int j = 0; j < f.c1.size(); ++j)
    s += g.w()[j] * (f.c1[j] * h.c2[j] - f.c2[j] * h.c1[j]);
  return s;
}

enum class Which { P0, P1, Pc };

class Projections {
public:
  // Stable-branch variant (no point spectrum): P1 = 0.
  Projections(const RadialGrid& grid, RealField phi, RealField dphi,
              double slope, double slope_tol = 1e-10)
      : g_(&grid), phi_(std::move(phi)), dphi_(std::move(dphi)), slope_(slope) {
    if (std::abs(slope_) < slope_tol * g_->inner(phi_, phi_))
      throw DegenerateSlope("projection requires |<d_omega phi, phi>| "
                            "bounded away from zero");
  }

  Projections(const RadialGrid& grid, RealField phi, RealField dphi,
              double slope, const DiscreteSpectrum& spec,
              double slope_tol = 1e-10)
      : Projections(grid, std::move(phi), std::move(dphi), slope, slope_tol) {
    yre_ = spec.Y_re;
    yim_ = spec.Y_im;
    n_ = spec.normalization;
    have_point_ = true;
  }

  TwoField p0(const TwoField& f) const {
    const double a = g_->inner(f.c1, phi_) / slope_;
    const double b = g_->inner(f.c2, dphi_) / slope_;
    return {RealField(a * dphi_), RealField(b * phi_)};
  }

  TwoField p1(const TwoField& f) const {
    if (!have_point_) return TwoField::zero(static_cast<int>(phi_.size()));
    const TwoField yp{yre_, yim_};
    const TwoField ym{yre_, RealField(-yim_)};
    const double cp = j_pair(*g_, f, yp); // <f, J Y+>
    const double cm = j_pair(*g_, f, ym); // <f, J Y->
    return {RealField((-cm * yp.c1 + cp * ym.c1) / n_),
            RealField((-cm * yp.c2 + cp * ym.c2) / n_)};
  }

  TwoField pc(const TwoField& f) const { return f - p0(f) - p1(f); }

  TwoField apply(Which which, const TwoField& f) const {
    switch (which) {
    case Which::P0: return p0(f);
    case Which::P1: return p1(f);
    default: return pc(f);
    }
  }

  bool has_point_spectrum() const { return have_point_; }
  double slope() const { return slope_; }
  const RealField& phi() const { return phi_; }
  const RealField& dphi() const { return dphi_; }

private:
  const RadialGrid* g_;
  RealField phi_, dphi_;
  double slope_;
  RealField yre_, yim_;
  double n_ = 1.0;
  bool have_point_ = false;
};

} // namespace nlslab
