#pragma once
// grid.hpp — radial finite-volume discretization of R^N.
//
// Staggered nodes r_j = (j + 1/2) h, j = 0..M-1, h = R/M, so no node sits
// on the coordinate singularity r = 0. Quadrature weights are exact
// spherical-shell volumes,
//
//     w_j = S_{N-1} ((j+1)^N - j^N) h^N / N,   S_{N-1} = 2 pi^{N/2} / Gamma(N/2),
//
// which agree with the midpoint rule S_{N-1} r_j^{N-1} h to O(h^2) per node
// and make sum(w) the exact ball volume. The Laplacian is the conservative
// flux form
//
//     (A u)_j = (F_{j+1} - F_j) / Vhat_j,  F_j = a_j (u_j - u_{j-1}) / h,
//     a_j = (j h)^{N-1},  Vhat_j = w_j / S_{N-1},
//
// with a zero flux through the r = 0 face (a_0 = 0 for N >= 2; for N = 1 the
// mirror/even closure u_{-1} = u_0 kills it likewise) and a homogeneous
// Dirichlet wall at r = R imposed through the ghost value u_M = -u_{M-1}.
// Pairing the shell volumes with the same Vhat_j in the divisor makes A
// exactly self-adjoint in the weighted inner product <f,g> = sum w f conj(g)
// and exact on quadratics at every node including j = 0.

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "nlslab/model.hpp"

namespace nlslab {

using RealField = Eigen::ArrayXd;
using ComplexField = Eigen::ArrayXcd;

inline double unit_sphere_area(int N) {
  // S_{N-1} = 2 pi^{N/2} / Gamma(N/2); S_0 = 2 (two points in 1D).
  return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N);
}

class RadialGrid {
public:
  RadialGrid(int N, double R, int M) : N_(N), R_(R), M_(M) {
    if (N < 1 || M < 8 || !(R > 0.0))
      throw DomainError("grid requires N >= 1, M >= 8, R > 0");
    h_ = R / M;
    const double S = unit_sphere_area(N);
    r_.resize(M);
    w_.resize(M);
    vhat_.resize(M);
    face_.resize(M + 1);
    for (int j = 0; j <= M; ++j) face_[j] = std::pow(j * h_, N - 1);
    for (int j = 0; j < M; ++j) {
      r_[j] = (j + 0.5) * h_;
      vhat_[j] = (std::pow(j + 1.0, N) - std::pow(double(j), N)) *
                 std::pow(h_, N) / N;
      w_[j] = S * vhat_[j];
    }
    // Tridiagonal rows of the Laplacian (sub_0 and sup_{M-1} unused).
    sub_.resize(M);
    dia_.resize(M);
    sup_.resize(M);
    for (int j = 0; j < M; ++j) {
      const double lo = (j > 0) ? face_[j] : 0.0;
      const double hi = face_[j + 1];
      sub_[j] = (j > 0) ? lo / (h_ * vhat_[j]) : 0.0;
      sup_[j] = (j < M - 1) ? hi / (h_ * vhat_[j]) : 0.0;
      dia_[j] = (j < M - 1) ? -(lo + hi) / (h_ * vhat_[j])
                            : -(lo + 2.0 * hi) / (h_ * vhat_[j]);
    }
  }

  int N() const { return N_; }
  int M() const { return M_; }
  double R() const { return R_; }
  double h() const { return h_; }
  const RealField& r() const { return r_; }
  const RealField& w() const { return w_; }
  const RealField& lap_sub() const { return sub_; }
  const RealField& lap_dia() const { return dia_; }
  const RealField& lap_sup() const { return sup_; }

  bool same_as(const RadialGrid& o) const {
    return N_ == o.N_ && M_ == o.M_ && R_ == o.R_;
  }

  // Apply the discrete Laplacian.
  template <typename Field> Field lap(const Field& f) const {
    check(f);
    Field out(M_);
    for (int j = 0; j < M_; ++j) {
      auto acc = dia_[j] * f[j];
      if (j > 0) acc += sub_[j] * f[j - 1];
      if (j < M_ - 1) acc += sup_[j] * f[j + 1];
      out[j] = acc;
    }
    return out;
  }

  // Weighted inner product; real part for complex fields (the vector
  // convention <u,v> = int u1 v1 + u2 v2 over the two real components).
  double inner(const RealField& f, const RealField& g) const {
    check(f);
    check(g);
    return (w_ * f * g).sum();
  }
  double inner(const ComplexField& f, const ComplexField& g) const {
    check(f);
    check(g);
    return (w_ * (f * g.conjugate()).real()).sum();
  }

  template <typename Field> double l2(const Field& f) const {
    return std::sqrt(inner(f, f));
  }

  // L^p quadrature norm, p in [1, inf).
  template <typename Field> double lr_norm(const Field& f, double p) const {
    check(f);
    if (!(p >= 1.0)) throw DomainError("lr_norm requires exponent >= 1");
    return std::pow((w_ * f.abs().pow(p)).sum(), 1.0 / p);
  }

  // L^2 restricted to r < R0.
  template <typename Field> double local_l2(const Field& f, double R0) const {
    check(f);
    if (!(R0 <= R_)) throw DomainError("local_l2 requires R0 <= R");
    double s = 0.0;
    for (int j = 0; j < M_ && r_[j] < R0; ++j)
      s += w_[j] * std::norm(complexd(f[j]));
    return std::sqrt(s);
  }

  // Face-based gradient energy sum w |grad f|^2, summed so that
  // grad_sq(f) == -<lap f, f> exactly (discrete integration by parts with
  // the same Dirichlet ghost at r = R).
  template <typename Field> double grad_sq(const Field& f) const {
    check(f);
    const double S = unit_sphere_area(N_);
    double s = 0.0;
    for (int j = 1; j < M_; ++j)
      s += face_[j] * std::norm(complexd(f[j]) - complexd(f[j - 1])) / h_;
    s += 2.0 * face_[M_] * std::norm(complexd(f[M_ - 1])) / h_;
    return S * s;
  }

  // Discrete H^1 norm sqrt(|f|_2^2 + |grad f|^2).
  template <typename Field> double h1(const Field& f) const {
    return std::sqrt(inner(f, f) + grad_sq(f));
  }

private:
  template <typename Field> void check(const Field& f) const {
    if (f.size() != M_) throw DomainError("field/grid size mismatch");
  }

  int N_;
  double R_;
  int M_;
  double h_;
  RealField r_, w_, vhat_, face_;
  RealField sub_, dia_, sup_;
};

// Linear interpolation of nodal values onto arbitrary radii (constant
// extrapolation inward of the first node, linear decay to the Dirichlet
// ghost beyond the last).
inline double interp_node(const RadialGrid& g, const RealField& f, double r) {
  const int M = g.M();
  const double h = g.h();
  const double x = r / h - 0.5;
  if (x <= 0.0) return f[0];
  if (x >= M - 1) {
    // between last node and the wall: f -> -f[M-1] at the ghost node
    const double t = (r - g.r()[M - 1]) / h;
    return t >= 1.0 ? 0.0 : f[M - 1] * (1.0 - 2.0 * t);
  }
  const int j = static_cast<int>(x);
  const double t = x - j;
  return f[j] * (1.0 - t) + f[j + 1] * t;
}

} // namespace nlslab
