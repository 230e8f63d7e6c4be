#pragma once
// tridiag.hpp — LU factorization of a tridiagonal matrix with partial
// pivoting (the classic three-band factorization that fills in one extra
// superdiagonal), templated over real/complex scalars. Row j of the matrix
// is (sub[j], dia[j], sup[j]); sub[0] and sup[n-1] are ignored.
//
// Used for: the soliton Newton step (-L+ is tridiagonal), the shifted
// operator solves L+- x = b, and the Crank-Nicolson complex step.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "nlslab/model.hpp"

namespace nlslab {

struct SolveFailure : Error {
  explicit SolveFailure(const std::string& m) : Error("solve_failure", m) {}
};

template <typename Scalar> class TridiagLU {
public:
  using Field = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  TridiagLU() = default;

  // Factor the matrix with rows (sub, dia, sup).
  template <typename A, typename B, typename C>
  void factor(const A& sub, const B& dia, const C& sup) {
    n_ = static_cast<int>(dia.size());
    dl_.resize(n_);
    d_.resize(n_);
    du_.resize(n_);
    du2_.assign(n_, Scalar(0));
    piv_.assign(n_, 0);
    for (int i = 0; i < n_; ++i) {
      dl_[i] = Scalar(sub[i]);
      d_[i] = Scalar(dia[i]);
      du_[i] = Scalar(sup[i]);
    }
    for (int i = 0; i < n_ - 1; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i + 1])) {
        piv_[i] = 0; // no interchange
        if (d_[i] == Scalar(0))
          throw SolveFailure("tridiagonal matrix is numerically singular");
        const Scalar fact = dl_[i + 1] / d_[i];
        dl_[i + 1] = fact; // store multiplier
        d_[i + 1] -= fact * du_[i];
        if (i < n_ - 2) du2_[i] = Scalar(0);
      } else {
        piv_[i] = 1; // swap rows i, i+1
        const Scalar fact = d_[i] / dl_[i + 1];
        d_[i] = dl_[i + 1];
        dl_[i + 1] = fact;
        const Scalar tmp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = tmp - fact * d_[i + 1];
        if (i < n_ - 2) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
      }
    }
    if (d_[n_ - 1] == Scalar(0))
      throw SolveFailure("tridiagonal matrix is numerically singular");
  }

  Field solve(const Field& rhs) const {
    Field x = rhs;
    // Forward substitution with row interchanges.
    for (int i = 0; i < n_ - 1; ++i) {
      if (piv_[i] == 0) {
        x[i + 1] -= dl_[i + 1] * x[i];
      } else {
        const Scalar tmp = x[i];
        x[i] = x[i + 1];
        x[i + 1] = tmp - dl_[i + 1] * x[i];
      }
    }
    // Back substitution through the three stored bands.
    x[n_ - 1] /= d_[n_ - 1];
    if (n_ >= 2)
      x[n_ - 2] = (x[n_ - 2] - du_[n_ - 2] * x[n_ - 1]) / d_[n_ - 2];
    for (int i = n_ - 3; i >= 0; --i)
      x[i] = (x[i] - du_[i] * x[i + 1] - du2_[i] * x[i + 2]) / d_[i];
    return x;
  }

private:
  int n_ = 0;
  std::vector<Scalar> dl_, d_, du_, du2_;
  std::vector<int> piv_;
};

// One-shot convenience wrapper.
template <typename Scalar, typename A, typename B, typename C>
Eigen::Array<Scalar, Eigen::Dynamic, 1>
tridiag_solve(const A& sub, const B& dia, const C& sup,
              const Eigen::Array<Scalar, Eigen::Dynamic, 1>& rhs) {
  TridiagLU<Scalar> lu;
  lu.factor(sub, dia, sup);
  return lu.solve(rhs);
}

} // namespace nlslab
