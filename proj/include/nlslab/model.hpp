#pragma once
// model.hpp — nonlinearity model and admissibility arithmetic.
//
// The equation under study is the radial focusing NLS
//
//     i u_t + Laplacian(u) + f(|u|^2) u = 0,   x in R^N,
//
// with g(u) = f(|u|^2) u and antiderivative G(s) = int_0^s f(x^2) x dx.
// Supported nonlinearities: pure power f(s) = s^{(m-1)/2} (i.e. g(u) =
// |u|^{m-1} u) and two-term f(s) = c1 s^{(m1-1)/2} + c2 s^{(m2-1)/2}.
//
// This header also hosts the admissibility arithmetic for the exponent
// pair (m1, m2): the two growth conditions on m1, the auxiliary exponent
// sigma_q with its margin delta, the decay rate mu, and the named
// arithmetic facts used downstream, plus the admissible-region boundary
// curves and the critical exponents m_c = 1 + 4/N, m_max = (N+2)/(N-2).

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nlslab {

using complexd = std::complex<double>;

// ---------------------------------------------------------------------------
// Error taxonomy: hard failures are exceptions carrying a machine-readable
// type tag; valid negative reports (e.g. "no real eigenvalue") are values.
// ---------------------------------------------------------------------------
class Error : public std::runtime_error {
public:
  Error(std::string type, const std::string& message)
      : std::runtime_error(message), type_(std::move(type)) {}
  const std::string& type() const { return type_; }

private:
  std::string type_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error("domain_error", m) {}
};

// ---------------------------------------------------------------------------
// NonlinearityModel
// ---------------------------------------------------------------------------
class NonlinearityModel {
public:
  // Two-term constructor; pure power is the special case c2 = 0, m2 = m1.
  NonlinearityModel(int N, double c1, double m1, double c2, double m2)
      : N_(N), c1_(c1), m1_(m1), c2_(c2), m2_(m2) {
    if (N_ < 1) throw DomainError("spatial dimension must satisfy N >= 1");
    if (!(m1_ > 1.0) || !(m1_ <= m2_))
      throw DomainError("exponents must satisfy 1 < m1 <= m2");
    const double mx = m_max(N_);
    if (!(m2_ < mx))
      throw DomainError("m2 >= (N+2)/(N-2): energy supercritical, rejected");
  }

  static NonlinearityModel pure_power(int N, double m) {
    return NonlinearityModel(N, 1.0, m, 0.0, m);
  }
  static NonlinearityModel two_term(int N, double c1, double m1, double c2,
                                    double m2) {
    return NonlinearityModel(N, c1, m1, c2, m2);
  }
  // Zero nonlinearity (free Schroedinger); exponents kept valid but inert.
  static NonlinearityModel linear(int N) {
    return NonlinearityModel(N, 0.0, 2.0, 0.0, 2.0);
  }

  int N() const { return N_; }
  double c1() const { return c1_; }
  double m1() const { return m1_; }
  double c2() const { return c2_; }
  double m2() const { return m2_; }
  bool pure() const { return c2_ == 0.0; }

  static double m_max(int N) {
    return N >= 3 ? double(N + 2) / double(N - 2)
                  : std::numeric_limits<double>::infinity();
  }
  static double m_critical(int N) { return 1.0 + 4.0 / N; }

  // f(s), s = |u|^2 >= 0.
  double f(double s) const {
    if (s < 0.0) throw DomainError("f(s) requires s >= 0");
    return c1_ * std::pow(s, 0.5 * (m1_ - 1.0)) +
           c2_ * std::pow(s, 0.5 * (m2_ - 1.0));
  }

  // s * f'(s); bundled with s to stay finite as s -> 0 for m < 3.
  double sfp(double s) const {
    if (s < 0.0) throw DomainError("s*f'(s) requires s >= 0");
    return 0.5 * (m1_ - 1.0) * c1_ * std::pow(s, 0.5 * (m1_ - 1.0)) +
           0.5 * (m2_ - 1.0) * c2_ * std::pow(s, 0.5 * (m2_ - 1.0));
  }

  // g(u) = f(|u|^2) u; commutes with phase rotation by construction.
  complexd g(complexd u) const { return f(std::norm(u)) * u; }
  double g(double u) const { return f(u * u) * u; }

  // G(s) = int_0^s f(x^2) x dx, term-wise: c_j s^{m_j+1} / (m_j+1).
  double G(double s) const {
    if (s < 0.0) throw DomainError("G(s) requires s >= 0");
    return c1_ * std::pow(s, m1_ + 1.0) / (m1_ + 1.0) +
           c2_ * std::pow(s, m2_ + 1.0) / (m2_ + 1.0);
  }

  // Derivative of g along the real direction at real amplitude phi:
  // d/dphi [f(phi^2) phi] = f(phi^2) + 2 phi^2 f'(phi^2). This is the L+
  // potential well; the L- well is f(phi^2) itself.
  double dg_real(double phi) const {
    const double s = phi * phi;
    return f(s) + 2.0 * sfp(s);
  }

private:
  int N_;
  double c1_, m1_, c2_, m2_;
};

// ---------------------------------------------------------------------------
// Admissibility arithmetic.
//
// Notation: p = m2 + 1, sigma_r = N (1/2 - 1/r), m0 = min{2, m1}.
//   cond1:  m1 > 1 + (2/N)(1 + sigma_p)
//   cond2:  m1 > 1 + (2/N)(1 + 2/(m0+1))
// sigma_q = sigma_p when sigma_p > 2/(m0+1); otherwise 2/(m0+1) + delta
// with delta the largest value <= 1e-3 keeping sigma_q strictly below
// min{1, (N/2)(m1-1) - 1} (realized as half the remaining gap when the gap
// is smaller than 2e-3). q then solves sigma_q = N(1/2 - 1/q) and
// mu = min{sigma_p, m0 sigma_q - 1}. The q selection requires N >= 2.
// ---------------------------------------------------------------------------
struct AdmissibilityReport {
  int N = 0;
  double m1 = 0.0, m2 = 0.0;
  bool cond1 = false;
  bool cond2 = false;
  bool n_ok = false;       // N >= 2, required by the q selection
  bool admissible = false; // cond1 && cond2 && n_ok
  double p = 0.0;
  double sigma_p = 0.0;
  double m0 = 0.0;
  double sigma_q = 0.0; // valid only when admissible
  double q = 0.0;       // valid only when admissible
  double delta = 0.0;   // margin used in the sigma_q selection (0 if sigma_p branch)
  double mu = 0.0;      // valid only when admissible
  std::vector<std::pair<std::string, bool>> arith_facts;
};

inline double sigma_r(int N, double r) { return N * (0.5 - 1.0 / r); }

// Interpolation exponents for j in {1,2}:
//   theta_j       = [ (N/2)(m_j - 1) - sigma_p ] / (m_j sigma_p)
//   theta_tilde_j = [ (N/2)(m_j - 1) - sigma_q ] / (m_j sigma_p)
// (both normalized against sigma_p; used only inside arithmetic facts).
namespace detail {
inline double theta_j(int N, double mj, double sigma_p) {
  return (0.5 * N * (mj - 1.0) - sigma_p) / (mj * sigma_p);
}
inline double theta_tilde_j(int N, double mj, double sigma_p, double sigma_q) {
  return (0.5 * N * (mj - 1.0) - sigma_q) / (mj * sigma_p);
}
} // namespace detail

// Named arithmetic facts; all must hold for an admissible triple.
inline std::vector<std::pair<std::string, bool>>
arithmetic_facts(const AdmissibilityReport& rep) {
  std::vector<std::pair<std::string, bool>> facts;
  const int N = rep.N;
  const double sp = rep.sigma_p, sq = rep.sigma_q, m0 = rep.m0;
  const double ms[2] = {rep.m1, rep.m2};

  // Arith2: sigma_q < (N/2)(m1-1) - 1, i.e. m1 > 1 + (2/N)(1 + sigma_q).
  facts.emplace_back("Arith2", sq < 0.5 * N * (rep.m1 - 1.0) - 1.0);

  // Arith3 (j = 1,2): (N/2)(m_j-1) - sigma_p > 1 and m_j theta_j > 1.
  bool a3 = true;
  for (double mj : ms) {
    const double lhs = 0.5 * N * (mj - 1.0) - sp;
    a3 = a3 && (lhs > 1.0) && (mj * detail::theta_j(N, mj, sp) > 1.0);
  }
  facts.emplace_back("Arith3", a3);

  // Arith5: 2(1 - 1/q) < 1 + 2/N < m_j, equivalently sigma_q < 1 and
  // m_j > 1 + 2/N for both j.
  bool a5 = sq < 1.0;
  for (double mj : ms) a5 = a5 && (mj > 1.0 + 2.0 / N);
  facts.emplace_back("Arith5", a5);

  // Arith6: (1 - theta_tilde_j) m_j (m0/2) + m_j theta_tilde_j > 1.
  bool a6 = true;
  for (double mj : ms) {
    const double tt = detail::theta_tilde_j(N, mj, sp, sq);
    a6 = a6 && ((1.0 - tt) * mj * (0.5 * m0) + mj * tt > 1.0);
  }
  facts.emplace_back("Arith6", a6);

  // Arith7new: (N/2)(m_j-1) - sigma_q > 1 and m_j theta_tilde_j > 1/m0.
  bool a7 = true;
  for (double mj : ms) {
    const double tt = detail::theta_tilde_j(N, mj, sp, sq);
    a7 = a7 && (0.5 * N * (mj - 1.0) - sq > 1.0) && (mj * tt > 1.0 / m0);
  }
  facts.emplace_back("Arith7new", a7);

  // Arith8: (m0 + 1) sigma_q > 2 (in particular sigma_q > 2/3 > 1/2).
  facts.emplace_back("Arith8", (m0 + 1.0) * sq > 2.0);

  return facts;
}

inline AdmissibilityReport admissibility(int N, double m1, double m2) {
  if (N < 1) throw DomainError("admissibility requires dimension N >= 1");
  if (!(m1 > 1.0) || !(m1 <= m2))
    throw DomainError("admissibility requires 1 < m1 <= m2");
  if (!(m2 < NonlinearityModel::m_max(N)))
    throw DomainError("m2 >= (N+2)/(N-2): energy supercritical, rejected");

  AdmissibilityReport rep;
  rep.N = N;
  rep.m1 = m1;
  rep.m2 = m2;
  rep.p = m2 + 1.0;
  rep.sigma_p = sigma_r(N, rep.p);
  rep.m0 = std::min(2.0, m1);
  rep.cond1 = m1 > 1.0 + (2.0 / N) * (1.0 + rep.sigma_p);
  rep.cond2 = m1 > 1.0 + (2.0 / N) * (1.0 + 2.0 / (rep.m0 + 1.0));
  rep.n_ok = N >= 2;
  rep.admissible = rep.cond1 && rep.cond2 && rep.n_ok;
  if (rep.admissible) {
    const double lower = 2.0 / (rep.m0 + 1.0);
    const double upper = std::min(1.0, 0.5 * N * (m1 - 1.0) - 1.0);
    if (rep.sigma_p > lower) {
      rep.sigma_q = rep.sigma_p;
      rep.delta = 0.0;
    } else {
      // Largest delta <= 1e-3 with sigma_q strictly inside (lower, upper):
      // cap at half the gap so the inequality stays strict.
      const double gap = upper - lower;
      rep.delta = std::min(1e-3, 0.5 * gap);
      rep.sigma_q = lower + rep.delta;
    }
    // sigma_q = N(1/2 - 1/q)  =>  q = 2N / (N - 2 sigma_q).
    rep.q = 2.0 * N / (N - 2.0 * rep.sigma_q);
    rep.mu = std::min(rep.sigma_p, rep.m0 * rep.sigma_q - 1.0);
    rep.arith_facts = arithmetic_facts(rep);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Region boundaries for the admissible (m2, m1) region at fixed N >= 2.
//   bound1(m2) = 1 + (2/N)(1 + sigma_{m2+1})           (from cond1)
//   bound2     = root of  psi(m1) = m1 - 1 - (2/N)(1 + 2/(min{2,m1}+1))
// psi is strictly increasing, so bisection to 1e-9 is reliable; bound2 does
// not depend on m2.
// ---------------------------------------------------------------------------
struct RegionRow {
  double m2 = 0.0;
  double bound1 = 0.0;
  double bound2 = 0.0;
};

inline double region_bound1(int N, double m2) {
  return 1.0 + (2.0 / N) * (1.0 + sigma_r(N, m2 + 1.0));
}

inline double region_bound2(int N) {
  auto psi = [N](double m1) {
    return m1 - 1.0 - (2.0 / N) * (1.0 + 2.0 / (std::min(2.0, m1) + 1.0));
  };
  double lo = 1.0, hi = 8.0;
  while (psi(hi) < 0.0) hi *= 2.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<RegionRow> region_boundary(int N,
                                              const std::vector<double>& m2s) {
  if (N < 2) throw DomainError("q selection requires N >= 2");
  const double b2 = region_bound2(N);
  std::vector<RegionRow> rows;
  rows.reserve(m2s.size());
  for (double m2 : m2s) {
    if (!(m2 > 1.0) || !(m2 < NonlinearityModel::m_max(N)))
      throw DomainError("region samples must lie in (1, m_max)");
    rows.push_back({m2, region_bound1(N, m2), b2});
  }
  return rows;
}

struct CriticalExponents {
  double m_c = 0.0;
  double m_max = 0.0;
};

inline CriticalExponents critical_exponents(int N) {
  if (N < 1) throw DomainError("critical exponents require N >= 1");
  return {NonlinearityModel::m_critical(N), NonlinearityModel::m_max(N)};
}

} // namespace nlslab
