// Tests for the modulation layer: exact recovery of planted decompositions,
// failure modes of the (theta, omega) Newton solve, the nonlinear remainder
// and its envelope, the tracker along an evolution, and the second-order
// validity of the finite-difference modulation identities.
#include <catch2/catch_amalgamated.hpp>

using Catch::Approx;

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "nlslab/evolution.hpp"
#include "nlslab/modulation.hpp"

using namespace nlslab;

namespace {
const auto cubic3d = NonlinearityModel::pure_power(3, 3.0);
const auto cubic1d = NonlinearityModel::pure_power(1, 3.0);

ComplexField from_pair(const TwoField& f) {
  ComplexField u(f.c1.size());
  for (int j = 0; j < f.c1.size(); ++j) u[j] = complexd(f.c1[j], f.c2[j]);
  return u;
}

TwoField gaussian_pair(const RadialGrid& g, double r1, double r2, double amp) {
  RealField a(g.M()), b(g.M());
  for (int j = 0; j < g.M(); ++j) {
    const double r = g.r()[j];
    a[j] = amp * std::exp(-(r - r1) * (r - r1));
    b[j] = 0.6 * amp * std::exp(-(r - r2) * (r - r2));
  }
  return {a, b};
}
}  // namespace

TEST_CASE("planted decomposition is recovered through the Newton solve") {
  RadialGrid g(3, 15.0, 1024);
  SolitonBranch branch(cubic3d, g, 0.9, 1.2);
  const double omega_star = 1.03, theta_star = 0.7;
  const BranchPoint& bp = branch.at(omega_star);

  const EigenpairResult res =
      unstable_eigenpair(cubic3d, bp.profile, g, bp.dphi);
  REQUIRE(res.status == EigenpairStatus::Found);
  const DiscreteSpectrum& sp = res.spectrum;

  // eta* lives in the continuous spectral subspace by construction.
  Projections proj(g, bp.profile.phi, bp.dphi, bp.slope, sp);
  const TwoField eta2 = proj.pc(gaussian_pair(g, 3.0, 5.0, 5e-3));
  const ComplexField eta_star = from_pair(eta2);

  const double bplus_star = 2e-3, bminus_star = -1e-3;
  ComplexField eps(g.M());
  for (int j = 0; j < g.M(); ++j) {
    const double c_re = (bplus_star + bminus_star) * sp.Y_re[j];
    const double c_im = (bplus_star - bminus_star) * sp.Y_im[j];
    eps[j] = complexd(c_re, c_im) + eta_star[j];
  }
  const complexd ph = std::exp(complexd(0.0, theta_star));
  const ComplexField u =
      (bp.profile.phi.cast<complexd>() + eps) * ph;

  const ModulationState st =
      decompose(u, 0.0, theta_star + 0.3, 1.1 * omega_star, branch, &sp);

  CHECK(st.theta == Approx(theta_star).margin(1e-9));
  CHECK(st.omega == Approx(omega_star).margin(1e-9));
  CHECK(st.b_plus == Approx(bplus_star).margin(1e-9));
  CHECK(st.b_minus == Approx(bminus_star).margin(1e-9));
  CHECK(st.newton_iters < 15);
  for (double o : st.orth) CHECK(std::abs(o) < 1e-10);

  REQUIRE(st.eta.size() == g.M());
  CHECK(g.l2(ComplexField(st.eta - eta_star)) < 1e-8);
  CHECK(st.eta_l2 == Approx(g.l2(eta_star)).epsilon(1e-6));

  // The subtraction-based eta agrees with the projection route.
  const TwoField eps2{RealField(st.eps.real()), RealField(st.eps.imag())};
  const ComplexField eta_proj = from_pair(proj.pc(eps2));
  CHECK(g.l2(ComplexField(st.eta - eta_proj)) < 1e-9);
}

TEST_CASE("stable-branch decomposition carries no discrete modes") {
  RadialGrid g(1, 15.0, 800);
  SolitonBranch branch(cubic1d, g, 0.8, 1.2);
  const double omega_star = 0.97, theta_star = -0.4;
  const BranchPoint& bp = branch.at(omega_star);

  Projections proj(g, bp.profile.phi, bp.dphi, bp.slope);
  const TwoField eta2 = proj.pc(gaussian_pair(g, 2.0, 4.0, 1e-3));
  const ComplexField eta_star = from_pair(eta2);

  const complexd ph = std::exp(complexd(0.0, theta_star));
  const ComplexField u = (bp.profile.phi.cast<complexd>() + eta_star) * ph;

  const ModulationState st =
      decompose(u, 0.0, theta_star - 0.2, 1.05, branch, nullptr);
  CHECK(st.theta == Approx(theta_star).margin(1e-10));
  CHECK(st.omega == Approx(omega_star).margin(1e-10));
  CHECK(st.b_plus == 0.0);
  CHECK(st.b_minus == 0.0);
  CHECK(g.l2(ComplexField(st.eta - st.eps)) == 0.0);
  CHECK(g.l2(ComplexField(st.eta - eta_star)) < 1e-9);
}

TEST_CASE("guesses outside or walking out of the branch throw OutOfBranch") {
  RadialGrid g(3, 15.0, 512);
  SolitonBranch branch(cubic3d, g, 0.95, 1.05);
  const BranchPoint& bp = branch.at(1.0);
  const ComplexField u = bp.profile.phi.cast<complexd>();

  CHECK_THROWS_AS(decompose(u, 0.0, 0.0, 1.30, branch, nullptr), OutOfBranch);

  // A field from far outside the interval drags the Newton out of it.
  const SolitonProfile far = solve_profile(cubic3d, 1.25, g);
  bool left_branch = false;
  try {
    decompose(far.phi.cast<complexd>(), 0.0, 0.0, 1.04, branch, nullptr);
  } catch (const OutOfBranch& e) {
    left_branch = true;
    CHECK(e.omega > 1.05);
  } catch (const NewtonDiverged&) {
    left_branch = true; // acceptable: the walk may stall before the fence
  }
  CHECK(left_branch);
}

TEST_CASE("featureless noise fails loudly instead of decomposing") {
  RadialGrid g(3, 15.0, 512);
  SolitonBranch branch(cubic3d, g, 0.95, 1.05);
  std::mt19937_64 rng(7u);
  std::normal_distribution<double> nd(0.0, 1.0);
  ComplexField u(g.M());
  for (int j = 0; j < g.M(); ++j) u[j] = complexd(nd(rng), nd(rng));

  try {
    decompose(u, 0.0, 0.0, 1.0, branch, nullptr);
    FAIL("expected the modulation Newton to reject noise");
  } catch (const Error& e) {
    const bool known = e.type() == "newton_diverged" ||
                       e.type() == "out_of_branch";
    CHECK(known);
  }
}

TEST_CASE("cubic nonlinear remainder matches its closed form") {
  RadialGrid g(3, 12.0, 400);
  RealField phi(g.M());
  for (int j = 0; j < g.M(); ++j)
    phi[j] = 2.0 * std::exp(-0.3 * g.r()[j] * g.r()[j]);
  ComplexField eps(g.M());
  for (int j = 0; j < g.M(); ++j) {
    const double r = g.r()[j];
    eps[j] = complexd(1e-3 * std::exp(-(r - 2.0) * (r - 2.0)),
                      -5e-4 * std::exp(-(r - 3.0) * (r - 3.0)));
  }

  const RemainderReport rep = nonlinear_remainder(eps, phi, cubic3d);
  // For g(u) = |u|^2 u:  N(eps) = phi (2|eps|^2 + eps^2) + |eps|^2 eps.
  double sup = 0.0;
  for (int j = 0; j < g.M(); ++j) {
    const complexd e = eps[j];
    const double a2 = std::norm(e);
    const complexd exact = phi[j] * (2.0 * a2 + e * e) + a2 * e;
    sup = std::max(sup, std::abs(rep.N[j] - exact));
  }
  CHECK(sup < 1e-14);
  CHECK(rep.C_fit > 0.5);
  CHECK(rep.C_fit < 3.001);
  CHECK(rep.A1 == 1.0);
  CHECK(rep.A2 == 0.0);
}

TEST_CASE("envelope coefficients follow the exponents") {
  RadialGrid g(3, 10.0, 200);
  RealField phi(g.M());
  for (int j = 0; j < g.M(); ++j)
    phi[j] = std::exp(-0.5 * g.r()[j] * g.r()[j]);
  ComplexField eps = 1e-2 * phi.cast<complexd>();

  // Exponents at or below 2 contribute no phi-weighted quadratic term.
  const auto soft = NonlinearityModel::pure_power(3, 1.5);
  const RemainderReport r1 = nonlinear_remainder(eps, phi, soft);
  CHECK(r1.A1 == 0.0);
  CHECK(r1.A2 == 0.0);
  CHECK(r1.C_fit > 0.0);

  const auto mix = NonlinearityModel::two_term(3, 1.0, 3.0, 0.5, 4.0);
  const RemainderReport r2 = nonlinear_remainder(eps, phi, mix);
  CHECK(r2.A1 == 1.0);
  CHECK(r2.A2 == 0.5);
}

TEST_CASE("tracker follows a decaying-mode launch") {
  RadialGrid g(3, 24.0, 768);
  SolitonBranch branch(cubic3d, g, 0.95, 1.05);
  const BranchPoint& bp = branch.at(1.0);
  const EigenpairResult res =
      unstable_eigenpair(cubic3d, bp.profile, g, bp.dphi);
  REQUIRE(res.status == EigenpairStatus::Found);
  const DiscreteSpectrum sp = res.spectrum;

  // Launch along the decaying mode Y- = (Y_re, -Y_im).
  const double c_minus = 1e-3;
  ComplexField u0(g.M());
  for (int j = 0; j < g.M(); ++j)
    u0[j] = bp.profile.phi[j] +
            c_minus * complexd(sp.Y_re[j], -sp.Y_im[j]);

  EvolveOptions opt;
  opt.dt = 2.5e-3;
  opt.t_end = 0.4;
  opt.observer_stride = 4; // samples every 0.01

  ModulationTracker tracker(branch, sp, cubic3d);
  tracker.seed(0.0, 1.0);
  std::vector<ModulationState> series;
  evolve(cubic3d, g, u0, opt, [&](double t, const ComplexField& u) {
    series.push_back(tracker.feed(t, u));
    return true;
  });
  REQUIRE(series.size() == 41);

  const ModulationState& first = series.front();
  CHECK(first.theta == Approx(0.0).margin(1e-8));
  CHECK(first.omega == Approx(1.0).margin(1e-7));
  CHECK(first.b_minus == Approx(c_minus).epsilon(1e-4));
  CHECK(std::abs(first.b_plus) < 1e-8);

  // At t = 0.2 the phase has advanced by omega t and b- has decayed by
  // e^{-e2 t}; the growing amplitude stays at its quadratically-seeded size.
  const ModulationState& mid = series[20];
  CHECK(mid.t == Approx(0.2));
  CHECK(mid.theta == Approx(0.2).epsilon(0.01));
  CHECK(mid.b_minus ==
        Approx(c_minus * std::exp(-sp.e_plus * 0.2)).epsilon(0.1));
  CHECK(std::abs(mid.b_plus) < 1e-4);
  CHECK(mid.eta_l2 < 5e-4);
  for (const ModulationState& s : series) {
    for (double o : s.orth) CHECK(std::abs(o) < 1e-8);
    CHECK(s.newton_iters <= 10);
  }

  // Decay is monotone in time over the window.
  for (int k = 4; k < 40; k += 4)
    CHECK(std::abs(series[k + 1].b_minus) < std::abs(series[k - 3].b_minus));

  SECTION("modulation identities hold at second order in the time step") {
    // The identities describe the semi-discrete (continuous-time) flow, so
    // both error sources — the centered differences and the integrator's own
    // phase bias — must shrink together: sample every step and let dt vary.
    auto max_res = [&](double dt_evo) {
      EvolveOptions o;
      o.dt = dt_evo;
      o.t_end = 0.4;
      o.observer_stride = 1;
      ModulationTracker tr(branch, sp, cubic3d);
      tr.seed(0.0, 1.0);
      std::vector<ModulationState> run;
      evolve(cubic3d, g, u0, o, [&](double t, const ComplexField& u) {
        run.push_back(tr.feed(t, u));
        return true;
      });
      const auto rr = dynamic_residuals(run, branch, cubic3d, sp);
      REQUIRE(!rr.empty());
      std::array<double, 4> m{0, 0, 0, 0};
      for (const auto& r : rr) {
        m[0] = std::max(m[0], std::abs(r.r_omega));
        m[1] = std::max(m[1], std::abs(r.r_theta));
        m[2] = std::max(m[2], std::abs(r.r_bplus));
        m[3] = std::max(m[3], std::abs(r.r_bminus));
      }
      return m;
    };
    const auto rc = max_res(1e-2);
    const auto rm = max_res(5e-3);
    const auto rf = max_res(2.5e-3);
    for (int i = 0; i < 4; ++i) {
      CHECK(rc[i] / rm[i] > 2.5);
      CHECK(rc[i] / rm[i] < 6.0);
      CHECK(rm[i] / rf[i] > 2.5);
      CHECK(rm[i] / rf[i] < 6.0);
    }
  }
}
