// Tests for ground-state profile construction: shooting + Newton, the branch
// cache, the omega-derivative, and stability classification.
#include <catch2/catch_amalgamated.hpp>

using Catch::Approx;

#include <cmath>

#include "nlslab/soliton.hpp"

using namespace nlslab;

namespace {
const auto cubic3d = NonlinearityModel::pure_power(3, 3.0);
const auto cubic1d = NonlinearityModel::pure_power(1, 3.0);
}  // namespace

TEST_CASE("1D cubic ground state matches sqrt(2) sech(r)") {
  RadialGrid g(1, 15.0, 7500);
  const SolitonProfile p = solve_profile(cubic1d, 1.0, g);
  double sup = 0.0;
  for (int j = 0; j < g.M(); ++j) {
    const double exact = std::sqrt(2.0) / std::cosh(g.r()[j]);
    sup = std::max(sup, std::abs(p.phi[j] - exact));
  }
  CHECK(sup < 2e-6);
  CHECK(p.phi0 == Approx(std::sqrt(2.0)).margin(2e-6));
  // Defect floor scales like eps/h^2; at h = 2e-3 it sits near 2e-10.
  CHECK(p.residual < 1e-9);
}

TEST_CASE("1D branch: closed-form mass and positive slope (stable)") {
  // ||phi_omega||^2 = 4 sqrt(omega) on the full line, slope = 1/sqrt(omega).
  RadialGrid g(1, 15.0, 3000);
  SolitonBranch branch(cubic1d, g, 0.5, 2.0);
  const BranchPoint& bp = branch.at(1.0);
  CHECK(g.inner(bp.profile.phi, bp.profile.phi) == Approx(4.0).epsilon(1e-5));
  CHECK(bp.slope == Approx(1.0).epsilon(1e-3));
  CHECK(stability_classification(bp.slope,
                                 g.inner(bp.profile.phi, bp.profile.phi)) ==
        Stability::Stable);
  // Exponential tail: log-slope approaches -sqrt(omega).
  CHECK(tail_log_slope(g, bp.profile.phi) == Approx(-1.0).margin(0.02));
}

TEST_CASE("3D cubic ground state reference values") {
  RadialGrid g(3, 15.0, 1024);
  SolitonBranch branch(cubic3d, g, 0.5, 2.0);
  const BranchPoint& bp = branch.at(1.0);
  // Central amplitude cross-checked against a high-resolution shooting
  // computation (agrees to ~1e-8 at this grid).
  CHECK(bp.profile.phi0 == Approx(4.3373876800).margin(1e-6));
  CHECK(bp.profile.residual < 1e-10);
  const double l2sq = g.inner(bp.profile.phi, bp.profile.phi);
  CHECK(0.5 * l2sq == Approx(9.4415).margin(2e-3));
  CHECK(bp.slope == Approx(-4.7279).margin(5e-3));
  CHECK(stability_classification(bp.slope, l2sq) == Stability::Unstable);
  // Mass scaling ||phi_omega||^2 = omega^{-1/2} ||phi_1||^2 implies
  // slope = <d_omega phi, phi> = -||phi_1||^2/4 at omega = 1.
  CHECK(bp.slope == Approx(-l2sq / 4.0).epsilon(5e-3));
  // Tail log-slope is -1 - 1/r (Yukawa-type decay): about -1.1 in the window.
  CHECK(tail_log_slope(g, bp.profile.phi) == Approx(-1.10).margin(0.05));
}

TEST_CASE("3D cubic mass obeys the omega^{-1/4} scaling law") {
  RadialGrid g(3, 20.0, 2048);
  SolitonBranch branch(cubic3d, g, 0.25, 4.0);
  const double n1 = std::sqrt(g.inner(branch.at(1.0).profile.phi,
                                      branch.at(1.0).profile.phi));
  for (double w : {0.5, 2.0}) {
    const double nw = std::sqrt(g.inner(branch.at(w).profile.phi,
                                        branch.at(w).profile.phi));
    CHECK(nw / n1 == Approx(std::pow(w, -0.25)).epsilon(1e-3));
  }
}

TEST_CASE("branch slope agrees with a finite difference of the mass") {
  RadialGrid g(3, 15.0, 1024);
  SolitonBranch branch(cubic3d, g, 0.5, 2.0);
  const double d = 0.01;
  const double mp = g.inner(branch.at(1.0 + d).profile.phi,
                            branch.at(1.0 + d).profile.phi);
  const double mm = g.inner(branch.at(1.0 - d).profile.phi,
                            branch.at(1.0 - d).profile.phi);
  const double slope_fd = 0.25 * (mp - mm) / d;  // (1/2) d/domega of ||phi||^2
  CHECK(branch.at(1.0).slope == Approx(slope_fd).epsilon(3e-4));
}

TEST_CASE("2D cubic is the degenerate (mass-critical) case") {
  RadialGrid g(2, 15.0, 1024);
  const auto m = NonlinearityModel::pure_power(2, 3.0);
  SolitonBranch branch(m, g, 0.5, 2.0);
  const BranchPoint& bp = branch.at(1.0);
  const double l2sq = g.inner(bp.profile.phi, bp.profile.phi);
  CHECK(l2sq == Approx(11.70).margin(0.02));
  CHECK(std::abs(bp.slope) < 1e-3 * l2sq);
  CHECK(stability_classification(bp.slope, l2sq) == Stability::Degenerate);
}

TEST_CASE("omega-derivative satisfies its defining linear equation") {
  RadialGrid g(3, 15.0, 1024);
  SolitonBranch branch(cubic3d, g, 0.5, 2.0);
  const BranchPoint& bp = branch.at(1.0);
  // (-lap + omega - dg_real(phi)) dphi = -phi, solved in-branch; verify the
  // residual against an independent application of the operator.
  RealField res = -g.lap(bp.dphi);
  for (int j = 0; j < g.M(); ++j)
    res[j] += (1.0 - cubic3d.dg_real(bp.profile.phi[j])) * bp.dphi[j] +
              bp.profile.phi[j];
  CHECK(g.l2(res) < 1e-8 * g.l2(bp.profile.phi));
}

TEST_CASE("defocusing and zero-frequency cases have no ground state") {
  RadialGrid g(3, 15.0, 512);
  const auto defoc = NonlinearityModel::two_term(3, -1.0, 3.0, 0.0, 4.0);
  CHECK_THROWS_AS(solve_profile(defoc, 1.0, g), NoGroundState);
  CHECK_THROWS_AS(solve_profile(cubic3d, -1.0, g), NoGroundState);
  CHECK_THROWS_AS(solve_profile(cubic3d, 0.0, g), NoGroundState);
}

TEST_CASE("cubic-quintic existence threshold in 2D") {
  // For f(s) = s - s^2 the variational existence condition
  // sup_a 2G(a)/a^2 > omega fails exactly at omega = 3/16.
  const auto cq = NonlinearityModel::two_term(2, 1.0, 3.0, -1.0, 5.0);
  RadialGrid g(2, 40.0, 2000);
  const SolitonProfile p = solve_profile(cq, 0.15, g);
  CHECK(p.phi0 > 0.0);
  CHECK(p.residual < 1e-9);
  // Profile decays monotonically in the tail region.
  CHECK(p.phi[g.M() - 1] < 1e-6 * p.phi0);
  CHECK_THROWS_AS(solve_profile(cq, 0.20, g), NoGroundState);
}

TEST_CASE("branch caching and warm refinement are consistent") {
  RadialGrid g(3, 15.0, 1024);
  SolitonBranch branch(cubic3d, g, 0.5, 2.0);
  const double m1 = g.inner(branch.at(1.0).profile.phi,
                            branch.at(1.0).profile.phi);
  // Nearby point solves warm from the cache; the scaling law still holds.
  const double m2 = g.inner(branch.at(1.02).profile.phi,
                            branch.at(1.02).profile.phi);
  CHECK(m2 / m1 == Approx(std::pow(1.02, -0.5)).epsilon(1e-4));
  // Repeated access returns the identical cached object.
  const BranchPoint* a = &branch.at(1.02);
  const BranchPoint* b = &branch.at(1.02);
  CHECK(a == b);
  CHECK(branch.contains(1.5));
  CHECK_FALSE(branch.contains(2.5));
  CHECK_THROWS_AS(SolitonBranch(cubic3d, g, -1.0, 2.0), DomainError);
}

TEST_CASE("profile solves are deterministic") {
  RadialGrid g(3, 12.0, 512);
  const SolitonProfile a = solve_profile(cubic3d, 1.0, g);
  const SolitonProfile b = solve_profile(cubic3d, 1.0, g);
  CHECK((a.phi - b.phi).abs().maxCoeff() == 0.0);
  CHECK(a.phi0 == b.phi0);
}
