// Tests for the Crank–Nicolson integrator: dispersive exactness on the free
// equation, conservation laws, phase rotation of a standing wave, order of
// accuracy, time reversibility, the absorbing sponge, and failure modes.
#include <catch2/catch_amalgamated.hpp>

using Catch::Approx;

#include <cmath>
#include <complex>
#include <vector>

#include "nlslab/evolution.hpp"
#include "nlslab/soliton.hpp"

using namespace nlslab;

namespace {
const auto cubic3d = NonlinearityModel::pure_power(3, 3.0);

ComplexField to_complex(const RealField& f) {
  return f.cast<complexd>();
}

// Smooth complex annular bump used to perturb profiles.
ComplexField ring_bump(const RadialGrid& g, double r0, double width,
                       complexd amp) {
  ComplexField b(g.M());
  for (int j = 0; j < g.M(); ++j) {
    const double x = (g.r()[j] - r0) / width;
    b[j] = amp * std::exp(-x * x);
  }
  return b;
}
}  // namespace

TEST_CASE("free Gaussian packet matches the exact dispersive solution") {
  const auto free3d = NonlinearityModel::linear(3);
  RadialGrid g(3, 30.0, 2048);
  ComplexField u0(g.M());
  for (int j = 0; j < g.M(); ++j)
    u0[j] = std::exp(-0.5 * g.r()[j] * g.r()[j]);

  EvolveOptions opt;
  opt.dt = 5e-4;
  opt.t_end = 0.5;
  const ComplexField uT = evolve(free3d, g, u0, opt);

  // i u_t + lap u = 0 with Gaussian data stays Gaussian with complex width
  // a(t) = 1 + 2 i t and amplitude a^{-N/2}.
  const complexd a(1.0, 2.0 * opt.t_end);
  ComplexField exact(g.M());
  for (int j = 0; j < g.M(); ++j)
    exact[j] = std::pow(a, -1.5) * std::exp(-0.5 * g.r()[j] * g.r()[j] / a);

  CHECK(g.l2(ComplexField(uT - exact)) < 5e-4);

  Stepper st(free3d, g, opt);
  const double m0 = st.conserved(u0).mass;
  const double mT = st.conserved(uT).mass;
  CHECK(std::abs(mT - m0) < 1e-12 * m0);
}

TEST_CASE("conserved quantities of a Gaussian match closed forms") {
  RadialGrid g(3, 12.0, 2000);
  ComplexField u(g.M());
  for (int j = 0; j < g.M(); ++j)
    u[j] = std::exp(-0.5 * g.r()[j] * g.r()[j]);

  EvolveOptions opt;
  Stepper st(cubic3d, g, opt);
  const ConservedQuantities c = st.conserved(u);

  // ||u||_{L2}^2 = pi^{3/2}, ||grad u||_{L2}^2 = (3/2) pi^{3/2},
  // ||u||_{L4}^4 = (pi/2)^{3/2}; for the cubic model G(a) = a^4 / 4.
  const double pi32 = std::pow(M_PI, 1.5);
  const double mass_exact = 0.5 * pi32;
  const double energy_exact =
      0.75 * pi32 - 0.25 * std::pow(0.5 * M_PI, 1.5);
  CHECK(c.mass == Approx(mass_exact).epsilon(1e-4));
  CHECK(c.energy == Approx(energy_exact).epsilon(1e-4));
}

TEST_CASE("soliton rotates in phase at rate omega") {
  RadialGrid g(3, 15.0, 1024);
  const SolitonProfile p = solve_profile(cubic3d, 1.0, g);

  EvolveOptions opt;
  opt.dt = 1e-3;
  opt.t_end = 1.0;
  const ComplexField uT = evolve(cubic3d, g, to_complex(p.phi), opt);

  const complexd rot = std::exp(complexd(0.0, p.omega * opt.t_end));
  double err_fwd = 0.0, err_bwd = 0.0;
  for (int j = 0; j < g.M(); ++j) {
    err_fwd = std::max(err_fwd, std::abs(uT[j] - rot * p.phi[j]));
    err_bwd = std::max(err_bwd, std::abs(uT[j] - std::conj(rot) * p.phi[j]));
  }
  // Truncation-order phase drift around the exact rotation e^{+i omega t}
  // (measured 1.25e-4 * phi0 at dt = 1e-3, scaling cleanly as dt^2); the
  // opposite rotation direction would leave an O(1) mismatch.
  CHECK(err_fwd < 2e-4 * p.phi0);
  CHECK(err_bwd > 1.0);
}

TEST_CASE("mass is conserved to round-off and energy to truncation order") {
  RadialGrid g(3, 15.0, 1024);
  const SolitonProfile p = solve_profile(cubic3d, 1.0, g);
  const ComplexField u0 =
      to_complex(p.phi) + ring_bump(g, 3.0, 1.0, complexd(1e-4, 5e-5));

  EvolveOptions opt;
  opt.dt = 1e-3;
  opt.t_end = 1.0;
  opt.observer_stride = 50;

  Stepper st(cubic3d, g, opt);
  const ConservedQuantities c0 = st.conserved(u0);
  double mass_drift = 0.0, energy_drift = 0.0;
  evolve(cubic3d, g, u0, opt, [&](double, const ComplexField& u) {
    const ConservedQuantities c = st.conserved(u);
    mass_drift = std::max(mass_drift, std::abs(c.mass - c0.mass));
    energy_drift = std::max(energy_drift, std::abs(c.energy - c0.energy));
    return true;
  });
  CHECK(mass_drift < 1e-12 * c0.mass);
  CHECK(energy_drift < 1e-7 * std::abs(c0.energy));
}

TEST_CASE("step halving shows second-order self-convergence") {
  RadialGrid g(3, 15.0, 768);
  const SolitonProfile p = solve_profile(cubic3d, 1.0, g);
  const ComplexField u0 =
      to_complex(p.phi) + ring_bump(g, 2.0, 1.0, complexd(1e-3, 0.0));

  auto run = [&](double dt) {
    EvolveOptions opt;
    opt.dt = dt;
    opt.t_end = 0.1;
    opt.fp_tol = 1e-13;
    return evolve(cubic3d, g, u0, opt);
  };
  const ComplexField u1 = run(4e-3);
  const ComplexField u2 = run(2e-3);
  const ComplexField u3 = run(1e-3);
  const double d1 = g.l2(ComplexField(u1 - u2));
  const double d2 = g.l2(ComplexField(u2 - u3));
  CHECK(d1 / d2 == Approx(4.0).margin(0.6));
}

TEST_CASE("time reversal returns the initial state") {
  RadialGrid g(3, 15.0, 512);
  const SolitonProfile p = solve_profile(cubic3d, 1.0, g);
  const ComplexField u0 =
      to_complex(p.phi) + ring_bump(g, 2.0, 1.0, complexd(1e-3, 1e-3));

  EvolveOptions fwd;
  fwd.dt = 1e-3;
  fwd.t_end = 0.05;
  const ComplexField uT = evolve(cubic3d, g, u0, fwd);

  EvolveOptions bwd = fwd;
  bwd.dt = -fwd.dt;
  bwd.t_end = -fwd.t_end;
  const ComplexField back = evolve(cubic3d, g, uT, bwd);

  CHECK((back - u0).abs().maxCoeff() < 1e-8);
}

TEST_CASE("sponge profile follows the quadratic ramp") {
  RadialGrid g(3, 20.0, 512);
  SpongeConfig sc;
  sc.enabled = true;
  sc.strength = 3.0;
  sc.start_frac = 0.9;
  const RealField sig = sponge_profile(g, sc);

  const double rs = sc.start_frac * g.R();
  for (int j = 0; j < g.M(); ++j) {
    if (g.r()[j] <= rs) {
      CHECK(sig[j] == 0.0);
    } else {
      const double x = (g.r()[j] - rs) / (g.R() - rs);
      CHECK(sig[j] == Approx(sc.strength * x * x).margin(1e-15));
    }
  }
  CHECK(sig[0] == 0.0);
  CHECK(sig[g.M() - 1] > 0.0);

  SpongeConfig off;
  CHECK((sponge_profile(g, off) == 0.0).all());
}

TEST_CASE("absorbing sponge drains mass from the outer region") {
  const auto free3d = NonlinearityModel::linear(3);
  RadialGrid g(3, 20.0, 512);
  const ComplexField u0 = ring_bump(g, 18.5, 0.5, complexd(1.0, 0.0));

  EvolveOptions damped;
  damped.dt = 2e-3;
  damped.t_end = 2.0;
  damped.sponge.enabled = true;

  Stepper st(free3d, g, damped);
  const double m0 = st.conserved(u0).mass;
  const ComplexField uT = evolve(free3d, g, u0, damped);
  const double mT = st.conserved(uT).mass;
  CHECK(mT < 0.6 * m0);

  // Without the sponge the same run conserves mass to round-off.
  EvolveOptions plain = damped;
  plain.sponge.enabled = false;
  const ComplexField vT = evolve(free3d, g, u0, plain);
  CHECK(std::abs(st.conserved(vT).mass - m0) < 1e-12 * m0);
}

TEST_CASE("fixed-point budget of one iteration reports non-convergence") {
  RadialGrid g(3, 15.0, 512);
  const SolitonProfile p = solve_profile(cubic3d, 1.0, g);

  EvolveOptions opt;
  opt.dt = 1e-3;
  opt.t_end = 0.01;
  opt.fp_max = 1;
  CHECK_THROWS_AS(evolve(cubic3d, g, to_complex(p.phi), opt), NonConvergence);
}

TEST_CASE("overflow guard flags a collapsing field") {
  RadialGrid g(3, 15.0, 512);
  const SolitonProfile p = solve_profile(cubic3d, 1.0, g);
  const ComplexField u0 = to_complex(RealField(3.0 * p.phi));

  EvolveOptions opt;
  opt.dt = 1e-3;
  opt.t_end = 0.1;
  opt.guard_factor = 2.0;
  try {
    evolve(cubic3d, g, u0, opt);
    FAIL("expected NumericalBlowupSuspected");
  } catch (const NumericalBlowupSuspected& e) {
    CHECK(e.t > 0.0);
    CHECK(e.t < 0.05);
    CHECK(e.type() == "numerical_blowup_suspected");
  }
}

TEST_CASE("observer sees t = 0, every stride, and the final step") {
  const auto free1d = NonlinearityModel::linear(1);
  RadialGrid g(1, 10.0, 128);
  ComplexField u0(g.M());
  for (int j = 0; j < g.M(); ++j)
    u0[j] = std::exp(-g.r()[j] * g.r()[j]);

  EvolveOptions opt;
  opt.dt = 1e-3;
  opt.t_end = 0.03;
  opt.observer_stride = 7;
  std::vector<double> times;
  evolve(free1d, g, u0, opt, [&](double t, const ComplexField&) {
    times.push_back(t);
    return true;
  });
  // 30 steps: samples at 0, 7, 14, 21, 28, and the final step 30.
  REQUIRE(times.size() == 6);
  CHECK(times.front() == 0.0);
  CHECK(times[1] == Approx(7e-3));
  CHECK(times.back() == Approx(opt.t_end));

  // Returning false stops the run at that sample.
  int calls = 0;
  evolve(free1d, g, u0, opt, [&](double, const ComplexField&) {
    ++calls;
    return calls < 2;
  });
  CHECK(calls == 2);
}
