#pragma once
// cli.hpp — the command-line front end. dispatch() parses a subcommand,
// runs it against the library, and reports:
//
//   exit 0  success
//   exit 1  usage error (unknown subcommand, bad/missing flags)
//   exit 2  runtime error (domain violations, solver failures, io)
//
// On failure a machine-readable JSON object {"error": {"type", "message"}}
// is written to the error stream. Subcommands:
//
//   admissible  — admissibility arithmetic for one (N, m1, m2)
//   region      — boundary curves of the admissible region at fixed N
//   profile     — soliton profile at one omega
//   spectrum    — linearized point spectrum and mode shapes
//   evolve      — time evolution with conserved-quantity observers
//   decompose   — modulation decomposition of a stored field
//   dichotomy   — one convergence/escape experiment
//   sweep       — a batch of dichotomy runs (optionally in parallel)
//
// Set NLSLAB_VERBOSE=1 for progress notes on the error stream.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlslab/dichotomy.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/io.hpp"
#include "nlslab/model.hpp"
#include "nlslab/modulation.hpp"
#include "nlslab/soliton.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

inline bool verbose_enabled() {
  const char* v = std::getenv("NLSLAB_VERBOSE");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

namespace clidetail {

struct ModelFlags {
  int N = 3;
  std::string kind = "pure_power";
  double m = 3.0;
  double c1 = 1.0, m1 = 3.0, c2 = 0.0, m2 = 5.0;

  void attach(CLI::App* sub) {
    sub->add_option("--N", N, "spatial dimension")->required();
    sub->add_option("--kind", kind,
                    "nonlinearity kind: pure_power | two_term | linear");
    sub->add_option("--m", m, "pure-power exponent");
    sub->add_option("--c1", c1, "first coefficient (two_term)");
    sub->add_option("--m1", m1, "first exponent (two_term)");
    sub->add_option("--c2", c2, "second coefficient (two_term)");
    sub->add_option("--m2", m2, "second exponent (two_term)");
  }
  ModelConfig config() const {
    ModelConfig mc;
    mc.N = N;
    mc.kind = kind;
    mc.m = m;
    mc.c1 = c1;
    mc.m1 = m1;
    mc.c2 = c2;
    mc.m2 = m2;
    return mc;
  }
};

inline json admissibility_json(const AdmissibilityReport& rep) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["N"] = rep.N;
  j["m1"] = rep.m1;
  j["m2"] = rep.m2;
  j["admissible"] = rep.admissible;
  j["cond1"] = rep.cond1;
  j["cond2"] = rep.cond2;
  j["n_ok"] = rep.n_ok;
  if (rep.admissible) {
    j["p"] = rep.p;
    j["sigma_p"] = rep.sigma_p;
    j["m0"] = rep.m0;
    j["sigma_q"] = rep.sigma_q;
    j["q"] = rep.q;
    j["delta"] = rep.delta;
    j["mu"] = rep.mu;
    json facts;
    for (const auto& [name, ok] : rep.arith_facts) facts[name] = ok;
    j["arithmetic"] = facts;
  }
  return j;
}

// ----------------------------------------------------------------- admissible
inline int cmd_admissible(const ModelFlags& mf, double m1, double m2,
                          const std::string& out_dir, std::ostream& out) {
  AdmissibilityReport rep = admissibility(mf.N, m1, m2);
  json j = admissibility_json(rep);
  out << j.dump(2) << '\n';
  if (!out_dir.empty()) {
    auto dir = ensure_out_dir(out_dir);
    std::ofstream os(dir / "admissible.json");
    os << j.dump(2) << '\n';
    json cfg = {{"N", mf.N}, {"m1", m1}, {"m2", m2}};
    write_manifest(dir, "admissible", cfg, {}, {"admissible.json"});
  }
  return 0;
}

// --------------------------------------------------------------------- region
inline int cmd_region(int N, double m2_lo, double m2_hi, int samples,
                      const std::string& out_dir, std::ostream& out) {
  if (N >= 2) {
    const CriticalExponents ce = critical_exponents(N);
    if (m2_lo <= 0.0) m2_lo = ce.m_c;
    if (m2_hi <= 0.0)
      m2_hi = std::isfinite(ce.m_max) ? ce.m_max : ce.m_c + 4.0;
  }
  std::vector<double> m2s;
  for (int k = 0; k < samples; ++k)
    m2s.push_back(m2_lo + (k + 0.5) / samples * (m2_hi - m2_lo));
  std::vector<RegionRow> rows = region_boundary(N, m2s); // throws for N < 2

  std::ostringstream csv;
  csv << "N,m2,bound1,bound2\n";
  for (const RegionRow& r : rows)
    csv << N << ',' << format_g17(r.m2) << ',' << format_g17(r.bound1) << ','
        << format_g17(r.bound2) << '\n';
  out << csv.str();
  if (!out_dir.empty()) {
    auto dir = ensure_out_dir(out_dir);
    std::ofstream os(dir / "region.csv");
    os << csv.str();
    json cfg = {{"N", N}, {"m2_lo", m2_lo}, {"m2_hi", m2_hi},
                {"samples", samples}};
    write_manifest(dir, "region", cfg, {}, {"region.csv"});
  }
  return 0;
}

// -------------------------------------------------------------------- profile
inline int cmd_profile(const ModelFlags& mf, double omega, double R, int M,
                       const std::string& out_dir, std::ostream& out) {
  NonlinearityModel model = mf.config().build();
  RadialGrid g(model.N(), R, M);
  SolitonProfile prof = solve_profile(model, omega, g);
  SolitonBranch branch(model, g, 0.5 * omega, 2.0 * omega);
  RealField dphi = branch.dphi_of(prof);
  const double slope = g.inner(dphi, prof.phi);
  const double l2sq = g.inner(prof.phi, prof.phi);

  json j;
  j["schema_version"] = kSchemaVersion;
  j["omega"] = prof.omega;
  j["phi0"] = prof.phi0;
  j["residual"] = prof.residual;
  j["slope"] = slope;
  j["mass"] = 0.5 * l2sq;
  switch (stability_classification(slope, l2sq)) {
  case Stability::Stable: j["stability"] = "stable"; break;
  case Stability::Unstable: j["stability"] = "unstable"; break;
  default: j["stability"] = "degenerate";
  }
  out << j.dump(2) << '\n';
  if (!out_dir.empty()) {
    auto dir = ensure_out_dir(out_dir);
    CsvWriter csv((dir / "profile.csv").string(), {"r", "phi"});
    for (int k = 0; k < g.M(); ++k) csv.row({g.r()[k], prof.phi[k]});
    std::ofstream os(dir / "profile.json");
    os << j.dump(2) << '\n';
    json cfg;
    cfg["model"] = mf.config();
    cfg["grid"] = GridConfig{R, M};
    cfg["omega"] = omega;
    write_manifest(dir, "profile", cfg, {}, {"profile.csv", "profile.json"});
  }
  return 0;
}

// ------------------------------------------------------------------- spectrum
inline int cmd_spectrum(const ModelFlags& mf, double omega, double R, int M,
                        int coarse_M, const std::string& out_dir,
                        std::ostream& out) {
  NonlinearityModel model = mf.config().build();
  RadialGrid g(model.N(), R, M);
  SolitonBranch branch(model, g, 0.5 * omega, 2.0 * omega);
  const BranchPoint& bp = branch.at(omega);
  EigenpairOptions opt;
  opt.coarse_M = coarse_M;
  EigenpairResult er = unstable_eigenpair(model, bp.profile, g, bp.dphi, opt);

  json j;
  j["schema_version"] = kSchemaVersion;
  j["omega"] = omega;
  j["mu_min"] = er.mu_min;
  if (er.status == EigenpairStatus::Found) {
    j["status"] = "found";
    j["e_plus"] = er.spectrum.e_plus;
    j["gap_to_continuum"] = er.spectrum.gap_to_continuum;
    j["normalization_check"] = er.spectrum.normalization;
    j["pre_norm_value"] = er.spectrum.pre_norm_value;
    j["residual"] = er.spectrum.residual;
    j["simplicity_ratio"] = er.spectrum.simplicity_ratio;
  } else {
    j["status"] = "no_real_eigenvalue";
  }
  out << j.dump(2) << '\n';
  if (!out_dir.empty()) {
    auto dir = ensure_out_dir(out_dir);
    std::vector<std::string> outputs = {"spectrum.json"};
    if (er.status == EigenpairStatus::Found) {
      CsvWriter csv((dir / "modes.csv").string(), {"r", "Y_re", "Y_im"});
      for (int k = 0; k < g.M(); ++k)
        csv.row({g.r()[k], er.spectrum.Y_re[k], er.spectrum.Y_im[k]});
      outputs.push_back("modes.csv");
    }
    std::ofstream os(dir / "spectrum.json");
    os << j.dump(2) << '\n';
    json cfg;
    cfg["model"] = mf.config();
    cfg["grid"] = GridConfig{R, M};
    cfg["omega"] = omega;
    cfg["coarse_M"] = coarse_M;
    write_manifest(dir, "spectrum", cfg, {}, outputs);
  }
  return 0;
}

// --------------------------------------------------------------------- evolve
inline ComplexField build_initial(const json& init_in,
                                  const NonlinearityModel& model,
                                  const RadialGrid& g, SolitonBranch& branch) {
  // Accept both {"initial": "soliton"} and {"initial": {"type": "soliton", ...}}.
  const json init =
      init_in.is_string() ? json{{"type", init_in.get<std::string>()}} : init_in;
  const std::string type = init.value("type", std::string("soliton"));
  if (type == "gaussian") {
    const double A = init.value("amplitude", 1.0);
    const double c = init.value("center", 0.0);
    const double w = init.value("width", 1.0);
    ComplexField u(g.M());
    for (int j = 0; j < g.M(); ++j) {
      const double x = (g.r()[j] - c) / w;
      u[j] = complexd(A * std::exp(-x * x), 0.0);
    }
    return u;
  }
  const double omega = init.value("omega", 1.0);
  const double theta0 = init.value("theta0", 0.0);
  const BranchPoint& bp = branch.at(omega);
  if (type == "soliton")
    return ComplexField(bp.profile.phi.cast<complexd>() *
                        std::exp(complexd(0.0, theta0)));
  if (type == "soliton_perturbed") {
    ExperimentConfig pc;
    pc.omega0 = omega;
    pc.theta0 = theta0;
    pc.c_plus = init.value("c_plus", 0.0);
    pc.c_minus = init.value("c_minus", 0.0);
    pc.c_cont = init.value("c_cont", 0.0);
    pc.bump_center = init.value("bump_center", 5.0);
    pc.bump_width = init.value("bump_width", 2.0);
    pc.alpha_target = init.value("alpha_target", 0.0);
    std::optional<DiscreteSpectrum> spec;
    EigenpairResult er = unstable_eigenpair(model, bp.profile, g, bp.dphi);
    if (er.status == EigenpairStatus::Found) spec = er.spectrum;
    Projections proj =
        spec ? Projections(g, bp.profile.phi, bp.dphi, bp.slope, *spec)
             : Projections(g, bp.profile.phi, bp.dphi, bp.slope);
    return prepare_data(pc, g, bp, spec ? &*spec : nullptr, proj).u0;
  }
  throw DomainError("unknown initial data type '" + type + "'");
}

inline int cmd_evolve(const std::string& config_path,
                      const std::string& out_dir, std::ostream& out,
                      std::ostream& err) {
  json cfg = load_json_file(config_path);
  NonlinearityModel model = cfg.at("model").get<ModelConfig>().build();
  GridConfig gc = cfg.at("grid").get<GridConfig>();
  RadialGrid g(model.N(), gc.R, gc.M);

  EvolveOptions opts;
  opts.dt = cfg.value("dt", 1e-3);
  opts.t_end = cfg.value("t_end", 1.0);
  opts.fp_tol = cfg.value("fp_tol", 1e-12);
  opts.guard_factor = cfg.value("guard_factor", 1e3);
  if (cfg.contains("sponge")) opts.sponge = cfg.at("sponge").get<SpongeConfig>();
  const double stride_t = cfg.value("obs_stride_t", 10.0 * opts.dt);
  opts.observer_stride = std::max(1, int(std::lround(stride_t / opts.dt)));

  SolitonBranch branch(model, g, cfg.value("omega_lo", 0.25),
                       cfg.value("omega_hi", 4.0));
  ComplexField u0 =
      build_initial(cfg.value("initial", json::object()), model, g, branch);

  auto dir = ensure_out_dir(out_dir);
  CsvWriter obs((dir / "observables.csv").string(),
                {"t", "mass", "energy", "l2", "h1", "linf"});
  Stepper st(model, g, opts);
  long count = 0;
  auto observer = [&](double t, const ComplexField& u) {
    ConservedQuantities c = st.conserved(u);
    obs.row({t, c.mass, c.energy, g.l2(u), g.h1(u), u.abs().maxCoeff()});
    if (verbose_enabled() && (++count % 50 == 0))
      err << "evolve: t=" << t << "\n";
    return true;
  };
  ComplexField uf = evolve(model, g, u0, opts, observer);

  CsvWriter fin((dir / "final.csv").string(), {"r", "re", "im"});
  for (int j = 0; j < g.M(); ++j)
    fin.row({g.r()[j], uf[j].real(), uf[j].imag()});
  write_manifest(dir, "evolve", cfg, {config_path},
                 {"observables.csv", "final.csv"});
  json j;
  j["schema_version"] = kSchemaVersion;
  j["t_end"] = opts.t_end;
  ConservedQuantities c = st.conserved(uf);
  j["final_mass"] = c.mass;
  j["final_energy"] = c.energy;
  out << j.dump(2) << '\n';
  return 0;
}

// ------------------------------------------------------------------ decompose
inline int cmd_decompose(const std::string& config_path,
                         const std::string& out_dir, std::ostream& out) {
  json cfg = load_json_file(config_path);
  NonlinearityModel model = cfg.at("model").get<ModelConfig>().build();
  GridConfig gc = cfg.at("grid").get<GridConfig>();
  RadialGrid g(model.N(), gc.R, gc.M);

  const std::string field_path = cfg.at("field").get<std::string>();
  CsvTable tab = read_csv(field_path);
  const int cr = tab.col("r"), cre = tab.col("re"), cim = tab.col("im");
  // Linear interpolation of the stored field onto the working grid.
  ComplexField u(g.M());
  for (int j = 0; j < g.M(); ++j) {
    const double r = g.r()[j];
    size_t k = 0;
    while (k + 1 < tab.rows.size() && tab.rows[k + 1][cr] < r) ++k;
    if (k + 1 >= tab.rows.size()) {
      u[j] = complexd(tab.rows.back()[cre], tab.rows.back()[cim]);
    } else {
      const double r0 = tab.rows[k][cr], r1 = tab.rows[k + 1][cr];
      const double w1 = r1 > r0 ? (r - r0) / (r1 - r0) : 0.0;
      u[j] = complexd((1 - w1) * tab.rows[k][cre] + w1 * tab.rows[k + 1][cre],
                      (1 - w1) * tab.rows[k][cim] + w1 * tab.rows[k + 1][cim]);
    }
  }

  SolitonBranch branch(model, g, cfg.value("omega_lo", 0.5),
                       cfg.value("omega_hi", 1.5));
  const double om0 = cfg.value("omega_guess", 1.0);
  const double th0 = cfg.value("theta_guess", 0.0);
  const BranchPoint& bp = branch.at(om0);
  std::optional<DiscreteSpectrum> spec;
  EigenpairResult er = unstable_eigenpair(model, bp.profile, g, bp.dphi);
  if (er.status == EigenpairStatus::Found) spec = er.spectrum;

  ModulationState st =
      decompose(u, 0.0, th0, om0, branch, spec ? &*spec : nullptr);

  json j;
  j["schema_version"] = kSchemaVersion;
  j["theta"] = st.theta;
  j["omega"] = st.omega;
  j["b_plus"] = st.b_plus;
  j["b_minus"] = st.b_minus;
  j["eta_l2"] = st.eta_l2;
  j["eta_lp"] = st.eta_lp;
  j["orth"] = {st.orth[0], st.orth[1], st.orth[2], st.orth[3]};
  j["newton_iters"] = st.newton_iters;
  out << j.dump(2) << '\n';
  if (!out_dir.empty()) {
    auto dir = ensure_out_dir(out_dir);
    std::ofstream os(dir / "state.json");
    os << j.dump(2) << '\n';
    CsvWriter eta((dir / "eta.csv").string(), {"r", "eta_re", "eta_im"});
    for (int k = 0; k < g.M(); ++k)
      eta.row({g.r()[k], st.eta[k].real(), st.eta[k].imag()});
    write_manifest(dir, "decompose", cfg, {config_path, field_path},
                   {"state.json", "eta.csv"});
  }
  return 0;
}

// ------------------------------------------------------------------ dichotomy
inline void write_track_csv(const std::string& path,
                            const std::vector<TrackRow>& rows) {
  CsvWriter csv(path,
                {"t", "theta", "omega", "b_plus", "b_minus", "eta_L2",
                 "eta_Lp", "eta_Lq", "dloc", "orth_max", "newton_iters",
                 "tracked"});
  for (const TrackRow& r : rows)
    csv.row({r.t, r.theta, r.omega, r.b_plus, r.b_minus, r.eta_l2, r.eta_lp,
             r.eta_lq, r.dloc, r.orth_max, double(r.newton_iters),
             r.tracked ? 1.0 : 0.0});
}

inline int cmd_dichotomy(const std::string& config_path,
                         const std::string& out_dir, std::ostream& out,
                         std::ostream& err) {
  json cfg = load_json_file(config_path);
  NonlinearityModel model = cfg.at("model").get<ModelConfig>().build();
  ExperimentConfig ec = cfg.get<ExperimentConfig>();
  if (verbose_enabled()) err << "dichotomy: starting run\n";
  RunResult rr = run_experiment(model, ec);

  json j = outcome_to_json(rr.outcome);
  j["schema_version"] = kSchemaVersion;
  out << j.dump(2) << '\n';
  auto dir = ensure_out_dir(out_dir);
  std::ofstream os(dir / "outcome.json");
  os << j.dump(2) << '\n';
  write_track_csv((dir / "track.csv").string(), rr.rows);
  write_manifest(dir, "dichotomy", cfg, {config_path},
                 {"outcome.json", "track.csv"});
  return 0;
}

// ---------------------------------------------------------------------- sweep
inline int cmd_sweep(const std::string& config_path, const std::string& out_dir,
                     int parallel, std::ostream& out, std::ostream& err) {
  json cfg = load_json_file(config_path);
  NonlinearityModel model = cfg.at("model").get<ModelConfig>().build();
  ExperimentConfig base = cfg.value("base", json::object())
                              .get<ExperimentConfig>();
  std::vector<ExperimentConfig> runs;
  for (const json& jr : cfg.at("runs")) {
    json merged = json(base);
    for (auto it = jr.begin(); it != jr.end(); ++it) merged[it.key()] = *it;
    runs.push_back(merged.get<ExperimentConfig>());
  }
  if (verbose_enabled())
    err << "sweep: " << runs.size() << " runs on " << parallel << " threads\n";
  std::vector<SweepEntry> entries = sweep(model, runs, parallel);

  auto dir = ensure_out_dir(out_dir);
  std::vector<std::string> outputs = {"sweep.csv"};
  CsvWriter csv((dir / "sweep.csv").string(),
                {"index", "classification", "alpha", "t_crit", "t_exit", "e2",
                 "growth_rate", "growth_in_window", "exit_within_bound",
                 "decay_exponent", "error"});
  json summary = json::array();
  size_t failures = 0;
  for (const SweepEntry& e : entries) {
    const RunOutcome& oc = e.outcome;
    csv.row_mixed({std::to_string(e.index),
                   e.ok ? to_string(oc.cls) : "error", format_g17(oc.alpha),
                   format_g17(oc.t_crit), format_g17(oc.t_exit),
                   format_g17(oc.e2), format_g17(oc.growth_rate),
                   oc.growth_in_window ? "1" : "0",
                   oc.exit_within_bound ? "1" : "0",
                   format_g17(oc.decay_exponent), e.error});
    json jo = outcome_to_json(oc);
    jo["index"] = e.index;
    jo["ok"] = e.ok;
    if (!e.ok) jo["error"] = e.error;
    summary.push_back(jo);
    const std::string name = "outcome_" + std::to_string(e.index) + ".json";
    std::ofstream os(dir / name);
    os << jo.dump(2) << '\n';
    outputs.push_back(name);
    if (!e.ok) ++failures;
  }
  out << summary.dump(2) << '\n';
  write_manifest(dir, "sweep", cfg, {config_path}, outputs);
  if (failures > 0)
    throw Error("sweep_run_failed",
                std::to_string(failures) + " of " +
                    std::to_string(entries.size()) +
                    " runs failed; see sweep.csv");
  return 0;
}

} // namespace clidetail

// ---------------------------------------------------------------------------
// dispatch — the single entry point used by main() and by the tests.
// ---------------------------------------------------------------------------
inline int dispatch(std::vector<std::string> args, std::ostream& out,
                    std::ostream& err) {
  CLI::App app{"nlslab — a numerical laboratory for radial NLS solitons"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // admissible
  auto* adm = app.add_subcommand("admissible",
                                 "admissibility arithmetic for (N, m1, m2)");
  int adm_N = 3;
  double adm_m1 = 3.0, adm_m2 = 3.0;
  std::string adm_out;
  adm->add_option("--N", adm_N, "spatial dimension")->required();
  adm->add_option("--m1", adm_m1, "lower exponent")->required();
  adm->add_option("--m2", adm_m2, "upper exponent")->required();
  adm->add_option("--out", adm_out, "output directory");

  // region
  auto* reg = app.add_subcommand("region",
                                 "admissible-region boundary curves");
  int reg_N = 3, reg_samples = 50;
  double reg_lo = 0.0, reg_hi = 0.0;
  std::string reg_out;
  reg->add_option("--N", reg_N, "spatial dimension")->required();
  reg->add_option("--m2-min", reg_lo, "lower end of the m2 range");
  reg->add_option("--m2-max", reg_hi, "upper end of the m2 range");
  reg->add_option("--samples", reg_samples, "number of m2 samples");
  reg->add_option("--out", reg_out, "output directory");

  // profile
  auto* pro = app.add_subcommand("profile", "soliton profile at one omega");
  clidetail::ModelFlags pro_mf;
  pro_mf.attach(pro);
  double pro_omega = 1.0, pro_R = 15.0;
  int pro_M = 1024;
  std::string pro_out;
  pro->add_option("--omega", pro_omega, "frequency")->required();
  pro->add_option("--R", pro_R, "domain radius");
  pro->add_option("--M", pro_M, "number of cells");
  pro->add_option("--out", pro_out, "output directory");

  // spectrum
  auto* spe = app.add_subcommand("spectrum",
                                 "linearized point spectrum at one omega");
  clidetail::ModelFlags spe_mf;
  spe_mf.attach(spe);
  double spe_omega = 1.0, spe_R = 15.0;
  int spe_M = 2048, spe_coarse = 512;
  std::string spe_out;
  spe->add_option("--omega", spe_omega, "frequency")->required();
  spe->add_option("--R", spe_R, "domain radius");
  spe->add_option("--M", spe_M, "number of cells");
  spe->add_option("--coarse-M", spe_coarse, "discovery resolution");
  spe->add_option("--out", spe_out, "output directory");

  // evolve / decompose / dichotomy / sweep (config-driven)
  auto* evo = app.add_subcommand("evolve", "time evolution with observers");
  std::string evo_cfg, evo_out;
  evo->add_option("--config", evo_cfg, "JSON config")->required();
  evo->add_option("--out", evo_out, "output directory")->required();

  auto* dec = app.add_subcommand("decompose",
                                 "modulation decomposition of a stored field");
  std::string dec_cfg, dec_out;
  dec->add_option("--config", dec_cfg, "JSON config")->required();
  dec->add_option("--out", dec_out, "output directory");

  auto* dic = app.add_subcommand("dichotomy",
                                 "one convergence/escape experiment");
  std::string dic_cfg, dic_out;
  dic->add_option("--config", dic_cfg, "JSON config")->required();
  dic->add_option("--out", dic_out, "output directory")->required();

  auto* swe = app.add_subcommand("sweep", "a batch of dichotomy runs");
  std::string swe_cfg, swe_out;
  int swe_par = 1;
  swe->add_option("--config", swe_cfg, "JSON config")->required();
  swe->add_option("--out", swe_out, "output directory")->required();
  swe->add_option("--parallel", swe_par, "worker threads");

  try {
    // CLI11's vector overload consumes arguments back-to-front.
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    json j;
    j["error"] = {{"type", "usage"}, {"message", e.what()}};
    err << j.dump() << '\n';
    return 1;
  }

  try {
    if (adm->parsed())
      return clidetail::cmd_admissible(clidetail::ModelFlags{adm_N}, adm_m1,
                                       adm_m2, adm_out, out);
    if (reg->parsed())
      return clidetail::cmd_region(reg_N, reg_lo, reg_hi, reg_samples, reg_out,
                                   out);
    if (pro->parsed())
      return clidetail::cmd_profile(pro_mf, pro_omega, pro_R, pro_M, pro_out,
                                    out);
    if (spe->parsed())
      return clidetail::cmd_spectrum(spe_mf, spe_omega, spe_R, spe_M,
                                     spe_coarse, spe_out, out);
    if (evo->parsed()) return clidetail::cmd_evolve(evo_cfg, evo_out, out, err);
    if (dec->parsed()) return clidetail::cmd_decompose(dec_cfg, dec_out, out);
    if (dic->parsed())
      return clidetail::cmd_dichotomy(dic_cfg, dic_out, out, err);
    if (swe->parsed())
      return clidetail::cmd_sweep(swe_cfg, swe_out, swe_par, out, err);
    json j;
    j["error"] = {{"type", "usage"}, {"message", "a subcommand is required"}};
    err << j.dump() << '\n';
    return 1;
  } catch (const Error& e) {
    json j;
    j["error"] = {{"type", e.type()}, {"message", e.what()}};
    err << j.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    json j;
    j["error"] = {{"type", "internal"}, {"message", e.what()}};
    err << j.dump() << '\n';
    return 2;
  }
}

} // namespace nlslab
