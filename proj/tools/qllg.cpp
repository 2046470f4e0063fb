// Command-line front end: field sweeps, excited-state targeting, size
// scaling, and one-off spectrum dumps. See README.md for config formats.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "qllg/csv.hpp"
#include "qllg/experiments.hpp"

namespace {

struct CommonFlags {
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string integrator;
  double dt = 0.0;
  bool dt_set = false;
  bool strict = false;
};

// Frees -h / --h so verbs can use it for the field strength.
CLI::App* long_help(CLI::App* cmd) {
  cmd->set_help_flag("--help", "print help and exit");
  return cmd;
}

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--out", f.out, "output directory (overrides config)");
  cmd->add_option("--seed", f.seed, "master seed (overrides config)")
      ->each([&f](const std::string&) { f.seed_set = true; });
  cmd->add_option("--integrator", f.integrator, "euler|rk4 (overrides config)")
      ->check(CLI::IsMember({"euler", "rk4"}));
  cmd->add_option("--dt", f.dt, "time step; 0 = stability default (overrides config)")
      ->each([&f](const std::string&) { f.dt_set = true; });
  cmd->add_flag("--strict", f.strict, "exit nonzero if any point fails to converge");
}

void apply_common(qllg::SweepConfig& cfg, const CommonFlags& f) {
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.seed_set) cfg.seeds = {f.seed};
  if (!f.integrator.empty()) cfg.qllg.integrator = qllg::integrator_from_string(f.integrator);
  if (f.dt_set) cfg.qllg.dt = f.dt;
  if (f.strict) cfg.strict = true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qllg: dissipative relaxation toolkit for spin-chain eigenstates"};
  app.require_subcommand(1);
  // --h is the field-strength option on some verbs, so help is long-form only
  app.set_help_flag("--help", "print help and exit");

  // --- sweep ---
  auto* sweep = long_help(app.add_subcommand("sweep", "field sweep with exact-diagonalization comparison"));
  std::string sweep_config;
  CommonFlags sweep_flags;
  sweep->add_option("--config", sweep_config, "TOML or JSON sweep config")->required();
  add_common(sweep, sweep_flags);

  // --- excited ---
  auto* excited = long_help(app.add_subcommand("excited", "target the first excited level via ground-space projection"));
  std::string excited_config;
  CommonFlags excited_flags;
  excited->add_option("--config", excited_config, "TOML or JSON sweep config")->required();
  add_common(excited, excited_flags);

  // --- scaling ---
  auto* scaling = long_help(app.add_subcommand("scaling", "convergence-time scaling across system sizes"));
  std::vector<int> scaling_n{4, 6, 8, 10};
  int scaling_trials = 5;
  qllg::ScalingOptions sopt;
  CommonFlags scaling_flags;
  scaling->add_option("--n", scaling_n, "comma-separated list of site counts")->delimiter(',');
  scaling->add_option("--trials", scaling_trials, "random trials per size");
  scaling->add_option("--J", sopt.J, "exchange coupling");
  scaling->add_option("--h", sopt.h, "field (keep deep in the polarized phase for a flat gap)");
  scaling->add_option("--kappa", sopt.kappa, "damping");
  scaling->add_option("--hbar", sopt.hbar, "hbar");
  scaling->add_option("--eps", sopt.eps, "error threshold for the time measurement");
  add_common(scaling, scaling_flags);

  // --- spectrum ---
  auto* spectrum = long_help(app.add_subcommand("spectrum", "diagonalize one Hamiltonian and dump the spectrum"));
  std::string spec_model = "heisenberg_chain";
  int spec_n = 12;
  double spec_J = 2.0, spec_h = 0.0;
  CommonFlags spec_flags;
  spectrum->add_option("--model", spec_model, "model name (heisenberg_chain)");
  spectrum->add_option("--n", spec_n, "site count");
  spectrum->add_option("--J", spec_J, "exchange coupling");
  spectrum->add_option("--h", spec_h, "field");
  add_common(spectrum, spec_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      qllg::SweepConfig cfg = qllg::sweep_config_from_file(sweep_config);
      apply_common(cfg, sweep_flags);
      qllg::SweepResult res = qllg::run_sweep(cfg);
      std::printf("sweep: %zu rows, %d unconverged -> %s\n", res.rows.size(), res.n_unconverged,
                  res.out_dir.c_str());
      if (cfg.strict && res.n_unconverged > 0) return 1;
    } else if (*excited) {
      qllg::SweepConfig cfg = qllg::sweep_config_from_file(excited_config);
      apply_common(cfg, excited_flags);
      qllg::ExcitedResult res = qllg::run_excited_target(cfg);
      std::printf("excited: %zu rows, %d unconverged -> %s\n", res.rows.size(), res.n_unconverged,
                  res.out_dir.c_str());
      if (cfg.strict && res.n_unconverged > 0) return 1;
    } else if (*scaling) {
      if (!scaling_flags.out.empty()) sopt.out_dir = scaling_flags.out;
      if (!scaling_flags.integrator.empty())
        sopt.integrator = qllg::integrator_from_string(scaling_flags.integrator);
      if (scaling_flags.dt_set) sopt.dt = scaling_flags.dt;
      std::uint64_t seed = scaling_flags.seed_set ? scaling_flags.seed : 42;
      qllg::ScalingResult res =
          qllg::run_scaling_study(scaling_n, scaling_trials, {seed, 0}, sopt);
      std::printf("scaling: R^2 = %.4f, slope = %.4f per site -> %s\n", res.r_squared, res.slope,
                  res.out_dir.c_str());
      for (const auto& r : res.rows)
        std::printf("  N=%-2d gap=%.6f  t_measured=%.4f  t_predicted=%.4f\n", r.n, r.gap,
                    r.mean_t_measured, r.mean_t_predicted);
    } else if (*spectrum) {
      if (spec_model != "heisenberg_chain") {
        std::fprintf(stderr, "unknown model '%s'\n", spec_model.c_str());
        return 2;
      }
      qllg::HamiltonianOp h = qllg::build_spin_chain({spec_n, spec_J, spec_h});
      qllg::Spectrum s = qllg::diagonalize(h);
      std::string dir = spec_flags.out.empty() ? "." : spec_flags.out;
      std::filesystem::create_directories(dir);
      qllg::csv::write_spectrum(dir + "/spectrum.csv", s);
      std::printf("N=%d J=%g h=%g: E0=%.12g", spec_n, spec_J, spec_h, s.ground_energy());
      if (s.n_groups > 1)
        std::printf("  gap=%.12g  ground degeneracy=%d", qllg::spectral_gap(s),
                    s.ground_degeneracy());
      std::printf("  (%d levels in %d groups) -> %s/spectrum.csv\n", int(s.dim()), s.n_groups,
                  dir.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
