// Command-line front end around the scenario runner.
//
// Exit codes: 0 success, 2 usage/scenario errors, 3 numerical failures
// (PSD violation, singular geometry, shell outside the resolvable band).
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nlqft/densities.hpp"
#include "nlqft/scenario.hpp"

namespace {

struct CommonArgs {
  std::string scenario;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  double tol = -1.0;  // <0: keep scenario default
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool need_scenario = true) {
  auto* opt = cmd->add_option("scenario", a.scenario, "scenario file");
  if (need_scenario) opt->required();
  cmd->add_option("--out", a.out_dir, "output directory");
  cmd->add_option("--set,--override", a.overrides,
                  "section.key=value scenario override (repeatable)");
  cmd->add_option("--tol", a.tol, "PSD certification tolerance");
  cmd->add_option("--threads", a.threads, "worker thread count");
}

int run_kind(const CommonArgs& a, const std::string& only, bool with_oracle) {
#ifdef _OPENMP
  if (a.threads > 0) omp_set_num_threads(a.threads);
#endif
  nlqft::Scenario sc = nlqft::load_scenario(a.scenario, a.overrides);
  if (a.tol >= 0.0) sc.tol = a.tol;
  return nlqft::run_scenario(sc, a.out_dir, only, with_oracle);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mass-shell quadratic forms, operator algebra, and densities"};
  app.require_subcommand(1);

  CommonArgs run_a, gram_a, wight_a, dens_a, comm_a, sweep_a, check_a;
  bool oracle = false;

  auto* cmd_run = app.add_subcommand("run", "execute every scenario output");
  add_common(cmd_run, run_a);
  auto* cmd_gram = app.add_subcommand("gram", "Gram matrix with PSD check");
  add_common(cmd_gram, gram_a);
  auto* cmd_wight =
      app.add_subcommand("wightman", "vacuum n-point function");
  add_common(cmd_wight, wight_a);
  cmd_wight->add_flag("--oracle", oracle,
                      "also evaluate through the operator-rewriting path");
  auto* cmd_dens = app.add_subcommand("density", "joint probability density");
  add_common(cmd_dens, dens_a, /*need_scenario=*/false);
  int dens_n = 0;
  double dens_var = 1.0, dens_at = 0.0;
  cmd_dens->add_option("--n", dens_n, "standalone: Gaussian dimension");
  cmd_dens->add_option("--variance", dens_var, "standalone: per-axis variance");
  cmd_dens->add_option("--at", dens_at, "standalone: evaluation point (all axes)");
  auto* cmd_comm = app.add_subcommand("commutator", "smeared commutators");
  add_common(cmd_comm, comm_a);
  auto* cmd_sweep = app.add_subcommand(
      "sweep-translation", "translated correlation along a direction");
  add_common(cmd_sweep, sweep_a);
  auto* cmd_check =
      app.add_subcommand("check", "grid diagnostics and full PSD check");
  add_common(cmd_check, check_a);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) return run_kind(run_a, "", false);
    if (cmd_gram->parsed()) return run_kind(gram_a, "gram", false);
    if (cmd_wight->parsed()) return run_kind(wight_a, "wightman", oracle);
    if (cmd_comm->parsed()) return run_kind(comm_a, "commutator", false);
    if (cmd_sweep->parsed()) return run_kind(sweep_a, "sweep", false);
    if (cmd_check->parsed()) return run_kind(check_a, "check", false);
    if (cmd_dens->parsed()) {
      if (dens_a.scenario.empty()) {
        if (dens_n < 1) throw nlqft::ScenarioError("--n must be >= 1");
        if (!(dens_var > 0))
          throw nlqft::ScenarioError("--variance must be > 0");
        nlqft::DensitySpec spec;
        spec.kind = nlqft::DensitySpec::VacuumGaussian;
        spec.F = Eigen::MatrixXd::Identity(dens_n, dens_n) * dens_var;
        std::vector<double> x(dens_n, dens_at);
        std::printf("%.16e\n", nlqft::joint_density(spec, x));
        return 0;
      }
      return run_kind(dens_a, "density", false);
    }
  } catch (const nlqft::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlqft::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
