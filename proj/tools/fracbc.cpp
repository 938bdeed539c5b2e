// Command-line front end: Mittag-Leffler spot checks, forward simulation,
// strategic tests, control synthesis, the finite-difference cross-check and
// the boundary-target reproduction.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "fracbc/fracbc.hpp"

namespace {

using namespace fracbc;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

ExperimentConfig config_from(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : load_config(path);
}

int cmd_mlf(double alpha, double beta, int mu, double z) {
  if (mu != 1 && mu != 2) throw ConfigError("--mu must be 1 or 2");
  const MLValue v = mu == 1 ? ml2_checked(alpha, beta, z) : ml3_checked(alpha, beta, z);
  std::cout << fmt17(v.value) << '\n';
  std::cerr << "method=" << to_string(v.method) << " terms=" << v.terms << " accurate=" << (v.accurate ? "yes" : "no")
            << '\n';
  return v.accurate ? 0 : kExitNumerical;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  const SpectralBasis basis(cfg.N);
  const std::vector<Actuator> acts = cfg.build_actuators();
  const TimeGrid grid = cfg.grid();
  const ControlSignal u = cfg.control.build(grid, static_cast<int>(acts.size()));
  const BoundaryRegion region = cfg.build_region();
  std::filesystem::create_directories(cfg.output);
  std::cout << std::setw(8) << "alpha" << std::setw(26) << "||z(b)||" << std::setw(26) << "||trace||_Gamma" << '\n';
  for (double alpha : cfg.alphas) {
    const Plant plant(basis, alpha, acts, grid);
    const StateCoeffs z = plant.final_state(StateCoeffs::zeros(basis), u);
    const std::string path = cfg.output + "/state_alpha" + alpha_label(alpha) + ".csv";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "x,y,z\n";
    for (int i = 0; i < cfg.eval_grid; ++i) {
      for (int j = 0; j < cfg.eval_grid; ++j) {
        const double x = double(i) / (cfg.eval_grid - 1), y = double(j) / (cfg.eval_grid - 1);
        out << fmt17(x) << ',' << fmt17(y) << ',' << fmt17(evaluate_state(basis, z, x, y)) << '\n';
      }
    }
    const double tr = l2_norm(region, trace_on_gamma(basis, region, z).values);
    std::cout << std::setw(8) << alpha << std::setw(26) << fmt17(z.c.norm()) << std::setw(26) << fmt17(tr) << '\n';
  }
  return 0;
}

int cmd_strategic(const ExperimentConfig& cfg) {
  const SpectralBasis basis(cfg.N);
  const std::vector<Actuator> acts = cfg.build_actuators();
  const BoundaryRegion region = cfg.build_region();
  const StrategicReport rep = strategic_check(basis, acts, cfg.rank_tol, &region);
  std::cout << "actuators: " << rep.p << "  max multiplicity r: " << rep.r_max << "  N: " << cfg.N << '\n';
  for (const Actuator& a : acts) std::cout << "  " << a.describe() << '\n';
  std::cout << std::setw(6) << "group" << std::setw(6) << "key" << std::setw(4) << "r" << std::setw(6) << "rank"
            << std::setw(26) << "sigma_min" << std::setw(6) << "pass" << "  modes\n";
  for (const GroupRank& g : rep.per_group) {
    if (g.pass && g.r == 1 && rep.per_group.size() > 40) continue;  // keep long tables readable
    std::cout << std::setw(6) << g.group << std::setw(6) << g.key << std::setw(4) << g.r << std::setw(6) << g.rank
              << std::setw(26) << fmt17(g.sigma_min) << std::setw(6) << (g.pass ? "yes" : "no") << "  ";
    const ModeGroup& mg = basis.groups()[g.group];
    for (int k = mg.first; k < mg.first + mg.size; ++k) std::cout << '(' << basis.mode(k).i << ',' << basis.mode(k).j << ')';
    std::cout << '\n';
  }
  if (rep.per_group.size() > 40) std::cout << "(passing single-mode groups omitted above; all listed below)\n";
  if (rep.p < rep.r_max) std::cout << "fails p >= r: " << rep.p << " < " << rep.r_max << '\n';
  for (int g : rep.vanishing_trace_groups) std::cout << "advisory: group " << g << " has no trace on Gamma\n";
  std::cout << "verdict: " << (rep.verdict ? "strategic" : "not strategic") << "\n\n";
  std::cout << "group,r,rank,sigma_min,pass\n";
  for (const GroupRank& g : rep.per_group) {
    std::cout << g.group << ',' << g.r << ',' << g.rank << ',' << fmt17(g.sigma_min) << ',' << (g.pass ? 1 : 0) << '\n';
  }
  return 0;
}

int cmd_control(const ExperimentConfig& cfg, bool transfer) {
  const SpectralBasis basis(cfg.N);
  const BoundaryRegion region = cfg.build_region();
  const std::vector<Actuator> acts = cfg.build_actuators();
  const BoundaryTrace zb = cfg.target.sample(region);
  const StateCoeffs z0 = StateCoeffs::zeros(basis);
  std::cout << std::setw(8) << "alpha" << std::setw(26) << "residual" << std::setw(26) << "energy" << '\n';
  for (double alpha : cfg.alphas) {
    const Plant plant(basis, alpha, acts, cfg.grid());
    ControlSynthesis s;
    GramOperator gram;
    if (transfer) {
      const InternalRegion omega = build_omega_r(region, cfg.r, cfg.omega_mesh);
      gram = assemble_lambda(plant, omega);
      gram.set_regularization(cfg.eps);
      s = transfer_control(gram, plant, omega, region, z0, zb);
    } else {
      gram = assemble_R_gamma(plant, region);
      gram.set_regularization(cfg.eps);
      s = min_energy_control(gram, plant, region, z0, zb);
    }
    const std::string dir = cfg.output + "/alpha" + alpha_label(alpha);
    std::filesystem::create_directories(dir);
    detail::write_control_csv(dir + "/control.csv", s.u_star);
    Eigen::VectorXd arc(region.size());
    for (int k = 0; k < region.size(); ++k) arc[k] = region.arclength(k);
    detail::write_trace_csv(dir + "/trace.csv", "arclength", region, arc, zb, s.achieved);
    std::ofstream rep(dir + "/report.txt");
    rep << "method " << (transfer ? "transfer" : "hum") << '\n'
        << "alpha " << fmt17(alpha) << '\n'
        << "residual " << fmt17(s.residual) << '\n'
        << "energy " << fmt17(s.energy) << '\n'
        << "gram_size " << gram.size() << '\n'
        << "gram_rank " << gram.rank << '\n'
        << "eig_min " << fmt17(gram.eig_min) << '\n'
        << "eig_min_range " << fmt17(gram.eig_min_range) << '\n'
        << "eig_max " << fmt17(gram.eig_max) << '\n'
        << "reg_eps " << fmt17(gram.reg_eps) << '\n'
        << "asymmetry " << fmt17(gram.asymmetry) << '\n';
    if (transfer) {
      rep << "strip_residual " << fmt17(s.strip_residual) << '\n'
          << "extension_error " << fmt17(s.extension_error) << '\n'
          << "cg_iterations " << s.iterations << '\n'
          << "cg_error " << fmt17(s.solver_error) << '\n';
    }
    std::cout << std::setw(8) << alpha << std::setw(26) << fmt17(s.residual) << std::setw(26) << fmt17(s.energy) << '\n';
  }
  return 0;
}

int cmd_oracle(const ExperimentConfig& cfg) {
  const std::vector<Actuator> acts = cfg.build_actuators();
  std::cout << "alpha,nx,M,relative_l2\n";
  for (double alpha : cfg.alphas) {
    for (int nx : cfg.fdm_nx) {
      FDMConfig fc;
      fc.nx = fc.ny = nx;
      fc.M = cfg.fdm_M;
      fc.alpha = alpha;
      fc.b = cfg.b;
      const ControlSignal u = cfg.control.build(TimeGrid(cfg.b, cfg.fdm_M), static_cast<int>(acts.size()));
      const OracleComparison c = compare_with_spectral(fc, cfg.N, acts, u);
      std::cout << fmt17(alpha) << ',' << nx << ',' << cfg.fdm_M << ',' << fmt17(c.discrepancy) << '\n';
    }
  }
  return 0;
}

int cmd_fig1(const ExperimentConfig& cfg) {
  std::cout << std::setw(6) << "alpha" << std::setw(14) << "residual" << std::setw(14) << "energy" << std::setw(14)
            << "eig_max" << std::setw(14) << "strip_res" << std::setw(14) << "hum_residual" << '\n';
  run_reproduction(cfg, true, [](const ReproductionRow& r) {
    std::cout << std::setw(6) << r.alpha << std::setw(14) << r.residual << std::setw(14) << r.energy << std::setw(14)
              << r.eig_max << std::setw(14) << r.strip_residual << std::setw(14) << r.hum_residual << std::endl;
  });
  std::cout << "wrote " << cfg.output << "/{summary.csv,trace_alpha*.csv,control_alpha*.csv,plot_fig1.py}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional boundary controllability of time-fractional diffusion"};
  app.require_subcommand(1);

  double alpha = 0.5, beta = 1.0, z = 0.0;
  int mu = 1;
  auto* mlf = app.add_subcommand("mlf", "Evaluate E_{alpha,beta}(z), or E^2 with --mu 2");
  mlf->add_option("--alpha", alpha, "order in (0, 1]")->required();
  mlf->add_option("--beta", beta, "second parameter")->required();
  mlf->add_option("--z", z, "argument")->required();
  mlf->add_option("--mu", mu, "1 for E_{a,b}, 2 for E^2_{a,b}");

  std::string config_path, out_dir;
  auto add_config = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--config", config_path, "key = value configuration file");
    if (required) opt->required();
    sub->add_option("--out", out_dir, "output directory (overrides 'output')");
  };

  auto* simulate = app.add_subcommand("simulate", "Forward solve to t = b from rest");
  add_config(simulate, true);

  int strategic_N = 0;
  std::vector<std::string> strategic_acts;
  auto* strategic = app.add_subcommand("strategic", "Rank test of the actuator suite");
  add_config(strategic, false);
  strategic->add_option("--N", strategic_N, "truncation order (overrides config)");
  strategic->add_option("--actuator", strategic_acts, "actuator spec, repeatable (overrides config)");

  auto* control = app.add_subcommand("control", "Control synthesis");
  control->require_subcommand(1);
  auto* hum = control->add_subcommand("hum", "Minimum-energy control through R_Gamma");
  add_config(hum, true);
  auto* transfer = control->add_subcommand("transfer", "Internal-transfer control through omega_r");
  add_config(transfer, true);

  auto* oracle = app.add_subcommand("oracle", "Finite-difference cross-check");
  oracle->require_subcommand(1);
  auto* compare = oracle->add_subcommand("compare", "Spectral vs finite-difference final state");
  add_config(compare, true);

  auto* reproduce = app.add_subcommand("reproduce", "Reproduce a published experiment");
  reproduce->require_subcommand(1);
  auto* fig1 = reproduce->add_subcommand("fig1", "Boundary-target reproduction");
  add_config(fig1, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (mlf->parsed()) return cmd_mlf(alpha, beta, mu, z);
    ExperimentConfig cfg = config_from(config_path);
    if (!out_dir.empty()) cfg.output = out_dir;
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (strategic->parsed()) {
      if (strategic_N > 0) cfg.N = strategic_N;
      if (!strategic_acts.empty()) cfg.actuators = strategic_acts;
      cfg.validate();
      return cmd_strategic(cfg);
    }
    if (hum->parsed()) return cmd_control(cfg, false);
    if (transfer->parsed()) return cmd_control(cfg, true);
    if (compare->parsed()) return cmd_oracle(cfg);
    if (fig1->parsed()) return cmd_fig1(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const AccuracyError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}
