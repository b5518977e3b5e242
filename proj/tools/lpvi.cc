// lpvi: solve, convergence and oracle runs from a JSON problem config.
//
// Exit codes: 0 success, 1 config or usage error, 2 numerical failure
// (no convergence, failed oracle).

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "lpvi/app.h"
#include "lpvi/errors.h"

namespace {

struct CommonFlags {
  std::string config;
  double tol = 0.0;
  int max_iters = 0;
  std::string retraction;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("config", f.config, "Problem config (JSON)")->required();
  cmd->add_option("--tol", f.tol, "Residual tolerance (infinity norm)")->envname("LPVI_TOL");
  cmd->add_option("--max-iters", f.max_iters, "Newton iteration cap")->envname("LPVI_MAX_ITERS");
  cmd->add_option("--retraction", f.retraction, "cayley or expN")->envname("LPVI_RETRACTION");
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->envname("LPVI_OUT_DIR");
}

lpvi::RunConfig load(CLI::App* cmd, const CommonFlags& f) {
  lpvi::RunConfig c = lpvi::load_config(f.config);
  lpvi::Overrides o;
  if (cmd->count("--tol") || std::getenv("LPVI_TOL")) o.tol = f.tol;
  if (cmd->count("--max-iters") || std::getenv("LPVI_MAX_ITERS")) o.max_iters = f.max_iters;
  if (!f.retraction.empty()) o.retraction = f.retraction;
  if (!f.out_dir.empty()) o.out_dir = f.out_dir;
  lpvi::apply_overrides(c, o);
  return c;
}

int cmd_solve(CLI::App* cmd, const CommonFlags& f) {
  const lpvi::RunConfig c = load(cmd, f);
  const lpvi::RunOutput out = lpvi::run_solve(c);
  const auto files = lpvi::write_outputs(c, out);
  std::cout << lpvi::model_name(c.model) << ": " << out.message << " after " << out.iterations
            << " iterations\n";
  if (out.diagnostics.contains("residual_inf")) {
    std::cout << "residual_inf " << out.diagnostics["residual_inf"].get<double>() << "\n";
  }
  for (const auto& p : files) std::cout << "wrote " << p << "\n";
  return out.converged ? 0 : 2;
}

int cmd_convergence(CLI::App* cmd, const CommonFlags& f, const std::vector<double>& hs,
                    const std::string& reference) {
  const lpvi::RunConfig c = load(cmd, f);
  lpvi::Reference ref;
  if (reference == "finest") {
    ref = lpvi::Reference::kFinest;
  } else if (reference == "successive") {
    ref = lpvi::Reference::kSuccessive;
  } else {
    throw lpvi::ConfigError("reference: expected finest or successive");
  }
  const lpvi::ConvergenceReport rep = lpvi::run_convergence(c, hs, ref);
  const std::string csv = lpvi::convergence_csv(rep);
  std::filesystem::create_directories(c.out_dir);
  const std::string path =
      (std::filesystem::path(c.out_dir) / (c.prefix + "_convergence.csv")).string();
  std::ofstream(path) << csv;
  std::cout << csv << "slope " << rep.slope << "\nwrote " << path << "\n";
  return 0;
}

int cmd_oracle(CLI::App* cmd, const CommonFlags& f, unsigned seed, int steps, bool flip) {
  lpvi::RunConfig c = load(cmd, f);
  if (steps > 0) {
    if (steps < 6) throw lpvi::ConfigError("config field `N`: must be >= 6");
    c.N = steps;
  }
  const lpvi::OracleOutcome o = lpvi::run_oracle(c, seed, flip);
  std::cout << lpvi::model_name(c.model) << " N=" << c.N << " seed " << seed << ": "
            << (o.pass ? "pass" : "FAIL") << ", max discrepancy " << o.max_error << " in "
            << o.worst_block << " rows\n";
  return o.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie group variational integrator optimal control"};
  app.require_subcommand(1);

  CommonFlags solve_flags, conv_flags, oracle_flags;
  CLI::App* solve = app.add_subcommand("solve", "Solve a problem and write outputs");
  add_common(solve, solve_flags);

  CLI::App* conv = app.add_subcommand("convergence", "Error against h at fixed final time");
  add_common(conv, conv_flags);
  std::vector<double> hs;
  std::string reference = "finest";
  conv->add_option("--h-list", hs, "Step sizes (geometric, at least 3)")
      ->required()
      ->delimiter(',')
      ->envname("LPVI_H_LIST");
  conv->add_option("--reference", reference, "finest or successive")
      ->envname("LPVI_REFERENCE");

  CLI::App* oracle = app.add_subcommand("oracle", "Gradient-of-action check");
  add_common(oracle, oracle_flags);
  unsigned seed = 42;
  int steps = 0;
  bool flip = false;
  oracle->add_option("--N", steps, "Override the step count")->envname("LPVI_N");
  oracle->add_option("--seed", seed, "Perturbation seed")->envname("LPVI_SEED");
  // Negative control for tests: negates the assembled group rows.
  oracle->add_flag("--flip-sign", flip)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*solve) return cmd_solve(solve, solve_flags);
    if (*conv) return cmd_convergence(conv, conv_flags, hs, reference);
    if (*oracle) return cmd_oracle(oracle, oracle_flags, seed, steps, flip);
  } catch (const lpvi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const lpvi::SizeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const lpvi::TagMismatchError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
