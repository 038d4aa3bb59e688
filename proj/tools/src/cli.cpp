#include <ostream>

#include <CLI11.hpp>

#include "kh/analysis.hpp"
#include "kh/libsvm.hpp"
#include "khtools/commands.hpp"

namespace khtools {

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"khcli: Katyusha-H experiment harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  std::string config_path;
  std::optional<std::string> seeds_override, out_dir, alphas_override, bs_override;
  std::optional<std::uint64_t> iterations_override;
  std::optional<unsigned> threads_override;

  auto add_config_flags = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config file")->required();
    sub->add_option("--seeds", seeds_override, "seed list, e.g. 1,2,3 or 0:9");
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("-T,--iterations", iterations_override, "iteration budget");
    sub->add_option("-j,--threads", threads_override, "concurrent runs");
  };

  auto* run = app.add_subcommand("run", "run one solver configuration, one trace per seed");
  add_config_flags(run);

  auto* sweep = app.add_subcommand("sweep", "run an alpha x b grid and print a summary table");
  add_config_flags(sweep);
  std::optional<std::string> summary_path;
  bool no_traces = false;
  sweep->add_option("--alphas", alphas_override, "alpha grid, e.g. 0,0.5,1");
  sweep->add_option("--batch-sizes", bs_override, "batch-size grid, e.g. 1,10");
  sweep->add_option("--summary", summary_path, "also write the summary CSV here");
  sweep->add_flag("--no-traces", no_traces, "skip per-run trace files");

  auto* verify = app.add_subcommand("verify", "certify the schedule inequalities by exhaustive scan");
  VerifyOptions vopt;
  std::optional<std::string> fault, grid, vbs;
  verify->add_option("--t-max", vopt.scan.t_max, "largest t scanned")->capture_default_str();
  verify->add_option("--inject-fault", fault, "perturb a constant, e.g. xi=2");
  verify->add_option("--alpha-grid", grid, "comma-separated alpha values (default: 101 points + probes)");
  verify->add_option("--batch-sizes", vbs, "batch sizes (default 1,2,10)");
  verify->add_option("--report", vopt.report_path, "write the report here as well");
  verify->add_option("-j,--threads", vopt.scan.threads, "scan workers (0 = all cores)");
  bool no_growth = false;
  verify->add_flag("--no-growth", no_growth, "skip the denominator growth scan");

  auto* sel = app.add_subcommand("select-alpha", "pick alpha for given n, eps, C1, C2");
  std::size_t n = 0;
  double eps = 0.0, C1 = 2.0, C2 = 2.0;
  sel->add_option("-n,--n", n, "number of components")->required();
  sel->add_option("-e,--eps", eps, "target accuracy")->required();
  sel->add_option("--c1", C1, "constant C1 >= 1")->capture_default_str();
  sel->add_option("--c2", C2, "constant C2 >= 1")->capture_default_str();

  auto* ref = app.add_subcommand("solve-ref", "over-solve the config's problem and save x*, F*");
  std::string ref_out;
  std::optional<double> ref_tol;
  ref->add_option("-c,--config", config_path, "experiment config file")->required();
  ref->add_option("-o,--output", ref_out, "reference file to write")->required();
  ref->add_option("--tol", ref_tol, "gradient-mapping tolerance");

  auto* parse = app.add_subcommand("parse-data", "parse a libsvm file, report and optionally canonicalize");
  std::string input;
  std::optional<std::string> output;
  parse->add_option("input", input, "libsvm file")->required();
  parse->add_option("-o,--output", output, "write the canonical form here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    auto load = [&] {
      ExperimentConfig cfg = load_config(config_path);
      if (seeds_override) cfg.run.seeds = parse_uint_list(*seeds_override);
      if (out_dir) cfg.output.dir = *out_dir;
      if (iterations_override) cfg.run.iterations = *iterations_override;
      if (threads_override) cfg.run.threads = *threads_override;
      if (alphas_override) cfg.solver.alphas = parse_real_list(*alphas_override);
      if (bs_override) {
        cfg.solver.batch_sizes.clear();
        for (auto b : parse_uint_list(*bs_override)) cfg.solver.batch_sizes.push_back(b);
      }
      cfg.validate();
      return cfg;
    };
    if (*run) return cmd_run(load(), out);
    if (*sweep) return cmd_sweep(load(), summary_path, !no_traces, out);
    if (*verify) {
      if (fault) apply_fault(*fault, vopt.scan);
      if (grid) vopt.scan.alpha_grid = parse_real_list(*grid);
      if (vbs) {
        vopt.scan.batch_sizes.clear();
        for (auto b : parse_uint_list(*vbs)) vopt.scan.batch_sizes.push_back(b);
      }
      vopt.growth = !no_growth;
      return cmd_verify(vopt, out);
    }
    if (*sel) return cmd_select_alpha(n, eps, C1, C2, out);
    if (*ref) return cmd_solve_ref(load(), ref_out, ref_tol, out);
    if (*parse) return cmd_parse_data(input, output, out);
  } catch (const kh::SelectionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const kh::ParseError& e) {
    err << "error: " << input << ": " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace khtools
