#ifndef KHTOOLS_COMMANDS_HPP
#define KHTOOLS_COMMANDS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kh/verification.hpp"
#include "khtools/config.hpp"

namespace khtools {

enum ExitCode : int { kExitOk = 0, kExitVerifyFail = 1, kExitConfigError = 2 };

/// Runs fn(0..count-1) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Problem with its reference attached when the config asks for one.
kh::FiniteSumProblem prepare_problem(const ExperimentConfig& cfg, std::ostream& log);

struct CellResult {
  double alpha = 0.0;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;
  std::uint64_t ifo_final = 0;
  bool reached = false;
  double final_gap_w = 0.0;  ///< NaN without a reference
  std::string trace_path;    ///< empty when traces are not written
};

/// Trace file name for one run.
std::string trace_path(const ExperimentConfig& cfg, double alpha, std::size_t b, std::uint64_t seed,
                       bool sweep_naming);

/// Every (alpha, b, seed) of the config; optionally writes one trace per run.
std::vector<CellResult> execute(const ExperimentConfig& cfg, const kh::FiniteSumProblem& problem,
                                bool write_traces, bool sweep_naming);

struct SweepRow {
  double alpha = 0.0;
  std::size_t batch_size = 1;
  std::size_t seeds = 0;
  std::size_t reached = 0;
  double mean_ifo = 0.0;
  double mean_iterations = 0.0;
  double mean_final_gap = 0.0;
};

/// Aggregates per (alpha, b) in config order.
std::vector<SweepRow> summarize(const ExperimentConfig& cfg, const std::vector<CellResult>& cells);
std::string format_summary(const std::vector<SweepRow>& rows);

int cmd_run(const ExperimentConfig& cfg, std::ostream& out);
int cmd_sweep(const ExperimentConfig& cfg, const std::optional<std::string>& summary_path,
              bool write_traces, std::ostream& out);

struct VerifyOptions {
  kh::ScanOptions scan;
  bool growth = true;
  std::optional<std::string> report_path;
};

/// "xi=2" style fault spec. Throws ConfigError.
void apply_fault(const std::string& spec, kh::ScanOptions& scan);
kh::CertificateReport run_verification(const VerifyOptions& opt);
int cmd_verify(const VerifyOptions& opt, std::ostream& out);

int cmd_select_alpha(std::size_t n, double epsilon, double C1, double C2, std::ostream& out);
int cmd_solve_ref(const ExperimentConfig& cfg, const std::string& out_path, std::optional<double> tol,
                  std::ostream& out);
int cmd_parse_data(const std::string& input, const std::optional<std::string>& output,
                   std::ostream& out);

/// Full command line entry; errors go to err.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace khtools

#endif  // KHTOOLS_COMMANDS_HPP
