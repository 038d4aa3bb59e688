#include "khtools/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "kh/analysis.hpp"
#include "kh/libsvm.hpp"
#include "kh/optimizers.hpp"
#include "kh/reference.hpp"
#include "khtools/trace_io.hpp"

namespace khtools {

namespace fs = std::filesystem;

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(count, std::max(1u, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

kh::FiniteSumProblem prepare_problem(const ExperimentConfig& cfg, std::ostream& log) {
  kh::FiniteSumProblem problem = build_problem(cfg);
  if (!cfg.reference.present) return problem;
  if (cfg.reference.file) {
    kh::ReferenceSolution ref;
    try {
      ref = read_reference_file(*cfg.reference.file);
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    if (static_cast<std::size_t>(ref.x_star.size()) != problem.dim()) {
      throw ConfigError("[reference] file dimension " + std::to_string(ref.x_star.size()) +
                        " does not match problem dimension " + std::to_string(problem.dim()));
    }
    if (ref.provenance.empty()) ref.provenance = "file " + *cfg.reference.file;
    problem.set_reference(std::move(ref));
  } else {
    const auto res = kh::solve_reference(problem, cfg.reference.tol, cfg.reference.max_iterations);
    if (!res.converged) {
      log << "warning: reference solve hit its iteration cap (mapping norm "
          << res.achieved_mapping_norm << ")\n";
    }
    problem.set_reference(res.solution);
  }
  return problem;
}

namespace {

std::string tag(double v) {
  std::string s = kh::format_real(v);
  std::replace(s.begin(), s.end(), '.', 'p');
  std::replace(s.begin(), s.end(), '-', 'm');
  std::replace(s.begin(), s.end(), '+', 'P');
  return s;
}

std::map<std::string, std::string> trace_meta(const ExperimentConfig& cfg, const kh::FiniteSumProblem& problem,
                                              double alpha, std::size_t b, std::uint64_t seed,
                                              const std::optional<double>& eta) {
  std::map<std::string, std::string> meta;
  meta["method"] = to_string(cfg.solver.method);
  meta["problem"] = kh::to_string(problem.loss()) + " n=" + std::to_string(problem.n()) +
                    " d=" + std::to_string(problem.dim()) + " reg=" + problem.regularizer().describe();
  meta["L"] = kh::format_real(problem.smoothness());
  if (cfg.solver.method == Method::KatyushaH) {
    meta["alpha"] = kh::format_real(alpha);
    meta["b"] = std::to_string(b);
  }
  if (eta) meta["eta"] = kh::format_real(*eta);
  meta["seed"] = std::to_string(seed);
  if (problem.reference()) {
    meta["reference"] = problem.reference()->provenance;
    meta["F_star"] = kh::format_real(problem.reference()->F_star);
    meta["gap_tolerance"] = kh::format_real(problem.reference()->gap_tolerance);
  } else {
    meta["reference"] = "none (gap columns hold F)";
  }
  return meta;
}

}  // namespace

std::string trace_path(const ExperimentConfig& cfg, double alpha, std::size_t b, std::uint64_t seed,
                       bool sweep_naming) {
  std::string name = cfg.output.prefix;
  if (sweep_naming) name += "_a" + tag(alpha) + "_b" + std::to_string(b);
  name += "_seed" + std::to_string(seed) + ".csv";
  return (fs::path(cfg.output.dir) / name).string();
}

std::vector<CellResult> execute(const ExperimentConfig& cfg, const kh::FiniteSumProblem& problem,
                                bool write_traces, bool sweep_naming) {
  struct Job {
    double alpha;
    std::size_t b;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  const bool kat = cfg.solver.method == Method::KatyushaH;
  const std::vector<double> alphas = kat ? cfg.solver.alphas : std::vector<double>{cfg.solver.alphas.front()};
  const std::vector<std::size_t> bs = kat ? cfg.solver.batch_sizes : std::vector<std::size_t>{1};
  for (const double a : alphas)
    for (const auto b : bs)
      for (const auto s : cfg.run.seeds) jobs.push_back({a, b, s});
  for (const auto b : bs) {
    if (b > problem.n()) throw ConfigError("[solver] batch size exceeds n = " + std::to_string(problem.n()));
  }
  if (write_traces) fs::create_directories(cfg.output.dir);

  const double F_star = problem.reference() ? problem.reference()->F_star : 0.0;
  std::vector<CellResult> cells(jobs.size());
  parallel_for(jobs.size(), cfg.run.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    std::vector<kh::TraceRecord> trace;
    CellResult& c = cells[i];
    c.alpha = job.alpha;
    c.batch_size = job.b;
    c.seed = job.seed;
    std::optional<double> eta = cfg.solver.eta;
    if (kat) {
      kh::KatyushaConfig kc;
      kc.alpha = job.alpha;
      kc.batch_size = job.b;
      kc.eta = cfg.solver.eta;
      kc.max_iterations = cfg.run.iterations;
      kc.target_gap = cfg.run.target_gap;
      kc.seed = job.seed;
      kc.trace_stride = cfg.output.stride;
      kc.track_lyapunov = cfg.run.track_lyapunov;
      kc.cache_checkpoint_slopes = cfg.solver.cache_slopes;
      kh::RunResult r = kh::run(problem, kc);
      eta = r.final_state.eta;
      c.iterations = r.iterations;
      c.reached = r.reached_target;
      trace = std::move(r.trace);
    } else {
      kh::BaselineConfig bc;
      bc.max_iterations = cfg.run.iterations;
      bc.step = cfg.solver.eta;
      bc.target_gap = cfg.run.target_gap;
      bc.trace_stride = cfg.output.stride;
      bc.seed = job.seed;
      kh::BaselineResult r = cfg.solver.method == Method::Fista ? kh::fista_run(problem, bc)
                             : cfg.solver.method == Method::Pgd ? kh::pgd_run(problem, bc)
                                                                : kh::psgd_run(problem, bc);
      c.iterations = r.iterations;
      c.reached = r.reached_target;
      trace = std::move(r.trace);
    }
    c.ifo_final = trace.back().ifo_total;
    c.final_gap_w = problem.reference() ? trace.back().F_w - F_star : std::nan("");
    if (write_traces) {
      c.trace_path = trace_path(cfg, job.alpha, job.b, job.seed, sweep_naming);
      write_trace_file(c.trace_path, trace_meta(cfg, problem, job.alpha, job.b, job.seed, eta), trace,
                       F_star);
    }
  });
  return cells;
}

std::vector<SweepRow> summarize(const ExperimentConfig& cfg, const std::vector<CellResult>& cells) {
  std::vector<SweepRow> rows;
  for (const auto& c : cells) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SweepRow& r) {
      return r.alpha == c.alpha && r.batch_size == c.batch_size;
    });
    if (it == rows.end()) {
      rows.push_back({c.alpha, c.batch_size});
      it = rows.end() - 1;
    }
    ++it->seeds;
    it->reached += c.reached ? 1 : 0;
    it->mean_ifo += static_cast<double>(c.ifo_final);
    it->mean_iterations += static_cast<double>(c.iterations);
    it->mean_final_gap += c.final_gap_w;
  }
  for (auto& r : rows) {
    const double m = static_cast<double>(r.seeds);
    r.mean_ifo /= m;
    r.mean_iterations /= m;
    r.mean_final_gap /= m;
  }
  (void)cfg;
  return rows;
}

std::string format_summary(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "alpha,b,seeds,reached,mean_ifo,mean_iterations,mean_final_gap\n";
  for (const auto& r : rows) {
    os << kh::format_real(r.alpha) << ',' << r.batch_size << ',' << r.seeds << ',' << r.reached << ','
       << kh::format_real(r.mean_ifo) << ',' << kh::format_real(r.mean_iterations) << ','
       << (std::isnan(r.mean_final_gap) ? std::string("nan") : kh::format_real(r.mean_final_gap)) << '\n';
  }
  return os.str();
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
  const kh::FiniteSumProblem problem = prepare_problem(cfg, out);
  const auto cells = execute(cfg, problem, true, cfg.solver.alphas.size() * cfg.solver.batch_sizes.size() > 1);
  for (const auto& c : cells) {
    out << c.trace_path << " iterations=" << c.iterations << " ifo=" << c.ifo_final;
    if (cfg.run.target_gap) out << " reached=" << (c.reached ? "yes" : "no");
    out << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::optional<std::string>& summary_path,
              bool write_traces, std::ostream& out) {
  const kh::FiniteSumProblem problem = prepare_problem(cfg, out);
  const auto cells = execute(cfg, problem, write_traces, true);
  const std::string table = format_summary(summarize(cfg, cells));
  out << table;
  if (summary_path) {
    std::ofstream f(*summary_path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write summary '" + *summary_path + "'");
    f << table;
  }
  return kExitOk;
}

void apply_fault(const std::string& spec, kh::ScanOptions& scan) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("fault spec must look like name=value, got '" + spec + "'");
  const std::string name = spec.substr(0, eq);
  if (name != "xi") throw ConfigError("unknown fault '" + name + "' (supported: xi)");
  try {
    std::size_t pos = 0;
    const std::string v = spec.substr(eq + 1);
    scan.xi_override = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError("fault value in '" + spec + "' is not a number");
  }
}

kh::CertificateReport run_verification(const VerifyOptions& opt) {
  kh::CertificateReport report = kh::scan_schedule(opt.scan);
  if (opt.growth) {
    kh::ClaimResult growth, early;
    bool first = true;
    for (const double a : opt.scan.alpha_grid) {
      if (a == 0.0) continue;
      const auto r = kh::scan_denominator_growth(a, opt.scan.t_max);
      if (first) {
        growth = r.claims[0];
        early = r.claims[1];
        first = false;
      } else {
        growth.merge(r.claims[0]);
        early.merge(r.claims[1]);
      }
    }
    if (!first) {
      growth.range = "alpha in grid\\{0}, b = 1, " + growth.range;
      early.range = "alpha in grid\\{0}, b = 1, " + early.range;
      report.claims.push_back(growth);
      report.claims.push_back(early);
    }
  }
  return report;
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out) {
  const auto report = run_verification(opt);
  const std::string text = report.to_text();
  out << text;
  if (opt.report_path) {
    std::ofstream f(*opt.report_path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write report '" + *opt.report_path + "'");
    f << text;
  }
  return report.passed() ? kExitOk : kExitVerifyFail;
}

int cmd_select_alpha(std::size_t n, double epsilon, double C1, double C2, std::ostream& out) {
  const kh::AlphaSelection s = kh::select_alpha(n, epsilon, C1, C2);
  const auto& iv = s.interval;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "alpha = %.6f\n"
                "interval = [%.6f, %.6f] (%s branch)\n"
                "delta1 = %.6f\ndelta2 = %.6f\nhat_alpha = %.6f\nthreshold = %.6f\n",
                s.alpha, iv.lo, iv.hi, iv.small_branch ? "small-alpha" : "general", iv.delta1,
                iv.delta2, iv.hat_alpha, iv.threshold);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "check 1/eps^(1/(a+1)) = %.6e <= C1 sqrt(n/eps) = %.6e : %s\n"
                "check n/eps^(a/(a+1)) = %.6e <= C2 sqrt(n/eps) = %.6e : %s\n",
                s.iter_lhs, s.iter_rhs, s.iter_lhs <= s.iter_rhs ? "ok" : "FAIL", s.ckpt_lhs,
                s.ckpt_rhs, s.ckpt_lhs <= s.ckpt_rhs ? "ok" : "FAIL");
  out << buf;
  out << "predicted IFO, b = 1 (order estimate, constants set to 1):\n";
  for (const double a : {0.0, s.alpha, 1.0}) {
    const auto p = kh::predict_ifo(a, 1, n, epsilon);
    std::snprintf(buf, sizeof buf,
                  "  alpha=%.6f total=%.3e batch=%.3e checkpoint=%.3e log=%.3e order=10^%.1f\n", a,
                  p.total(), p.batch_term, p.checkpoint_term, p.log_term, p.order());
    out << buf;
  }
  return kExitOk;
}

int cmd_solve_ref(const ExperimentConfig& cfg, const std::string& out_path, std::optional<double> tol,
                  std::ostream& out) {
  const kh::FiniteSumProblem problem = build_problem(cfg);
  const double t = tol.value_or(cfg.reference.tol);
  const auto res = kh::solve_reference(problem, t, cfg.reference.max_iterations);
  write_reference_file(out_path, res.solution);
  out << "F_star = " << kh::format_real(res.solution.F_star) << "\n"
      << "mapping_norm = " << res.achieved_mapping_norm << "\n"
      << "iterations = " << res.iterations << "\n"
      << "converged = " << (res.converged ? "yes" : "no") << "\n"
      << "written " << out_path << "\n";
  return kExitOk;
}

int cmd_parse_data(const std::string& input, const std::optional<std::string>& output,
                   std::ostream& out) {
  const kh::SparseDataset data = kh::read_libsvm_file(input);
  std::size_t nnz = 0;
  for (const auto& r : data.rows) nnz += r.size();
  const std::string canon = kh::serialize_libsvm(data);
  const bool round_trip = kh::parse_libsvm(canon, data.dim) == data;
  out << "rows = " << data.size() << "\ndim = " << data.dim << "\nnnz = " << nnz
      << "\nround_trip = " << (round_trip ? "ok" : "FAIL") << "\n";
  if (output) {
    kh::write_libsvm_file(*output, data);
    out << "written " << *output << "\n";
  }
  return round_trip ? kExitOk : kExitVerifyFail;
}

}  // namespace khtools
