#include "khtools/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "kh/libsvm.hpp"

namespace khtools {

namespace fs = std::filesystem;
using Section = std::map<std::string, std::string>;

std::string to_string(Method m) {
  switch (m) {
    case Method::KatyushaH: return "katyusha_h";
    case Method::Fista: return "fista";
    case Method::Pgd: return "pgd";
    case Method::Psgd: return "psgd";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "katyusha_h" || s == "katyusha-h") return Method::KatyushaH;
  if (s == "fista") return Method::Fista;
  if (s == "pgd") return Method::Pgd;
  if (s == "psgd") return Method::Psgd;
  throw ConfigError("unknown solver method '" + s + "' (expected katyusha_h, fista, pgd or psgd)");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) {
    throw ConfigError("key '" + key + "': expected a real number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) {
    // allow 1e4 style integers
    double d = 0.0;
    auto [q, ec2] = std::from_chars(v.data(), end, d);
    if (ec2 == std::errc() && q == end && d >= 0 && d == std::floor(d) && d < 1.8e19) {
      return static_cast<std::uint64_t>(d);
    }
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void reject_unknown(const std::string& name, const Section& sec, std::initializer_list<const char*> known) {
  const std::set<std::string> ok(known.begin(), known.end());
  for (const auto& [k, _] : sec) {
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in [" + name + "]");
  }
}

std::string resolve(const std::string& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

}  // namespace

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_real("list", item));
  if (out.empty()) throw ConfigError("empty list '" + s + "'");
  return out;
}

std::vector<std::uint64_t> parse_uint_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(s)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      out.push_back(to_uint("list", item));
      continue;
    }
    const auto lo = to_uint("list", trim(item.substr(0, colon)));
    const auto hi = to_uint("list", trim(item.substr(colon + 1)));
    if (hi < lo) throw ConfigError("empty range '" + item + "'");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list '" + s + "'");
  return out;
}

namespace {

// "value  # note" -> "value"; a comment marker must follow whitespace
std::string strip_comment(const std::string& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if ((v[i] == '#' || v[i] == ';') && (v[i - 1] == ' ' || v[i - 1] == '\t')) return v.substr(0, i);
  }
  return v;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::map<std::string, Section> sections;
  for (const auto& [name, child] : tree) {
    if (child.empty() && !child.data().empty()) {
      throw ConfigError("key '" + name + "' outside any section");
    }
    Section sec;
    for (const auto& [k, v] : child) sec[k] = trim(strip_comment(v.data()));
    sections[name] = std::move(sec);
  }
  for (const auto& [name, _] : sections) {
    static const std::set<std::string> known{"problem", "solver", "run", "reference", "output"};
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");
  }

  ExperimentConfig cfg;
  auto get = [](const Section& s, const char* k) -> std::optional<std::string> {
    auto it = s.find(k);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };

  if (auto it = sections.find("problem"); it != sections.end()) {
    const Section& s = it->second;
    reject_unknown("problem", s, {"family", "dataset", "n", "d", "seed", "column_decay", "sparsity",
                                  "noise", "planted_scale", "normalize_rows", "reg", "lambda",
                                  "l1", "l2"});
    auto& p = cfg.problem;
    if (auto v = get(s, "family")) {
      try {
        p.family = kh::loss_from_string(*v);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("[problem] family: ") + e.what());
      }
    }
    if (auto v = get(s, "dataset")) p.dataset = resolve(base_dir, *v);
    if (auto v = get(s, "n")) p.synth.n = to_uint("n", *v);
    if (auto v = get(s, "d")) p.synth.d = to_uint("d", *v);
    if (auto v = get(s, "seed")) p.synth.seed = to_uint("seed", *v);
    if (auto v = get(s, "column_decay")) p.synth.column_decay = to_real("column_decay", *v);
    if (auto v = get(s, "sparsity")) p.synth.sparsity = to_real("sparsity", *v);
    if (auto v = get(s, "noise")) p.synth.noise = to_real("noise", *v);
    if (auto v = get(s, "planted_scale")) p.synth.planted_scale = to_real("planted_scale", *v);
    if (auto v = get(s, "normalize_rows")) p.synth.normalize_rows = to_bool("normalize_rows", *v);
    p.synth.family = p.family;

    const std::string reg = get(s, "reg").value_or("zero");
    const double lambda = get(s, "lambda") ? to_real("lambda", *get(s, "lambda")) : 0.0;
    const double l1 = get(s, "l1") ? to_real("l1", *get(s, "l1")) : lambda;
    const double l2 = get(s, "l2") ? to_real("l2", *get(s, "l2")) : lambda;
    try {
      if (reg == "zero" || reg == "none") p.reg = kh::Regularizer::zero();
      else if (reg == "l1" || reg == "lasso") p.reg = kh::Regularizer::lasso(l1);
      else if (reg == "l2" || reg == "ridge") p.reg = kh::Regularizer::squared_l2(l2);
      else if (reg == "elastic_net") p.reg = kh::Regularizer::elastic_net(l1, l2);
      else throw ConfigError("[problem] reg: unknown regularizer '" + reg + "' (zero, l1, l2, elastic_net)");
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("[problem] reg: ") + e.what());
    }
    p.synth.reg = p.reg;
  }

  if (auto it = sections.find("solver"); it != sections.end()) {
    const Section& s = it->second;
    reject_unknown("solver", s, {"method", "alpha", "alphas", "b", "batch_size", "batch_sizes", "eta",
                                 "cache_slopes"});
    auto& sv = cfg.solver;
    if (auto v = get(s, "method")) sv.method = method_from_string(*v);
    if (auto v = get(s, "alpha")) sv.alphas = {to_real("alpha", *v)};
    if (auto v = get(s, "alphas")) sv.alphas = parse_real_list(*v);
    if (auto v = get(s, "b")) sv.batch_sizes = {to_uint("b", *v)};
    if (auto v = get(s, "batch_size")) sv.batch_sizes = {to_uint("batch_size", *v)};
    if (auto v = get(s, "batch_sizes")) {
      sv.batch_sizes.clear();
      for (auto b : parse_uint_list(*v)) sv.batch_sizes.push_back(b);
    }
    if (auto v = get(s, "eta"); v && *v != "auto") sv.eta = to_real("eta", *v);
    if (auto v = get(s, "cache_slopes")) sv.cache_slopes = to_bool("cache_slopes", *v);
  }

  if (auto it = sections.find("run"); it != sections.end()) {
    const Section& s = it->second;
    reject_unknown("run", s, {"iterations", "T", "target_gap", "epsilon", "seeds", "seed",
                              "track_lyapunov", "threads"});
    auto& r = cfg.run;
    if (auto v = get(s, "iterations")) r.iterations = to_uint("iterations", *v);
    if (auto v = get(s, "T")) r.iterations = to_uint("T", *v);
    if (auto v = get(s, "target_gap")) r.target_gap = to_real("target_gap", *v);
    if (auto v = get(s, "epsilon")) r.target_gap = to_real("epsilon", *v);
    if (auto v = get(s, "seed")) r.seeds = {to_uint("seed", *v)};
    if (auto v = get(s, "seeds")) r.seeds = parse_uint_list(*v);
    if (auto v = get(s, "track_lyapunov")) r.track_lyapunov = to_bool("track_lyapunov", *v);
    if (auto v = get(s, "threads")) r.threads = static_cast<unsigned>(to_uint("threads", *v));
  }

  if (auto it = sections.find("reference"); it != sections.end()) {
    const Section& s = it->second;
    reject_unknown("reference", s, {"file", "tol", "max_iterations"});
    auto& rf = cfg.reference;
    rf.present = true;
    if (auto v = get(s, "file")) rf.file = resolve(base_dir, *v);
    if (auto v = get(s, "tol")) rf.tol = to_real("tol", *v);
    if (auto v = get(s, "max_iterations")) rf.max_iterations = to_uint("max_iterations", *v);
  }

  if (auto it = sections.find("output"); it != sections.end()) {
    const Section& s = it->second;
    reject_unknown("output", s, {"dir", "prefix", "stride"});
    auto& o = cfg.output;
    if (auto v = get(s, "dir")) o.dir = resolve(base_dir, *v);
    if (auto v = get(s, "prefix")) o.prefix = *v;
    if (auto v = get(s, "stride")) o.stride = to_uint("stride", *v);
  } else {
    cfg.output.dir = base_dir;
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string base = fs::path(path).parent_path().string();
  ExperimentConfig cfg = parse_config(ss.str(), base.empty() ? "." : base);
  cfg.source = path;
  return cfg;
}

void ExperimentConfig::validate() const {
  if (problem.dataset) {
    if (!fs::exists(*problem.dataset)) {
      throw ConfigError("[problem] dataset: file '" + *problem.dataset + "' does not exist");
    }
  } else {
    if (problem.synth.n == 0 || problem.synth.d == 0) {
      throw ConfigError("[problem] n and d must be positive for synthetic problems");
    }
    if (!(problem.synth.sparsity >= 0.0 && problem.synth.sparsity <= 1.0)) {
      throw ConfigError("[problem] sparsity must lie in [0, 1]");
    }
  }
  for (const double a : solver.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("[solver] alpha must lie in [0, 1]");
  }
  for (const auto b : solver.batch_sizes) {
    if (b == 0) throw ConfigError("[solver] batch size must be positive");
    if (!problem.dataset && b > problem.synth.n) {
      throw ConfigError("[solver] batch size " + std::to_string(b) + " exceeds n = " +
                        std::to_string(problem.synth.n));
    }
  }
  if (solver.eta && !(*solver.eta > 0.0)) throw ConfigError("[solver] eta must be positive");
  if (run.target_gap && !(*run.target_gap > 0.0)) throw ConfigError("[run] target_gap must be positive");
  if (run.target_gap && !reference.present) {
    throw ConfigError("[run] target_gap needs a [reference] section (set reference.file or reference.tol)");
  }
  if (run.track_lyapunov && !reference.present) {
    throw ConfigError("[run] track_lyapunov needs a [reference] section");
  }
  if (reference.file && !fs::exists(*reference.file)) {
    throw ConfigError("[reference] file '" + *reference.file + "' does not exist");
  }
  if (!(reference.tol > 0.0)) throw ConfigError("[reference] tol must be positive");
  if (run.seeds.empty()) throw ConfigError("[run] seeds must not be empty");
  if (output.prefix.empty() || output.prefix.find('/') != std::string::npos) {
    throw ConfigError("[output] prefix must be a plain file-name stem");
  }
}

kh::FiniteSumProblem build_problem(const ExperimentConfig& cfg) {
  const auto& p = cfg.problem;
  if (p.dataset) {
    kh::SparseDataset data;
    try {
      data = kh::read_libsvm_file(*p.dataset);
    } catch (const kh::ParseError& e) {
      throw ConfigError("dataset '" + *p.dataset + "': " + e.what());
    }
    try {
      auto prob = kh::make_problem(p.family, data, p.reg);
      for (const auto b : cfg.solver.batch_sizes) {
        if (b > prob.n()) {
          throw ConfigError("[solver] batch size " + std::to_string(b) + " exceeds n = " +
                            std::to_string(prob.n()));
        }
      }
      return prob;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("dataset '" + *p.dataset + "': " + e.what());
    }
  }
  return kh::synthesize(p.synth).problem;
}

}  // namespace khtools
