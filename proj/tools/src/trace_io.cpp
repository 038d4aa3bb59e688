#include "khtools/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kh/libsvm.hpp"

namespace khtools {

namespace {

// format_real does not accept NaN
std::string real_or_nan(double v) { return std::isnan(v) ? "nan" : kh::format_real(v); }

std::string scrub(const std::string& v) {
  std::string out = v;
  for (auto& c : out)
    if (c == '\n' || c == '\r') c = ' ';
  return out;
}

double parse_real(const std::string& s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad real '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

void write_trace(std::ostream& os, const std::map<std::string, std::string>& meta,
                 const std::vector<kh::TraceRecord>& trace, double F_star) {
  for (const auto& [k, v] : meta) os << "# " << k << ": " << scrub(v) << '\n';
  os << kTraceHeader << '\n';
  for (const auto& r : trace) {
    os << r.t << ',' << real_or_nan(r.F_y - F_star) << ',' << real_or_nan(r.F_w - F_star) << ','
       << real_or_nan(r.p_t) << ',' << (r.checkpoint_updated ? 1 : 0) << ',' << r.ifo_total << ','
       << (r.lyapunov ? real_or_nan(*r.lyapunov) : std::string("nan")) << ',' << r.ifo_single
       << '\n';
  }
}

void write_trace_file(const std::string& path, const std::map<std::string, std::string>& meta,
                      const std::vector<kh::TraceRecord>& trace, double F_star) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
  write_trace(out, meta, trace, F_star);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

TraceFile read_trace(std::istream& is) {
  TraceFile tf;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header) throw std::runtime_error("line " + std::to_string(lineno) + ": comment after header");
      const auto colon = line.find(": ");
      if (line.size() < 2 || colon == std::string::npos) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": malformed metadata line");
      }
      tf.meta[line.substr(2, colon - 2)] = line.substr(colon + 2);
      continue;
    }
    if (!header) {
      if (line != kTraceHeader) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": unexpected column header");
      }
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected 8 fields, got " +
                               std::to_string(f.size()));
    }
    TraceRow r;
    r.t = parse_uint(f[0], lineno);
    r.F_y_gap = parse_real(f[1], lineno);
    r.F_w_gap = parse_real(f[2], lineno);
    r.p_t = parse_real(f[3], lineno);
    if (f[4] != "0" && f[4] != "1") {
      throw std::runtime_error("line " + std::to_string(lineno) + ": ckpt_updated must be 0 or 1");
    }
    r.ckpt_updated = f[4] == "1";
    r.ifo_total = parse_uint(f[5], lineno);
    r.lyapunov = parse_real(f[6], lineno);
    r.ifo_total_cached = parse_uint(f[7], lineno);
    if (!tf.rows.empty() && r.t <= tf.rows.back().t) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": rows must be ordered by t");
    }
    tf.rows.push_back(r);
  }
  if (!header) throw std::runtime_error("trace has no column header");
  return tf;
}

TraceFile read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file '" + path + "'");
  return read_trace(in);
}

void write_reference_file(const std::string& path, const kh::ReferenceSolution& ref) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write reference file '" + path + "'");
  out << "# provenance: " << scrub(ref.provenance) << '\n';
  out << "F_star = " << kh::format_real(ref.F_star) << '\n';
  out << "gap_tolerance = " << kh::format_real(ref.gap_tolerance) << '\n';
  out << "dim = " << ref.x_star.size() << '\n';
  for (Eigen::Index i = 0; i < ref.x_star.size(); ++i) out << kh::format_real(ref.x_star[i]) << '\n';
}

kh::ReferenceSolution read_reference_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open reference file '" + path + "'");
  kh::ReferenceSolution ref;
  std::string line;
  std::size_t lineno = 0;
  long dim = -1;
  std::vector<double> xs;
  bool have_F = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("# provenance: ", 0) == 0) {
      ref.provenance = line.substr(14);
    } else if (line.rfind("F_star = ", 0) == 0) {
      ref.F_star = parse_real(line.substr(9), lineno);
      have_F = true;
    } else if (line.rfind("gap_tolerance = ", 0) == 0) {
      ref.gap_tolerance = parse_real(line.substr(16), lineno);
    } else if (line.rfind("dim = ", 0) == 0) {
      dim = static_cast<long>(parse_uint(line.substr(6), lineno));
    } else {
      xs.push_back(parse_real(line, lineno));
    }
  }
  if (!have_F || dim < 0 || static_cast<long>(xs.size()) != dim) {
    throw std::runtime_error("reference file '" + path + "' is incomplete");
  }
  ref.x_star = Eigen::Map<const kh::Vector>(xs.data(), dim);
  return ref;
}

}  // namespace khtools
