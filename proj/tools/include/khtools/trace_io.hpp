#ifndef KHTOOLS_TRACE_IO_HPP
#define KHTOOLS_TRACE_IO_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kh/optimizers.hpp"
#include "kh/problems.hpp"

namespace khtools {

inline constexpr const char* kTraceHeader =
    "t,F_y_gap,F_w_gap,p_t,ckpt_updated,ifo_total,lyapunov,ifo_total_cached";

/// One parsed trace row; gaps are F - F*.
struct TraceRow {
  std::uint64_t t = 0;
  double F_y_gap = 0.0;
  double F_w_gap = 0.0;
  double p_t = 0.0;         ///< NaN at t = 0
  bool ckpt_updated = false;
  std::uint64_t ifo_total = 0;
  double lyapunov = 0.0;    ///< NaN when not tracked
  std::uint64_t ifo_total_cached = 0;
};

struct TraceFile {
  std::map<std::string, std::string> meta;  ///< "# key: value" header lines
  std::vector<TraceRow> rows;
};

/// Writes "# key: value" lines, the column header, then one row per record.
/// Reals use the shortest round-trip form, so identical runs give identical bytes.
void write_trace(std::ostream& os, const std::map<std::string, std::string>& meta,
                 const std::vector<kh::TraceRecord>& trace, double F_star);
void write_trace_file(const std::string& path, const std::map<std::string, std::string>& meta,
                      const std::vector<kh::TraceRecord>& trace, double F_star);

/// Throws std::runtime_error naming the line on malformed input.
TraceFile read_trace(std::istream& is);
TraceFile read_trace_file(const std::string& path);

/// Reference file: header lines then one coordinate of x* per line.
void write_reference_file(const std::string& path, const kh::ReferenceSolution& ref);
kh::ReferenceSolution read_reference_file(const std::string& path);

}  // namespace khtools

#endif  // KHTOOLS_TRACE_IO_HPP
