#ifndef KH_LIBSVM_HPP
#define KH_LIBSVM_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kh {

struct SparseEntry {
  std::uint32_t index = 0;  ///< 1-based feature index
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

using SparseRow = std::vector<SparseEntry>;

/// Rows of (index, value) pairs with strictly increasing 1-based indices.
struct SparseDataset {
  std::vector<SparseRow> rows;
  std::vector<double> labels;
  std::size_t dim = 0;

  std::size_t size() const noexcept { return rows.size(); }
  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  friend bool operator==(const SparseDataset&, const SparseDataset&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parses "label idx:val idx:val ..." records, one per line. Blank lines are
/// skipped; a '#' starts a comment. dim is the largest index seen, or
/// min_dim if larger.
SparseDataset parse_libsvm(std::string_view text, std::size_t min_dim = 0);

/// Canonical form: single spaces, shortest round-trip decimal for every real,
/// one '\n'-terminated line per record.
std::string serialize_libsvm(const SparseDataset& data);

inline std::string canonicalize_libsvm(std::string_view text) {
  return serialize_libsvm(parse_libsvm(text));
}

SparseDataset read_libsvm_file(const std::string& path, std::size_t min_dim = 0);
void write_libsvm_file(const std::string& path, const SparseDataset& data);

/// Shortest decimal string that parses back to exactly v.
std::string format_real(double v);

}  // namespace kh

#endif  // KH_LIBSVM_HPP
