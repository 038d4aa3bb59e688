#include "kh/libsvm.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace kh {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

bool parse_real(std::string_view tok, double& out) {
  if (tok.empty()) return false;
  if (tok.front() == '+') {
    tok.remove_prefix(1);
    if (tok.empty() || tok.front() == '-' || tok.front() == '+') return false;
  }
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view tok, std::uint32_t& out) {
  if (tok.empty()) return false;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::string quote(std::string_view tok) { return "'" + std::string(tok) + "'"; }

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

void SparseDataset::validate() const {
  if (rows.size() != labels.size()) {
    throw std::invalid_argument("dataset: rows and labels differ in length");
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::uint32_t prev = 0;
    for (const auto& e : rows[r]) {
      if (e.index == 0 || e.index <= prev || e.index > dim) {
        throw std::invalid_argument("dataset: row " + std::to_string(r + 1) +
                                    " has an invalid or non-increasing index");
      }
      prev = e.index;
    }
  }
}

SparseDataset parse_libsvm(std::string_view text, std::size_t min_dim) {
  SparseDataset data;
  std::size_t line_no = 0;
  std::size_t max_index = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }

    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      const std::size_t start = i;
      while (i < line.size() && !is_space(line[i])) ++i;
      if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    if (tokens.empty()) continue;

    double label = 0.0;
    if (!parse_real(tokens[0], label)) {
      throw ParseError(line_no, "malformed label " + quote(tokens[0]));
    }
    SparseRow row;
    row.reserve(tokens.size() - 1);
    std::uint32_t prev = 0;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto tok = tokens[k];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "expected idx:val, got " + quote(tok));
      }
      SparseEntry e;
      if (!parse_index(tok.substr(0, colon), e.index) || e.index == 0) {
        throw ParseError(line_no, "malformed feature index in " + quote(tok));
      }
      if (!parse_real(tok.substr(colon + 1), e.value)) {
        throw ParseError(line_no, "malformed feature value in " + quote(tok));
      }
      if (e.index <= prev) {
        throw ParseError(line_no, "feature indices must be strictly increasing at " +
                                      quote(tok));
      }
      prev = e.index;
      max_index = std::max<std::size_t>(max_index, e.index);
      row.push_back(e);
    }
    data.labels.push_back(label);
    data.rows.push_back(std::move(row));
  }
  data.dim = std::max(max_index, min_dim);
  return data;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string serialize_libsvm(const SparseDataset& data) {
  data.validate();
  std::string out;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    out += format_real(data.labels[r]);
    for (const auto& e : data.rows[r]) {
      out += ' ';
      out += std::to_string(e.index);
      out += ':';
      out += format_real(e.value);
    }
    out += '\n';
  }
  return out;
}

SparseDataset read_libsvm_file(const std::string& path, std::size_t min_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_libsvm(ss.str(), min_dim);
}

void write_libsvm_file(const std::string& path, const SparseDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset file '" + path + "'");
  out << serialize_libsvm(data);
}

}  // namespace kh
