#include "ossvm/text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <ostream>

#include "ossvm/error.hpp"

namespace ossvm {
namespace {

std::string with_context(std::string_view context, std::string_view msg) {
  if (context.empty()) return std::string(msg);
  return std::string(context) + ": " + std::string(msg);
}

}  // namespace

std::string format_real(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_real(std::string_view token, std::string_view context) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (token.empty() || res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorKind::ParseError,
                with_context(context, "malformed real '" + std::string(token) + "'"));
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::ParseError,
                with_context(context, "non-finite value '" + std::string(token) + "'"));
  }
  return value;
}

long long parse_int(std::string_view token, std::string_view context) {
  long long value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (token.empty() || res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorKind::ParseError,
                with_context(context, "malformed integer '" + std::string(token) + "'"));
  }
  return value;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos > start) out.push_back(line.substr(start, pos - start));
  }
  return out;
}

std::vector<std::string> split_char(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<Feature> parse_features(const std::vector<std::string_view>& tokens,
                                    std::size_t first, std::string_view context) {
  std::vector<Feature> out;
  int prev = 0;
  for (std::size_t k = first; k < tokens.size(); ++k) {
    const auto tok = tokens[k];
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::ParseError,
                  with_context(context, "expected idx:val, got '" + std::string(tok) + "'"));
    }
    const long long idx = parse_int(tok.substr(0, colon), context);
    const double val = parse_real(tok.substr(colon + 1), context);
    if (idx <= prev) {
      throw Error(ErrorKind::ParseError,
                  with_context(context, "feature indices must be positive and strictly "
                                        "increasing (index " + std::to_string(idx) + ")"));
    }
    prev = static_cast<int>(idx);
    if (val != 0.0) out.push_back({static_cast<int>(idx), val});
  }
  return out;
}

void write_features(std::ostream& os, const SparseSample& sample) {
  for (const auto& f : sample.features) os << ' ' << f.index << ':' << format_real(f.value);
}

}  // namespace ossvm
