#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ossvm/sample.hpp"

namespace ossvm {

// Shortest decimal form that parses back to the same double.
std::string format_real(double value);

// Strict full-token parsers; throw ParseError with `context` on failure.
double parse_real(std::string_view token, std::string_view context = {});
long long parse_int(std::string_view token, std::string_view context = {});

std::vector<std::string_view> split_whitespace(std::string_view line);
std::vector<std::string> split_char(std::string_view line, char sep);

// Parses "idx:val" tokens into validated features; zero values are dropped.
std::vector<Feature> parse_features(const std::vector<std::string_view>& tokens,
                                    std::size_t first, std::string_view context);

// Writes " idx:val" for every feature.
void write_features(std::ostream& os, const SparseSample& sample);

}  // namespace ossvm
