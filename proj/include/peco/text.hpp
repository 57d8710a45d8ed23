// Copyright 2026 The Pecograph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "peco/graph.hpp"

namespace peco::detail {

inline void chop_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// First two delimited fields of a line; extra columns (rating, timestamp)
// are ignored. Returns false if fewer than two fields are present.
inline bool split_two(std::string_view line, std::string_view delim,
                      std::string_view& a, std::string_view& b) {
  const std::size_t p = line.find(delim);
  if (p == std::string_view::npos) return false;
  a = line.substr(0, p);
  std::string_view rest = line.substr(p + delim.size());
  const std::size_t q = rest.find(delim);
  b = q == std::string_view::npos ? rest : rest.substr(0, q);
  return !a.empty() && !b.empty();
}

inline std::uint32_t parse_u32(std::string_view tok, const std::string& context) {
  std::uint32_t value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw DataError("expected a non-negative integer, got '" + std::string(tok) +
                    "' (" + context + ")");
  return value;
}

inline double parse_double(std::string_view tok, const std::string& context) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw DataError("expected a number, got '" + std::string(tok) + "' (" + context + ")");
  return value;
}

}  // namespace peco::detail
