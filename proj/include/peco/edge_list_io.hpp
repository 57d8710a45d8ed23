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
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "peco/graph.hpp"
#include "peco/hash.hpp"
#include "peco/text.hpp"

namespace peco {

enum class EdgeListFormat { Movielens, Tsv, Csv };

inline EdgeListFormat parse_format(std::string_view name) {
  if (name == "movielens") return EdgeListFormat::Movielens;
  if (name == "tsv") return EdgeListFormat::Tsv;
  if (name == "csv") return EdgeListFormat::Csv;
  throw std::invalid_argument("unknown edge list format: " + std::string(name));
}

/// Reads a line-oriented edge list with opaque string node labels (ratings /
/// timestamps ignored), binarizing to implicit feedback. External labels map
/// to dense 0-based indices in first-seen order; duplicate (user, item) lines
/// collapse to one edge.
inline InteractionGraph load_edge_list(const std::string& path, EdgeListFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path);
  const std::string_view delim = format == EdgeListFormat::Movielens ? "::"
                                 : format == EdgeListFormat::Csv     ? ","
                                                                     : "\t";
  std::unordered_map<std::string, NodeId> user_index, item_index;
  std::vector<std::string> user_labels, item_labels;
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::chop_cr(line);
    if (line.empty()) continue;
    std::string_view user_tok, item_tok;
    if (!detail::split_two(line, delim, user_tok, item_tok))
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed line '" + line + "'");
    auto [uit, uinserted] = user_index.try_emplace(std::string(user_tok),
                                                   static_cast<NodeId>(user_labels.size()));
    if (uinserted) user_labels.emplace_back(user_tok);
    auto [iit, iinserted] = item_index.try_emplace(std::string(item_tok),
                                                   static_cast<NodeId>(item_labels.size()));
    if (iinserted) item_labels.emplace_back(item_tok);
    edges.emplace_back(uit->second, iit->second);
  }
  if (edges.empty()) throw DataError("edge list is empty: " + path);
  const auto num_users = static_cast<NodeId>(user_labels.size());
  const auto num_items = static_cast<NodeId>(item_labels.size());
  return InteractionGraph(num_users, num_items, std::move(edges),
                          std::move(user_labels), std::move(item_labels));
}

/// Canonical serialization: `user_idx<TAB>item_idx` lines sorted by
/// (user, item). Byte-identical for identical graphs.
inline std::string canonical_edge_bytes(const InteractionGraph& g) {
  std::string out;
  out.reserve(g.num_edges() * 12);
  char buf[24];
  for (NodeId u = 0; u < g.num_users(); ++u) {
    for (NodeId i : g.items_of(u)) {
      auto r1 = std::to_chars(buf, buf + sizeof(buf), u);
      out.append(buf, r1.ptr);
      out.push_back('\t');
      auto r2 = std::to_chars(buf, buf + sizeof(buf), i);
      out.append(buf, r2.ptr);
      out.push_back('\n');
    }
  }
  return out;
}

/// Content fingerprint of a graph: node counts plus the canonical edge list.
inline std::string graph_hash(const InteractionGraph& g) {
  Fnv1a64 h;
  const std::string header = "peco-graph\t" + std::to_string(g.num_users()) + "\t" +
                             std::to_string(g.num_items()) + "\n";
  h.update(header);
  h.update(canonical_edge_bytes(g));
  return to_hex(h.digest());
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path);
}

inline void save_canonical_edges(const InteractionGraph& g, const std::string& path) {
  write_file(path, canonical_edge_bytes(g));
}

/// Sidecar label map covering every node, edge-incident or not:
/// `U<TAB>idx<TAB>label` then `I<TAB>idx<TAB>label`.
inline std::string label_map_bytes(const InteractionGraph& g) {
  std::string out;
  for (NodeId u = 0; u < g.num_users(); ++u)
    out += "U\t" + std::to_string(u) + "\t" + g.user_label(u) + "\n";
  for (NodeId i = 0; i < g.num_items(); ++i)
    out += "I\t" + std::to_string(i) + "\t" + g.item_label(i) + "\n";
  return out;
}

inline void save_label_map(const InteractionGraph& g, const std::string& path) {
  write_file(path, label_map_bytes(g));
}

/// Loads a canonical edge list written by save_canonical_edges. With a label
/// map the node sets are restored exactly (including isolated nodes); without
/// one, node counts are inferred from the largest index seen.
inline InteractionGraph load_canonical(const std::string& edge_path,
                                       const std::string& label_path = {}) {
  std::vector<std::string> user_labels, item_labels;
  if (!label_path.empty()) {
    std::ifstream lin(label_path);
    if (!lin) throw DataError("cannot open label map: " + label_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lin, line)) {
      ++line_no;
      detail::chop_cr(line);
      if (line.empty()) continue;
      const std::string ctx = label_path + ":" + std::to_string(line_no);
      const std::size_t t1 = line.find('\t');
      const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
      if (t2 == std::string::npos) throw DataError(ctx + ": malformed label line");
      const std::string_view side(line.data(), t1);
      const std::uint32_t idx =
          detail::parse_u32({line.data() + t1 + 1, t2 - t1 - 1}, ctx);
      std::string label = line.substr(t2 + 1);
      auto& labels = side == "U" ? user_labels : item_labels;
      if (side != "U" && side != "I") throw DataError(ctx + ": side must be U or I");
      if (idx != labels.size()) throw DataError(ctx + ": label indices out of order");
      labels.push_back(std::move(label));
    }
  }

  std::ifstream in(edge_path);
  if (!in) throw DataError("cannot open edge list: " + edge_path);
  std::vector<Edge> edges;
  NodeId max_user = 0, max_item = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::chop_cr(line);
    if (line.empty()) continue;
    const std::string ctx = edge_path + ":" + std::to_string(line_no);
    std::string_view user_tok, item_tok;
    if (!detail::split_two(line, "\t", user_tok, item_tok))
      throw DataError(ctx + ": malformed line '" + line + "'");
    const NodeId u = detail::parse_u32(user_tok, ctx);
    const NodeId i = detail::parse_u32(item_tok, ctx);
    max_user = std::max(max_user, u);
    max_item = std::max(max_item, i);
    edges.emplace_back(u, i);
  }
  NodeId nu = edges.empty() ? 0 : max_user + 1;
  NodeId ni = edges.empty() ? 0 : max_item + 1;
  if (!user_labels.empty()) {
    if (nu > user_labels.size() || (!edges.empty() && ni > item_labels.size()))
      throw DataError(edge_path + ": edge indices exceed label map of " + label_path);
    nu = static_cast<NodeId>(user_labels.size());
    ni = static_cast<NodeId>(item_labels.size());
  }
  return InteractionGraph(nu, ni, std::move(edges), std::move(user_labels),
                          std::move(item_labels));
}

}  // namespace peco
