// SPDX-License-Identifier: Apache-2.0
#include "der/graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "der/errors.hpp"
#include "der/format.hpp"

namespace der {

namespace {

std::uint64_t edge_key(UserId from, UserId to) {
  return (static_cast<std::uint64_t>(from.index) << 32) | to.index;
}

}  // namespace

TrustGraph::TrustGraph(double theta) : theta_(theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("split threshold theta must lie in (0,1)");
  }
}

UserId TrustGraph::intern(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) {
    return UserId{it->second};
  }
  const auto idx = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), idx);
  return UserId{idx};
}

std::optional<UserId> TrustGraph::find_user(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    return std::nullopt;
  }
  return UserId{it->second};
}

const std::string& TrustGraph::name(UserId id) const {
  if (id.index >= names_.size()) {
    throw std::out_of_range("unknown user index " + std::to_string(id.index));
  }
  return names_[id.index];
}

void TrustGraph::upsert_edge(UserId from, UserId to, const ExperienceState& state) {
  if (from == to) {
    throw std::invalid_argument("self-edge rejected: " + name(from));
  }
  if (from.index >= names_.size() || to.index >= names_.size()) {
    throw std::out_of_range("edge endpoint not interned");
  }
  if (!(state.current >= 0.0 && state.current <= 1.0) ||
      !(state.previous >= 0.0 && state.previous <= 1.0)) {
    throw std::invalid_argument("experience value outside [0,1]");
  }
  edges_[edge_key(from, to)] = state;
}

const ExperienceState* TrustGraph::find_edge(UserId from, UserId to) const {
  auto it = edges_.find(edge_key(from, to));
  return it == edges_.end() ? nullptr : &it->second;
}

double TrustGraph::experience(UserId from, UserId to) const {
  const ExperienceState* e = find_edge(from, to);
  return e ? e->current : 0.0;
}

std::vector<TrustGraph::Edge> TrustGraph::edges_sorted() const {
  std::vector<std::uint64_t> keys;
  keys.reserve(edges_.size());
  for (const auto& [k, _] : edges_) {
    keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<Edge> out;
  out.reserve(keys.size());
  for (std::uint64_t k : keys) {
    out.push_back(Edge{UserId{static_cast<std::uint32_t>(k >> 32)},
                       UserId{static_cast<std::uint32_t>(k & 0xffffffffu)},
                       edges_.at(k)});
  }
  return out;
}

SplitMatrices split(const TrustGraph& graph) {
  SplitMatrices out;
  out.n = graph.user_count();
  out.c_pos.assign(out.n, 0.0);
  out.c_neg.assign(out.n, 0.0);
  for (const auto& e : graph.edges_sorted()) {
    const double value = e.state.current;
    if (value >= graph.theta()) {
      out.pe.push_back(SparseEntry{e.from.index, e.to.index, value});
      out.c_pos[e.from.index] += value;
    } else if (value > 0.0) {
      const double complement = 1.0 - value;
      out.ne.push_back(SparseEntry{e.from.index, e.to.index, complement});
      out.c_neg[e.from.index] += complement;
    }
    // value == 0 is indistinguishable from "no prior transaction": dropped.
  }
  return out;
}

SparseMatrix SparseMatrix::from_entries(std::uint32_t n, std::vector<SparseEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  m.col.reserve(entries.size());
  m.val.reserve(entries.size());
  for (const auto& e : entries) {
    m.row_ptr[e.row + 1]++;
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    m.row_ptr[i + 1] += m.row_ptr[i];
  }
  for (const auto& e : entries) {
    m.col.push_back(e.col);
    m.val.push_back(e.value);
  }
  return m;
}

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  if (x.size() != n) {
    throw std::invalid_argument("matvec dimension mismatch");
  }
  y.assign(n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::uint32_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      acc += val[k] * x[col[k]];
    }
    y[i] = acc;
  }
}

TransitionMatrices build_transition_matrices(const SplitMatrices& split) {
  std::vector<SparseEntry> pos;
  pos.reserve(split.pe.size());
  for (const auto& e : split.pe) {
    // e.row has at least this out-edge, so c_pos[e.row] > 0.
    pos.push_back(SparseEntry{e.col, e.row, e.value / split.c_pos[e.row]});
  }
  std::vector<SparseEntry> neg;
  neg.reserve(split.ne.size());
  for (const auto& e : split.ne) {
    neg.push_back(SparseEntry{e.col, e.row, e.value / split.c_neg[e.row]});
  }
  return TransitionMatrices{SparseMatrix::from_entries(split.n, std::move(pos)),
                            SparseMatrix::from_entries(split.n, std::move(neg))};
}

void save_graph_snapshot(const TrustGraph& graph, std::ostream& out) {
  // Name-lexicographic order: the byte output does not depend on the order
  // identities happened to be interned, so snapshots round-trip exactly.
  std::vector<TrustGraph::Edge> edges = graph.edges_sorted();
  std::sort(edges.begin(), edges.end(),
            [&graph](const TrustGraph::Edge& a, const TrustGraph::Edge& b) {
              const std::string& af = graph.name(a.from);
              const std::string& bf = graph.name(b.from);
              if (af != bf) {
                return af < bf;
              }
              return graph.name(a.to) < graph.name(b.to);
            });
  for (const auto& e : edges) {
    out << "{\"from\":\"" << json_escape(graph.name(e.from)) << "\",\"to\":\""
        << json_escape(graph.name(e.to)) << "\",\"exp\":" << format_double(e.state.current)
        << ",\"prev\":" << format_double(e.state.previous)
        << ",\"block\":" << e.state.last_update_block << "}\n";
  }
}

std::string graph_snapshot_string(const TrustGraph& graph) {
  std::ostringstream out;
  save_graph_snapshot(graph, out);
  return out.str();
}

TrustGraph load_graph_snapshot(std::istream& in, double theta) {
  TrustGraph graph(theta);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) {
      throw ParseError(line_no, "record is not a JSON object");
    }
    for (const char* field : {"from", "to", "exp", "prev", "block"}) {
      if (!record.contains(field)) {
        throw ParseError(line_no, std::string("missing field '") + field + "'");
      }
    }
    if (!record["from"].is_string() || !record["to"].is_string()) {
      throw ParseError(line_no, "'from'/'to' must be strings");
    }
    if (!record["exp"].is_number() || !record["prev"].is_number()) {
      throw ParseError(line_no, "'exp'/'prev' must be numbers");
    }
    if (!record["block"].is_number_unsigned()) {
      throw ParseError(line_no, "'block' must be a non-negative integer");
    }
    const UserId from = graph.intern(record["from"].get<std::string>());
    const UserId to = graph.intern(record["to"].get<std::string>());
    ExperienceState state{record["exp"].get<double>(), record["prev"].get<double>(),
                          record["block"].get<std::uint64_t>()};
    try {
      graph.upsert_edge(from, to, state);
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return graph;
}

}  // namespace der
