// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "der/experience.hpp"
#include "der/ids.hpp"

namespace der {

// Directed experience graph over interned user identities. An absent edge
// means "no prior transaction" (experience 0); self-edges are rejected.
// Mutation is single-writer; reads against a settled graph are free to run
// concurrently.
class TrustGraph {
 public:
  // theta is the positive/negative split threshold, in (0,1).
  explicit TrustGraph(double theta = 0.5);

  UserId intern(std::string_view name);  // insert-or-get
  std::optional<UserId> find_user(std::string_view name) const;
  const std::string& name(UserId id) const;
  std::uint32_t user_count() const { return static_cast<std::uint32_t>(names_.size()); }
  std::size_t edge_count() const { return edges_.size(); }
  double theta() const { return theta_; }

  // Replaces or creates the edge. Throws on self-edge or on experience
  // values outside [0,1].
  void upsert_edge(UserId from, UserId to, const ExperienceState& state);
  const ExperienceState* find_edge(UserId from, UserId to) const;
  // Edge value, 0 when no edge exists.
  double experience(UserId from, UserId to) const;

  struct Edge {
    UserId from;
    UserId to;
    ExperienceState state;
  };
  // Deterministic listing ordered by (from, to).
  std::vector<Edge> edges_sorted() const;

 private:
  double theta_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::unordered_map<std::uint64_t, ExperienceState> edges_;
};

struct SparseEntry {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double value = 0.0;
};

// Positive / negative split of the experience matrix. ne stores the
// complement 1 - E(i,j) for edges with 0 < E(i,j) < theta, so the solver can
// consume both sides uniformly. Edges with value exactly 0 land in neither.
struct SplitMatrices {
  std::uint32_t n = 0;
  std::vector<SparseEntry> pe;  // sorted by (row, col)
  std::vector<SparseEntry> ne;
  std::vector<double> c_pos;    // per-row out-sums of pe
  std::vector<double> c_neg;    // per-row out-sums of ne
};

SplitMatrices split(const TrustGraph& graph);

// Row-major CSR with a fixed accumulation order in multiply(), so repeated
// runs are bit-identical.
struct SparseMatrix {
  std::uint32_t n = 0;
  std::vector<std::uint32_t> row_ptr;  // size n + 1
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  static SparseMatrix from_entries(std::uint32_t n, std::vector<SparseEntry> entries);
  // y = A * x
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
};

struct TransitionMatrices {
  SparseMatrix a_pos;
  SparseMatrix a_neg;
};

// a_pos(i,j) = pe(j,i) / c_pos(j) wherever pe(j,i) > 0, likewise for a_neg:
// the transposed, out-sum-normalised form. Users without positive out-edges
// contribute all-zero columns; no teleportation column is added for them.
TransitionMatrices build_transition_matrices(const SplitMatrices& split);

// Snapshot format: one JSONL record per edge, ordered by (from, to):
//   {"from":"A","to":"B","exp":0.52,"prev":0.5,"block":7}
void save_graph_snapshot(const TrustGraph& graph, std::ostream& out);
std::string graph_snapshot_string(const TrustGraph& graph);
// Throws ParseError with the offending 1-based line number.
TrustGraph load_graph_snapshot(std::istream& in, double theta = 0.5);

}  // namespace der
