// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "der/graph.hpp"
#include "der/ids.hpp"

namespace der {

struct ReputationParams {
  double damping = 0.85;       // d in (0,1)
  double tol = 1e-5;           // combined Euclidean-norm stopping threshold
  std::uint32_t max_iters = 1000;
  double w1 = 0.5;             // trust aggregation weights, w1 + w2 = 1
  double w2 = 0.5;

  void validate() const;
};

struct ReputationVector {
  std::vector<double> rep_pos;
  std::vector<double> rep_neg;
  std::vector<double> rep;     // max(0, rep_pos - rep_neg), entry-wise
  std::uint32_t iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_trace;  // stopping error after each iteration

  std::uint32_t size() const { return static_cast<std::uint32_t>(rep.size()); }
};

// Lockstep fixed-point iteration of
//   x <- d * A * x + (1-d)/N
// for the positive and negative vectors simultaneously, stopping when
// ||dx_pos||_2 + ||dx_neg||_2 < tol. Starts from the uniform 1/N vector
// unless init supplies both vectors. Single-threaded with a fixed
// accumulation order: identical inputs give bit-identical outputs.
// Non-convergence within max_iters returns the best-so-far result with
// converged = false. Throws on dimension mismatch or N = 0.
ReputationVector solve(const SparseMatrix& a_pos, const SparseMatrix& a_neg,
                       const ReputationParams& params,
                       const ReputationVector* init = nullptr);

// Distance of a candidate vector pair from the fixed point, same combined
// norm as the stopping rule. A converged solve output stays within a small
// multiple of tol.
double residual(const SparseMatrix& a_pos, const SparseMatrix& a_neg,
                const ReputationVector& vec, const ReputationParams& params);

struct RankedUser {
  UserId user;
  double rep = 0.0;
};

// Descending by rep; ties broken by ascending interning index.
std::vector<RankedUser> rank(const ReputationVector& vec);

// CSV export, rank order: user_id,rep_pos,rep_neg,rep at 12 significant digits.
void write_reputation_csv(std::ostream& out, const TrustGraph& graph,
                          const ReputationVector& vec);

// Telemetry for convergence plots: {"iteration":1,"residual":...} per line.
void write_residual_trace_jsonl(std::ostream& out, const ReputationVector& vec);

}  // namespace der
