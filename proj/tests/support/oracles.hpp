// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, kept independent of the code paths they check.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "der/graph.hpp"

namespace oracles {

// Direct dense solution of the fixed point x = d*A*x + (1-d)/N * 1, i.e.
// (I - d*A) x = (1-d)/N * 1, by Gaussian elimination with partial pivoting.
// Independent route from the power iteration it is used to check.
inline std::vector<double> dense_fixed_point(const der::SparseMatrix& a, double d) {
  const std::uint32_t n = a.n;
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::uint32_t i = 0; i < n; ++i) {
    m[i][i] = 1.0;
    m[i][n] = (1.0 - d) / n;
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      m[i][a.col[k]] -= d * a.val[k];
    }
  }
  for (std::uint32_t colidx = 0; colidx < n; ++colidx) {
    std::uint32_t pivot = colidx;
    for (std::uint32_t r = colidx + 1; r < n; ++r) {
      if (std::fabs(m[r][colidx]) > std::fabs(m[pivot][colidx])) {
        pivot = r;
      }
    }
    if (std::fabs(m[pivot][colidx]) < 1e-14) {
      throw std::runtime_error("dense oracle: singular system");
    }
    std::swap(m[colidx], m[pivot]);
    for (std::uint32_t r = 0; r < n; ++r) {
      if (r == colidx) {
        continue;
      }
      const double factor = m[r][colidx] / m[colidx][colidx];
      for (std::uint32_t c = colidx; c <= n; ++c) {
        m[r][c] -= factor * m[colidx][c];
      }
    }
  }
  std::vector<double> x(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    x[i] = m[i][n] / m[i][i];
  }
  return x;
}

}  // namespace oracles
