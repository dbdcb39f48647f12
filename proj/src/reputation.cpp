// SPDX-License-Identifier: Apache-2.0
#include "der/reputation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "der/format.hpp"

namespace der {

void ReputationParams::validate() const {
  if (!(damping > 0.0 && damping < 1.0)) {
    throw std::invalid_argument("reputation params: damping must lie in (0,1)");
  }
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw std::invalid_argument("reputation params: tol must be > 0");
  }
  if (max_iters < 1) {
    throw std::invalid_argument("reputation params: max_iters must be >= 1");
  }
  if (!(w1 >= 0.0 && w2 >= 0.0) || std::fabs(w1 + w2 - 1.0) > 1e-12) {
    throw std::invalid_argument("reputation params: weights must be >= 0 and sum to 1");
  }
}

namespace {

double l2_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

ReputationVector solve(const SparseMatrix& a_pos, const SparseMatrix& a_neg,
                       const ReputationParams& params, const ReputationVector* init) {
  params.validate();
  if (a_pos.n != a_neg.n) {
    throw std::invalid_argument("solve: matrices have different dimensions");
  }
  const std::uint32_t n = a_pos.n;
  if (n == 0) {
    throw std::invalid_argument("solve: empty system");
  }

  std::vector<double> pos(n, 1.0 / n);
  std::vector<double> neg(n, 1.0 / n);
  if (init != nullptr) {
    if (init->rep_pos.size() != n || init->rep_neg.size() != n) {
      throw std::invalid_argument("solve: init dimension mismatch");
    }
    pos = init->rep_pos;
    neg = init->rep_neg;
  }

  const double d = params.damping;
  const double teleport = (1.0 - d) / n;

  ReputationVector out;
  out.residual_trace.reserve(64);
  std::vector<double> next_pos(n), next_neg(n);
  double err = 0.0;
  while (out.iterations < params.max_iters) {
    a_pos.multiply(pos, next_pos);
    a_neg.multiply(neg, next_neg);
    for (std::uint32_t i = 0; i < n; ++i) {
      next_pos[i] = d * next_pos[i] + teleport;
      next_neg[i] = d * next_neg[i] + teleport;
    }
    err = l2_diff(next_pos, pos) + l2_diff(next_neg, neg);
    pos.swap(next_pos);
    neg.swap(next_neg);
    ++out.iterations;
    out.residual_trace.push_back(err);
    if (err < params.tol) {
      out.converged = true;
      break;
    }
  }

  out.final_residual = err;
  out.rep_pos = std::move(pos);
  out.rep_neg = std::move(neg);
  out.rep.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    out.rep[i] = std::max(0.0, out.rep_pos[i] - out.rep_neg[i]);
  }
  return out;
}

double residual(const SparseMatrix& a_pos, const SparseMatrix& a_neg,
                const ReputationVector& vec, const ReputationParams& params) {
  params.validate();
  if (a_pos.n != a_neg.n || vec.rep_pos.size() != a_pos.n ||
      vec.rep_neg.size() != a_neg.n) {
    throw std::invalid_argument("residual: dimension mismatch");
  }
  const std::uint32_t n = a_pos.n;
  const double d = params.damping;
  const double teleport = n == 0 ? 0.0 : (1.0 - d) / n;
  std::vector<double> image(n);

  a_pos.multiply(vec.rep_pos, image);
  for (std::uint32_t i = 0; i < n; ++i) {
    image[i] = d * image[i] + teleport;
  }
  const double pos_err = l2_diff(vec.rep_pos, image);

  a_neg.multiply(vec.rep_neg, image);
  for (std::uint32_t i = 0; i < n; ++i) {
    image[i] = d * image[i] + teleport;
  }
  const double neg_err = l2_diff(vec.rep_neg, image);

  return pos_err + neg_err;
}

std::vector<RankedUser> rank(const ReputationVector& vec) {
  std::vector<RankedUser> out;
  out.reserve(vec.rep.size());
  for (std::uint32_t i = 0; i < vec.rep.size(); ++i) {
    out.push_back(RankedUser{UserId{i}, vec.rep[i]});
  }
  std::sort(out.begin(), out.end(), [](const RankedUser& a, const RankedUser& b) {
    if (a.rep != b.rep) {
      return a.rep > b.rep;
    }
    return a.user.index < b.user.index;
  });
  return out;
}

void write_reputation_csv(std::ostream& out, const TrustGraph& graph,
                          const ReputationVector& vec) {
  out << "user_id,rep_pos,rep_neg,rep\n";
  for (const auto& r : rank(vec)) {
    out << graph.name(r.user) << ',' << format_sig12(vec.rep_pos[r.user.index]) << ','
        << format_sig12(vec.rep_neg[r.user.index]) << ',' << format_sig12(r.rep) << '\n';
  }
}

void write_residual_trace_jsonl(std::ostream& out, const ReputationVector& vec) {
  for (std::size_t i = 0; i < vec.residual_trace.size(); ++i) {
    out << "{\"iteration\":" << (i + 1)
        << ",\"residual\":" << format_double(vec.residual_trace[i]) << "}\n";
  }
}

}  // namespace der
