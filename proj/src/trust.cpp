// SPDX-License-Identifier: Apache-2.0
#include "der/trust.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "der/format.hpp"

namespace der {

const char* to_string(TrustBasis basis) {
  return basis == TrustBasis::ExperienceAndReputation ? "experience_and_reputation"
                                                      : "reputation_only";
}

void TrustWeights::validate() const {
  if (!(w1 >= 0.0 && w2 >= 0.0) || std::fabs(w1 + w2 - 1.0) > 1e-12) {
    throw std::invalid_argument("trust weights must be >= 0 and sum to 1");
  }
}

TrustEngine::TrustEngine(const TrustGraph& graph, const ReputationVector& reputation)
    : graph_(&graph) {
  const std::uint32_t n = graph.user_count();
  if (reputation.size() > n) {
    throw std::invalid_argument("reputation vector larger than graph population");
  }
  norm_rep_.resize(n);
  if (n == 0) {
    return;
  }
  const double bootstrap = 1.0 / n;
  for (std::uint32_t i = 0; i < n; ++i) {
    norm_rep_[i] = i < reputation.size() ? reputation.rep[i] : bootstrap;
  }
  const auto [lo_it, hi_it] = std::minmax_element(norm_rep_.begin(), norm_rep_.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi > lo) {
    for (double& v : norm_rep_) {
      v = (v - lo) / (hi - lo);
    }
  } else {
    for (double& v : norm_rep_) {
      v = std::clamp(v, 0.0, 1.0);
    }
  }
}

double TrustEngine::normalized_rep(UserId user) const {
  if (user.index >= norm_rep_.size()) {
    throw std::out_of_range("unknown user index " + std::to_string(user.index));
  }
  return norm_rep_[user.index];
}

TrustScore TrustEngine::trust(UserId trustor, UserId trustee, TrustWeights weights) const {
  weights.validate();
  if (trustor.index >= norm_rep_.size() || trustee.index >= norm_rep_.size()) {
    throw std::out_of_range("trust query names an unknown user");
  }
  const ExperienceState* edge = graph_->find_edge(trustor, trustee);
  if (edge == nullptr) {
    // No prior transaction: reputation carries the full weight.
    return TrustScore{norm_rep_[trustee.index], TrustBasis::ReputationOnly};
  }
  const double value =
      weights.w1 * norm_rep_[trustee.index] + weights.w2 * edge->current;
  return TrustScore{value, TrustBasis::ExperienceAndReputation};
}

std::vector<std::pair<UserId, TrustScore>> TrustEngine::rank_counterparts(
    UserId trustor, std::span<const UserId> candidates, TrustWeights weights) const {
  std::vector<std::pair<UserId, TrustScore>> out;
  out.reserve(candidates.size());
  for (UserId candidate : candidates) {
    out.emplace_back(candidate, trust(trustor, candidate, weights));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second.value != b.second.value) {
      return a.second.value > b.second.value;
    }
    return a.first.index < b.first.index;
  });
  return out;
}

void write_trust_csv(std::ostream& out, const TrustGraph& graph, UserId trustor,
                     std::span<const std::pair<UserId, TrustScore>> ranking) {
  out << "trustor,trustee,trust,basis\n";
  for (const auto& [trustee, score] : ranking) {
    out << graph.name(trustor) << ',' << graph.name(trustee) << ','
        << format_sig12(score.value) << ',' << to_string(score.basis) << '\n';
  }
}

}  // namespace der
