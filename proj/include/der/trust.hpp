// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "der/graph.hpp"
#include "der/ids.hpp"
#include "der/reputation.hpp"

namespace der {

enum class TrustBasis { ExperienceAndReputation, ReputationOnly };

const char* to_string(TrustBasis basis);

struct TrustScore {
  double value = 0.0;
  TrustBasis basis = TrustBasis::ReputationOnly;
};

struct TrustWeights {
  double w1 = 0.5;  // reputation weight
  double w2 = 0.5;  // experience weight

  void validate() const;  // w1, w2 >= 0 and w1 + w2 = 1 within 1e-12
};

struct TrustQuery {
  UserId trustor;
  UserId trustee;
  TrustWeights weights;
};

// Pairwise trust queries over an immutable graph + reputation snapshot.
//
// Raw solver output is O(1/N)-scaled, so reputation entries are min-max
// normalised over the population before composing them with experience
// values, putting both on the same [0,1] scale. Users the solver never saw
// enter the normalisation at the 1/N bootstrap default. When every user has
// the same raw value the normalisation degenerates; the raw value clamped to
// [0,1] is used instead.
//
// Read-only once constructed; safe to query concurrently.
class TrustEngine {
 public:
  // Throws if the reputation vector is larger than the graph population.
  TrustEngine(const TrustGraph& graph, const ReputationVector& reputation);

  // Composition: w1 * rep(trustee) + w2 * exp(trustor, trustee) when a prior
  // transaction exists; plain rep(trustee) otherwise (the weights are
  // overridden to (1,0) for that case). Throws on unknown users.
  TrustScore trust(UserId trustor, UserId trustee, TrustWeights weights) const;
  TrustScore trust(const TrustQuery& query) const {
    return trust(query.trustor, query.trustee, query.weights);
  }

  // Descending by trust value; ties broken by ascending interning index.
  std::vector<std::pair<UserId, TrustScore>> rank_counterparts(
      UserId trustor, std::span<const UserId> candidates, TrustWeights weights) const;

  double normalized_rep(UserId user) const;

 private:
  const TrustGraph* graph_;
  std::vector<double> norm_rep_;
};

// CSV: trustor,trustee,trust,basis at 12 significant digits.
void write_trust_csv(std::ostream& out, const TrustGraph& graph, UserId trustor,
                     std::span<const std::pair<UserId, TrustScore>> ranking);

}  // namespace der
