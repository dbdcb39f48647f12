// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace der {

// Tunable constants of the pairwise experience update rules. The default
// preset normalises experience to [0,1].
struct ExperienceParams {
  double exp0 = 0.5;        // value assigned to a fresh relationship
  double min_exp = 0.0;
  double max_exp = 1.0;
  double theta_co = 0.7;    // feedback >= theta_co counts as cooperative
  double theta_unco = 0.5;  // 0 < feedback <= theta_unco counts as uncooperative
  double alpha = 0.05;      // maximum increase per transaction, in (0, max_exp)
  double beta = 1.6;        // decrease rate, > 1: losing is easier than gaining
  double delta = 0.005;     // minimum decay step, > 0
  double gamma = 0.005;     // decay rate, > 0

  // Throws std::invalid_argument if any constraint is violated.
  void validate() const;
};

// Two-step memory: the decay step reads the value one update older than the
// current one, so both are carried along.
struct ExperienceState {
  double current = 0.5;
  double previous = 0.5;
  std::uint64_t last_update_block = 0;
};

// Fresh relationship: current = previous = exp0.
ExperienceState bootstrap_state(const ExperienceParams& params,
                                std::uint64_t block = 0);

struct FeedbackScore {
  double value = 0.0;  // in [0,1]; 0 is reserved for "no transaction"
};

enum class FeedbackKind { Cooperative, Uncooperative, NeutralOrAbsent };

// Total over [0,1]: 0 and the band between the thresholds both fall into
// NeutralOrAbsent.
FeedbackKind classify_feedback(FeedbackScore score, const ExperienceParams& params);

// One update step. Cooperative feedback moves the value toward max_exp by
// score * alpha * (1 - current/max_exp); uncooperative feedback removes beta
// times the mirrored amount; neutral or absent feedback applies one decay
// step delta * (1 + gamma - previous/max_exp). The result is clamped to
// [min_exp, max_exp] and the old current becomes the new previous.
// last_update_block is left untouched; block bookkeeping is the caller's.
ExperienceState update_experience(ExperienceState state, FeedbackScore score,
                                  const ExperienceParams& params);

// n_epochs successive no-transaction updates. n_epochs = 0 is a no-op.
ExperienceState apply_decay_epochs(ExperienceState state, std::uint64_t n_epochs,
                                   const ExperienceParams& params);

}  // namespace der
