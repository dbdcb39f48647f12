// SPDX-License-Identifier: Apache-2.0
#include "der/experience.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace der {

void ExperienceParams::validate() const {
  const bool finite = std::isfinite(exp0) && std::isfinite(min_exp) &&
                      std::isfinite(max_exp) && std::isfinite(theta_co) &&
                      std::isfinite(theta_unco) && std::isfinite(alpha) &&
                      std::isfinite(beta) && std::isfinite(delta) &&
                      std::isfinite(gamma);
  if (!finite) {
    throw std::invalid_argument("experience params: non-finite value");
  }
  if (!(0.0 <= min_exp && min_exp < exp0 && exp0 < max_exp)) {
    throw std::invalid_argument("experience params: need 0 <= min_exp < exp0 < max_exp");
  }
  if (!(0.0 < theta_unco && theta_unco < theta_co && theta_co < 1.0)) {
    throw std::invalid_argument("experience params: need 0 < theta_unco < theta_co < 1");
  }
  if (!(0.0 < alpha && alpha < max_exp)) {
    throw std::invalid_argument("experience params: need 0 < alpha < max_exp");
  }
  if (!(beta > 1.0)) {
    throw std::invalid_argument("experience params: need beta > 1");
  }
  if (!(delta > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("experience params: need delta > 0 and gamma > 0");
  }
}

ExperienceState bootstrap_state(const ExperienceParams& params, std::uint64_t block) {
  return ExperienceState{params.exp0, params.exp0, block};
}

FeedbackKind classify_feedback(FeedbackScore score, const ExperienceParams& params) {
  if (score.value >= params.theta_co) {
    return FeedbackKind::Cooperative;
  }
  if (score.value > 0.0 && score.value <= params.theta_unco) {
    return FeedbackKind::Uncooperative;
  }
  return FeedbackKind::NeutralOrAbsent;
}

namespace {

double decay_step(double current, double previous, const ExperienceParams& p) {
  const double amount = p.delta * (1.0 + p.gamma - previous / p.max_exp);
  return std::max(p.min_exp, current - amount);
}

}  // namespace

ExperienceState update_experience(ExperienceState state, FeedbackScore score,
                                  const ExperienceParams& params) {
  params.validate();
  if (!(score.value >= 0.0 && score.value <= 1.0)) {
    throw std::invalid_argument("feedback score outside [0,1]");
  }

  const double headroom = 1.0 - state.current / params.max_exp;
  double next = state.current;
  switch (classify_feedback(score, params)) {
    case FeedbackKind::Cooperative:
      next = std::min(params.max_exp,
                      state.current + score.value * params.alpha * headroom);
      break;
    case FeedbackKind::Uncooperative:
      next = std::max(params.min_exp,
                      state.current -
                          params.beta * (1.0 - score.value) * params.alpha * headroom);
      break;
    case FeedbackKind::NeutralOrAbsent:
      next = decay_step(state.current, state.previous, params);
      break;
  }
  return ExperienceState{next, state.current, state.last_update_block};
}

ExperienceState apply_decay_epochs(ExperienceState state, std::uint64_t n_epochs,
                                   const ExperienceParams& params) {
  params.validate();
  for (std::uint64_t i = 0; i < n_epochs; ++i) {
    const double next = decay_step(state.current, state.previous, params);
    state.previous = state.current;
    state.current = next;
  }
  return state;
}

}  // namespace der
