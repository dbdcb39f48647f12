// SPDX-License-Identifier: Apache-2.0
#include "der/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "der/format.hpp"
#include "der/rng.hpp"
#include "der/trust.hpp"

namespace der {

const char* to_string(BehaviorClass c) {
  switch (c) {
    case BehaviorClass::Honest: return "honest";
    case BehaviorClass::LowQuality: return "low_quality";
    case BehaviorClass::Sybil: return "sybil";
    case BehaviorClass::BadMouther: return "bad_mouther";
    case BehaviorClass::Whitewasher: return "whitewasher";
  }
  return "unknown";
}

const char* to_string(AttackKind k) {
  switch (k) {
    case AttackKind::None: return "none";
    case AttackKind::Sybil: return "sybil";
    case AttackKind::Endorse: return "endorse";
    case AttackKind::BadMouthFresh: return "badmouth_fresh";
    case AttackKind::BadMouthEstablished: return "badmouth_established";
    case AttackKind::Whitewash: return "whitewash";
  }
  return "unknown";
}

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "none") return AttackKind::None;
  if (s == "sybil") return AttackKind::Sybil;
  if (s == "endorse") return AttackKind::Endorse;
  if (s == "badmouth_fresh") return AttackKind::BadMouthFresh;
  if (s == "badmouth_established") return AttackKind::BadMouthEstablished;
  if (s == "whitewash") return AttackKind::Whitewash;
  throw std::invalid_argument("unknown attack kind: " + s);
}

void Scenario::validate() const {
  experience.validate();
  reputation.validate();
  if (n_users < 2) {
    throw std::invalid_argument("scenario: need at least 2 users");
  }
  if (decay_epoch == 0) {
    throw std::invalid_argument("scenario: decay_epoch must be >= 1");
  }
  if (n_blocks == 0 || n_blocks % decay_epoch != 0) {
    throw std::invalid_argument("scenario: n_blocks must be a positive multiple of decay_epoch");
  }
  if (!(tx_rate >= 0.0) || !std::isfinite(tx_rate)) {
    throw std::invalid_argument("scenario: tx_rate must be >= 0");
  }
  if (!(honest_fraction >= 0.0 && honest_fraction <= 1.0)) {
    throw std::invalid_argument("scenario: honest_fraction must lie in [0,1]");
  }
  if (!(client_fraction > 0.0 && client_fraction <= 1.0)) {
    throw std::invalid_argument("scenario: client_fraction must lie in (0,1]");
  }
  if (client_fraction < 1.0) {
    const auto n_clients =
        static_cast<std::uint32_t>(std::llround(client_fraction * n_users));
    if (n_clients == 0 || n_users - n_clients < 2) {
      throw std::invalid_argument(
          "scenario: split roles need at least 1 client and 2 providers");
    }
  }
  if (!(honest_scores.sd > 0.0) || !(low_quality_scores.sd > 0.0)) {
    throw std::invalid_argument("scenario: score distribution sd must be > 0");
  }
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("scenario: theta must lie in (0,1)");
  }
  if (attack.kind != AttackKind::None) {
    if (attack.attackers == 0) {
      throw std::invalid_argument("scenario: attack needs at least one attacker");
    }
    if (attack.onset_block <= decay_epoch || attack.onset_block > n_blocks) {
      throw std::invalid_argument(
          "scenario: attack onset must fall after the first reputation epoch "
          "and within the horizon");
    }
    if (attack.kind != AttackKind::Whitewash) {
      if (!(attack.score > 0.0 && attack.score <= 1.0)) {
        throw std::invalid_argument("scenario: attack score must lie in (0,1]");
      }
      if (attack.feedbacks_per_attacker == 0) {
        throw std::invalid_argument("scenario: feedbacks_per_attacker must be >= 1");
      }
      if (attack.onset_block + attack.feedbacks_per_attacker - 1 > n_blocks) {
        throw std::invalid_argument("scenario: attack schedule runs past the horizon");
      }
    }
  }
}

namespace {

struct AttackState {
  bool selected = false;
  std::uint32_t target = 0;
  std::uint32_t endorser = 0;                  // endorse arm
  std::vector<std::uint32_t> raters;           // established bad-mouthers
  std::vector<std::uint32_t> fresh;            // injected identities
  std::size_t before_snapshot = 0;
  bool abandoned = false;                      // whitewash
  std::uint32_t reborn = 0;                    // whitewash
  std::uint64_t rebirth_epoch = 0;             // whitewash
};

std::uint32_t rank_of(const std::vector<RankedUser>& ranking, std::uint32_t user) {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (ranking[i].user.index == user) {
      return static_cast<std::uint32_t>(i + 1);
    }
  }
  return 0;
}

// Median-reputation member of the pool: a target with room to move either way.
std::uint32_t median_rep_user(const std::vector<RankedUser>& ranking,
                              const std::vector<std::uint32_t>& pool) {
  std::vector<std::uint32_t> members;
  for (const auto& r : ranking) {
    if (std::find(pool.begin(), pool.end(), r.user.index) != pool.end()) {
      members.push_back(r.user.index);
    }
  }
  return members[members.size() / 2];
}

std::uint32_t top_rep_user(const std::vector<RankedUser>& ranking,
                           const std::vector<std::uint32_t>& pool) {
  for (const auto& r : ranking) {
    if (std::find(pool.begin(), pool.end(), r.user.index) != pool.end()) {
      return r.user.index;
    }
  }
  return pool.front();
}

std::uint32_t top_rep_pos_user(const ReputationVector& rep,
                               const std::vector<std::uint32_t>& pool,
                               std::uint32_t excluded) {
  std::uint32_t best = pool.front() == excluded && pool.size() > 1 ? pool[1]
                                                                   : pool.front();
  double best_value = -1.0;
  for (std::uint32_t i : pool) {
    if (i == excluded || i >= rep.rep_pos.size()) {
      continue;
    }
    if (rep.rep_pos[i] > best_value) {
      best_value = rep.rep_pos[i];
      best = i;
    }
  }
  return best;
}

}  // namespace

SimulationResult run(const Scenario& scenario) {
  scenario.validate();

  Rng rng(scenario.seed);
  Ledger ledger(scenario.decay_epoch);
  ReplayEngine engine(scenario.experience, scenario.theta, scenario.decay_epoch);
  TrustGraph& graph = engine.graph();

  MetricsReport report;
  report.tracked_edges = scenario.tracked_edges;

  const std::uint32_t n_base = scenario.n_users;
  const bool split_roles = scenario.client_fraction < 1.0;
  const std::uint32_t n_clients =
      split_roles ? static_cast<std::uint32_t>(
                        std::llround(scenario.client_fraction * n_base))
                  : n_base;
  const std::uint32_t provider_base = split_roles ? n_clients : 0;
  const std::uint32_t n_providers = n_base - provider_base;
  const auto n_honest = static_cast<std::uint32_t>(
      std::llround(scenario.honest_fraction * n_providers));

  std::vector<BehaviorClass> classes;
  classes.reserve(n_base);
  for (std::uint32_t i = 0; i < n_base; ++i) {
    graph.intern("u" + std::to_string(i));
    if (i < provider_base) {
      classes.push_back(BehaviorClass::Honest);  // pure clients
    } else {
      classes.push_back(i - provider_base < n_honest ? BehaviorClass::Honest
                                                     : BehaviorClass::LowQuality);
    }
  }

  // Attack identities never join the pools, they only rate.
  std::vector<std::uint32_t> clients(n_clients);
  std::vector<std::uint32_t> providers(n_providers);
  for (std::uint32_t i = 0; i < n_clients; ++i) {
    clients[i] = i;
  }
  for (std::uint32_t i = 0; i < n_providers; ++i) {
    providers[i] = provider_base + i;
  }

  const AttackSpec& attack = scenario.attack;
  AttackState astate;
  AttackOutcome outcome;
  const TrustWeights weights{scenario.reputation.w1, scenario.reputation.w2};

  ReputationVector current_rep;  // empty until the first epoch boundary
  TrustEngine view(graph, current_rep);

  std::uint64_t tx_counter = 0;
  auto emit = [&](std::uint64_t block, std::uint32_t from, std::uint32_t to,
                  double score) {
    FeedbackEvent event{block, graph.name(UserId{from}), graph.name(UserId{to}), score,
                        "t" + std::to_string(tx_counter++)};
    ledger.append(event);
    engine.apply(event);
  };

  // Clients prefer trustworthy counterparts: sampling weight is the pairwise
  // trust value against the latest reputation snapshot.
  auto pick_provider = [&](std::uint32_t client) -> std::uint32_t {
    double total = 0.0;
    std::vector<double> cumulative;
    cumulative.reserve(providers.size());
    for (std::uint32_t p : providers) {
      double w = 0.0;
      if (p != client) {
        w = view.trust(UserId{client}, UserId{p}, weights).value + 1e-12;
      }
      total += w;
      cumulative.push_back(total);
    }
    const double r = rng.uniform01() * total;
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      if (r < cumulative[i]) {
        return providers[i];
      }
    }
    return providers.back();
  };

  auto provider_score = [&](std::uint32_t provider) {
    // A reborn whitewasher serves honestly: re-entry is judged at its best.
    const bool honest = classes[provider] == BehaviorClass::Honest ||
                        classes[provider] == BehaviorClass::Whitewasher;
    const ScoreDistribution& dist =
        honest ? scenario.honest_scores : scenario.low_quality_scores;
    return rng.truncated_normal(dist.mean, dist.sd, 0.0, 1.0);
  };

  // Selection at the last epoch boundary before onset; deterministic and
  // RNG-free so attack arms share their baseline traffic stream.
  auto select_attack_parties = [&]() {
    astate.selected = true;
    astate.before_snapshot = report.epochs.size() - 1;
    const auto ranking = rank(current_rep);
    if (!attack.target.empty()) {
      auto id = graph.find_user(attack.target);
      if (!id.has_value()) {
        throw std::invalid_argument("attack target is not a known user: " + attack.target);
      }
      astate.target = id->index;
    } else {
      switch (attack.kind) {
        case AttackKind::Sybil:
        case AttackKind::Endorse:
          astate.target = median_rep_user(ranking, providers);
          break;
        case AttackKind::BadMouthFresh:
        case AttackKind::BadMouthEstablished:
          astate.target = top_rep_user(ranking, providers);
          break;
        case AttackKind::Whitewash: {
          if (n_honest >= n_providers) {
            throw std::invalid_argument(
                "whitewash scenario needs a low-quality user as target");
          }
          astate.target = provider_base + n_honest;  // first low-quality provider
          break;
        }
        case AttackKind::None:
          break;
      }
    }
    outcome.target = graph.name(UserId{astate.target});
    outcome.onset_epoch = report.epochs[astate.before_snapshot].epoch;
    outcome.target_rep_pos_before = current_rep.rep_pos[astate.target];
    outcome.target_rep_before = current_rep.rep[astate.target];
    outcome.target_rank_before = rank_of(ranking, astate.target);

    if (attack.kind == AttackKind::Endorse) {
      astate.endorser = top_rep_pos_user(current_rep, providers, astate.target);
      outcome.endorser = graph.name(UserId{astate.endorser});
      outcome.endorser_rep_pos_at_onset = current_rep.rep_pos[astate.endorser];
      outcome.attackers_used = 1;
    } else if (attack.kind == AttackKind::BadMouthEstablished) {
      // Heaviest raters of the target: sorted by edge weight, deterministic
      // tie-break on the interning index.
      std::vector<std::pair<double, std::uint32_t>> raters;
      for (const auto& e : graph.edges_sorted()) {
        if (e.to.index == astate.target && e.from.index < n_base) {
          raters.emplace_back(e.state.current, e.from.index);
        }
      }
      std::sort(raters.begin(), raters.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      for (const auto& [w, idx] : raters) {
        if (astate.raters.size() == attack.attackers) break;
        astate.raters.push_back(idx);
      }
      if (astate.raters.empty()) {
        throw std::invalid_argument("badmouth_established: target has no raters yet");
      }
      outcome.attackers_used = static_cast<std::uint32_t>(astate.raters.size());
    } else if (attack.kind == AttackKind::Sybil || attack.kind == AttackKind::BadMouthFresh) {
      const BehaviorClass tag = attack.kind == AttackKind::Sybil
                                    ? BehaviorClass::Sybil
                                    : BehaviorClass::BadMouther;
      for (std::uint32_t i = 0; i < attack.attackers; ++i) {
        const UserId id = graph.intern("a" + std::to_string(i));
        astate.fresh.push_back(id.index);
        classes.push_back(tag);
      }
      outcome.attackers_used = attack.attackers;
    }
  };

  auto inject_attack_events = [&](std::uint64_t block) {
    if (attack.kind == AttackKind::None || attack.kind == AttackKind::Whitewash ||
        !astate.selected) {
      return;
    }
    if (block < attack.onset_block ||
        block >= attack.onset_block + attack.feedbacks_per_attacker) {
      return;
    }
    switch (attack.kind) {
      case AttackKind::Sybil:
      case AttackKind::BadMouthFresh:
        for (std::uint32_t fresh : astate.fresh) {
          emit(block, fresh, astate.target, attack.score);
        }
        break;
      case AttackKind::Endorse:
        // Same per-block mass as the sybil arm, all from one identity.
        for (std::uint32_t i = 0; i < attack.attackers; ++i) {
          emit(block, astate.endorser, astate.target, attack.score);
        }
        break;
      case AttackKind::BadMouthEstablished:
        for (std::uint32_t rater : astate.raters) {
          emit(block, rater, astate.target, attack.score);
        }
        break;
      default:
        break;
    }
  };

  auto whitewash_step = [&](std::uint64_t epoch) {
    if (attack.kind != AttackKind::Whitewash || !astate.selected) {
      return;
    }
    const double bootstrap = 1.0 / graph.user_count();
    if (!astate.abandoned) {
      if (epoch * scenario.decay_epoch < attack.onset_block) {
        return;
      }
      if (current_rep.rep[astate.target] < bootstrap) {
        astate.abandoned = true;
        astate.rebirth_epoch = epoch;
        outcome.abandoned_rep = current_rep.rep[astate.target];
        outcome.attackers_used = 1;
        std::erase(clients, astate.target);
        std::erase(providers, astate.target);
        const UserId reborn = graph.intern("w0");
        astate.reborn = reborn.index;
        classes.push_back(BehaviorClass::Whitewasher);
        clients.push_back(reborn.index);
        providers.push_back(reborn.index);
        outcome.reborn_identity = graph.name(reborn);
      }
    } else if (!outcome.whitewash_recovery_epochs.has_value() &&
               astate.reborn < current_rep.rep.size() &&
               current_rep.rep[astate.reborn] > outcome.abandoned_rep) {
      outcome.whitewash_recovery_epochs = epoch - astate.rebirth_epoch;
    }
  };

  const std::uint64_t selection_block =
      attack.kind == AttackKind::None
          ? 0
          : ((attack.onset_block - 1) / scenario.decay_epoch) * scenario.decay_epoch;

  for (std::uint64_t block = 1; block <= scenario.n_blocks; ++block) {
    const std::uint64_t n_tx = rng.poisson(scenario.tx_rate);
    for (std::uint64_t j = 0; j < n_tx; ++j) {
      const std::uint32_t client = clients[rng.below(clients.size())];
      const std::uint32_t provider = pick_provider(client);
      emit(block, client, provider, provider_score(provider));
    }
    inject_attack_events(block);

    if (block % scenario.decay_epoch == 0) {
      engine.advance_all(block);
      const SplitMatrices matrices = split(graph);
      const TransitionMatrices transitions = build_transition_matrices(matrices);
      current_rep = solve(transitions.a_pos, transitions.a_neg, scenario.reputation);

      EpochSnapshot snap;
      snap.epoch = block / scenario.decay_epoch;
      snap.block = block;
      snap.solver_iterations = current_rep.iterations;
      snap.solver_residual = current_rep.final_residual;
      snap.rep_pos = current_rep.rep_pos;
      snap.rep_neg = current_rep.rep_neg;
      snap.rep = current_rep.rep;
      const auto ranking = rank(current_rep);
      snap.rank_position.assign(current_rep.size(), 0);
      for (std::size_t i = 0; i < ranking.size(); ++i) {
        snap.rank_position[ranking[i].user.index] = static_cast<std::uint32_t>(i + 1);
      }
      for (const auto& [from, to] : report.tracked_edges) {
        const auto f = graph.find_user(from);
        const auto t = graph.find_user(to);
        snap.tracked_exp.push_back(
            f.has_value() && t.has_value() ? graph.experience(*f, *t) : 0.0);
      }
      report.epochs.push_back(std::move(snap));

      if (attack.kind != AttackKind::None && !astate.selected &&
          block == selection_block) {
        select_attack_parties();
      }
      whitewash_step(block / scenario.decay_epoch);

      view = TrustEngine(graph, current_rep);
    }
  }

  if (attack.kind != AttackKind::None && astate.selected) {
    const EpochSnapshot& last = report.epochs.back();
    outcome.target_rep_pos_after = last.rep_pos[astate.target];
    outcome.target_rep_after = last.rep[astate.target];
    outcome.target_rank_after = last.rank_position[astate.target];
    report.attack = outcome;
  }

  report.users.reserve(graph.user_count());
  for (std::uint32_t i = 0; i < graph.user_count(); ++i) {
    report.users.push_back(graph.name(UserId{i}));
  }
  report.classes = std::move(classes);

  return SimulationResult{std::move(ledger), std::move(report)};
}

std::vector<double> exp_curve(const ExperienceParams& params,
                              const std::vector<double>& schedule) {
  if (schedule.empty()) {
    throw std::invalid_argument("exp_curve: schedule must be non-empty");
  }
  std::vector<double> trace;
  trace.reserve(schedule.size() + 1);
  ExperienceState state = bootstrap_state(params);
  trace.push_back(state.current);
  for (double score : schedule) {
    state = update_experience(state, FeedbackScore{score}, params);
    trace.push_back(state.current);
  }
  return trace;
}

std::vector<ConvergenceRow> convergence_bench(const std::vector<std::uint32_t>& sizes,
                                              const BenchSpec& spec,
                                              const ReputationParams& params) {
  params.validate();
  std::vector<ConvergenceRow> rows;
  rows.reserve(sizes.size());
  for (std::uint32_t n : sizes) {
    if (n == 0) {
      throw std::invalid_argument("bench: sizes must be positive");
    }
    Rng rng(spec.seed + n);
    SplitMatrices matrices;
    matrices.n = n;
    matrices.c_pos.assign(n, 0.0);
    matrices.c_neg.assign(n, 0.0);
    std::vector<std::uint32_t> targets;
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint64_t degree =
          std::min<std::uint64_t>(rng.poisson(spec.expected_out_degree), n - 1);
      targets.clear();
      while (targets.size() < degree) {
        const auto t = static_cast<std::uint32_t>(rng.below(n));
        if (t == i || std::find(targets.begin(), targets.end(), t) != targets.end()) {
          continue;
        }
        targets.push_back(t);
      }
      std::sort(targets.begin(), targets.end());
      for (std::uint32_t t : targets) {
        const double w = rng.uniform_open01();
        if (w >= spec.theta) {
          matrices.pe.push_back(SparseEntry{i, t, w});
          matrices.c_pos[i] += w;
        } else {
          matrices.ne.push_back(SparseEntry{i, t, 1.0 - w});
          matrices.c_neg[i] += 1.0 - w;
        }
      }
    }
    const TransitionMatrices transitions = build_transition_matrices(matrices);
    const ReputationVector result = solve(transitions.a_pos, transitions.a_neg, params);
    rows.push_back(ConvergenceRow{n, result.iterations, result.converged,
                                  result.residual_trace});
  }
  return rows;
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
  out << "epoch,user,rep_pos,rep_neg,rep,rank\n";
  for (const auto& snap : report.epochs) {
    for (std::size_t i = 0; i < snap.rep.size(); ++i) {
      out << snap.epoch << ',' << report.users[i] << ',' << format_sig12(snap.rep_pos[i])
          << ',' << format_sig12(snap.rep_neg[i]) << ',' << format_sig12(snap.rep[i])
          << ',' << snap.rank_position[i] << '\n';
    }
  }
}

void write_exp_trace_csv(std::ostream& out, const std::vector<double>& trace) {
  out << "step,exp\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',' << format_sig12(trace[i]) << '\n';
  }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "N,iteration,residual\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.residuals.size(); ++i) {
      out << row.n << ',' << (i + 1) << ',' << format_sig12(row.residuals[i]) << '\n';
    }
  }
}

void write_tracked_exp_csv(std::ostream& out, const MetricsReport& report) {
  out << "epoch,from,to,exp\n";
  for (const auto& snap : report.epochs) {
    for (std::size_t i = 0; i < snap.tracked_exp.size(); ++i) {
      out << snap.epoch << ',' << report.tracked_edges[i].first << ','
          << report.tracked_edges[i].second << ',' << format_sig12(snap.tracked_exp[i])
          << '\n';
    }
  }
}

void write_attack_json(std::ostream& out, const AttackOutcome& outcome) {
  out << "{\n"
      << "  \"target\": \"" << json_escape(outcome.target) << "\",\n"
      << "  \"endorser\": \"" << json_escape(outcome.endorser) << "\",\n"
      << "  \"attackers_used\": " << outcome.attackers_used << ",\n"
      << "  \"onset_epoch\": " << outcome.onset_epoch << ",\n"
      << "  \"target_rep_pos_before\": " << format_double(outcome.target_rep_pos_before)
      << ",\n"
      << "  \"target_rep_pos_after\": " << format_double(outcome.target_rep_pos_after)
      << ",\n"
      << "  \"target_rep_before\": " << format_double(outcome.target_rep_before) << ",\n"
      << "  \"target_rep_after\": " << format_double(outcome.target_rep_after) << ",\n"
      << "  \"target_rank_before\": " << outcome.target_rank_before << ",\n"
      << "  \"target_rank_after\": " << outcome.target_rank_after << ",\n"
      << "  \"endorser_rep_pos_at_onset\": "
      << format_double(outcome.endorser_rep_pos_at_onset) << ",\n"
      << "  \"abandoned_rep\": " << format_double(outcome.abandoned_rep) << ",\n"
      << "  \"reborn_identity\": \"" << json_escape(outcome.reborn_identity) << "\",\n"
      << "  \"whitewash_recovery_epochs\": "
      << (outcome.whitewash_recovery_epochs.has_value()
              ? std::to_string(*outcome.whitewash_recovery_epochs)
              : std::string("null"))
      << "\n}\n";
}

}  // namespace der
