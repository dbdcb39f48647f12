// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "der/experience.hpp"
#include "der/ledger.hpp"
#include "der/reputation.hpp"

namespace der {

enum class BehaviorClass { Honest, LowQuality, Sybil, BadMouther, Whitewasher };

// Sybil: fresh identities rate the target up once each.
// Endorse: one established high-reputation user delivers the same total
//          feedback mass (the control arm of the sybil comparison).
// BadMouthFresh / BadMouthEstablished: fresh vs. long-standing identities
//          rate the victim down on the same schedule.
// Whitewash: the target abandons its identity once its reputation falls
//          below the bootstrap default and re-enters as a fresh user.
enum class AttackKind {
  None,
  Sybil,
  Endorse,
  BadMouthFresh,
  BadMouthEstablished,
  Whitewash,
};

const char* to_string(BehaviorClass c);
const char* to_string(AttackKind k);
AttackKind attack_kind_from_string(const std::string& s);

struct ScoreDistribution {
  double mean = 0.85;
  double sd = 0.1;
};

struct AttackSpec {
  AttackKind kind = AttackKind::None;
  std::string target;  // empty: chosen automatically at the pre-onset epoch
  std::uint32_t attackers = 20;
  std::uint64_t onset_block = 0;
  std::uint32_t feedbacks_per_attacker = 1;
  double score = 1.0;
};

// Seeded ecosystem description. The seed fully determines every random draw;
// attack injections consume no randomness, so variants that differ only in
// the attack spec share the same baseline traffic.
//
// With client_fraction = 1 every user both initiates transactions and serves
// as a counterpart. Below 1 the population splits into pure clients (the
// leading fraction) and pure providers, mirroring marketplaces where raters
// and rated parties are distinct.
struct Scenario {
  std::uint64_t seed = 1;
  std::uint32_t n_users = 50;
  std::uint64_t n_blocks = 500;   // must be a multiple of decay_epoch
  double tx_rate = 2.0;           // expected transactions per block
  double client_fraction = 1.0;
  double honest_fraction = 1.0;   // fraction of providers serving honestly
  ScoreDistribution honest_scores{0.85, 0.1};
  ScoreDistribution low_quality_scores{0.3, 0.1};
  AttackSpec attack;
  std::vector<std::pair<std::string, std::string>> tracked_edges;
  ExperienceParams experience;
  ReputationParams reputation;
  double theta = 0.5;
  std::uint64_t decay_epoch = 100;

  void validate() const;
};

struct EpochSnapshot {
  std::uint64_t epoch = 0;  // boundary index; boundary block = epoch * decay_epoch
  std::uint64_t block = 0;
  std::uint32_t solver_iterations = 0;
  double solver_residual = 0.0;
  std::vector<double> rep_pos;             // per interned user at this epoch
  std::vector<double> rep_neg;
  std::vector<double> rep;
  std::vector<std::uint32_t> rank_position;  // 1-based
  std::vector<double> tracked_exp;           // aligned with MetricsReport::tracked_edges
};

struct AttackOutcome {
  std::string target;
  std::string endorser;  // endorse arm only
  std::uint32_t attackers_used = 0;
  std::uint64_t onset_epoch = 0;  // epoch of the pre-onset snapshot
  double target_rep_pos_before = 0.0;
  double target_rep_pos_after = 0.0;
  double target_rep_before = 0.0;
  double target_rep_after = 0.0;
  std::uint32_t target_rank_before = 0;
  std::uint32_t target_rank_after = 0;
  double endorser_rep_pos_at_onset = 0.0;
  double abandoned_rep = 0.0;            // whitewash
  std::string reborn_identity;           // whitewash
  std::optional<std::uint64_t> whitewash_recovery_epochs;
};

struct MetricsReport {
  std::vector<std::string> users;      // final interning order
  std::vector<BehaviorClass> classes;  // aligned with users
  std::vector<std::pair<std::string, std::string>> tracked_edges;
  std::vector<EpochSnapshot> epochs;
  std::optional<AttackOutcome> attack;
};

struct SimulationResult {
  Ledger ledger;
  MetricsReport metrics;
};

// Every number in the report is recomputable by replaying the emitted ledger
// prefix up to the epoch's boundary block and re-running the solver.
SimulationResult run(const Scenario& scenario);

// Pointwise experience trace over a feedback schedule, starting from the
// bootstrap value (index 0). A score of 0 means "no transaction this step".
std::vector<double> exp_curve(const ExperienceParams& params,
                              const std::vector<double>& schedule);

// Random-graph generator for convergence benchmarks: directed, expected
// out-degree sampled per node (Poisson), distinct uniform targets, edge
// weights uniform in (0,1). Declared here so runs are comparable.
struct BenchSpec {
  double expected_out_degree = 10.0;
  std::uint64_t seed = 1;
  double theta = 0.5;
};

struct ConvergenceRow {
  std::uint32_t n = 0;
  std::uint32_t iterations = 0;
  bool converged = false;
  std::vector<double> residuals;
};

std::vector<ConvergenceRow> convergence_bench(const std::vector<std::uint32_t>& sizes,
                                              const BenchSpec& spec,
                                              const ReputationParams& params);

// CSV writers, all at 12 significant digits.
void write_metrics_csv(std::ostream& out, const MetricsReport& report);    // epoch,user,rep_pos,rep_neg,rep,rank
void write_exp_trace_csv(std::ostream& out, const std::vector<double>& trace);  // step,exp
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);  // N,iteration,residual
void write_tracked_exp_csv(std::ostream& out, const MetricsReport& report);  // epoch,from,to,exp
void write_attack_json(std::ostream& out, const AttackOutcome& outcome);

}  // namespace der
