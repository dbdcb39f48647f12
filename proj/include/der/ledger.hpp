// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "der/experience.hpp"
#include "der/graph.hpp"

namespace der {

// One feedback record. Absence of transactions is expressed by block gaps,
// never by events, so the score must be strictly positive.
struct FeedbackEvent {
  std::uint64_t block = 0;
  std::string from;
  std::string to;
  double score = 0.0;  // in (0,1]
  std::string tx_id;
};

// Append-only event log with a fixed decay cadence: every decay_epoch blocks
// without an event on an edge costs that edge one decay step.
class Ledger {
 public:
  explicit Ledger(std::uint64_t decay_epoch = 100);

  // Throws on out-of-order block, self-edge, or score outside (0,1].
  void append(FeedbackEvent event);

  const std::vector<FeedbackEvent>& events() const { return events_; }
  std::uint64_t decay_epoch() const { return decay_epoch_; }
  std::uint64_t last_block() const;  // 0 when empty

 private:
  std::vector<FeedbackEvent> events_;
  std::uint64_t decay_epoch_;
};

// Canonical wire format: one event per line,
//   {"block":5,"from":"A","to":"B","score":0.8,"tx_id":"t1"}
// in exactly that field order, scores in shortest round-trip form, no
// trailing whitespace. Unknown extra fields are accepted on load (and not
// preserved); canonical files round-trip byte-identically.
void save_ledger(const Ledger& ledger, std::ostream& out);
std::string ledger_to_string(const Ledger& ledger);
// Throw ParseError carrying the 1-based line number on malformed input.
Ledger parse_ledger(std::istream& in, std::uint64_t decay_epoch = 100);
Ledger load_ledger(const std::string& path, std::uint64_t decay_epoch = 100);

// Durable appender: writes one canonical line per event, optionally fsyncing
// after each append. Single writer per file.
class LedgerWriter {
 public:
  LedgerWriter(const std::string& path, std::uint64_t decay_epoch = 100,
               bool fsync_on_append = false);
  ~LedgerWriter();
  LedgerWriter(const LedgerWriter&) = delete;
  LedgerWriter& operator=(const LedgerWriter&) = delete;

  void append(const FeedbackEvent& event);
  std::uint64_t events_written() const { return count_; }

 private:
  std::FILE* file_ = nullptr;
  bool fsync_on_append_ = false;
  std::uint64_t count_ = 0;
  Ledger shadow_;  // validation state (monotonicity etc.)
};

// Incremental replay of a feedback stream into a trust graph. Each event
// first settles the decay steps its edge is owed (one per full decay_epoch
// since the edge's previous event), then applies the feedback update.
// advance_all() settles every edge up to a block, which is what a snapshot
// at that block height means.
class ReplayEngine {
 public:
  ReplayEngine(const ExperienceParams& params, double theta,
               std::uint64_t decay_epoch);

  void apply(const FeedbackEvent& event);
  void advance_all(std::uint64_t block);

  const TrustGraph& graph() const { return graph_; }
  TrustGraph& graph() { return graph_; }
  const ExperienceParams& params() const { return params_; }
  std::uint64_t decay_epoch() const { return decay_epoch_; }

 private:
  struct EdgeClock {
    std::uint64_t anchor = 0;  // block of the edge's most recent event
    std::uint64_t decays = 0;  // decay steps applied since the anchor
  };

  void advance_edge(UserId from, UserId to, std::uint64_t block);

  ExperienceParams params_;
  std::uint64_t decay_epoch_;
  TrustGraph graph_;
  std::unordered_map<std::uint64_t, EdgeClock> clocks_;
};

// Deterministic one-shot replay: the resulting graph is a pure function of
// the ledger contents and the parameters. final_block extends idle decay past
// the last event; it defaults to the last event's block and must not precede
// it.
TrustGraph replay(const Ledger& ledger, const ExperienceParams& params,
                  double theta = 0.5,
                  std::optional<std::uint64_t> final_block = std::nullopt);

}  // namespace der
