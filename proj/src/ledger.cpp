// SPDX-License-Identifier: Apache-2.0
#include "der/ledger.hpp"

#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "der/errors.hpp"
#include "der/format.hpp"

namespace der {

namespace {

std::uint64_t edge_key(UserId from, UserId to) {
  return (static_cast<std::uint64_t>(from.index) << 32) | to.index;
}

void validate_event(const FeedbackEvent& event, std::uint64_t last_block) {
  if (event.block < last_block) {
    throw std::invalid_argument("event block " + std::to_string(event.block) +
                                " is older than ledger tail " + std::to_string(last_block));
  }
  if (event.from == event.to) {
    throw std::invalid_argument("self-edge rejected: " + event.from);
  }
  if (!(event.score > 0.0 && event.score <= 1.0)) {
    throw std::invalid_argument("score must lie in (0,1]");
  }
}

std::string event_line(const FeedbackEvent& e) {
  std::string out = "{\"block\":";
  out += std::to_string(e.block);
  out += ",\"from\":\"";
  out += json_escape(e.from);
  out += "\",\"to\":\"";
  out += json_escape(e.to);
  out += "\",\"score\":";
  out += format_double(e.score);
  out += ",\"tx_id\":\"";
  out += json_escape(e.tx_id);
  out += "\"}";
  return out;
}

FeedbackEvent parse_event_line(const std::string& line, std::size_t line_no) {
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object()) {
    throw ParseError(line_no, "record is not a JSON object");
  }
  // Optional field reserved for format evolution; only version 1 exists.
  if (record.contains("schema_version") &&
      (!record["schema_version"].is_number_integer() ||
       record["schema_version"].get<int>() != 1)) {
    throw ParseError(line_no, "schema-version mismatch (expected 1)");
  }
  for (const char* field : {"block", "from", "to", "score", "tx_id"}) {
    if (!record.contains(field)) {
      throw ParseError(line_no, std::string("missing field '") + field + "'");
    }
  }
  if (!record["block"].is_number_unsigned()) {
    throw ParseError(line_no, "'block' must be a non-negative integer");
  }
  if (!record["from"].is_string() || !record["to"].is_string() ||
      !record["tx_id"].is_string()) {
    throw ParseError(line_no, "'from'/'to'/'tx_id' must be strings");
  }
  if (!record["score"].is_number()) {
    throw ParseError(line_no, "'score' must be a number");
  }
  FeedbackEvent event;
  event.block = record["block"].get<std::uint64_t>();
  event.from = record["from"].get<std::string>();
  event.to = record["to"].get<std::string>();
  event.score = record["score"].get<double>();
  event.tx_id = record["tx_id"].get<std::string>();
  return event;
}

}  // namespace

Ledger::Ledger(std::uint64_t decay_epoch) : decay_epoch_(decay_epoch) {
  if (decay_epoch_ == 0) {
    throw std::invalid_argument("decay_epoch must be >= 1");
  }
}

void Ledger::append(FeedbackEvent event) {
  validate_event(event, last_block());
  events_.push_back(std::move(event));
}

std::uint64_t Ledger::last_block() const {
  return events_.empty() ? 0 : events_.back().block;
}

void save_ledger(const Ledger& ledger, std::ostream& out) {
  for (const auto& e : ledger.events()) {
    out << event_line(e) << '\n';
  }
}

std::string ledger_to_string(const Ledger& ledger) {
  std::ostringstream out;
  save_ledger(ledger, out);
  return out.str();
}

Ledger parse_ledger(std::istream& in, std::uint64_t decay_epoch) {
  Ledger ledger(decay_epoch);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    FeedbackEvent event = parse_event_line(line, line_no);
    try {
      ledger.append(std::move(event));
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return ledger;
}

Ledger load_ledger(const std::string& path, std::uint64_t decay_epoch) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw std::runtime_error("cannot open ledger file: " + path);
  }
  return parse_ledger(in, decay_epoch);
}

LedgerWriter::LedgerWriter(const std::string& path, std::uint64_t decay_epoch,
                           bool fsync_on_append)
    : fsync_on_append_(fsync_on_append), shadow_(decay_epoch) {
  file_ = std::fopen(path.c_str(), "wb");
  if (file_ == nullptr) {
    throw std::runtime_error("cannot open ledger file for writing: " + path + ": " +
                             std::strerror(errno));
  }
}

LedgerWriter::~LedgerWriter() {
  if (file_ != nullptr) {
    std::fclose(file_);
  }
}

void LedgerWriter::append(const FeedbackEvent& event) {
  shadow_.append(event);  // throws on monotonicity/self-edge/score violations
  const std::string line = event_line(event) + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size()) {
    throw std::runtime_error("short write to ledger file");
  }
  if (std::fflush(file_) != 0) {
    throw std::runtime_error("flush failed on ledger file");
  }
  if (fsync_on_append_ && ::fsync(::fileno(file_)) != 0) {
    throw std::runtime_error("fsync failed on ledger file");
  }
  ++count_;
}

ReplayEngine::ReplayEngine(const ExperienceParams& params, double theta,
                           std::uint64_t decay_epoch)
    : params_(params), decay_epoch_(decay_epoch), graph_(theta) {
  params_.validate();
  if (decay_epoch_ == 0) {
    throw std::invalid_argument("decay_epoch must be >= 1");
  }
}

void ReplayEngine::advance_edge(UserId from, UserId to, std::uint64_t block) {
  auto it = clocks_.find(edge_key(from, to));
  if (it == clocks_.end()) {
    return;
  }
  EdgeClock& clock = it->second;
  if (block < clock.anchor) {
    return;
  }
  const std::uint64_t due = (block - clock.anchor) / decay_epoch_;
  if (due <= clock.decays) {
    return;
  }
  ExperienceState state = *graph_.find_edge(from, to);
  state = apply_decay_epochs(state, due - clock.decays, params_);
  state.last_update_block = clock.anchor + due * decay_epoch_;
  clock.decays = due;
  graph_.upsert_edge(from, to, state);
}

void ReplayEngine::apply(const FeedbackEvent& event) {
  validate_event(event, 0);
  const UserId from = graph_.intern(event.from);
  const UserId to = graph_.intern(event.to);

  ExperienceState state;
  if (graph_.find_edge(from, to) != nullptr) {
    advance_edge(from, to, event.block);
    state = *graph_.find_edge(from, to);
  } else {
    state = bootstrap_state(params_, event.block);
  }
  state = update_experience(state, FeedbackScore{event.score}, params_);
  state.last_update_block = event.block;
  graph_.upsert_edge(from, to, state);
  clocks_[edge_key(from, to)] = EdgeClock{event.block, 0};
}

void ReplayEngine::advance_all(std::uint64_t block) {
  for (const auto& e : graph_.edges_sorted()) {
    advance_edge(e.from, e.to, block);
  }
}

TrustGraph replay(const Ledger& ledger, const ExperienceParams& params, double theta,
                  std::optional<std::uint64_t> final_block) {
  const std::uint64_t horizon = final_block.value_or(ledger.last_block());
  if (horizon < ledger.last_block()) {
    throw std::invalid_argument("final_block precedes the ledger's last event");
  }
  ReplayEngine engine(params, theta, ledger.decay_epoch());
  for (const auto& event : ledger.events()) {
    engine.apply(event);
  }
  engine.advance_all(horizon);
  return std::move(engine.graph());
}

}  // namespace der
