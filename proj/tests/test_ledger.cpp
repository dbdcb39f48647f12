// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "der/errors.hpp"
#include "der/format.hpp"
#include "der/ledger.hpp"
#include "der/rng.hpp"

using namespace der;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.is_open(), "missing file: " << path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Ledger golden_ledger() {
  Ledger ledger(100);
  ledger.append(FeedbackEvent{5, "alice", "bob", 0.8, "t1"});
  ledger.append(FeedbackEvent{120, "bob", "alice", 0.4, "t2"});
  ledger.append(FeedbackEvent{205, "alice", "bob", 0.9, "t3"});
  return ledger;
}

Ledger random_ledger(Rng& rng, std::size_t n_events) {
  Ledger ledger(10);
  std::uint64_t block = 0;
  for (std::size_t i = 0; i < n_events; ++i) {
    block += rng.below(8);
    std::uint32_t from = static_cast<std::uint32_t>(rng.below(6));
    std::uint32_t to = static_cast<std::uint32_t>(rng.below(6));
    if (from == to) {
      to = (to + 1) % 6;
    }
    ledger.append(FeedbackEvent{block, "u" + std::to_string(from),
                                "u" + std::to_string(to), rng.uniform_open01(),
                                "t" + std::to_string(i)});
  }
  return ledger;
}

}  // namespace

TEST_CASE("append contract") {
  Ledger ledger(100);
  ledger.append(FeedbackEvent{1, "A", "B", 0.5, "t0"});
  CHECK(ledger.events().size() == 1);
  ledger.append(FeedbackEvent{1, "B", "A", 0.5, "t1"});  // equal block is fine
  ledger.append(FeedbackEvent{5, "A", "B", 0.5, "t2"});
  CHECK_THROWS_AS(ledger.append(FeedbackEvent{3, "A", "B", 0.5, "t3"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ledger.append(FeedbackEvent{6, "A", "A", 0.5, "t4"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ledger.append(FeedbackEvent{6, "A", "B", 0.0, "t5"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ledger.append(FeedbackEvent{6, "A", "B", 1.1, "t6"}),
                  std::invalid_argument);
  CHECK(ledger.last_block() == 5);
}

TEST_CASE("canonical serialisation round-trips byte-identically") {
  const Ledger ledger = golden_ledger();
  const std::string first = ledger_to_string(ledger);
  std::istringstream in(first);
  const Ledger reloaded = parse_ledger(in, 100);
  CHECK(ledger_to_string(reloaded) == first);
  CHECK(reloaded.events().size() == 3);
  CHECK(reloaded.events()[1].score == 0.4);
  CHECK(reloaded.events()[1].tx_id == "t2");
}

TEST_CASE("empty input gives an empty ledger") {
  std::istringstream in("");
  const Ledger ledger = parse_ledger(in);
  CHECK(ledger.events().empty());
  CHECK(ledger.last_block() == 0);
}

TEST_CASE("parse errors cite the line") {
  SUBCASE("missing score") {
    std::istringstream in(
        "{\"block\":1,\"from\":\"A\",\"to\":\"B\",\"score\":0.5,\"tx_id\":\"t0\"}\n"
        "{\"block\":2,\"from\":\"A\",\"to\":\"B\",\"tx_id\":\"t1\"}\n");
    try {
      parse_ledger(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("score") != std::string::npos);
    }
  }
  SUBCASE("invalid JSON") {
    std::istringstream in("not json\n");
    CHECK_THROWS_AS(parse_ledger(in), ParseError);
  }
  SUBCASE("out-of-order blocks") {
    std::istringstream in(
        "{\"block\":5,\"from\":\"A\",\"to\":\"B\",\"score\":0.5,\"tx_id\":\"t0\"}\n"
        "{\"block\":3,\"from\":\"A\",\"to\":\"B\",\"score\":0.5,\"tx_id\":\"t1\"}\n");
    try {
      parse_ledger(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("unknown extra fields are tolerated") {
    std::istringstream in(
        "{\"block\":1,\"from\":\"A\",\"to\":\"B\",\"score\":0.5,\"tx_id\":\"t0\","
        "\"note\":\"later schema\"}\n");
    const Ledger ledger = parse_ledger(in);
    CHECK(ledger.events().size() == 1);
  }
  SUBCASE("schema-version mismatch") {
    std::istringstream in(
        "{\"schema_version\":2,\"block\":1,\"from\":\"A\",\"to\":\"B\","
        "\"score\":0.5,\"tx_id\":\"t0\"}\n");
    try {
      parse_ledger(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(std::string(e.what()).find("schema-version") != std::string::npos);
    }
  }
}

TEST_CASE("replay: single event updates from bootstrap") {
  Ledger ledger(100);
  ledger.append(FeedbackEvent{1, "A", "B", 0.8, "t0"});
  const TrustGraph g = replay(ledger, ExperienceParams{});
  REQUIRE(g.edge_count() == 1);
  const auto a = g.find_user("A");
  const auto b = g.find_user("B");
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  // straight-line oracle: 0.5 + 0.8*0.05*(1 - 0.5/1)
  const double expected = 0.5 + 0.8 * 0.05 * (1.0 - 0.5 / 1.0);
  CHECK(g.experience(*a, *b) == expected);
  CHECK(g.find_edge(*a, *b)->previous == 0.5);
  CHECK(g.find_edge(*a, *b)->last_update_block == 1);
}

TEST_CASE("replay: consecutive blocks do not decay") {
  Ledger ledger(100);
  ledger.append(FeedbackEvent{1, "A", "B", 0.9, "t0"});
  ledger.append(FeedbackEvent{2, "A", "B", 0.9, "t1"});
  const TrustGraph g = replay(ledger, ExperienceParams{});
  double cur = 0.5;
  double next = cur + 0.9 * 0.05 * (1.0 - cur / 1.0);
  double prev = cur;
  cur = next;
  next = cur + 0.9 * 0.05 * (1.0 - cur / 1.0);
  prev = cur;
  const auto a = g.find_user("A");
  const auto b = g.find_user("B");
  CHECK(g.experience(*a, *b) == next);
  CHECK(g.find_edge(*a, *b)->previous == prev);
}

TEST_CASE("replay: idle tail decays up to the final block") {
  Ledger ledger(100);
  ledger.append(FeedbackEvent{0, "A", "B", 0.8, "t0"});
  const TrustGraph g = replay(ledger, ExperienceParams{}, 0.5, 200);

  // one update then two decay steps
  double cur = 0.5 + 0.8 * 0.05 * (1.0 - 0.5 / 1.0);
  double prev = 0.5;
  for (int i = 0; i < 2; ++i) {
    const double amount = 0.005 * (1.0 + 0.005 - prev / 1.0);
    const double next = std::max(0.0, cur - amount);
    prev = cur;
    cur = next;
  }
  const auto a = g.find_user("A");
  const auto b = g.find_user("B");
  CHECK(g.experience(*a, *b) == cur);
  CHECK(g.find_edge(*a, *b)->previous == prev);
  CHECK(g.find_edge(*a, *b)->last_update_block == 200);

  SUBCASE("final block cannot precede the last event") {
    Ledger late(100);
    late.append(FeedbackEvent{50, "A", "B", 0.8, "t0"});
    CHECK_THROWS_AS(replay(late, ExperienceParams{}, 0.5, 10), std::invalid_argument);
  }
}

TEST_CASE("replay: neutral feedback decays once, on top of epoch decay") {
  Ledger ledger(100);
  ledger.append(FeedbackEvent{0, "A", "B", 0.9, "t0"});
  ledger.append(FeedbackEvent{150, "A", "B", 0.6, "t1"});  // neutral band
  const TrustGraph g = replay(ledger, ExperienceParams{});

  double cur = 0.5 + 0.9 * 0.05 * (1.0 - 0.5 / 1.0);
  double prev = 0.5;
  // one elapsed decay epoch (block 100), then the neutral event's own decay
  for (int i = 0; i < 2; ++i) {
    const double amount = 0.005 * (1.0 + 0.005 - prev / 1.0);
    const double next = std::max(0.0, cur - amount);
    prev = cur;
    cur = next;
  }
  const auto a = g.find_user("A");
  const auto b = g.find_user("B");
  CHECK(g.experience(*a, *b) == cur);
}

TEST_CASE("golden ledger replays to the frozen snapshot") {
  const std::string data_dir = DER_TEST_DATA;
  const std::string ledger_bytes = read_file(data_dir + "/golden_ledger.jsonl");
  std::istringstream in(ledger_bytes);
  const Ledger ledger = parse_ledger(in, 100);

  // the fixture itself is canonical
  CHECK(ledger_to_string(ledger) == ledger_bytes);

  const TrustGraph g = replay(ledger, ExperienceParams{});
  const std::string snapshot = graph_snapshot_string(g);
  CHECK(snapshot == read_file(data_dir + "/golden_snapshot.jsonl"));

  // straight-line oracle for the same sequence
  double ab = 0.5 + 0.8 * 0.05 * (1.0 - 0.5 / 1.0);
  double ab_prev = 0.5;
  for (int i = 0; i < 2; ++i) {  // blocks 105..205 hold two decay epochs
    const double amount = 0.005 * (1.0 + 0.005 - ab_prev / 1.0);
    const double next = std::max(0.0, ab - amount);
    ab_prev = ab;
    ab = next;
  }
  {
    const double next = ab + 0.9 * 0.05 * (1.0 - ab / 1.0);
    ab_prev = ab;
    ab = next;
  }
  const double ba = 0.5 - 1.6 * (1.0 - 0.4) * 0.05 * (1.0 - 0.5 / 1.0);

  const auto alice = g.find_user("alice");
  const auto bob = g.find_user("bob");
  CHECK(g.experience(*alice, *bob) == ab);
  CHECK(g.find_edge(*alice, *bob)->previous == ab_prev);
  CHECK(g.experience(*bob, *alice) == ba);
  CHECK(g.find_edge(*bob, *alice)->last_update_block == 120);
}

TEST_CASE("replay determinism: identical bytes on repeated runs") {
  const Ledger ledger = golden_ledger();
  const TrustGraph g1 = replay(ledger, ExperienceParams{});
  const TrustGraph g2 = replay(ledger, ExperienceParams{});
  CHECK(graph_snapshot_string(g1) == graph_snapshot_string(g2));
}

TEST_CASE("property: prefix consistency") {
  Rng rng(0x5eed0031);
  for (int trial = 0; trial < 100; ++trial) {
    const Ledger ledger = random_ledger(rng, 40);
    const std::size_t k = 1 + rng.below(38);

    const TrustGraph full = replay(ledger, ExperienceParams{});

    // replay the prefix (including its end-of-log decay), then feed the rest
    ReplayEngine engine(ExperienceParams{}, 0.5, ledger.decay_epoch());
    for (std::size_t i = 0; i < k; ++i) {
      engine.apply(ledger.events()[i]);
    }
    engine.advance_all(ledger.events()[k - 1].block);
    for (std::size_t i = k; i < ledger.events().size(); ++i) {
      engine.apply(ledger.events()[i]);
    }
    engine.advance_all(ledger.last_block());

    REQUIRE(graph_snapshot_string(engine.graph()) == graph_snapshot_string(full));
  }
}

TEST_CASE("property: idle stretch equals batched decay epochs") {
  Rng rng(0x5eed0032);
  const ExperienceParams params;
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t decay_epoch = 1 + rng.below(20);
    const std::uint64_t n = 1 + rng.below(5);
    const double score = rng.uniform(0.701, 1.0);

    Ledger ledger(decay_epoch);
    ledger.append(FeedbackEvent{7, "A", "B", score, "t0"});
    const TrustGraph g =
        replay(ledger, params, 0.5, 7 + n * decay_epoch);

    ExperienceState expected = bootstrap_state(params, 7);
    expected = update_experience(expected, FeedbackScore{score}, params);
    expected = apply_decay_epochs(expected, n, params);

    const auto a = g.find_user("A");
    const auto b = g.find_user("B");
    REQUIRE(g.experience(*a, *b) == expected.current);
    REQUIRE(g.find_edge(*a, *b)->previous == expected.previous);
  }
}

TEST_CASE("ledger writer persists canonical lines") {
  const std::string path = "tmp_ledger_writer.jsonl";
  {
    LedgerWriter writer(path, 100, /*fsync_on_append=*/true);
    writer.append(FeedbackEvent{5, "alice", "bob", 0.8, "t1"});
    writer.append(FeedbackEvent{120, "bob", "alice", 0.4, "t2"});
    CHECK(writer.events_written() == 2);
    CHECK_THROWS_AS(writer.append(FeedbackEvent{3, "alice", "bob", 0.8, "t3"}),
                    std::invalid_argument);
  }
  const Ledger loaded = load_ledger(path, 100);
  CHECK(loaded.events().size() == 2);
  Ledger expected(100);
  expected.append(FeedbackEvent{5, "alice", "bob", 0.8, "t1"});
  expected.append(FeedbackEvent{120, "bob", "alice", 0.4, "t2"});
  CHECK(read_file(path) == ledger_to_string(expected));
  std::remove(path.c_str());
}
