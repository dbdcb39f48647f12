// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "der/graph.hpp"
#include "der/reputation.hpp"
#include "der/trust.hpp"

using namespace der;

namespace {

// Reputation vector whose rep entries pass through normalisation unchanged
// (population spans [0,1]).
ReputationVector identity_rep(std::vector<double> rep) {
  ReputationVector v;
  v.rep_pos = rep;
  v.rep_neg.assign(rep.size(), 0.0);
  v.rep = std::move(rep);
  return v;
}

}  // namespace

TEST_CASE("weights validation") {
  CHECK_NOTHROW((TrustWeights{0.5, 0.5}).validate());
  CHECK_NOTHROW((TrustWeights{1.0, 0.0}).validate());
  CHECK_THROWS_AS((TrustWeights{0.6, 0.6}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((TrustWeights{-0.5, 1.5}).validate(), std::invalid_argument);
}

TEST_CASE("composition over an existing edge") {
  TrustGraph g;
  const UserId a = g.intern("A");
  const UserId b = g.intern("B");
  const UserId anchor_lo = g.intern("lo");
  const UserId anchor_hi = g.intern("hi");
  g.upsert_edge(a, b, ExperienceState{0.8, 0.8, 0});

  // anchors pin the min-max normalisation to the identity map
  const ReputationVector rep = identity_rep({0.2, 0.4, 0.0, 1.0});
  const TrustEngine engine(g, rep);
  CHECK(engine.normalized_rep(anchor_lo) == 0.0);
  CHECK(engine.normalized_rep(anchor_hi) == 1.0);
  CHECK(engine.normalized_rep(b) == 0.4);

  const TrustScore score = engine.trust(a, b, TrustWeights{0.5, 0.5});
  CHECK(score.basis == TrustBasis::ExperienceAndReputation);
  CHECK(score.value == doctest::Approx(0.6).epsilon(1e-12));

  const TrustScore via_query = engine.trust(TrustQuery{a, b, TrustWeights{0.5, 0.5}});
  CHECK(via_query.value == score.value);
}

TEST_CASE("no prior transaction falls back to reputation") {
  TrustGraph g;
  const UserId a = g.intern("A");
  const UserId b = g.intern("B");
  g.intern("lo");
  g.intern("hi");

  const ReputationVector rep = identity_rep({0.2, 0.37, 0.0, 1.0});
  const TrustEngine engine(g, rep);
  const TrustScore score = engine.trust(a, b, TrustWeights{0.5, 0.5});
  CHECK(score.basis == TrustBasis::ReputationOnly);
  CHECK(score.value == 0.37);

  const ReputationVector zero = identity_rep({0.2, 0.0, 0.0, 1.0});
  const TrustEngine engine2(g, zero);
  CHECK(engine2.trust(a, b, TrustWeights{0.5, 0.5}).value == 0.0);
}

TEST_CASE("weight degeneracy") {
  TrustGraph g;
  const UserId a = g.intern("A");
  const UserId b = g.intern("B");
  g.intern("lo");
  g.intern("hi");
  g.upsert_edge(a, b, ExperienceState{0.8, 0.8, 0});

  const ReputationVector rep = identity_rep({0.2, 0.4, 0.0, 1.0});

  SUBCASE("w = (1,0): experience perturbation is irrelevant") {
    const TrustEngine engine(g, rep);
    const double before = engine.trust(a, b, TrustWeights{1.0, 0.0}).value;
    TrustGraph perturbed = g;
    perturbed.upsert_edge(a, b, ExperienceState{0.1, 0.1, 0});
    const TrustEngine engine2(perturbed, rep);
    CHECK(engine2.trust(a, b, TrustWeights{1.0, 0.0}).value == before);
    CHECK(before == 0.4);
  }
  SUBCASE("w = (0,1): reputation perturbation is irrelevant") {
    const TrustEngine engine(g, rep);
    const double before = engine.trust(a, b, TrustWeights{0.0, 1.0}).value;
    const ReputationVector other = identity_rep({0.9, 0.05, 0.0, 1.0});
    const TrustEngine engine2(g, other);
    CHECK(engine2.trust(a, b, TrustWeights{0.0, 1.0}).value == before);
    CHECK(before == 0.8);
  }
}

TEST_CASE("trust range and degenerate normalisation") {
  TrustGraph g;
  const UserId a = g.intern("A");
  const UserId b = g.intern("B");
  g.upsert_edge(a, b, ExperienceState{1.0, 1.0, 0});

  // all-equal reputation: raw values clamped instead of min-max
  ReputationVector flat = identity_rep({0.0375, 0.0375});
  const TrustEngine engine(g, flat);
  CHECK(engine.normalized_rep(b) == 0.0375);
  const double value = engine.trust(a, b, TrustWeights{0.5, 0.5}).value;
  CHECK(value == doctest::Approx(0.51875).epsilon(1e-12));
  CHECK(value >= 0.0);
  CHECK(value <= 1.0);
}

TEST_CASE("unseen users enter at the bootstrap default") {
  TrustGraph g;
  const UserId a = g.intern("A");
  const UserId b = g.intern("B");
  g.intern("C");
  g.intern("D");  // four users, but the solver only saw two

  ReputationVector rep = identity_rep({0.5, 0.1});
  const TrustEngine engine(g, rep);
  // bootstrap 1/N = 0.25 for C and D, then min-max over {0.5, 0.1, 0.25, 0.25}
  CHECK(engine.normalized_rep(UserId{2}) ==
        doctest::Approx((0.25 - 0.1) / 0.4).epsilon(1e-12));
  const TrustScore score = engine.trust(a, UserId{3}, TrustWeights{0.5, 0.5});
  CHECK(score.basis == TrustBasis::ReputationOnly);
  CHECK(score.value == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(b.index == 1);
}

TEST_CASE("unknown users are rejected") {
  TrustGraph g;
  const UserId a = g.intern("A");
  g.intern("B");
  const ReputationVector rep = identity_rep({0.1, 0.2});
  const TrustEngine engine(g, rep);
  CHECK_THROWS_AS(engine.trust(a, UserId{9}, TrustWeights{0.5, 0.5}),
                  std::out_of_range);
  CHECK_THROWS_AS(engine.trust(UserId{9}, a, TrustWeights{0.5, 0.5}),
                  std::out_of_range);

  ReputationVector too_big = identity_rep({0.1, 0.2, 0.3});
  CHECK_THROWS_AS(TrustEngine(g, too_big), std::invalid_argument);
}

TEST_CASE("rank_counterparts orders by trust with interning tie-break") {
  TrustGraph g;
  const UserId a = g.intern("A");
  const UserId b = g.intern("B");
  const UserId c = g.intern("C");
  const UserId d = g.intern("D");
  g.intern("lo");
  g.intern("hi");
  g.upsert_edge(a, b, ExperienceState{0.8, 0.8, 0});

  // trust(A,B) = 0.5*0.4 + 0.5*0.8 = 0.6; trust(A,C) = 0.37; trust(A,D) = 0
  const ReputationVector rep = identity_rep({0.2, 0.4, 0.37, 0.0, 0.0, 1.0});
  const TrustEngine engine(g, rep);
  const std::vector<UserId> candidates{b, c, d};
  const auto ranking = engine.rank_counterparts(a, candidates, TrustWeights{0.5, 0.5});
  REQUIRE(ranking.size() == 3);
  CHECK(ranking[0].first == b);
  CHECK(ranking[0].second.value == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(ranking[1].first == c);
  CHECK(ranking[2].first == d);
  CHECK(ranking[2].second.value == 0.0);

  SUBCASE("singleton") {
    const std::vector<UserId> one{c};
    const auto single = engine.rank_counterparts(a, one, TrustWeights{0.5, 0.5});
    REQUIRE(single.size() == 1);
    CHECK(single[0].first == c);
  }
  SUBCASE("all-equal values fall back to interning order") {
    const ReputationVector flat = identity_rep({0.3, 0.3, 0.3, 0.3, 0.3, 0.3});
    const TrustEngine engine2(g, flat);
    const std::vector<UserId> cands{d, c};  // request order must not matter
    const auto tied = engine2.rank_counterparts(a, cands, TrustWeights{1.0, 0.0});
    CHECK(tied[0].first == c);
    CHECK(tied[1].first == d);
  }
  SUBCASE("unknown candidate rejected") {
    const std::vector<UserId> bad{UserId{42}};
    CHECK_THROWS_AS(engine.rank_counterparts(a, bad, TrustWeights{0.5, 0.5}),
                    std::out_of_range);
  }
}

TEST_CASE("ranking invariance under common reputation scaling") {
  TrustGraph g;
  const UserId a = g.intern("A");
  g.intern("B");
  g.intern("C");
  g.intern("D");

  ReputationVector rep = identity_rep({0.0, 0.31, 0.07, 0.55});
  ReputationVector scaled = identity_rep({0.0, 3.1, 0.7, 5.5});
  const TrustEngine base(g, rep);
  const TrustEngine big(g, scaled);
  const std::vector<UserId> candidates{UserId{1}, UserId{2}, UserId{3}};
  const auto r1 = base.rank_counterparts(a, candidates, TrustWeights{1.0, 0.0});
  const auto r2 = big.rank_counterparts(a, candidates, TrustWeights{1.0, 0.0});
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].first == r2[i].first);
  }
}

TEST_CASE("trust csv format") {
  TrustGraph g;
  const UserId a = g.intern("A");
  const UserId b = g.intern("B");
  g.upsert_edge(a, b, ExperienceState{0.8, 0.8, 0});
  const ReputationVector rep = identity_rep({0.0, 1.0});
  const TrustEngine engine(g, rep);
  const std::vector<UserId> candidates{b};
  const auto ranking = engine.rank_counterparts(a, candidates, TrustWeights{0.5, 0.5});
  std::ostringstream out;
  write_trust_csv(out, g, a, ranking);
  CHECK(out.str() ==
        "trustor,trustee,trust,basis\n"
        "A,B,0.9,experience_and_reputation\n");
}
