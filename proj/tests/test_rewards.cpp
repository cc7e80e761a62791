#include <cmath>

#include "doctest.h"
#include "ethsm/revenue.hpp"
#include "ethsm/rewards.hpp"

using namespace ethsm;

namespace {

TransitionRate find_transition(const ChainState& from, const ChainState& to,
                               EventKind kind, const MiningConfig& c) {
  for (const TransitionRate& t : transition_rates(from, c))
    if (t.to == to && t.event_kind == kind) return t;
  REQUIRE(false);
  return {};
}

}  // namespace

TEST_CASE("pool block mined at (0,0) may end up an uncle") {
  MiningConfig c{0.4, 0.5};
  RewardSchedule eth = RewardSchedule::ethereum();
  auto attr = attribute_transition(
      find_transition({0, 0}, {1, 0}, EventKind::PoolBlock, c), c, eth);
  double p_unc = 0.6 * 0.6 * 0.5;  // beta^2 (1 - gamma)
  CHECK(attr.static_pool == doctest::Approx(1.0 - p_unc));
  CHECK(attr.uncle_pool == doctest::Approx(p_unc * 7.0 / 8.0));
  CHECK(attr.nephew_honest == doctest::Approx(p_unc / 32.0));
  CHECK(attr.nephew_pool == 0.0);
  CHECK(attr.uncle_honest == 0.0);
  CHECK(attr.static_honest == 0.0);
  CHECK(attr.uncle_distance == 1);
  CHECK(attr.uncle_probability == doctest::Approx(p_unc));
}

TEST_CASE("honest block mined at (0,0) is always regular") {
  MiningConfig c{0.4, 0.5};
  auto attr = attribute_transition(
      find_transition({0, 0}, {0, 0}, EventKind::HonestBlock, c), c,
      RewardSchedule::ethereum());
  CHECK(attr.static_honest == 1.0);
  CHECK(attr.total() == 1.0);
  CHECK(attr.uncle_probability == 0.0);
}

TEST_CASE("honest block at (1,0) opens the height-1 fork") {
  MiningConfig c{0.4, 0.5};
  auto attr = attribute_transition(
      find_transition({1, 0}, {1, 1}, EventKind::HonestBlock, c), c,
      RewardSchedule::ethereum());
  double p_unc = 0.4 + 0.6 * 0.5;  // alpha + beta gamma
  CHECK(attr.static_honest == doctest::Approx(0.6 * 0.5));
  CHECK(attr.uncle_honest == doctest::Approx(p_unc * 7.0 / 8.0));
  CHECK(attr.nephew_pool == doctest::Approx(0.4 / 32.0));
  CHECK(attr.nephew_honest == doctest::Approx(0.6 * 0.5 / 32.0));
  CHECK(attr.uncle_distance == 1);
}

TEST_CASE("pool blocks mined with a lead are guaranteed regular") {
  MiningConfig c{0.4, 0.5};
  RewardSchedule eth = RewardSchedule::ethereum();
  for (ChainState s : {ChainState{1, 0}, ChainState{2, 0}, ChainState{5, 2}}) {
    auto attr = attribute_transition(
        find_transition(s, {s.l_s + 1, s.l_h}, EventKind::PoolBlock, c), c,
        eth);
    CHECK(attr.static_pool == 1.0);
    CHECK(attr.total() == 1.0);
  }
}

TEST_CASE("tie-breaking block at (1,1) is regular for its miner") {
  MiningConfig c{0.4, 0.5};
  RewardSchedule eth = RewardSchedule::ethereum();
  auto pool = attribute_transition(
      find_transition({1, 1}, {0, 0}, EventKind::PoolBlock, c), c, eth);
  CHECK(pool.static_pool == 1.0);
  auto honest = attribute_transition(
      find_transition({1, 1}, {0, 0}, EventKind::HonestBlock, c), c, eth);
  CHECK(honest.static_honest == 1.0);
}

TEST_CASE("honest block on the published prefix becomes a distance-d uncle") {
  MiningConfig c{0.4, 0.5};
  RewardSchedule eth = RewardSchedule::ethereum();

  auto attr = attribute_transition(
      find_transition({2, 0}, {0, 0}, EventKind::HonestBlockOnPrefix, c), c,
      eth);
  double q_honest = 0.6 * (1.0 + 0.4 * 0.6 * 0.5);
  CHECK(attr.uncle_distance == 2);
  CHECK(attr.uncle_probability == 1.0);
  CHECK(attr.uncle_honest == doctest::Approx(6.0 / 8.0));
  CHECK(attr.nephew_honest == doctest::Approx(q_honest / 32.0));
  CHECK(attr.nephew_pool == doctest::Approx((1.0 - q_honest) / 32.0));
  CHECK(attr.static_pool == 0.0);
  CHECK(attr.static_honest == 0.0);

  auto deep = attribute_transition(
      find_transition({5, 1}, {4, 1}, EventKind::HonestBlockOnPrefix, c), c,
      eth);
  CHECK(deep.uncle_distance == 4);
  CHECK(deep.uncle_honest == doctest::Approx(4.0 / 8.0));
  double q4 = std::pow(0.6, 3) * (1.0 + 0.4 * 0.6 * 0.5);
  CHECK(deep.nephew_honest == doctest::Approx(q4 / 32.0));
}

TEST_CASE("honest block off the prefix earns nothing") {
  MiningConfig c{0.4, 0.5};
  auto attr = attribute_transition(
      find_transition({5, 1}, {5, 2}, EventKind::HonestBlockOffPrefix, c), c,
      RewardSchedule::ethereum());
  CHECK(attr.total() == 0.0);
  CHECK(attr.uncle_probability == 0.0);
}

TEST_CASE("references beyond the window leave only a stale block") {
  MiningConfig c{0.4, 0.5};
  auto attr = attribute_transition(
      find_transition({9, 0}, {9, 1}, EventKind::HonestBlockOnPrefix, c), c,
      RewardSchedule::ethereum());
  CHECK(attr.uncle_distance == 9);
  CHECK(attr.uncle_honest == 0.0);
  CHECK(attr.nephew_pool == 0.0);
  CHECK(attr.nephew_honest == 0.0);
  CHECK(attr.uncle_probability == 0.0);

  // A wider window restores the reward.
  auto wide = attribute_transition(
      find_transition({9, 0}, {9, 1}, EventKind::HonestBlockOnPrefix, c), c,
      RewardSchedule::fixed(0.875, 200));
  CHECK(wide.uncle_honest == doctest::Approx(0.875));
  CHECK(wide.uncle_probability == 1.0);
}

TEST_CASE("aggregated revenue matches hand-computed rates at (0.4, 0.5)") {
  MiningConfig c{0.4, 0.5};
  auto dist = stationary_closed_form(c, 200);
  auto rev = aggregate_revenue(dist, c, RewardSchedule::ethereum());
  CHECK(rev.block_pool == doctest::Approx(0.370492).epsilon(1e-5));
  CHECK(rev.block_honest == doctest::Approx(0.334426).epsilon(1e-5));
  CHECK(rev.uncle_pool == doctest::Approx(0.025820).epsilon(1e-4));
  CHECK(rev.uncle_honest == doctest::Approx(0.132889).epsilon(1e-4));
  CHECK(rev.static_mismatch <= 1e-8);
}

TEST_CASE("both revenue derivations agree on block and uncle components") {
  for (double alpha : {0.1, 0.25, 0.4, 0.45})
    for (double gamma : {0.0, 0.5, 1.0}) {
      MiningConfig c{alpha, gamma};
      auto dist = stationary_closed_form(c, 160);
      for (auto schedule :
           {RewardSchedule::ethereum(), RewardSchedule::fixed(0.5),
            RewardSchedule::bitcoin()}) {
        auto rev = aggregate_revenue(dist, c, schedule);
        CAPTURE(alpha);
        CAPTURE(gamma);
        CHECK(rev.static_mismatch <= 1e-8);
      }
    }
}

TEST_CASE("static-only share reduces to the classic closed form") {
  for (double alpha : {0.1, 0.2, 0.3, 0.35})
    for (double gamma : {0.0, 0.5, 1.0}) {
      MiningConfig c{alpha, gamma};
      auto dist = stationary_closed_form(c, 160);
      auto rev = aggregate_revenue(dist, c, RewardSchedule::bitcoin());
      double share = rev.block_pool / (rev.block_pool + rev.block_honest);
      CHECK(share ==
            doctest::Approx(eyal_sirer_relative_revenue(c)).epsilon(1e-9));
    }
}

TEST_CASE("every reward rate is non-negative and conserved") {
  MiningConfig c{0.35, 0.25};
  auto dist = stationary_closed_form(c, 160);
  auto rev = aggregate_revenue(dist, c, RewardSchedule::ethereum());
  for (double v : {rev.block_pool, rev.block_honest, rev.uncle_pool,
                   rev.uncle_honest, rev.nephew_pool, rev.nephew_honest,
                   rev.uncle_rate})
    CHECK(v >= 0.0);
  // One block per unit time: regular + uncle + stale rates partition it.
  CHECK(rev.block_pool + rev.block_honest + rev.uncle_rate <= 1.0 + 1e-12);
  CHECK(rev.total() <=
        1.0 + rev.uncle_rate * (1.0 + 1.0 / 32.0));  // loose upper bound
}
