#include "doctest.h"
#include "ethsm/model.hpp"

using namespace ethsm;

TEST_CASE("ethereum uncle reward schedule") {
  CHECK(ethereum_uncle_reward(1) == doctest::Approx(7.0 / 8.0));
  CHECK(ethereum_uncle_reward(2) == doctest::Approx(6.0 / 8.0));
  CHECK(ethereum_uncle_reward(6) == doctest::Approx(2.0 / 8.0));
  CHECK(ethereum_uncle_reward(0) == 0.0);
  CHECK(ethereum_uncle_reward(7) == 0.0);
  CHECK(ethereum_uncle_reward(-3) == 0.0);
}

TEST_CASE("fixed uncle reward respects the window") {
  CHECK(fixed_uncle_reward(0.5, 1) == 0.5);
  CHECK(fixed_uncle_reward(0.5, 6) == 0.5);
  CHECK(fixed_uncle_reward(0.5, 7) == 0.0);
  CHECK(fixed_uncle_reward(0.5, 3, 2) == 0.0);
  CHECK(fixed_uncle_reward(0.875, 40, 200) == 0.875);
}

TEST_CASE("reward schedule factories") {
  RewardSchedule eth = RewardSchedule::ethereum();
  CHECK(eth.static_reward() == 1.0);
  CHECK(eth.uncle_reward(3) == doctest::Approx(5.0 / 8.0));
  CHECK(eth.nephew_reward(3) == doctest::Approx(1.0 / 32.0));
  CHECK(eth.nephew_reward(7) == 0.0);
  CHECK(eth.tag() == "ethereum");

  RewardSchedule fixed = RewardSchedule::fixed(0.5);
  CHECK(fixed.uncle_reward(1) == 0.5);
  CHECK(fixed.uncle_reward(6) == 0.5);
  CHECK(fixed.uncle_reward(7) == 0.0);
  CHECK(fixed.tag() == "fixed_0.5");

  RewardSchedule btc = RewardSchedule::bitcoin();
  CHECK(btc.uncle_reward(1) == 0.0);
  CHECK(btc.nephew_reward(1) == 0.0);
  CHECK(btc.tag() == "bitcoin");

  CHECK_THROWS_AS(RewardSchedule::fixed(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(RewardSchedule::fixed(1.5), std::invalid_argument);
  CHECK_THROWS_AS(RewardSchedule::fixed(0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(RewardSchedule::fixed(0.5, 6, 2.0), std::invalid_argument);
}

TEST_CASE("chain state reachability") {
  CHECK(ChainState{0, 0}.reachable());
  CHECK(ChainState{1, 0}.reachable());
  CHECK(ChainState{1, 1}.reachable());
  CHECK(ChainState{2, 0}.reachable());
  CHECK(ChainState{5, 3}.reachable());
  CHECK(ChainState{10, 0}.reachable());

  CHECK_FALSE(ChainState{0, 1}.reachable());
  CHECK_FALSE(ChainState{1, 2}.reachable());
  CHECK_FALSE(ChainState{2, 1}.reachable());
  CHECK_FALSE(ChainState{3, 2}.reachable());
  CHECK_FALSE(ChainState{-1, 0}.reachable());
  CHECK_FALSE(ChainState{2, -1}.reachable());
}

TEST_CASE("config validation") {
  MiningConfig good{0.3, 0.5};
  CHECK(validate_config(good, RewardSchedule::ethereum()).empty());

  MiningConfig bad_alpha{0.0, 0.5};
  CHECK_FALSE(validate_config(bad_alpha, RewardSchedule::ethereum()).empty());
  MiningConfig big_alpha{1.0, 0.5};
  CHECK_FALSE(validate_config(big_alpha, RewardSchedule::ethereum()).empty());
  MiningConfig bad_gamma{0.3, -0.1};
  CHECK_FALSE(validate_config(bad_gamma, RewardSchedule::ethereum()).empty());
  MiningConfig bad_gamma2{0.3, 1.1};
  CHECK_FALSE(validate_config(bad_gamma2, RewardSchedule::ethereum()).empty());
}

TEST_CASE("analytic validity domain") {
  CHECK(MiningConfig{0.49, 0.5}.analytic_ok());
  CHECK_FALSE(MiningConfig{0.5, 0.5}.analytic_ok());
  CHECK_FALSE(MiningConfig{0.0, 0.5}.analytic_ok());
  CHECK(MiningConfig{0.3, 0.0}.beta() == doctest::Approx(0.7));
}
