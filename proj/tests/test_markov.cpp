#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ethsm/markov.hpp"

using namespace ethsm;

namespace {

double total_rate(const std::vector<TransitionRate>& ts) {
  double sum = 0.0;
  for (const TransitionRate& t : ts) sum += t.rate;
  return sum;
}

const TransitionRate* find_to(const std::vector<TransitionRate>& ts, int i,
                              int j) {
  for (const TransitionRate& t : ts)
    if (t.to == ChainState{i, j}) return &t;
  return nullptr;
}

}  // namespace

TEST_CASE("transition structure at the small states") {
  MiningConfig c{0.3, 0.6};

  auto from00 = transition_rates({0, 0}, c);
  REQUIRE(from00.size() == 2);
  CHECK(find_to(from00, 0, 0)->rate == doctest::Approx(0.7));
  CHECK(find_to(from00, 0, 0)->event_kind == EventKind::HonestBlock);
  CHECK(find_to(from00, 1, 0)->rate == doctest::Approx(0.3));
  CHECK(find_to(from00, 1, 0)->event_kind == EventKind::PoolBlock);

  auto from10 = transition_rates({1, 0}, c);
  CHECK(find_to(from10, 2, 0)->rate == doctest::Approx(0.3));
  CHECK(find_to(from10, 1, 1)->rate == doctest::Approx(0.7));

  // The (1,1) tie resolves at total rate 1, whoever mines next.
  auto from11 = transition_rates({1, 1}, c);
  CHECK(total_rate(from11) == doctest::Approx(1.0));
  for (const TransitionRate& t : from11) CHECK(t.to == ChainState{0, 0});

  auto from20 = transition_rates({2, 0}, c);
  CHECK(find_to(from20, 3, 0)->rate == doctest::Approx(0.3));
  CHECK(find_to(from20, 0, 0)->rate == doctest::Approx(0.7));
  CHECK(find_to(from20, 0, 0)->event_kind == EventKind::HonestBlockOnPrefix);
}

TEST_CASE("transition structure during a deep fork") {
  MiningConfig c{0.3, 0.6};

  // Lead 3 with a standing fork: the honest block lands on the published
  // prefix (rate beta*gamma) or the competing branch (rate beta*(1-gamma)).
  auto from41 = transition_rates({4, 1}, c);
  CHECK(find_to(from41, 5, 1)->rate == doctest::Approx(0.3));
  CHECK(find_to(from41, 3, 1)->rate == doctest::Approx(0.7 * 0.6));
  CHECK(find_to(from41, 3, 1)->event_kind == EventKind::HonestBlockOnPrefix);
  CHECK(find_to(from41, 4, 2)->rate == doctest::Approx(0.7 * 0.4));
  CHECK(find_to(from41, 4, 2)->event_kind == EventKind::HonestBlockOffPrefix);

  // Lead exactly 2: either honest block ends the fork.
  auto from31 = transition_rates({3, 1}, c);
  CHECK(find_to(from31, 4, 1)->rate == doctest::Approx(0.3));
  double to00 = 0.0;
  for (const TransitionRate& t : from31)
    if (t.to == ChainState{0, 0}) to00 += t.rate;
  CHECK(to00 == doctest::Approx(0.7));

  // No fork yet at lead >= 3: the honest block opens one.
  auto from30 = transition_rates({3, 0}, c);
  CHECK(find_to(from30, 3, 1)->rate == doctest::Approx(0.7));
  CHECK(find_to(from30, 3, 1)->event_kind == EventKind::HonestBlockOnPrefix);
}

TEST_CASE("zero-rate transitions are dropped at the gamma extremes") {
  MiningConfig all_pool{0.3, 1.0};
  for (const TransitionRate& t : transition_rates({5, 2}, all_pool))
    CHECK(t.rate > 0.0);
  CHECK(find_to(transition_rates({5, 2}, all_pool), 5, 3) == nullptr);

  MiningConfig none{0.3, 0.0};
  CHECK(find_to(transition_rates({5, 2}, none), 3, 1) == nullptr);
  CHECK(find_to(transition_rates({5, 2}, none), 5, 3) != nullptr);
}

TEST_CASE("rates always sum to one") {
  for (double alpha : {0.1, 0.37, 0.49})
    for (double gamma : {0.0, 0.3, 1.0}) {
      MiningConfig c{alpha, gamma};
      StationaryDistribution shape(30);
      for (const ChainState& s : shape.states())
        CHECK(total_rate(transition_rates(s, c)) == doctest::Approx(1.0));
    }
}

TEST_CASE("unreachable states are rejected") {
  MiningConfig c{0.3, 0.5};
  CHECK_THROWS_AS(transition_rates({2, 1}, c), std::invalid_argument);
  CHECK_THROWS_AS(transition_rates({0, 1}, c), std::invalid_argument);
  CHECK_THROWS_AS(transition_rates({-1, 0}, c), std::invalid_argument);
}

TEST_CASE("closed form matches hand-computed values at alpha = 0.4") {
  MiningConfig c{0.4, 0.5};
  auto dist = stationary_closed_form(c, 200);
  CHECK(dist.pi(0, 0) == doctest::Approx(0.4098360655737705).epsilon(1e-12));
  CHECK(dist.pi(1, 0) == doctest::Approx(0.4 * 0.4098360655737705));
  CHECK(dist.pi(1, 1) == doctest::Approx(0.24 * 0.4098360655737705));
  CHECK(dist.pi(3, 0) == doctest::Approx(0.064 * 0.4098360655737705));
  CHECK(dist.balance_residual < 1e-12);
  CHECK(dist.retained_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dist.tail_mass_bound < 1e-12);
}

TEST_CASE("pi(0,0) is monotone decreasing in alpha") {
  double prev = 1.0;
  for (double alpha = 0.05; alpha < 0.5; alpha += 0.05) {
    MiningConfig c{alpha, 0.5};
    double p = stationary_closed_form(c, 60).pi(0, 0);
    CHECK(p < prev);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    prev = p;
  }
}

TEST_CASE("pi(i,0) decays geometrically below 1e-6 by i = 15 at alpha 0.4") {
  auto dist = stationary_closed_form({0.4, 0.5}, 60);
  for (int i = 15; i <= 60; ++i) CHECK(dist.pi(i, 0) < 1e-6);
}

TEST_CASE("closed form and numeric solve agree state by state") {
  for (auto [alpha, gamma] : {std::pair{0.3, 0.5}, std::pair{0.45, 1.0},
                              std::pair{0.1, 0.0}, std::pair{0.25, 0.75}}) {
    MiningConfig c{alpha, gamma};
    auto cf = stationary_closed_form(c, 120);
    // 1e-11 is the tightest tolerance every grid point can reach: mass
    // reflected at the truncation boundary keeps a residual of a few 1e-12
    // alive at alpha = 0.45, gamma = 1 where the diagonal decays slowly.
    auto num = stationary_numeric(c, 120, 1e-11, 100000);
    CHECK(num.converged);
    CHECK(num.iterations > 0);
    double worst = 0.0;
    for (const ChainState& s : cf.states())
      worst = std::max(worst, std::abs(cf.pi(s) - num.pi(s)));
    CAPTURE(alpha);
    CAPTURE(gamma);
    CHECK(worst <= 1e-9);
    CHECK(max_balance_residual(cf, c) <= 1e-9);
  }
}

TEST_CASE("numeric solver reports non-convergence honestly") {
  auto num = stationary_numeric({0.4, 0.5}, 120, 1e-15, 200);
  CHECK_FALSE(num.converged);
  CHECK(num.balance_residual > 0.0);
  CHECK(num.iterations == 200);
}

TEST_CASE("invalid arguments to the solvers") {
  CHECK_THROWS_AS(stationary_closed_form({0.5, 0.5}, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(stationary_closed_form({0.0, 0.5}, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(stationary_numeric({0.6, 0.5}, 100), std::invalid_argument);
  CHECK_THROWS_AS(stationary_closed_form({0.3, 0.5}, 2),
                  std::invalid_argument);
}

TEST_CASE("distribution CSV shape") {
  auto dist = stationary_closed_form({0.3, 0.5}, 10);
  std::string csv = distribution_csv(dist, "closed_form");
  CHECK(csv.rfind("i,j,pi,method\n", 0) == 0);
  CHECK(csv.find("0,0,0.576368876,closed_form") != std::string::npos);
}
