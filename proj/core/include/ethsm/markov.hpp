#pragma once

#include <cstddef>
#include <vector>

#include "ethsm/model.hpp"

namespace ethsm {

/// Who mined the block behind a transition and, during a fork, whether it
/// extends the published prefix of the private branch.
enum class EventKind {
  PoolBlock,
  HonestBlock,           // honest block outside a standing fork
  HonestBlockOnPrefix,   // honest block on the pool's published prefix
  HonestBlockOffPrefix,  // honest block on a competing public branch
};

const char* to_string(EventKind kind);

struct TransitionRate {
  ChainState from;
  ChainState to;
  double rate = 0.0;
  EventKind event_kind = EventKind::PoolBlock;
};

/// All outgoing transitions with positive rate. Rates always sum to 1
/// (time is scaled so the total block rate is one block per unit).
std::vector<TransitionRate> transition_rates(const ChainState& state,
                                             const MiningConfig& config);

/// The multiple-summations function behind the closed-form distribution:
/// a z-fold nested sum counting index tuples, zero whenever z < 1 or
/// x < y + 2. Values are integers; returned as double because they grow
/// combinatorially. Depends on x and y only through x - y.
double multisum_f(int x, int y, int z);

/// Precomputed table of multisum values, used when evaluating the closed
/// form over a whole truncated state space.
class MultisumTable {
 public:
  MultisumTable(int max_n, int max_z);
  /// f(x, y, z) for x - y - 1 <= max_n and z <= max_z.
  double f(int x, int y, int z) const;

 private:
  int max_n_;
  int max_z_;
  std::vector<double> table_;  // F(n, z), row-major by z
};

/// Truncated stationary distribution over states (i, j) with i <= bound.
class StationaryDistribution {
 public:
  StationaryDistribution(int truncation_bound);

  double pi(int i, int j) const;
  double pi(const ChainState& s) const { return pi(s.l_s, s.l_h); }
  double& at(int i, int j);

  int truncation_bound() const { return bound_; }
  double retained_mass() const;

  /// Enumerates every retained state in a fixed order.
  std::vector<ChainState> states() const;

  double tail_mass_bound = 0.0;
  double balance_residual = 0.0;  // worst truncated balance-equation residual
  int iterations = 0;             // 0 for the closed form
  bool converged = true;

 private:
  std::size_t index(int i, int j) const;
  int bound_;
  std::vector<double> pi_;
};

/// Evaluates the closed-form solution. Requires 0 < alpha < 1/2.
StationaryDistribution stationary_closed_form(const MiningConfig& config,
                                              int truncation = 200);

/// Independent numeric solve of the truncated global balance system by
/// power iteration on the jump chain. Stops once the worst balance residual
/// drops below `tolerance`; a run that exhausts the iteration budget is
/// returned with converged = false and the achieved residual.
StationaryDistribution stationary_numeric(const MiningConfig& config,
                                          int truncation = 200,
                                          double tolerance = 1e-12,
                                          int max_iterations = 200000);

/// Worst |inflow - pi| over all retained balance equations, with inflow
/// sums truncated to the retained states.
double max_balance_residual(const StationaryDistribution& dist,
                            const MiningConfig& config);

/// CSV export, columns: i, j, pi, method.
std::string distribution_csv(const StationaryDistribution& dist,
                             const char* method);

}  // namespace ethsm
