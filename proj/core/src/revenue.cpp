#include "ethsm/revenue.hpp"

#include <cmath>

namespace ethsm {

AbsoluteRevenue absolute_revenue(const RevenueBreakdown& revenue,
                                 Scenario scenario) {
  AbsoluteRevenue out;
  out.divisor = revenue.block_pool + revenue.block_honest;
  if (scenario == Scenario::UncleInclusiveDifficulty)
    out.divisor += revenue.uncle_rate;
  out.pool = revenue.pool_total() / out.divisor;
  out.honest = revenue.honest_total() / out.divisor;
  return out;
}

double relative_share(const RevenueBreakdown& revenue) {
  return revenue.pool_total() / revenue.total();
}

namespace {

double profit_margin(double alpha, double gamma,
                     const RewardSchedule& schedule, Scenario scenario,
                     int truncation) {
  MiningConfig config{alpha, gamma};
  StationaryDistribution dist = stationary_closed_form(config, truncation);
  RevenueBreakdown revenue = aggregate_revenue(dist, config, schedule);
  return absolute_revenue(revenue, scenario).pool - alpha;
}

}  // namespace

ThresholdResult profitability_threshold(double gamma,
                                        const RewardSchedule& schedule,
                                        Scenario scenario, int truncation,
                                        double tolerance) {
  const double lo_start = 0.01, hi_end = 0.495, step = 0.005;

  double prev_alpha = lo_start;
  double prev_margin = profit_margin(prev_alpha, gamma, schedule, scenario,
                                     truncation);
  if (prev_margin > 0.0) return {ThresholdStatus::AlwaysProfitable, lo_start};

  double lo = 0.0, hi = 0.0;
  for (double alpha = lo_start + step; alpha <= hi_end + 1e-12;
       alpha += step) {
    double margin = profit_margin(alpha, gamma, schedule, scenario,
                                  truncation);
    if (prev_margin <= 0.0 && margin > 0.0) {
      lo = prev_alpha;
      hi = alpha;
      break;
    }
    prev_alpha = alpha;
    prev_margin = margin;
  }
  if (hi == 0.0) return {ThresholdStatus::NeverProfitable, 0.0};

  while (hi - lo > tolerance) {
    double mid = 0.5 * (lo + hi);
    if (profit_margin(mid, gamma, schedule, scenario, truncation) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return {ThresholdStatus::Found, 0.5 * (lo + hi)};
}

double bitcoin_baseline_threshold(double gamma) {
  return (1.0 - gamma) / (3.0 - 2.0 * gamma);
}

double eyal_sirer_relative_revenue(const MiningConfig& config) {
  const double a = config.alpha;
  const double g = config.gamma;
  return (a * (1.0 - a) * (1.0 - a) * (4.0 * a + g * (1.0 - 2.0 * a)) -
          a * a * a) /
         (1.0 - a * (1.0 + (2.0 - a) * a));
}

}  // namespace ethsm
