#include "ethsm/markov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

namespace ethsm {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::PoolBlock: return "PoolBlock";
    case EventKind::HonestBlock: return "HonestBlock";
    case EventKind::HonestBlockOnPrefix: return "HonestBlockOnPrefix";
    case EventKind::HonestBlockOffPrefix: return "HonestBlockOffPrefix";
  }
  return "?";
}

std::vector<TransitionRate> transition_rates(const ChainState& state,
                                             const MiningConfig& config) {
  if (!state.reachable())
    throw std::invalid_argument("transition_rates: unreachable state (" +
                                std::to_string(state.l_s) + ", " +
                                std::to_string(state.l_h) + ")");
  const double a = config.alpha;
  const double b = config.beta();
  const double g = config.gamma;
  const int i = state.l_s;
  const int j = state.l_h;

  std::vector<TransitionRate> out;
  auto add = [&](int ti, int tj, double rate, EventKind kind) {
    if (rate > 0.0) out.push_back({state, {ti, tj}, rate, kind});
  };

  if (state == ChainState{0, 0}) {
    add(0, 0, b, EventKind::HonestBlock);
    add(1, 0, a, EventKind::PoolBlock);
    return out;
  }
  if (state == ChainState{1, 0}) {
    add(2, 0, a, EventKind::PoolBlock);
    add(1, 1, b, EventKind::HonestBlock);
    return out;
  }
  if (state == ChainState{1, 1}) {
    // Either miner's next block resolves the tie; total rate 1.
    add(0, 0, a, EventKind::PoolBlock);
    add(0, 0, b, EventKind::HonestBlock);
    return out;
  }

  add(i + 1, j, a, EventKind::PoolBlock);
  if (j == 0) {
    // No standing fork: the honest block lands on the consensus tip, which
    // is the base of the private branch.
    if (i == 2)
      add(0, 0, b, EventKind::HonestBlockOnPrefix);
    else
      add(i, 1, b, EventKind::HonestBlockOnPrefix);
  } else if (i - j == 2) {
    add(0, 0, b * g, EventKind::HonestBlockOnPrefix);
    add(0, 0, b * (1.0 - g), EventKind::HonestBlockOffPrefix);
  } else {
    add(i - j, 1, b * g, EventKind::HonestBlockOnPrefix);
    add(i, j + 1, b * (1.0 - g), EventKind::HonestBlockOffPrefix);
  }
  return out;
}

// ---------------------------------------------------------------------------
// multisum
// ---------------------------------------------------------------------------

// The nested sum depends on (x, y) only through n = x - y - 1: substituting
// t_m = s_m - (y + 2 - z + m) turns it into counting tuples with
// 0 <= t_z <= n - 1 and 0 <= t_m <= t_{m+1} + 1. F(n, z) below counts those.

MultisumTable::MultisumTable(int max_n, int max_z)
    : max_n_(max_n), max_z_(max_z),
      table_(static_cast<std::size_t>(max_n + 1) * (max_z + 1), 0.0) {
  // Unwinding level m of the recursion needs c_{m-1} one index further up,
  // so the helper rows must extend max_z slots past max_n.
  const int width = max_n + max_z + 2;
  std::vector<double> c(width, 1.0);  // c_0
  std::vector<double> next(width, 0.0);
  for (int z = 1; z <= max_z; ++z) {
    // F(n, z) = sum_{t=0}^{n-1} c_{z-1}(t)
    double acc = 0.0;
    for (int n = 0; n <= max_n; ++n) {
      table_[static_cast<std::size_t>(z) * (max_n_ + 1) + n] = acc;
      acc += c[n];
    }
    // c_z(u) = sum_{t=0}^{u+1} c_{z-1}(t)
    double run = c[0];
    for (int u = 0; u < width; ++u) {
      if (u + 1 < width) run += c[u + 1];
      next[u] = run;
    }
    c.swap(next);
  }
}

double MultisumTable::f(int x, int y, int z) const {
  if (z < 1 || x < y + 2) return 0.0;
  int n = x - y - 1;
  if (n > max_n_ || z > max_z_)
    throw std::out_of_range("MultisumTable: argument beyond table bounds");
  return table_[static_cast<std::size_t>(z) * (max_n_ + 1) + n];
}

double multisum_f(int x, int y, int z) {
  if (z < 1 || x < y + 2) return 0.0;
  MultisumTable t(x - y - 1, z);
  return t.f(x, y, z);
}

// ---------------------------------------------------------------------------
// state indexing
// ---------------------------------------------------------------------------

std::size_t StationaryDistribution::index(int i, int j) const {
  // (0,0) -> 0, (1,0) -> 1, (1,1) -> 2, then (i,j), j = 0..i-2, packed per i.
  if (i == 0) return 0;
  if (i == 1) return 1 + static_cast<std::size_t>(j);
  return 3 + static_cast<std::size_t>(i - 2) * (i - 1) / 2 + j;
}

StationaryDistribution::StationaryDistribution(int truncation_bound)
    : bound_(truncation_bound) {
  if (truncation_bound < 4)
    throw std::invalid_argument("truncation bound must be >= 4");
  pi_.assign(3 + static_cast<std::size_t>(bound_) * (bound_ - 1) / 2, 0.0);
}

double StationaryDistribution::pi(int i, int j) const {
  ChainState s{i, j};
  if (!s.reachable() || i > bound_) return 0.0;
  return pi_[index(i, j)];
}

double& StationaryDistribution::at(int i, int j) { return pi_[index(i, j)]; }

double StationaryDistribution::retained_mass() const {
  return std::accumulate(pi_.begin(), pi_.end(), 0.0);
}

std::vector<ChainState> StationaryDistribution::states() const {
  std::vector<ChainState> out;
  out.reserve(pi_.size());
  out.push_back({0, 0});
  out.push_back({1, 0});
  out.push_back({1, 1});
  for (int i = 2; i <= bound_; ++i)
    for (int j = 0; j <= i - 2; ++j) out.push_back({i, j});
  return out;
}

// ---------------------------------------------------------------------------
// closed form
// ---------------------------------------------------------------------------

StationaryDistribution stationary_closed_form(const MiningConfig& config,
                                              int truncation) {
  if (!config.analytic_ok())
    throw std::invalid_argument(
        "stationary distribution requires 0 < alpha < 0.5");
  const int N = truncation;
  const double a = config.alpha;
  const double b = config.beta();
  const double g = config.gamma;
  const double r = a / b;

  StationaryDistribution dist(N);
  const double p00 = (1.0 - 2.0 * a) / (2.0 * a * a * a - 4.0 * a * a + 1.0);

  std::vector<double> pa(N + 1), pb(N + 1), pg(N + 1), pr(N + 1);
  pa[0] = pb[0] = pg[0] = pr[0] = 1.0;
  for (int m = 1; m <= N; ++m) {
    pa[m] = pa[m - 1] * a;
    pb[m] = pb[m - 1] * b;
    pg[m] = pg[m - 1] * (1.0 - g);
    pr[m] = pr[m - 1] * r;
  }

  dist.at(0, 0) = p00;
  dist.at(1, 1) = (a - a * a) * p00;
  for (int i = 1; i <= N; ++i) dist.at(i, 0) = pa[i] * p00;

  MultisumTable F(N, N);
  for (int j = 1; j <= N - 2; ++j) {
    for (int i = j + 2; i <= N; ++i) {
      double t1 = pa[i] * pb[j] * pg[j] * F.f(i, j, j);
      double t2 = g * pg[j - 1] * (a * pr[i - j - 1] - pa[i - j]);
      double t3 = 0.0;
      for (int k = 1; k < j; ++k)  // k = j term vanishes (z = 0)
        t3 += pa[i - k] * pb[j - k] * F.f(i, j, j - k);
      t3 *= g * pg[j - 1];
      dist.at(i, j) = (t1 + t2 - t3) * p00;
    }
  }

  dist.tail_mass_bound = std::max(0.0, 1.0 - dist.retained_mass());
  dist.balance_residual = max_balance_residual(dist, config);
  dist.iterations = 0;
  dist.converged = true;
  return dist;
}

// ---------------------------------------------------------------------------
// numeric solve
// ---------------------------------------------------------------------------

namespace {

struct JumpChain {
  std::vector<int> offsets;  // CSR over source states
  std::vector<int> target;   // -1 when the transition leaves the truncation
  std::vector<double> rate;
  std::vector<ChainState> states;
};

JumpChain build_chain(const MiningConfig& config,
                      const StationaryDistribution& shape) {
  // Same packing as StationaryDistribution::index.
  auto idx = [](int i, int j) -> int {
    if (i == 0) return 0;
    if (i == 1) return 1 + j;
    return 3 + (i - 2) * (i - 1) / 2 + j;
  };
  JumpChain c;
  c.states = shape.states();
  c.offsets.push_back(0);
  for (const ChainState& s : c.states) {
    for (const TransitionRate& t : transition_rates(s, config)) {
      bool inside = t.to.l_s <= shape.truncation_bound();
      c.target.push_back(inside ? idx(t.to.l_s, t.to.l_h) : -1);
      c.rate.push_back(t.rate);
    }
    c.offsets.push_back(static_cast<int>(c.target.size()));
  }
  return c;
}

}  // namespace

double max_balance_residual(const StationaryDistribution& dist,
                            const MiningConfig& config) {
  const int N = dist.truncation_bound();
  StationaryDistribution inflow(N);
  for (const ChainState& s : dist.states()) {
    double p = dist.pi(s);
    if (p == 0.0) continue;
    for (const TransitionRate& t : transition_rates(s, config))
      if (t.to.l_s <= N) inflow.at(t.to.l_s, t.to.l_h) += p * t.rate;
  }
  double worst = 0.0;
  for (const ChainState& s : dist.states())
    worst = std::max(worst, std::abs(inflow.pi(s) - dist.pi(s)));
  return worst;
}

StationaryDistribution stationary_numeric(const MiningConfig& config,
                                          int truncation, double tolerance,
                                          int max_iterations) {
  if (!config.analytic_ok())
    throw std::invalid_argument(
        "stationary distribution requires 0 < alpha < 0.5");
  if (truncation < 4)
    throw std::invalid_argument("truncation must be >= 4");

  StationaryDistribution dist(truncation);
  JumpChain chain = build_chain(config, dist);
  const std::size_t n = chain.states.size();

  std::vector<double> v(n, 0.0), nv(n, 0.0);
  v[0] = 1.0;
  int it = 0;
  bool converged = false;
  while (it < max_iterations) {
    // Batches of power-iteration sweeps; mass leaving the truncation is
    // reflected so the vector stays a distribution.
    for (int batch = 0; batch < 100 && it < max_iterations; ++batch, ++it) {
      std::fill(nv.begin(), nv.end(), 0.0);
      for (std::size_t s = 0; s < n; ++s) {
        const double p = v[s];
        if (p == 0.0) continue;
        for (int k = chain.offsets[s]; k < chain.offsets[s + 1]; ++k) {
          int t = chain.target[k];
          nv[t >= 0 ? static_cast<std::size_t>(t) : s] += p * chain.rate[k];
        }
      }
      v.swap(nv);
    }
    // Residual in the truncated system (reflection excluded).
    double worst = 0.0;
    std::fill(nv.begin(), nv.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double p = v[s];
      if (p == 0.0) continue;
      for (int k = chain.offsets[s]; k < chain.offsets[s + 1]; ++k)
        if (chain.target[k] >= 0) nv[chain.target[k]] += p * chain.rate[k];
    }
    for (std::size_t s = 0; s < n; ++s)
      worst = std::max(worst, std::abs(nv[s] - v[s]));
    dist.balance_residual = worst;
    if (worst <= tolerance) {
      converged = true;
      break;
    }
  }

  for (std::size_t s = 0; s < n; ++s)
    dist.at(chain.states[s].l_s, chain.states[s].l_h) = v[s];
  dist.iterations = it;
  dist.converged = converged;

  // Tail certificate from the decay of the outermost columns.
  double m_last = 0.0, m_prev = 0.0;
  for (int j = 0; j <= truncation - 2; ++j) {
    m_last += dist.pi(truncation, j);
    m_prev += dist.pi(truncation - 1, j);
  }
  if (m_prev > 0.0 && m_last < m_prev) {
    double rho = m_last / m_prev;
    dist.tail_mass_bound = m_last * rho / (1.0 - rho);
  } else {
    dist.tail_mass_bound = m_last > 0.0 ? 1.0 : 0.0;
  }
  return dist;
}

std::string distribution_csv(const StationaryDistribution& dist,
                             const char* method) {
  std::string out = "i,j,pi,method\n";
  char buf[96];
  for (const ChainState& s : dist.states()) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%s\n", s.l_s, s.l_h,
                  dist.pi(s), method);
    out += buf;
  }
  return out;
}

}  // namespace ethsm
