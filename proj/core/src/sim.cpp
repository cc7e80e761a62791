#include "ethsm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace ethsm {

Simulator::Simulator(const MiningConfig& config, const RewardSchedule& schedule,
                     const SimOptions& options)
    : config_(config),
      max_ref_(schedule.max_reference_distance()),
      options_(options) {
  Block genesis;
  genesis.published_at = 0;
  genesis.status = BlockStatus::Regular;
  blocks_.push_back(genesis);
  fork_base_ = 0;
}

ChainState Simulator::state() const {
  return {static_cast<int>(private_.size()),
          static_cast<int>(honest_branch_.size())};
}

Block& Simulator::new_block(int parent, Miner miner) {
  Block b;
  b.id = static_cast<int>(blocks_.size());
  b.parent = parent;
  b.height = blocks_[parent].height + 1;
  b.miner = miner;
  b.scored = scoring_;
  blocks_[parent].children.push_back(b.id);
  blocks_.push_back(b);
  return blocks_.back();
}

void Simulator::add_references(Block& b) {
  // Walk up b's own branch far enough to see every block that could still
  // be referenced from b's height, plus one level for conflict checks.
  std::vector<int> ancestors;
  for (int cur = b.parent;
       cur >= 0 && b.height - blocks_[cur].height <= max_ref_ + 1;
       cur = blocks_[cur].parent)
    ancestors.push_back(cur);

  auto on_chain = [&](int id) {
    if (id == b.id) return true;
    return std::find(ancestors.begin(), ancestors.end(), id) != ancestors.end();
  };
  std::vector<int> referenced;
  for (int a : ancestors)
    referenced.insert(referenced.end(), blocks_[a].uncle_refs.begin(),
                      blocks_[a].uncle_refs.end());

  for (int a : ancestors) {
    for (int c : blocks_[a].children) {
      if (on_chain(c)) continue;
      if (std::find(referenced.begin(), referenced.end(), c) !=
          referenced.end())
        continue;
      int d = b.height - blocks_[c].height;
      if (d < 1 || d > max_ref_) continue;
      if (options_.max_uncles_per_block >= 0 &&
          static_cast<int>(b.uncle_refs.size()) >=
              options_.max_uncles_per_block)
        return;
      b.uncle_refs.push_back(c);
    }
  }
}

StepRecord Simulator::step(const Event& event) {
  StepRecord rec;
  rec.pre = state();
  const int ls = rec.pre.l_s;
  const int lh = rec.pre.l_h;

  // Marks the pool blocks private_[published_ .. k) as public.
  auto publish_to = [&](int k) {
    for (int idx = published_; idx < k; ++idx) {
      blocks_[private_[idx]].published_at = event_index_;
      ++rec.newly_published;
    }
    published_ = std::max(published_, k);
  };
  auto pool_wins = [&] {
    publish_to(static_cast<int>(private_.size()));
    fork_base_ = private_.back();
    private_.clear();
    published_ = 0;
    honest_branch_.clear();
  };

  if (event.pool) {
    int parent = private_.empty() ? fork_base_ : private_.back();
    Block& b = new_block(parent, Miner::Pool);
    add_references(b);
    rec.block_id = b.id;
    rec.uncle_refs = b.uncle_refs;
    b.pre_state = rec.pre;
    private_.push_back(b.id);
    if (static_cast<int>(private_.size()) == 2 && lh == 1) pool_wins();
  } else {
    int parent;
    bool on_prefix;
    if (lh == 0) {
      parent = fork_base_;  // unique public tip
      on_prefix = true;
    } else if (event.prefers_pool) {
      parent = private_[lh - 1];  // tip of the pool's published prefix
      on_prefix = true;
    } else {
      parent = honest_branch_.back();
      on_prefix = false;
    }
    Block& b = new_block(parent, Miner::Honest);
    add_references(b);
    b.published_at = event_index_;
    b.pre_state = rec.pre;
    rec.block_id = b.id;
    rec.uncle_refs = b.uncle_refs;

    const int new_lh = lh + 1;
    if (ls < new_lh) {
      // Honest chain is now strictly longer; everyone adopts it.
      fork_base_ = b.id;
      private_.clear();
      published_ = 0;
      honest_branch_.clear();
    } else if (ls == new_lh) {
      // Tie: the pool publishes its whole branch and a race stands.
      publish_to(ls);
      honest_branch_.push_back(b.id);
    } else if (ls == new_lh + 1) {
      // Lead would shrink to one: the pool publishes everything and wins.
      pool_wins();
    } else if (on_prefix) {
      // Deep lead, honest block on the published prefix: the shared prefix
      // becomes consensus and the race restarts one block higher.
      publish_to(lh + 1);
      if (lh >= 1) fork_base_ = private_[lh - 1];
      private_.erase(private_.begin(), private_.begin() + lh);
      published_ = 1;
      honest_branch_.assign(1, b.id);
    } else {
      // Deep lead, honest block on the competing branch: the pool answers
      // by publishing its first unpublished block.
      publish_to(lh + 1);
      honest_branch_.push_back(b.id);
    }
  }

  if (!honest_branch_.empty() &&
      published_ != static_cast<int>(honest_branch_.size()))
    equal_length_ok_ = false;

  ++event_index_;
  rec.post = state();
  return rec;
}

bool Simulator::settled() const {
  if (!private_.empty() || !honest_branch_.empty()) return false;
  const Block& tip = blocks_[fork_base_];

  std::vector<int> ancestors;  // consensus blocks near the tip, tip included
  for (int cur = fork_base_;
       cur >= 0 && tip.height - blocks_[cur].height <= max_ref_;
       cur = blocks_[cur].parent)
    ancestors.push_back(cur);

  std::vector<int> referenced;
  for (int cur = fork_base_;
       cur >= 0 && tip.height - blocks_[cur].height <= max_ref_ + 2;
       cur = blocks_[cur].parent)
    referenced.insert(referenced.end(), blocks_[cur].uncle_refs.begin(),
                      blocks_[cur].uncle_refs.end());

  for (int a : ancestors) {
    for (int c : blocks_[a].children) {
      const Block& cb = blocks_[c];
      if (cb.height > tip.height) continue;
      bool on_chain = false;
      for (int cur = fork_base_;
           cur >= 0 && blocks_[cur].height >= cb.height;
           cur = blocks_[cur].parent)
        if (cur == c) {
          on_chain = true;
          break;
        }
      if (on_chain) continue;
      if (std::find(referenced.begin(), referenced.end(), c) !=
          referenced.end())
        continue;
      // The next consensus block could still pick this one up.
      if (tip.height + 1 - cb.height <= max_ref_) return false;
    }
  }
  return true;
}

void Simulator::finalize() {
  std::vector<char> on_main(blocks_.size(), 0);
  for (int cur = fork_base_; cur >= 0; cur = blocks_[cur].parent)
    on_main[cur] = 1;
  for (Block& b : blocks_)
    b.status = on_main[b.id] ? BlockStatus::Regular : BlockStatus::Stale;
  for (Block& b : blocks_) {
    if (!on_main[b.id]) continue;
    for (int uid : b.uncle_refs) {
      blocks_[uid].status = BlockStatus::Uncle;
      blocks_[uid].uncle_distance = b.height - blocks_[uid].height;
    }
  }
}

bool verify_lemma1(const std::vector<Block>& blocks) {
  for (const Block& b : blocks) {
    if (b.miner == Miner::Genesis || !b.scored) continue;
    if (b.pre_state.lead() < 2) continue;
    bool regular = b.status == BlockStatus::Regular;
    if (b.miner == Miner::Pool && !regular) return false;
    if (b.miner == Miner::Honest && regular) return false;
  }
  return true;
}

Estimate estimate_from(const std::vector<double>& samples) {
  Estimate e;
  const std::size_t n = samples.size();
  if (n == 0) return e;
  for (double x : samples) e.mean += x;
  e.mean /= static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - e.mean) * (x - e.mean);
    e.se = std::sqrt(ss / static_cast<double>(n - 1)) /
           std::sqrt(static_cast<double>(n));
  }
  return e;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng) { return sim_uniform(rng); }

RunStats tally_run(const Simulator& sim, const RewardSchedule& schedule) {
  RunStats stats;
  stats.honest_uncle_hist.assign(schedule.max_reference_distance() + 1, 0);
  long long scored = 0, regular = 0, uncles = 0;
  for (const Block& b : sim.blocks()) {
    if (b.miner == Miner::Genesis || !b.scored) continue;
    ++scored;
    if (b.status == BlockStatus::Regular) {
      ++regular;
      (b.miner == Miner::Pool ? stats.block_pool : stats.block_honest) +=
          schedule.static_reward();
    } else if (b.status == BlockStatus::Uncle) {
      ++uncles;
      (b.miner == Miner::Pool ? stats.uncle_pool : stats.uncle_honest) +=
          schedule.uncle_reward(b.uncle_distance);
      if (b.miner == Miner::Honest)
        ++stats.honest_uncle_hist[b.uncle_distance];
    }
  }
  // Nephew rewards are booked for every scored uncle, credited to the
  // miner of the regular block that references it (scored or not, to avoid
  // censoring references that land after the scoring window).
  for (const Block& b : sim.blocks()) {
    if (b.status != BlockStatus::Regular) continue;
    for (int uid : b.uncle_refs) {
      const Block& u = sim.blocks()[uid];
      if (!u.scored) continue;
      (b.miner == Miner::Pool ? stats.nephew_pool : stats.nephew_honest) +=
          schedule.nephew_reward(u.uncle_distance);
    }
  }
  stats.scored_blocks = scored;
  stats.total_events = sim.events();
  if (scored > 0) {
    double inv = 1.0 / static_cast<double>(scored);
    stats.block_pool *= inv;
    stats.block_honest *= inv;
    stats.uncle_pool *= inv;
    stats.uncle_honest *= inv;
    stats.nephew_pool *= inv;
    stats.nephew_honest *= inv;
    stats.regular_rate = static_cast<double>(regular) * inv;
    stats.uncle_rate = static_cast<double>(uncles) * inv;
  }
  stats.lemma1_ok = verify_lemma1(sim.blocks());
  stats.equal_length_ok = sim.equal_length_ok();
  return stats;
}

RunStats simulate_one(const MiningConfig& config,
                      const RewardSchedule& schedule, long long blocks,
                      std::uint64_t run_seed, const SimOptions& options) {
  std::mt19937_64 rng(run_seed);
  Simulator sim(config, schedule, options);
  std::map<ChainState, long long> occupancy;

  auto draw_event = [&] {
    Event e;
    e.pool = uniform(rng) < config.alpha;
    if (!e.pool) {
      if (options.n_miners > 0) uniform(rng);  // which honest miner; symmetric
      if (sim.state().l_h >= 1) e.prefers_pool = uniform(rng) < config.gamma;
    }
    return e;
  };

  for (long long n = 0; n < blocks; ++n) {
    ++occupancy[sim.state()];
    sim.step(draw_event());
  }
  sim.set_scoring(false);
  while (!sim.settled() && sim.events() < options.settle_event_cap)
    sim.step(draw_event());
  sim.finalize();

  RunStats stats = tally_run(sim, schedule);
  stats.occupancy = std::move(occupancy);
  return stats;
}

}  // namespace

std::uint64_t derive_run_seed(std::uint64_t seed, int run) {
  return splitmix64(seed ^
                    (0x9E3779B97F4A7C15ULL *
                     static_cast<std::uint64_t>(run + 1)));
}

// Uniform in [0, 1) from the top 53 bits, identical on every platform.
double sim_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

SimResult run_simulation(const MiningConfig& config,
                         const RewardSchedule& schedule, long long blocks,
                         int runs, std::uint64_t seed,
                         const SimOptions& options, int workers) {
  if (blocks < 1) throw std::invalid_argument("blocks must be >= 1");
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (workers <= 0)
    workers = std::max(1u, std::thread::hardware_concurrency());

  SimResult result;
  result.config = config;
  result.schedule_tag = schedule.tag();
  result.seed = seed;
  result.runs = runs;
  result.blocks_per_run = blocks;
  result.per_run.resize(runs);

  for (int base = 0; base < runs; base += workers) {
    std::vector<std::future<RunStats>> batch;
    int end = std::min(runs, base + workers);
    for (int r = base; r < end; ++r)
      batch.push_back(std::async(std::launch::async, simulate_one, config,
                                 schedule, blocks, derive_run_seed(seed, r),
                                 options));
    for (int r = base; r < end; ++r)
      result.per_run[r] = batch[r - base].get();
  }

  auto collect = [&](auto field) {
    std::vector<double> xs;
    xs.reserve(runs);
    for (const RunStats& s : result.per_run) xs.push_back(field(s));
    return estimate_from(xs);
  };
  result.block_pool = collect([](const RunStats& s) { return s.block_pool; });
  result.block_honest =
      collect([](const RunStats& s) { return s.block_honest; });
  result.uncle_pool = collect([](const RunStats& s) { return s.uncle_pool; });
  result.uncle_honest =
      collect([](const RunStats& s) { return s.uncle_honest; });
  result.nephew_pool =
      collect([](const RunStats& s) { return s.nephew_pool; });
  result.nephew_honest =
      collect([](const RunStats& s) { return s.nephew_honest; });
  result.regular_rate =
      collect([](const RunStats& s) { return s.regular_rate; });
  result.uncle_rate = collect([](const RunStats& s) { return s.uncle_rate; });

  auto pool_sum = [](const RunStats& s) {
    return s.block_pool + s.uncle_pool + s.nephew_pool;
  };
  auto honest_sum = [](const RunStats& s) {
    return s.block_honest + s.uncle_honest + s.nephew_honest;
  };
  result.u_pool_main =
      collect([&](const RunStats& s) { return pool_sum(s) / s.regular_rate; });
  result.u_honest_main = collect(
      [&](const RunStats& s) { return honest_sum(s) / s.regular_rate; });
  result.u_pool_incl = collect([&](const RunStats& s) {
    return pool_sum(s) / (s.regular_rate + s.uncle_rate);
  });
  result.u_honest_incl = collect([&](const RunStats& s) {
    return honest_sum(s) / (s.regular_rate + s.uncle_rate);
  });

  int maxref = schedule.max_reference_distance();
  result.honest_uncle_hist.assign(maxref + 1, 0.0);
  double total = 0.0;
  for (const RunStats& s : result.per_run)
    for (int d = 1; d <= maxref; ++d) {
      result.honest_uncle_hist[d] += static_cast<double>(s.honest_uncle_hist[d]);
      total += static_cast<double>(s.honest_uncle_hist[d]);
    }
  if (total > 0.0)
    for (int d = 1; d <= maxref; ++d) {
      result.honest_uncle_hist[d] /= total;
      result.hist_expectation += d * result.honest_uncle_hist[d];
    }

  for (const RunStats& s : result.per_run) {
    result.lemma1_ok = result.lemma1_ok && s.lemma1_ok;
    result.equal_length_ok = result.equal_length_ok && s.equal_length_ok;
  }
  return result;
}

std::string sim_result_json(const SimResult& r) {
  using nlohmann::json;
  auto est = [](const Estimate& e) {
    return json{{"mean", e.mean}, {"se", e.se}};
  };
  json j{
      {"alpha", r.config.alpha},
      {"gamma", r.config.gamma},
      {"schedule", r.schedule_tag},
      {"seed", r.seed},
      {"runs", r.runs},
      {"blocks_per_run", r.blocks_per_run},
      {"block_pool", est(r.block_pool)},
      {"block_honest", est(r.block_honest)},
      {"uncle_pool", est(r.uncle_pool)},
      {"uncle_honest", est(r.uncle_honest)},
      {"nephew_pool", est(r.nephew_pool)},
      {"nephew_honest", est(r.nephew_honest)},
      {"regular_rate", est(r.regular_rate)},
      {"uncle_rate", est(r.uncle_rate)},
      {"u_pool_main", est(r.u_pool_main)},
      {"u_honest_main", est(r.u_honest_main)},
      {"u_pool_incl", est(r.u_pool_incl)},
      {"u_honest_incl", est(r.u_honest_incl)},
      {"honest_uncle_hist", r.honest_uncle_hist},
      {"hist_expectation", r.hist_expectation},
      {"lemma1_ok", r.lemma1_ok},
      {"equal_length_ok", r.equal_length_ok},
  };
  json runs = json::array();
  for (const RunStats& s : r.per_run)
    runs.push_back({{"block_pool", s.block_pool},
                    {"block_honest", s.block_honest},
                    {"uncle_pool", s.uncle_pool},
                    {"uncle_honest", s.uncle_honest},
                    {"nephew_pool", s.nephew_pool},
                    {"nephew_honest", s.nephew_honest},
                    {"regular_rate", s.regular_rate},
                    {"uncle_rate", s.uncle_rate},
                    {"scored_blocks", s.scored_blocks},
                    {"total_events", s.total_events}});
  j["per_run"] = runs;
  return j.dump(2);
}

std::string sim_result_csv(const SimResult& r) {
  char buf[512];
  std::string out =
      "alpha,gamma,schedule,seed,runs,blocks_per_run,block_pool,block_honest,"
      "uncle_pool,uncle_honest,nephew_pool,nephew_honest,regular_rate,"
      "uncle_rate,u_pool_main,u_honest_main,u_pool_incl,u_honest_incl\n";
  std::snprintf(buf, sizeof buf,
                "%.9g,%.9g,%s,%llu,%d,%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                r.config.alpha, r.config.gamma, r.schedule_tag.c_str(),
                static_cast<unsigned long long>(r.seed), r.runs,
                r.blocks_per_run, r.block_pool.mean, r.block_honest.mean,
                r.uncle_pool.mean, r.uncle_honest.mean, r.nephew_pool.mean,
                r.nephew_honest.mean, r.regular_rate.mean, r.uncle_rate.mean,
                r.u_pool_main.mean, r.u_honest_main.mean, r.u_pool_incl.mean,
                r.u_honest_incl.mean);
  out += buf;
  return out;
}

}  // namespace ethsm
