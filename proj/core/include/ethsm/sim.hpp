#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ethsm/model.hpp"

namespace ethsm {

enum class Miner { Pool, Honest, Genesis };
enum class BlockStatus { Pending, Regular, Uncle, Stale };

struct Block {
  int id = 0;
  int parent = -1;
  int height = 0;
  Miner miner = Miner::Genesis;
  std::vector<int> uncle_refs;  // uncles this block references
  std::vector<int> children;
  long long published_at = -1;  // event index; -1 while private
  BlockStatus status = BlockStatus::Pending;
  int uncle_distance = 0;       // set when status == Uncle
  bool scored = false;          // counts toward tallies
  ChainState pre_state;         // chain state when the block was mined
};

struct SimOptions {
  int max_uncles_per_block = -1;  // < 0: unlimited references per block
  int n_miners = 0;               // > 0: sample individual honest miners
  long long settle_event_cap = 10'000'000;
};

/// One block-creation event. `prefers_pool` is consulted only for honest
/// events while a fork is standing: it is the gamma draw deciding whether
/// the honest block extends the pool's published prefix.
struct Event {
  bool pool = false;
  bool prefers_pool = false;
};

struct StepRecord {
  ChainState pre;
  ChainState post;
  int block_id = 0;
  int newly_published = 0;        // pool blocks made public by this event
  std::vector<int> uncle_refs;    // references created by the new block
};

/// Deterministic single-run engine: feed it events, then finalize. All
/// randomness lives outside (in run_simulation's event loop), which keeps
/// replay traces and unit tests exact.
class Simulator {
 public:
  Simulator(const MiningConfig& config, const RewardSchedule& schedule,
            const SimOptions& options = {});

  StepRecord step(const Event& event);

  ChainState state() const;
  /// Marks whether blocks created from now on count toward tallies.
  void set_scoring(bool scoring) { scoring_ = scoring; }
  /// True once the fork is resolved and no referenceable stale block's
  /// window is still open, so every scored block's fate is sealed.
  bool settled() const;
  /// Resolves every block's status against the final consensus chain.
  void finalize();

  const std::vector<Block>& blocks() const { return blocks_; }
  long long events() const { return event_index_; }
  /// False if the equal-length public-branch invariant was ever violated.
  bool equal_length_ok() const { return equal_length_ok_; }

 private:
  void add_references(Block& b);
  Block& new_block(int parent, Miner miner);

  MiningConfig config_;
  int max_ref_;
  SimOptions options_;
  std::vector<Block> blocks_;
  int fork_base_;               // consensus tip block id
  std::vector<int> private_;    // pool blocks above fork_base
  int published_ = 0;           // public prefix length of private_
  std::vector<int> honest_branch_;
  long long event_index_ = 0;
  bool scoring_ = true;
  bool equal_length_ok_ = true;
};

/// True iff every scored block mined while the pool's lead was >= 2 is
/// Regular exactly when pool-mined (and never when honest-mined).
bool verify_lemma1(const std::vector<Block>& blocks);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // standard error across runs
};

Estimate estimate_from(const std::vector<double>& samples);

/// Per-run tallies; every rate is per scored block-creation event.
struct RunStats {
  double block_pool = 0.0;
  double block_honest = 0.0;
  double uncle_pool = 0.0;
  double uncle_honest = 0.0;
  double nephew_pool = 0.0;
  double nephew_honest = 0.0;
  double regular_rate = 0.0;
  double uncle_rate = 0.0;
  std::vector<long long> honest_uncle_hist;  // index = distance, [0] unused
  std::map<ChainState, long long> occupancy;
  long long scored_blocks = 0;
  long long total_events = 0;
  bool lemma1_ok = true;
  bool equal_length_ok = true;
};

struct SimResult {
  MiningConfig config;
  std::string schedule_tag;
  std::uint64_t seed = 0;
  int runs = 0;
  long long blocks_per_run = 0;

  std::vector<RunStats> per_run;

  Estimate block_pool, block_honest;
  Estimate uncle_pool, uncle_honest;
  Estimate nephew_pool, nephew_honest;
  Estimate regular_rate, uncle_rate;
  /// Absolute revenues per difficulty-adjusted block under the two
  /// normalizations (main-chain rate only / including uncles).
  Estimate u_pool_main, u_honest_main;
  Estimate u_pool_incl, u_honest_incl;

  std::vector<double> honest_uncle_hist;  // pooled, normalized, index = d
  double hist_expectation = 0.0;

  bool lemma1_ok = true;
  bool equal_length_ok = true;
};

/// Runs `runs` independent simulations of `blocks` scored events each and
/// aggregates them. Each run derives its own RNG stream from `seed`; the
/// result is bit-identical for identical inputs regardless of `workers`.
SimResult run_simulation(const MiningConfig& config,
                         const RewardSchedule& schedule, long long blocks,
                         int runs, std::uint64_t seed,
                         const SimOptions& options = {}, int workers = 0);

std::string sim_result_json(const SimResult& result);
std::string sim_result_csv(const SimResult& result);  // header + one row

/// Seed for run number `run` of a simulation seeded with `seed`; exposed so
/// traces can replay a specific run's event stream exactly.
std::uint64_t derive_run_seed(std::uint64_t seed, int run);

/// The uniform [0, 1) draw the event loop uses (top 53 bits of the engine,
/// identical across platforms).
double sim_uniform(std::mt19937_64& rng);

}  // namespace ethsm
