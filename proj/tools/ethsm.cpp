// Command-line front-end: stationary distributions, revenue analysis,
// profitability thresholds, Monte Carlo simulation and parameter sweeps.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ethsm/config_io.hpp"
#include "ethsm/markov.hpp"
#include "ethsm/revenue.hpp"
#include "ethsm/rewards.hpp"
#include "ethsm/sim.hpp"

using namespace ethsm;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct GlobalOpts {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 42;
  int truncation = 200;
  int workers = 0;

  ToolConfig tool;  // defaults, possibly overridden by --config

  int resolve_workers() const {
    if (workers > 0) return workers;
    if (const char* env = std::getenv("ETHSM_WORKERS")) {
      int w = std::atoi(env);
      if (w > 0) return w;
    }
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

void write_output(const GlobalOpts& g, const std::string& text) {
  if (g.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(g.out_path);
    if (!out) throw std::runtime_error("cannot write " + g.out_path);
    out << text;
  }
}

RewardSchedule schedule_from_tag(const std::string& tag, double fixed_value,
                                 int max_ref, double nephew_value) {
  if (tag == "ethereum")
    return RewardSchedule::ethereum(max_ref, nephew_value);
  if (tag == "bitcoin") return RewardSchedule::bitcoin();
  if (tag == "fixed")
    return RewardSchedule::fixed(fixed_value, max_ref, nephew_value);
  if (tag.rfind("fixed:", 0) == 0)
    return RewardSchedule::fixed(std::stod(tag.substr(6)), max_ref,
                                 nephew_value);
  throw CLI::ValidationError("schedule",
                             "unknown schedule tag: " + tag +
                                 " (use ethereum, bitcoin, fixed, fixed:<v>)");
}

Scenario scenario_from_int(int s) {
  if (s == 1) return Scenario::MainChainDifficulty;
  if (s == 2) return Scenario::UncleInclusiveDifficulty;
  throw CLI::ValidationError("scenario", "scenario must be 1 or 2");
}

// Runs jobs [0, n) on a bounded pool; results land in submission order.
template <typename Fn>
auto parallel_map(int n, int workers, Fn&& fn)
    -> std::vector<decltype(fn(0))> {
  std::vector<decltype(fn(0))> out(n);
  for (int base = 0; base < n; base += workers) {
    int end = std::min(n, base + workers);
    std::vector<std::future<decltype(fn(0))>> batch;
    for (int i = base; i < end; ++i)
      batch.push_back(std::async(std::launch::async, fn, i));
    for (int i = base; i < end; ++i) out[i] = batch[i - base].get();
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_stationary(const GlobalOpts& g, double alpha, double gamma) {
  MiningConfig config{alpha, gamma};
  if (!config.analytic_ok()) {
    std::cerr << "error: alpha out of range for stationary analysis "
                 "(need 0 < alpha < 0.5)\n";
    return 2;
  }
  StationaryDistribution cf = stationary_closed_form(config, g.truncation);
  StationaryDistribution num =
      stationary_numeric(config, g.truncation, 1e-12, 200000);
  double discrepancy = 0.0;
  for (const ChainState& s : cf.states())
    discrepancy = std::max(discrepancy, std::abs(cf.pi(s) - num.pi(s)));

  if (cf.tail_mass_bound > 1e-9)
    std::cerr << "warning: truncated tail mass " << fmt(cf.tail_mass_bound)
              << "; consider a larger --truncation\n";

  if (g.format == "json") {
    json j{{"alpha", alpha},
           {"gamma", gamma},
           {"truncation", g.truncation},
           {"closed_form_residual", cf.balance_residual},
           {"closed_form_tail_mass", cf.tail_mass_bound},
           {"numeric_residual", num.balance_residual},
           {"numeric_iterations", num.iterations},
           {"max_state_discrepancy", discrepancy}};
    json rows = json::array();
    for (const ChainState& s : cf.states())
      rows.push_back({{"i", s.l_s},
                      {"j", s.l_h},
                      {"closed_form", cf.pi(s)},
                      {"numeric", num.pi(s)}});
    j["states"] = rows;
    write_output(g, j.dump(2) + "\n");
  } else {
    std::string out = distribution_csv(cf, "closed_form");
    std::string numeric_csv = distribution_csv(num, "numeric");
    out += numeric_csv.substr(numeric_csv.find('\n') + 1);  // drop header
    out += "# max_state_discrepancy = " + fmt(discrepancy) + "\n";
    out += "# closed_form_residual = " + fmt(cf.balance_residual) + "\n";
    out += "# closed_form_tail_mass = " + fmt(cf.tail_mass_bound) + "\n";
    out += "# numeric_residual = " + fmt(num.balance_residual) + "\n";
    write_output(g, out);
  }
  // Agreement is truncation-limited; the tail bound sets what is achievable.
  double budget = std::max(1e-9, 10.0 * cf.tail_mass_bound);
  return discrepancy <= budget ? 0 : 1;
}

int cmd_revenue(const GlobalOpts& g, double alpha, double gamma,
                const RewardSchedule& schedule, Scenario scenario) {
  MiningConfig config{alpha, gamma};
  auto errors = validate_config(config, schedule);
  if (!errors.empty() || !config.analytic_ok()) {
    for (const auto& e : errors) std::cerr << "error: " << e << "\n";
    if (!config.analytic_ok())
      std::cerr << "error: alpha out of range for stationary analysis\n";
    return 2;
  }
  StationaryDistribution dist = stationary_closed_form(config, g.truncation);
  RevenueBreakdown rev = aggregate_revenue(dist, config, schedule);
  AbsoluteRevenue abs = absolute_revenue(rev, scenario);
  bool consistent = rev.static_mismatch <= 1e-8;

  json j{{"alpha", alpha},
         {"gamma", gamma},
         {"schedule", schedule.tag()},
         {"scenario", scenario == Scenario::MainChainDifficulty ? 1 : 2},
         {"block_pool", rev.block_pool},
         {"block_honest", rev.block_honest},
         {"uncle_pool", rev.uncle_pool},
         {"uncle_honest", rev.uncle_honest},
         {"nephew_pool", rev.nephew_pool},
         {"nephew_honest", rev.nephew_honest},
         {"uncle_rate", rev.uncle_rate},
         {"total", rev.total()},
         {"u_pool", abs.pool},
         {"u_honest", abs.honest},
         {"relative_share", relative_share(rev)},
         {"static_mismatch", rev.static_mismatch},
         {"nephew_series_mismatch", rev.nephew_mismatch},
         {"consistency", consistent ? "ok" : "FAILED"}};
  if (g.format == "json") {
    write_output(g, j.dump(2) + "\n");
  } else {
    std::string header, row;
    for (auto it = j.begin(); it != j.end(); ++it) {
      header += (header.empty() ? "" : ",") + it.key();
      row += row.empty() ? "" : ",";
      row += it.value().is_number() ? fmt(it.value().get<double>())
                                    : it.value().get<std::string>();
    }
    write_output(g, header + "\n" + row + "\n");
  }
  if (!consistent) {
    std::cerr << "error: revenue consistency check failed (mismatch "
              << fmt(rev.static_mismatch) << " > 1e-8)\n";
    return 1;
  }
  return 0;
}

int cmd_threshold(const GlobalOpts& g, const std::vector<double>& gammas,
                  const std::vector<std::string>& schedules,
                  const std::vector<int>& scenarios, double fixed_value,
                  double tolerance) {
  struct Cell {
    double gamma;
    int scenario;
    std::string schedule;
  };
  std::vector<Cell> cells;
  for (double gamma : gammas)
    for (const std::string& tag : schedules)
      for (int sc : scenarios) cells.push_back({gamma, sc, tag});

  auto results = parallel_map(
      static_cast<int>(cells.size()), g.resolve_workers(), [&](int i) {
        const Cell& c = cells[i];
        RewardSchedule schedule = schedule_from_tag(
            c.schedule, fixed_value, g.tool.max_reference_distance,
            g.tool.nephew_value);
        return profitability_threshold(c.gamma, schedule,
                                       scenario_from_int(c.scenario),
                                       g.truncation, tolerance);
      });

  std::string out =
      "gamma,scenario,schedule,alpha_star,bracket_width,status,"
      "bitcoin_baseline\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const ThresholdResult& r = results[i];
    const char* status = r.status == ThresholdStatus::Found
                             ? "found"
                             : r.status == ThresholdStatus::AlwaysProfitable
                                   ? "always_profitable"
                                   : "no_crossing";
    out += fmt(c.gamma) + "," + std::to_string(c.scenario) + "," +
           c.schedule + "," +
           (r.status == ThresholdStatus::Found ? fmt(r.alpha) : "") + "," +
           fmt(tolerance) + "," + status + "," +
           fmt(bitcoin_baseline_threshold(c.gamma)) + "\n";
  }
  write_output(g, out);
  return 0;
}

int cmd_simulate(const GlobalOpts& g, double alpha, double gamma,
                 const RewardSchedule& schedule, long long blocks, int runs,
                 const SimOptions& options, const std::string& trace_path) {
  if (blocks < 1 || runs < 1) {
    std::cerr << "error: blocks and runs must be >= 1\n";
    return 2;
  }
  MiningConfig config{alpha, gamma};
  SimResult sim = run_simulation(config, schedule, blocks, runs, g.seed,
                                 options, g.resolve_workers());

  if (!trace_path.empty()) {
    // Replay run 0's exact event stream and log one line per event.
    std::ofstream trace(trace_path);
    std::mt19937_64 rng(derive_run_seed(g.seed, 0));
    Simulator replay(config, schedule, options);
    trace << "index,event,pre_ls,pre_lh,post_ls,post_lh,published,refs\n";
    for (long long n = 0; n < blocks; ++n) {
      Event e;
      e.pool = sim_uniform(rng) < config.alpha;
      if (!e.pool) {
        if (options.n_miners > 0) sim_uniform(rng);
        if (replay.state().l_h >= 1)
          e.prefers_pool = sim_uniform(rng) < config.gamma;
      }
      StepRecord rec = replay.step(e);
      trace << n << "," << (e.pool ? "pool" : "honest") << "," << rec.pre.l_s
            << "," << rec.pre.l_h << "," << rec.post.l_s << ","
            << rec.post.l_h << "," << rec.newly_published << ","
            << rec.uncle_refs.size() << "\n";
    }
  }

  json j = json::parse(sim_result_json(sim));
  if (config.analytic_ok()) {
    StationaryDistribution dist =
        stationary_closed_form(config, g.truncation);
    RevenueBreakdown rev = aggregate_revenue(dist, config, schedule);
    auto zscore = [](const Estimate& e, double analytic) {
      return e.se > 0.0 ? (e.mean - analytic) / e.se : 0.0;
    };
    j["analytic"] = {
        {"block_pool", rev.block_pool},
        {"block_honest", rev.block_honest},
        {"uncle_pool", rev.uncle_pool},
        {"uncle_honest", rev.uncle_honest},
        {"nephew_pool", rev.nephew_pool},
        {"nephew_honest", rev.nephew_honest},
        {"uncle_rate", rev.uncle_rate},
    };
    j["z_scores"] = {
        {"block_pool", zscore(sim.block_pool, rev.block_pool)},
        {"block_honest", zscore(sim.block_honest, rev.block_honest)},
        {"uncle_pool", zscore(sim.uncle_pool, rev.uncle_pool)},
        {"uncle_honest", zscore(sim.uncle_honest, rev.uncle_honest)},
        {"nephew_pool", zscore(sim.nephew_pool, rev.nephew_pool)},
        {"nephew_honest", zscore(sim.nephew_honest, rev.nephew_honest)},
        {"uncle_rate", zscore(sim.uncle_rate, rev.uncle_rate)},
    };
  }
  if (g.format == "csv")
    write_output(g, sim_result_csv(sim));
  else
    write_output(g, j.dump(2) + "\n");
  return sim.lemma1_ok && sim.equal_length_ok ? 0 : 1;
}

int cmd_table2(const GlobalOpts& g, const std::vector<double>& alphas,
               double gamma, const RewardSchedule& schedule, long long blocks,
               int runs) {
  std::string out = "alpha,d1,d2,d3,d4,d5,d6,expectation,uncle_samples\n";
  bool ok = true;
  for (double alpha : alphas) {
    MiningConfig config{alpha, gamma};
    SimResult sim = run_simulation(config, schedule, blocks, runs, g.seed,
                                   {}, g.resolve_workers());
    long long samples = 0;
    for (const RunStats& s : sim.per_run)
      for (std::size_t d = 1; d < s.honest_uncle_hist.size(); ++d)
        samples += s.honest_uncle_hist[d];
    out += fmt(alpha);
    for (int d = 1; d <= 6; ++d)
      out += "," + fmt(d < static_cast<int>(sim.honest_uncle_hist.size())
                           ? sim.honest_uncle_hist[d]
                           : 0.0);
    out += "," + fmt(sim.hist_expectation) + "," + std::to_string(samples);
    if (samples < 100) out += ",insufficient_sample";
    out += "\n";
    ok = ok && sim.lemma1_ok && sim.equal_length_ok;
  }
  write_output(g, out);
  return ok ? 0 : 1;
}

int cmd_sweep(const GlobalOpts& g, double a_start, double a_stop,
              double a_step, const std::vector<double>& gammas,
              const std::vector<std::string>& schedules,
              const std::vector<int>& scenarios, double fixed_value,
              const std::string& mode, long long blocks, int runs) {
  struct Cell {
    double alpha, gamma;
    std::string schedule;
    int scenario;
  };
  std::vector<Cell> cells;
  for (double a = a_start; a <= a_stop + 1e-12; a += a_step)
    for (double gamma : gammas)
      for (const std::string& tag : schedules)
        for (int sc : scenarios) cells.push_back({a, gamma, tag, sc});

  bool analytic = mode == "analytic" || mode == "both";
  bool simulate = mode == "simulate" || mode == "both";

  auto rows = parallel_map(
      static_cast<int>(cells.size()), g.resolve_workers(), [&](int i) {
        const Cell& c = cells[i];
        RewardSchedule schedule = schedule_from_tag(
            c.schedule, fixed_value, g.tool.max_reference_distance,
            g.tool.nephew_value);
        Scenario scenario = scenario_from_int(c.scenario);
        MiningConfig config{c.alpha, c.gamma};
        std::string row = fmt(c.alpha) + "," + fmt(c.gamma) + "," +
                          c.schedule + "," + std::to_string(c.scenario);
        if (analytic) {
          StationaryDistribution dist =
              stationary_closed_form(config, g.truncation);
          RevenueBreakdown rev = aggregate_revenue(dist, config, schedule);
          AbsoluteRevenue abs = absolute_revenue(rev, scenario);
          row += "," + fmt(abs.pool) + "," + fmt(abs.honest) + "," +
                 fmt(relative_share(rev));
        }
        if (simulate) {
          SimResult sim = run_simulation(config, schedule, blocks, runs,
                                         g.seed, {}, 1);
          const Estimate& up = scenario == Scenario::MainChainDifficulty
                                   ? sim.u_pool_main
                                   : sim.u_pool_incl;
          const Estimate& uh = scenario == Scenario::MainChainDifficulty
                                   ? sim.u_honest_main
                                   : sim.u_honest_incl;
          row += "," + fmt(up.mean) + "," + fmt(up.se) + "," +
                 fmt(uh.mean) + "," + fmt(uh.se);
        }
        return row + "\n";
      });

  std::string out = "alpha,gamma,schedule,scenario";
  if (analytic) out += ",u_pool,u_honest,relative_share";
  if (simulate) out += ",sim_u_pool,sim_u_pool_se,sim_u_honest,sim_u_honest_se";
  out += "\n";
  for (const std::string& row : rows) out += row;
  write_output(g, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selfish-mining revenue analysis and simulation toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--out", g.out_path, "output path (default stdout)");
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--truncation", g.truncation, "state-space truncation bound")
      ->check(CLI::PositiveNumber);
  app.add_option("--workers", g.workers,
                 "worker threads (default: hardware, or ETHSM_WORKERS)");

  double alpha = 0.3, gamma = 0.5, fixed_value = 0.5, tolerance = 1e-6;
  std::string schedule_tag = "ethereum", mode = "analytic", trace_path;
  long long blocks = 100000;
  int runs = 10, scenario = 1;
  std::vector<double> gammas{0.5}, alphas{0.3, 0.45};
  std::vector<std::string> schedule_tags{"ethereum"};
  std::vector<int> scenarios{1};
  double a_start = 0.05, a_stop = 0.45, a_step = 0.05;
  SimOptions sim_options;

  auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "pool hash-power share");
    cmd->add_option("--gamma", gamma, "tie-breaking parameter");
  };
  auto add_schedule_flags = [&](CLI::App* cmd) {
    cmd->add_option("--schedule", schedule_tag,
                    "ethereum, bitcoin, fixed, fixed:<v>");
    cmd->add_option("--fixed-uncle-value", fixed_value,
                    "uncle value for --schedule fixed");
  };

  CLI::App* stationary = app.add_subcommand(
      "stationary", "closed-form and numeric stationary distributions");
  add_model_flags(stationary);

  CLI::App* revenue =
      app.add_subcommand("revenue", "reward rates and absolute revenue");
  add_model_flags(revenue);
  add_schedule_flags(revenue);
  revenue->add_option("--scenario", scenario, "difficulty scenario (1 or 2)");

  CLI::App* threshold =
      app.add_subcommand("threshold", "profitability thresholds");
  threshold->add_option("--gammas", gammas, "gamma values")->delimiter(',');
  threshold->add_option("--schedules", schedule_tags, "schedule tags")
      ->delimiter(',');
  threshold->add_option("--scenarios", scenarios, "scenarios")->delimiter(',');
  threshold->add_option("--fixed-uncle-value", fixed_value,
                        "uncle value for fixed schedules");
  threshold->add_option("--tolerance", tolerance, "bisection tolerance");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo simulation vs analytics");
  add_model_flags(simulate);
  add_schedule_flags(simulate);
  simulate->add_option("--blocks", blocks, "scored events per run");
  simulate->add_option("--runs", runs, "independent runs");
  simulate->add_option("--max-uncles-per-block",
                       sim_options.max_uncles_per_block,
                       "cap references per block (-1 = unlimited)");
  simulate->add_option("--miners", sim_options.n_miners,
                       "simulate n discrete miners (0 = aggregate)");
  simulate->add_option("--trace", trace_path, "write an event trace file");

  CLI::App* table2 = app.add_subcommand(
      "table2", "honest uncle-distance histograms (simulated)");
  table2->add_option("--alphas", alphas, "alpha values")->delimiter(',');
  table2->add_option("--gamma", gamma, "tie-breaking parameter");
  table2->add_option("--blocks", blocks, "scored events per run");
  table2->add_option("--runs", runs, "independent runs");

  CLI::App* sweep = app.add_subcommand("sweep", "grid sweep over parameters");
  sweep->add_option("--alpha-start", a_start, "");
  sweep->add_option("--alpha-stop", a_stop, "");
  sweep->add_option("--alpha-step", a_step, "");
  sweep->add_option("--gammas", gammas, "gamma values")->delimiter(',');
  sweep->add_option("--schedules", schedule_tags, "schedule tags")
      ->delimiter(',');
  sweep->add_option("--scenarios", scenarios, "scenarios")->delimiter(',');
  sweep->add_option("--fixed-uncle-value", fixed_value, "");
  sweep->add_option("--mode", mode, "analytic, simulate or both")
      ->check(CLI::IsMember({"analytic", "simulate", "both"}));
  sweep->add_option("--blocks", blocks, "scored events per run (simulate)");
  sweep->add_option("--runs", runs, "independent runs (simulate)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!g.config_path.empty()) {
      g.tool = load_config(g.config_path);
      alpha = g.tool.mining.alpha;
      gamma = g.tool.mining.gamma;
      fixed_value = g.tool.fixed_uncle_value;
      schedule_tag = g.tool.uncle_reward_mode == UncleMode::Ethereum
                         ? "ethereum"
                         : "fixed";
    }
    // Flags given on the command line override the config file.
    for (CLI::App* cmd : {stationary, revenue, simulate}) {
      if (!cmd->parsed()) continue;
      if (cmd->count("--alpha")) alpha = cmd->get_option("--alpha")->as<double>();
      if (cmd->count("--gamma")) gamma = cmd->get_option("--gamma")->as<double>();
    }

    auto make_schedule = [&] {
      return schedule_from_tag(schedule_tag, fixed_value,
                               g.tool.max_reference_distance,
                               g.tool.nephew_value);
    };

    if (stationary->parsed()) return cmd_stationary(g, alpha, gamma);
    if (revenue->parsed())
      return cmd_revenue(g, alpha, gamma, make_schedule(),
                         scenario_from_int(scenario));
    if (threshold->parsed())
      return cmd_threshold(g, gammas, schedule_tags, scenarios, fixed_value,
                           tolerance);
    if (simulate->parsed()) {
      if (app.count("--format") == 0) g.format = "json";
      return cmd_simulate(g, alpha, gamma, make_schedule(), blocks, runs,
                          sim_options, trace_path);
    }
    if (table2->parsed())
      return cmd_table2(g, alphas, gamma, make_schedule(), blocks, runs);
    if (sweep->parsed())
      return cmd_sweep(g, a_start, a_stop, a_step, gammas, schedule_tags,
                       scenarios, fixed_value, mode, blocks, runs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
