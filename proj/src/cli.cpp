#include "radarnet/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "radarnet/cop_io.hpp"
#include "radarnet/errors.hpp"
#include "radarnet/metrics.hpp"
#include "radarnet/transcript.hpp"

namespace radarnet::cli {

namespace fs = std::filesystem;

namespace {

int log_level() {
  const char* v = std::getenv("RADARNET_LOG");
  if (!v) return 1;
  const std::string s(v);
  if (s == "0" || s == "quiet") return 0;
  if (s == "2" || s == "debug") return 2;
  return 1;
}

class Logger {
 public:
  explicit Logger(std::ostream& err) : err_(err), level_(log_level()) {}
  void info(const std::string& msg) { write(1, msg); }
  void debug(const std::string& msg) { write(2, msg); }

 private:
  void write(int level, const std::string& msg) {
    if (level > level_) return;
    std::lock_guard lock(mu_);
    err_ << "[radarnet] " << msg << '\n';
  }
  std::ostream& err_;
  int level_;
  std::mutex mu_;
};

std::string methods_str(const std::vector<sim::Method>& methods) {
  std::string s;
  for (auto m : methods) s += (s.empty() ? "" : ",") + std::string(sim::method_name(m));
  return s;
}

}  // namespace

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Logger log(err);

  sim::ScenarioSpec base;
  try {
    if (!cfg.scenario_file.empty()) {
      std::ifstream in(cfg.scenario_file);
      if (!in) throw ContractError("cannot open scenario file " + cfg.scenario_file);
      base = sim::read_spec(in);
    } else {
      const auto kind = sim::parse_kind(cfg.scenario);
      if (!kind) throw ContractError("unknown scenario '" + cfg.scenario + "'");
      base = sim::default_spec(*kind);
    }
    if (cfg.gamma) base.gamma = *cfg.gamma;
    if (cfg.budget) base.budget = *cfg.budget;
    if (cfg.methods.empty()) throw ContractError("at least one method is required");
    if (cfg.seeds.empty()) throw ContractError("at least one seed is required");
    if (cfg.ticks <= 0) throw ContractError("--ticks must be positive");
    if (!(base.gamma > 0.0) || !(base.budget > 0.0)) throw ContractError("gamma and budget must be positive");
    base.seed = cfg.seeds.front();
    sim::generate_scenario(base);
  } catch (const std::exception& e) {
    err << "radarnet run: " << e.what() << '\n';
    return kUsageError;
  }

  sim::EpisodeOptions opts;
  opts.limits.time_limit = std::chrono::milliseconds{cfg.time_limit_ms};
  opts.limits.node_limit = cfg.node_limit;
  if (cfg.comm_graph != "complete") {
    std::ifstream in(cfg.comm_graph);
    if (!in) {
      err << "radarnet run: cannot open comm graph " << cfg.comm_graph << '\n';
      return kUsageError;
    }
    try {
      opts.comm = sim::CommSchedule::read(in);
    } catch (const std::exception& e) {
      err << "radarnet run: bad comm graph: " << e.what() << '\n';
      return kUsageError;
    }
  }

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec || !fs::is_directory(cfg.out_dir)) {
    err << "radarnet run: cannot create output directory " << cfg.out_dir << '\n';
    return kUsageError;
  }

  const std::string scenario = sim::kind_name(base.kind);
  log.info("run " + scenario + " methods=" + methods_str(cfg.methods) + " seeds=" +
           std::to_string(cfg.seeds.size()) + " ticks=" + std::to_string(cfg.ticks));

  std::ofstream transcript_file;
  std::optional<cbba::TranscriptWriter> transcript;
  if (!cfg.transcript.empty()) {
    transcript_file.open(cfg.transcript);
    if (!transcript_file) {
      err << "radarnet run: cannot write transcript " << cfg.transcript << '\n';
      return kUsageError;
    }
    transcript.emplace(transcript_file);
  }

  // Per-seed results, filled by workers and written afterwards by this thread.
  std::vector<std::vector<sim::MetricsRecord>> per_seed(cfg.seeds.size());
  std::vector<std::string> failures(cfg.seeds.size());
  std::vector<long> feasibility_failures(cfg.seeds.size(), 0);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t idx = next++; idx < cfg.seeds.size(); idx = next++) {
      sim::ScenarioSpec spec = base;
      spec.seed = cfg.seeds[idx];
      try {
        for (sim::Method m : cfg.methods) {
          sim::EpisodeOptions o = opts;
          if (idx == 0 && m == sim::Method::Cbba && transcript) o.transcript = &*transcript;
          sim::EpisodeResult r = sim::run_episode(spec, m, cfg.ticks, o);
          feasibility_failures[idx] += r.validation_failures + r.budget_failures;
          log.debug("seed " + std::to_string(spec.seed) + " " + sim::method_name(m) + " done, " +
                    std::to_string(r.non_optimal_solves) + " non-optimal solves");
          per_seed[idx].insert(per_seed[idx].end(), r.records.begin(), r.records.end());
        }
      } catch (const std::exception& e) {
        failures[idx] = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(cfg.seeds.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t idx = 0; idx < failures.size(); ++idx) {
    if (!failures[idx].empty()) {
      err << "radarnet run: seed " << cfg.seeds[idx] << " failed: " << failures[idx] << '\n';
      return kRuntimeError;
    }
  }

  for (std::size_t idx = 0; idx < cfg.seeds.size(); ++idx) {
    std::ofstream f(fs::path(cfg.out_dir) / ("seed_" + std::to_string(cfg.seeds[idx]) + ".csv"));
    sim::write_records_header(f);
    sim::write_records_csv(f, per_seed[idx], cfg.seeds[idx], scenario);
  }
  const auto rows = sim::aggregate(per_seed);
  for (sim::Method m : cfg.methods) {
    std::vector<sim::AggregateRow> mine;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(mine), [&](const auto& r) { return r.method == m; });
    std::ofstream f(fs::path(cfg.out_dir) / (std::string("aggregate_") + sim::method_name(m) + ".csv"));
    sim::write_aggregate_csv(f, mine, scenario);
  }

  std::ostringstream summary;
  summary << "scenario " << scenario << " (" << base.n_radars << " radars, " << base.n_targets << " targets)\n"
          << "seeds " << cfg.seeds.size() << ", ticks " << cfg.ticks << ", gamma " << sim::format_number(base.gamma)
          << ", budget " << sim::format_number(base.budget) << "\n\n"
          << "method   utility       load          coverage      conflicts\n";
  for (sim::Method m : cfg.methods) {
    const sim::Summary s = sim::summarize(rows, m);
    summary << std::string(sim::method_name(m)).append(9 - std::string(sim::method_name(m)).size(), ' ')
            << sim::format_number(s.utility) << "   " << sim::format_number(s.load) << "   "
            << sim::format_number(s.coverage) << "   " << sim::format_number(s.conflicts) << '\n';
  }
  const bool both = std::count(cfg.methods.begin(), cfg.methods.end(), sim::Method::Cbba) &&
                    std::count(cfg.methods.begin(), cfg.methods.end(), sim::Method::Central);
  if (both) {
    const sim::Summary c = sim::summarize(rows, sim::Method::Cbba);
    const sim::Summary z = sim::summarize(rows, sim::Method::Central);
    summary << "\ncbba/central utility ratio " << sim::format_number(z.utility > 0 ? c.utility / z.utility : 0.0)
            << " (reference band >= 0.8)\n"
            << "cbba load <= central load: " << (c.load <= z.load ? "yes" : "no") << '\n'
            << "central coverage >= cbba coverage: " << (z.coverage >= c.coverage ? "yes" : "no") << '\n';
  }
  long infeasible = 0;
  for (long f : feasibility_failures) infeasible += f;
  summary << "infeasible allocations: " << infeasible << '\n';
  {
    std::ofstream f(fs::path(cfg.out_dir) / "summary.txt");
    f << summary.str();
  }
  out << summary.str();
  return infeasible == 0 ? kOk : kRuntimeError;
}

int cmd_solve(const std::string& instance_file, long time_limit_ms, std::ostream& out, std::ostream& err) {
  cop::CopInstance inst = [&] {
    try {
      return cop::read_instance_file(instance_file);
    } catch (const cop::ParseError& e) {
      err << "radarnet solve: " << e.what() << '\n';
      throw;
    }
  }();
  const cop::SolveResult r = cop::solve_exact(inst, std::chrono::milliseconds{time_limit_ms});
  out << "objective " << sim::format_number(r.objective) << '\n';
  out << "optimal " << (r.optimal ? "true" : "false") << '\n';
  for (const auto& w : r.allocation.w) {
    out << "w=(" << w.main << ',' << w.optional << ',' << w.target << ")\n";
  }
  return kOk;
}

int cmd_replay(const std::string& transcript_file, std::ostream& out, std::ostream& err) {
  std::ifstream in(transcript_file);
  if (!in) {
    err << "radarnet replay: cannot open " << transcript_file << '\n';
    return kUsageError;
  }
  const cbba::ReplayResult r = cbba::replay_transcript(in);
  if (!r.ok) {
    err << "radarnet replay: diverged at tick " << r.first_mismatch_tick << ": " << r.detail << '\n';
    return kRuntimeError;
  }
  out << "replay ok: " << r.phases_checked << " consensus phases verified\n";
  return kOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized multi-radar target allocation: CBBA vs exact centralized baseline"};
  app.require_subcommand(1);

  RunConfig run;
  std::string methods = "cbba,central";
  int n_seeds = 1;
  std::uint64_t seed_base = 1;
  std::vector<std::uint64_t> seed_list;
  auto* run_cmd = app.add_subcommand("run", "Run scenario episodes and write metrics CSVs");
  run_cmd->add_option("--scenario", run.scenario,
                      "non_saturated | few_saturated | several_saturated | many_saturated | ill_positioned");
  run_cmd->add_option("--scenario-file", run.scenario_file, "JSON scenario spec");
  run_cmd->add_option("--methods", methods, "Comma-separated subset of cbba,central");
  run_cmd->add_option("--seeds", n_seeds, "Number of seeds");
  run_cmd->add_option("--seed-base", seed_base, "First seed");
  run_cmd->add_option("--seed-list", seed_list, "Explicit seeds (overrides --seeds/--seed-base)");
  run_cmd->add_option("--ticks", run.ticks, "Ticks per episode");
  run_cmd->add_option("--out", run.out_dir, "Output directory");
  run_cmd->add_option("--time-limit-ms", run.time_limit_ms, "Centralized solver wall-clock limit per tick (0 = none)");
  run_cmd->add_option("--node-limit", run.node_limit, "Centralized solver node limit per tick (0 = none)");
  run_cmd->add_option("--comm-graph", run.comm_graph, "'complete' or a JSON edge list / schedule");
  run_cmd->add_option("--gamma", run.gamma, "Load per tracked target");
  run_cmd->add_option("--budget", run.budget, "Per-radar load budget");
  run_cmd->add_option("--transcript", run.transcript, "Write the CBBA message transcript of the first seed");
  run_cmd->add_option("--jobs", run.jobs, "Worker threads for seeds");

  std::string instance_file;
  long solve_limit = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one allocation instance exactly");
  solve_cmd->add_option("instance", instance_file, "Instance JSON")->required();
  solve_cmd->add_option("--time-limit-ms", solve_limit, "Wall-clock limit (0 = none)");

  std::string transcript_file;
  auto* replay_cmd = app.add_subcommand("replay", "Re-execute and verify a CBBA message transcript");
  replay_cmd->add_option("transcript", transcript_file, "Transcript file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*run_cmd) {
      run.methods.clear();
      std::stringstream ss(methods);
      for (std::string tok; std::getline(ss, tok, ',');) {
        const auto m = sim::parse_method(tok);
        if (!m) {
          err << "radarnet run: unknown method '" << tok << "'\n";
          return kUsageError;
        }
        if (std::find(run.methods.begin(), run.methods.end(), *m) == run.methods.end()) run.methods.push_back(*m);
      }
      if (!seed_list.empty()) {
        run.seeds = seed_list;
      } else {
        if (n_seeds <= 0) {
          err << "radarnet run: --seeds must be positive\n";
          return kUsageError;
        }
        run.seeds.clear();
        for (int s = 0; s < n_seeds; ++s) run.seeds.push_back(seed_base + static_cast<std::uint64_t>(s));
      }
      return cmd_run(run, out, err);
    }
    if (*solve_cmd) return cmd_solve(instance_file, solve_limit, out, err);
    if (*replay_cmd) return cmd_replay(transcript_file, out, err);
  } catch (const cop::ParseError&) {
    return kUsageError;
  } catch (const std::exception& e) {
    err << "radarnet: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace radarnet::cli
