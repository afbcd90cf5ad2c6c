#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "radarnet/cbba.hpp"
#include "radarnet/cop.hpp"
#include "radarnet/geometry.hpp"
#include "radarnet/tracking.hpp"

namespace radarnet::sim {

enum class ScenarioKind { NonSaturated, FewSaturated, SeveralSaturated, ManySaturated, IllPositioned };
enum class Placement { Grid, Clustered };
enum class Method { Cbba, Central };

const char* kind_name(ScenarioKind k);  // e.g. "non_saturated"
std::optional<ScenarioKind> parse_kind(const std::string& s);
const char* method_name(Method m);      // "cbba" / "central"
std::optional<Method> parse_method(const std::string& s);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::NonSaturated;
  int n_radars = 5;
  int n_targets = 10;
  double field_width = 80'000.0;   // meters
  double field_height = 80'000.0;  // meters
  Placement placement = Placement::Grid;
  double speed_min = 100.0;        // m/s
  double speed_max = 300.0;        // m/s
  double heading_change_prob = 0.0;  // per target per tick
  double gamma = 0.2;              // load per tracked target
  double budget = 1.0;             // per radar per tick
  double max_range = 60'000.0;
  double range_resolution = 150.0;
  double azimuth_resolution = 0.034906585039886591;  // 2 degrees
  double snr = 13.0;
  FilterParams filter;
  std::uint64_t seed = 1;
};

/// Defaults for one of the five reference families.
ScenarioSpec default_spec(ScenarioKind kind, std::uint64_t seed = 1);

ScenarioSpec read_spec(std::istream& in);
void write_spec(std::ostream& out, const ScenarioSpec& spec);

struct Target {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
};

struct World {
  ScenarioSpec spec;
  std::vector<RadarConfig> radars;
  std::vector<Target> targets;
  long tick = 0;

  std::vector<int> target_ids() const;
};

/// Deterministic from spec.seed. Throws EmptyScenario on zero counts.
World generate_scenario(const ScenarioSpec& spec);

/// Advances targets; a target leaving the field is mirrored back with its
/// heading reflected. Throws ContractError when dt <= 0.
void step_world(World& world, double dt);

/// Communication topology, possibly changing over time: the edge list of the
/// last entry whose from_tick <= tick applies. Empty means complete graph.
struct CommSchedule {
  std::vector<std::pair<long, std::vector<std::pair<int, int>>>> phases;

  cbba::CommGraph graph_at(long tick, const std::vector<int>& nodes) const;
  static CommSchedule read(std::istream& in);
};

struct MetricsRecord {
  long tick = 0;
  Method method = Method::Cbba;
  double utility = 0.0;
  std::vector<double> load;  // per radar, load units
  double load_mean = 0.0;
  double coverage = 0.0;
  int conflicts = 0;
  bool optimal = true;
};

struct EpisodeOptions {
  cop::SolveLimits limits{std::chrono::milliseconds{0}, 200'000};
  CommSchedule comm;
  cbba::TranscriptWriter* transcript = nullptr;
};

struct EpisodeResult {
  std::vector<MetricsRecord> records;
  long validation_failures = 0;  // allocations with any violation
  long pairing_failures = 0;     // V(Ei ∩ Ek) > min(V(Ei), V(Ek)) on a realized pair
  long budget_failures = 0;      // agent ledgers over budget
  long non_optimal_solves = 0;
};

/// Runs one method on one scenario for n_ticks. Measurement noise is keyed
/// on (seed, radar, target, tick), so both methods see the same noise and
/// differ only by allocation. Throws ContractError when n_ticks <= 0.
EpisodeResult run_episode(const ScenarioSpec& spec, Method method, int n_ticks, const EpisodeOptions& opts = {});

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;  // unbiased; 0 for a single sample
};

struct AggregateRow {
  long tick = 0;
  Method method = Method::Cbba;
  int n_seeds = 0;
  MetricStat utility;
  MetricStat load_mean;
  MetricStat coverage;
  MetricStat conflicts;
};

/// Per-tick mean and standard deviation across seeds, for each method present.
/// Throws ContractError on an empty input.
std::vector<AggregateRow> aggregate(const std::vector<std::vector<MetricsRecord>>& per_seed);

/// Mean over ticks of a per-episode metric, then over seeds.
struct Summary {
  double utility = 0.0;
  double load = 0.0;
  double coverage = 0.0;
  double conflicts = 0.0;
};
Summary summarize(const std::vector<AggregateRow>& rows, Method method);

}  // namespace radarnet::sim
