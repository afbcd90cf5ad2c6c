#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "radarnet/errors.hpp"
#include "radarnet/simkit.hpp"

using namespace radarnet;
using namespace radarnet::sim;
using doctest::Approx;

namespace {

MetricsRecord rec(long tick, double utility, double load, double coverage, int conflicts) {
  MetricsRecord r;
  r.tick = tick;
  r.utility = utility;
  r.load_mean = load;
  r.coverage = coverage;
  r.conflicts = conflicts;
  return r;
}

}  // namespace

TEST_CASE("family defaults") {
  const struct {
    ScenarioKind kind;
    int radars, targets;
  } table[] = {{ScenarioKind::NonSaturated, 5, 10},
               {ScenarioKind::FewSaturated, 3, 12},
               {ScenarioKind::SeveralSaturated, 5, 20},
               {ScenarioKind::ManySaturated, 8, 30},
               {ScenarioKind::IllPositioned, 4, 20}};
  for (const auto& row : table) {
    const World w = generate_scenario(default_spec(row.kind, 3));
    CHECK(static_cast<int>(w.radars.size()) == row.radars);
    CHECK(static_cast<int>(w.targets.size()) == row.targets);
    CHECK(parse_kind(kind_name(row.kind)) == row.kind);
  }
  CHECK_FALSE(parse_kind("saturated").has_value());
  CHECK(parse_method("central") == Method::Central);
}

TEST_CASE("scenario generation") {
  const ScenarioSpec spec = default_spec(ScenarioKind::ManySaturated, 9);
  const World a = generate_scenario(spec), b = generate_scenario(spec);
  REQUIRE(a.targets.size() == b.targets.size());
  for (std::size_t j = 0; j < a.targets.size(); ++j) {
    CHECK(a.targets[j].position == b.targets[j].position);
    CHECK(a.targets[j].velocity == b.targets[j].velocity);
    const Target& t = a.targets[j];
    const bool on_edge = t.position.x == 0.0 || t.position.y == 0.0 || t.position.x == spec.field_width ||
                         t.position.y == spec.field_height;
    CHECK(on_edge);
    const double speed = t.velocity.norm();
    CHECK(speed >= spec.speed_min - 1e-9);
    CHECK(speed <= spec.speed_max + 1e-9);
    // Heading points into the field.
    const Vec2 inward = Vec2{spec.field_width / 2, spec.field_height / 2} - t.position;
    CHECK(dot(inward, t.velocity) > 0.0);
  }
  CHECK(generate_scenario(default_spec(ScenarioKind::ManySaturated, 10)).targets[0].position !=
        a.targets[0].position);

  const ScenarioSpec ill = default_spec(ScenarioKind::IllPositioned, 4);
  for (const RadarConfig& r : generate_scenario(ill).radars) {
    CHECK(r.position.x <= ill.field_width / 4);
    CHECK(r.position.y <= ill.field_height / 4);
  }

  ScenarioSpec empty = spec;
  empty.n_targets = 0;
  CHECK_THROWS_AS(generate_scenario(empty), EmptyScenario);
  empty = spec;
  empty.n_radars = 0;
  CHECK_THROWS_AS(generate_scenario(empty), EmptyScenario);
}

TEST_CASE("scenario files round trip") {
  ScenarioSpec spec = default_spec(ScenarioKind::IllPositioned, 12);
  spec.gamma = 0.25;
  std::stringstream io;
  write_spec(io, spec);
  const ScenarioSpec back = read_spec(io);
  CHECK(back.kind == spec.kind);
  CHECK(back.placement == Placement::Clustered);
  CHECK(back.gamma == spec.gamma);
  CHECK(back.seed == 12);
  CHECK(back.n_targets == 20);
  std::istringstream bad(R"({"kind": "sideways"})");
  CHECK_THROWS(read_spec(bad));
}

TEST_CASE("world stepping") {
  World w;
  w.spec = default_spec(ScenarioKind::NonSaturated);
  w.targets = {{1, {1000, 2000}, {0, 0}}, {2, {100, 40'000}, {-300, 0}}, {3, {10'000, 10'000}, {120, -50}}};
  step_world(w, 1.0);
  CHECK(w.targets[0].position == Vec2{1000, 2000});
  CHECK(w.targets[1].position.x == Approx(200.0));
  CHECK(w.targets[1].velocity.x == 300.0);
  CHECK(w.targets[1].velocity.y == 0.0);
  CHECK_THROWS_AS(step_world(w, 0.0), ContractError);

  World far;
  far.spec = w.spec;
  far.targets = {{3, {10'000, 10'000}, {120, -50}}};
  for (int k = 0; k < 100; ++k) step_world(far, 1.0);
  CHECK(far.targets[0].position.x == Approx(22'000.0));
  CHECK(far.targets[0].position.y == Approx(5'000.0));
}

TEST_CASE("episodes") {
  ScenarioSpec spec = default_spec(ScenarioKind::NonSaturated, 2);
  CHECK_THROWS_AS(run_episode(spec, Method::Cbba, 0), ContractError);

  for (Method m : {Method::Cbba, Method::Central}) {
    const EpisodeResult r = run_episode(spec, m, 30);
    REQUIRE(r.records.size() == 30);
    CHECK(r.validation_failures == 0);
    CHECK(r.pairing_failures == 0);
    CHECK(r.budget_failures == 0);
    CHECK(r.non_optimal_solves == 0);
    for (const MetricsRecord& x : r.records) {
      CHECK(x.method == m);
      CHECK(x.utility >= 0.0);
      CHECK(x.coverage >= 0.0);
      CHECK(x.coverage <= 1.0);
      CHECK(x.load.size() == 5);
    }
  }
}

TEST_CASE("one radar tracking one still target keeps improving") {
  ScenarioSpec spec = default_spec(ScenarioKind::NonSaturated, 5);
  spec.n_radars = 1;
  spec.n_targets = 1;
  spec.speed_min = spec.speed_max = 0.0;
  spec.filter.q = 0.0;
  const EpisodeResult r = run_episode(spec, Method::Central, 60);
  for (std::size_t t = 1; t < r.records.size(); ++t) {
    CHECK(r.records[t].utility >= r.records[t - 1].utility - 1e-12);
  }
  CHECK(r.records.back().utility > r.records.front().utility);
}

TEST_CASE("aggregation") {
  const std::vector<std::vector<MetricsRecord>> two{{rec(1, 1.0, 0.2, 0.5, 0)}, {rec(1, 3.0, 0.4, 1.0, 2)}};
  const auto rows = aggregate(two);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n_seeds == 2);
  CHECK(rows[0].utility.mean == Approx(2.0));
  CHECK(rows[0].utility.stddev == Approx(std::sqrt(2.0)));
  CHECK(rows[0].conflicts.mean == Approx(1.0));

  const auto single = aggregate({{rec(1, 1.0, 0.2, 0.5, 0), rec(2, 2.0, 0.2, 0.5, 0)}});
  REQUIRE(single.size() == 2);
  CHECK(single[0].utility.stddev == 0.0);
  CHECK(single[1].tick == 2);

  const auto same = aggregate({{rec(1, 1.5, 0.2, 0.5, 0)}, {rec(1, 1.5, 0.2, 0.5, 0)}});
  CHECK(same[0].utility.stddev == 0.0);

  CHECK_THROWS_AS(aggregate({}), ContractError);

  const Summary s = summarize(aggregate({{rec(1, 1.0, 0.2, 0.5, 0), rec(2, 3.0, 0.4, 1.0, 0)}}), Method::Cbba);
  CHECK(s.utility == Approx(2.0));
  CHECK(s.load == Approx(0.3));
  CHECK(s.coverage == Approx(0.75));
}

TEST_CASE("communication schedules") {
  std::istringstream in(
      R"({"schedule": [{"from_tick": 0, "edges": [[1, 2], [2, 3]]}, {"from_tick": 5, "edges": [[1, 2], [2, 3], [1, 3]]}]})");
  const CommSchedule c = CommSchedule::read(in);
  const std::vector<int> nodes{1, 2, 3};
  CHECK(c.graph_at(1, nodes).diameter() == 2);
  CHECK(c.graph_at(5, nodes).diameter() == 1);
  CHECK(CommSchedule{}.graph_at(1, nodes).diameter() == 1);
  std::istringstream split(R"({"edges": [[1, 2]]})");
  CHECK_FALSE(CommSchedule::read(split).graph_at(3, nodes).connected());
}
