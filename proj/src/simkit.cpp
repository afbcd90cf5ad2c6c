#include "radarnet/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <json.hpp>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

#include "radarnet/errors.hpp"

namespace radarnet::sim {

namespace {

constexpr std::pair<ScenarioKind, const char*> kKindNames[] = {
    {ScenarioKind::NonSaturated, "non_saturated"},
    {ScenarioKind::FewSaturated, "few_saturated"},
    {ScenarioKind::SeveralSaturated, "several_saturated"},
    {ScenarioKind::ManySaturated, "many_saturated"},
    {ScenarioKind::IllPositioned, "ill_positioned"},
};

// Ticks without an update after which a radar forgets a track.
constexpr long kTrackTimeout = 20;

}  // namespace

const char* kind_name(ScenarioKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

std::optional<ScenarioKind> parse_kind(const std::string& s) {
  for (const auto& [kind, name] : kKindNames) {
    if (s == name) return kind;
  }
  return std::nullopt;
}

const char* method_name(Method m) { return m == Method::Cbba ? "cbba" : "central"; }

std::optional<Method> parse_method(const std::string& s) {
  if (s == "cbba") return Method::Cbba;
  if (s == "central") return Method::Central;
  return std::nullopt;
}

ScenarioSpec default_spec(ScenarioKind kind, std::uint64_t seed) {
  ScenarioSpec s;
  s.kind = kind;
  s.seed = seed;
  switch (kind) {
    case ScenarioKind::NonSaturated:
      s.n_radars = 5;
      s.n_targets = 10;
      break;
    case ScenarioKind::FewSaturated:
      s.n_radars = 3;
      s.n_targets = 12;
      break;
    case ScenarioKind::SeveralSaturated:
      s.n_radars = 5;
      s.n_targets = 20;
      break;
    case ScenarioKind::ManySaturated:
      s.n_radars = 8;
      s.n_targets = 30;
      break;
    case ScenarioKind::IllPositioned:
      s.n_radars = 4;
      s.n_targets = 20;
      s.placement = Placement::Clustered;
      break;
  }
  // Saturated families get fewer tracking slots per radar than there are targets to go around.
  if (kind != ScenarioKind::NonSaturated) s.budget = 0.6;
  return s;
}

ScenarioSpec read_spec(std::istream& in) {
  const nlohmann::json doc = nlohmann::json::parse(in);
  const std::string kind_str = doc.value("kind", std::string("non_saturated"));
  const auto kind = parse_kind(kind_str);
  if (!kind) throw ContractError("scenario: unknown kind '" + kind_str + "'");
  ScenarioSpec s = default_spec(*kind, doc.value("seed", std::uint64_t{1}));
  s.n_radars = doc.value("n_radars", s.n_radars);
  s.n_targets = doc.value("n_targets", s.n_targets);
  s.field_width = doc.value("field_width", s.field_width);
  s.field_height = doc.value("field_height", s.field_height);
  if (doc.contains("placement")) {
    const std::string p = doc.at("placement").get<std::string>();
    if (p == "grid") {
      s.placement = Placement::Grid;
    } else if (p == "clustered") {
      s.placement = Placement::Clustered;
    } else {
      throw ContractError("scenario: unknown placement '" + p + "'");
    }
  }
  s.speed_min = doc.value("speed_min", s.speed_min);
  s.speed_max = doc.value("speed_max", s.speed_max);
  s.heading_change_prob = doc.value("heading_change_prob", s.heading_change_prob);
  s.gamma = doc.value("gamma", s.gamma);
  s.budget = doc.value("budget", s.budget);
  s.max_range = doc.value("max_range", s.max_range);
  s.range_resolution = doc.value("range_resolution", s.range_resolution);
  s.azimuth_resolution = doc.value("azimuth_resolution", s.azimuth_resolution);
  s.snr = doc.value("snr", s.snr);
  s.filter.q = doc.value("q", s.filter.q);
  s.filter.dt = doc.value("dt", s.filter.dt);
  s.filter.v_max = doc.value("v_max", s.filter.v_max);
  return s;
}

void write_spec(std::ostream& out, const ScenarioSpec& s) {
  const nlohmann::json doc = {
      {"kind", kind_name(s.kind)},
      {"n_radars", s.n_radars},
      {"n_targets", s.n_targets},
      {"field_width", s.field_width},
      {"field_height", s.field_height},
      {"placement", s.placement == Placement::Grid ? "grid" : "clustered"},
      {"speed_min", s.speed_min},
      {"speed_max", s.speed_max},
      {"heading_change_prob", s.heading_change_prob},
      {"gamma", s.gamma},
      {"budget", s.budget},
      {"max_range", s.max_range},
      {"range_resolution", s.range_resolution},
      {"azimuth_resolution", s.azimuth_resolution},
      {"snr", s.snr},
      {"q", s.filter.q},
      {"dt", s.filter.dt},
      {"v_max", s.filter.v_max},
      {"seed", s.seed},
  };
  out << doc.dump(2) << '\n';
}

std::vector<int> World::target_ids() const {
  std::vector<int> ids;
  ids.reserve(targets.size());
  for (const auto& t : targets) ids.push_back(t.id);
  return ids;
}

World generate_scenario(const ScenarioSpec& spec) {
  if (spec.n_radars <= 0 || spec.n_targets <= 0) throw EmptyScenario("scenario needs radars and targets");
  if (!(spec.field_width > 0.0) || !(spec.field_height > 0.0)) throw ContractError("scenario field must be positive");
  if (spec.speed_min < 0.0 || spec.speed_max < spec.speed_min) throw ContractError("scenario speed range invalid");

  World w;
  w.spec = spec;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double W = spec.field_width, H = spec.field_height;

  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.n_radars))));
  const int rows = (spec.n_radars + cols - 1) / cols;
  for (int k = 0; k < spec.n_radars; ++k) {
    RadarConfig r;
    r.id = k + 1;
    if (spec.placement == Placement::Grid) {
      r.position = {(k % cols + 0.5) * W / cols, (k / cols + 0.5) * H / rows};
    } else {
      // One corner quadrant covering 1/16 of the field.
      r.position = {unit(rng) * W / 4.0, unit(rng) * H / 4.0};
    }
    r.budget = Load::from_double(spec.budget);
    r.range_resolution = spec.range_resolution;
    r.azimuth_resolution = spec.azimuth_resolution;
    r.snr = spec.snr;
    r.max_range = spec.max_range;
    r.check();
    w.radars.push_back(r);
  }

  for (int j = 0; j < spec.n_targets; ++j) {
    Target t;
    t.id = j + 1;
    const int edge = static_cast<int>(unit(rng) * 4.0) % 4;
    const double along = unit(rng);
    switch (edge) {
      case 0: t.position = {along * W, 0.0}; break;
      case 1: t.position = {W, along * H}; break;
      case 2: t.position = {along * W, H}; break;
      default: t.position = {0.0, along * H}; break;
    }
    const Vec2 aim{W * (0.25 + 0.5 * unit(rng)), H * (0.25 + 0.5 * unit(rng))};
    const Vec2 d = aim - t.position;
    const double speed = spec.speed_min + (spec.speed_max - spec.speed_min) * unit(rng);
    t.velocity = (speed / d.norm()) * d;
    w.targets.push_back(t);
  }
  return w;
}

void step_world(World& world, double dt) {
  if (!(dt > 0.0)) throw ContractError("step_world: dt must be positive");
  const double W = world.spec.field_width, H = world.spec.field_height;
  for (Target& t : world.targets) {
    if (world.spec.heading_change_prob > 0.0) {
      std::uint64_t key = mix_seed(world.spec.seed, 0x7475726eULL);
      key = mix_seed(key, static_cast<std::uint64_t>(t.id));
      std::mt19937_64 rng(mix_seed(key, static_cast<std::uint64_t>(world.tick)));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      if (unit(rng) < world.spec.heading_change_prob) {
        const double turn = (unit(rng) - 0.5) * std::numbers::pi;
        const double c = std::cos(turn), s = std::sin(turn);
        t.velocity = {c * t.velocity.x - s * t.velocity.y, s * t.velocity.x + c * t.velocity.y};
      }
    }
    t.position = t.position + dt * t.velocity;
    if (t.position.x < 0.0) {
      t.position.x = -t.position.x;
      t.velocity.x = -t.velocity.x;
    } else if (t.position.x > W) {
      t.position.x = 2.0 * W - t.position.x;
      t.velocity.x = -t.velocity.x;
    }
    if (t.position.y < 0.0) {
      t.position.y = -t.position.y;
      t.velocity.y = -t.velocity.y;
    } else if (t.position.y > H) {
      t.position.y = 2.0 * H - t.position.y;
      t.velocity.y = -t.velocity.y;
    }
  }
  ++world.tick;
}

cbba::CommGraph CommSchedule::graph_at(long tick, const std::vector<int>& nodes) const {
  const std::vector<std::pair<int, int>>* edges = nullptr;
  for (const auto& [from, list] : phases) {
    if (from <= tick) edges = &list;
  }
  if (!edges) return cbba::CommGraph::complete(nodes);
  return cbba::CommGraph(nodes, *edges);
}

CommSchedule CommSchedule::read(std::istream& in) {
  const nlohmann::json doc = nlohmann::json::parse(in);
  CommSchedule out;
  const auto edges_of = [](const nlohmann::json& j) {
    return j.get<std::vector<std::pair<int, int>>>();
  };
  if (doc.contains("edges")) out.phases.emplace_back(0, edges_of(doc.at("edges")));
  if (doc.contains("schedule")) {
    for (const auto& p : doc.at("schedule")) {
      out.phases.emplace_back(p.at("from_tick").get<long>(), edges_of(p.at("edges")));
    }
  }
  std::stable_sort(out.phases.begin(), out.phases.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

namespace {

struct RadarNode {
  RadarConfig cfg;
  std::map<std::size_t, TrackState> tracks;  // by target position
};

std::optional<CovEllipse> candidate_ellipse(const RadarNode& node, std::size_t j, const Target& truth,
                                            long tick, const FilterParams& fp) {
  if (!node.cfg.sees(truth.position) || (truth.position - node.cfg.position).norm() <= 0.0) return std::nullopt;
  const CovEllipse pickup = pickup_ellipse(node.cfg, truth.position);
  const auto it = node.tracks.find(j);
  if (it == node.tracks.end()) return pickup;
  try {
    const double gap = static_cast<double>(tick - it->second.last_update_tick) * fp.dt;
    const TrackState pred = kf_predict(it->second, gap, fp.q);
    CovEllipse own(pred.position(), pred.position_cov());
    if (ellipse_area(own) <= ellipse_area(pickup)) return own;
  } catch (const DomainError&) {
  }
  return pickup;
}

}  // namespace

EpisodeResult run_episode(const ScenarioSpec& spec, Method method, int n_ticks, const EpisodeOptions& opts) {
  if (n_ticks <= 0) throw ContractError("run_episode: n_ticks must be positive");
  World world = generate_scenario(spec);
  const std::size_t nI = world.radars.size();
  const std::size_t nJ = world.targets.size();
  const std::vector<int> target_ids = world.target_ids();
  std::vector<int> radar_ids;
  for (const auto& r : world.radars) radar_ids.push_back(r.id);

  std::vector<RadarNode> nodes;
  for (const auto& r : world.radars) nodes.push_back({r, {}});
  const std::vector<std::vector<Load>> gamma(nI, std::vector<Load>(nJ, Load::from_double(spec.gamma)));
  const double a_ref = cop::reference_area(world.radars.front());
  const std::uint64_t noise_seed = mix_seed(spec.seed, 0x6d656173ULL);
  const FilterParams& fp = spec.filter;

  std::optional<cbba::Network> net;
  if (method == Method::Cbba) {
    net.emplace(world.radars, target_ids, gamma);
    net->set_transcript(opts.transcript);
  }

  EpisodeResult result;
  for (long t = 1; t <= n_ticks; ++t) {
    world.tick = t;
    std::vector<cop::RadarEllipses> ellipses(nI);
    for (std::size_t i = 0; i < nI; ++i) {
      ellipses[i].ellipses.resize(nJ);
      for (std::size_t j = 0; j < nJ; ++j) {
        ellipses[i].ellipses[j] = candidate_ellipse(nodes[i], j, world.targets[j], t, fp);
      }
    }
    const cop::CopInstance inst = cop::build_instance(world.radars, target_ids, ellipses, gamma, a_ref);

    MetricsRecord rec;
    rec.tick = t;
    rec.method = method;
    cop::Allocation alloc;
    if (method == Method::Central) {
      const cop::SolveResult solved = cop::solve_exact(inst, opts.limits);
      alloc = solved.allocation;
      rec.optimal = solved.optimal;
      if (!solved.optimal) ++result.non_optimal_solves;
    } else {
      std::vector<cbba::Observation> obs(nI);
      for (std::size_t i = 0; i < nI; ++i) obs[i] = {ellipses[i].ellipses, a_ref};
      const cbba::Extraction ex = net->tick(obs, opts.comm.graph_at(t, radar_ids));
      alloc = ex.allocation;
      rec.conflicts = ex.conflicts;
      for (const auto& a : net->agents()) {
        Load main_sum, opt_sum;
        for (std::size_t j : a.main.bundle) main_sum += a.gamma[j];
        for (std::size_t j : a.optional.bundle) opt_sum += a.gamma[j];
        if (main_sum != a.spent_main || opt_sum != a.spent_optional ||
            a.spent_main + a.spent_optional > a.radar.budget) {
          ++result.budget_failures;
        }
      }
    }

    if (!cop::validate(inst, alloc).empty()) ++result.validation_failures;

    std::vector<std::vector<std::size_t>> trackers(nJ);
    for (const auto& w : alloc.w) {
      const std::size_t i = *inst.radar_index(w.main);
      const std::size_t k = *inst.radar_index(w.optional);
      const std::size_t j = *inst.target_index(w.target);
      rec.utility += inst.c(i, k, j);
      trackers[j].push_back(i);
      if (!w.single()) {
        trackers[j].push_back(k);
        const auto& ei = ellipses[i].ellipses[j];
        const auto& ek = ellipses[k].ellipses[j];
        if (ei && ek) {
          const double overlap = ellipse_intersection_area(ei->recentered({}), ek->recentered({}));
          if (overlap > std::min(ellipse_area(*ei), ellipse_area(*ek))) ++result.pairing_failures;
        }
      }
    }
    const auto loads = cop::radar_loads(inst, alloc);
    for (const Load l : loads) rec.load.push_back(l.to_double());
    for (double l : rec.load) rec.load_mean += l;
    rec.load_mean /= static_cast<double>(nI);
    std::size_t covered = 0;
    for (const auto& tr : trackers) covered += tr.empty() ? 0 : 1;
    rec.coverage = static_cast<double>(covered) / static_cast<double>(nJ);
    result.records.push_back(std::move(rec));

    // Assigned radars measure and update; everyone else only ages their tracks.
    for (std::size_t j = 0; j < nJ; ++j) {
      const Target& truth = world.targets[j];
      for (std::size_t i : trackers[j]) {
        RadarNode& node = nodes[i];
        if (!node.cfg.sees(truth.position)) continue;
        const PolarMeasurement m = synthesize_measurement(node.cfg, truth.id, truth.position, t, noise_seed);
        const auto it = node.tracks.find(j);
        if (it == node.tracks.end()) {
          node.tracks.emplace(j, init_track(m, node.cfg.position, fp.v_max));
        } else {
          const double gap = static_cast<double>(t - it->second.last_update_tick) * fp.dt;
          TrackState pred = kf_predict(it->second, gap, fp.q);
          pred.target_id = truth.id;
          it->second = kf_update(pred, m, node.cfg.position);
        }
      }
    }
    for (RadarNode& node : nodes) {
      std::erase_if(node.tracks, [&](const auto& kv) { return t - kv.second.last_update_tick >= kTrackTimeout; });
    }

    step_world(world, fp.dt);
  }
  return result;
}

std::vector<AggregateRow> aggregate(const std::vector<std::vector<MetricsRecord>>& per_seed) {
  if (per_seed.empty()) throw ContractError("aggregate: need at least one seed");
  struct Acc {
    std::vector<double> utility, load, coverage, conflicts;
  };
  std::map<std::pair<Method, long>, Acc> acc;
  for (const auto& records : per_seed) {
    for (const auto& r : records) {
      Acc& a = acc[{r.method, r.tick}];
      a.utility.push_back(r.utility);
      a.load.push_back(r.load_mean);
      a.coverage.push_back(r.coverage);
      a.conflicts.push_back(static_cast<double>(r.conflicts));
    }
  }
  const auto stat = [](const std::vector<double>& v) {
    MetricStat s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
  };
  std::vector<AggregateRow> rows;
  for (const auto& [key, a] : acc) {
    AggregateRow row;
    row.method = key.first;
    row.tick = key.second;
    row.n_seeds = static_cast<int>(a.utility.size());
    row.utility = stat(a.utility);
    row.load_mean = stat(a.load);
    row.coverage = stat(a.coverage);
    row.conflicts = stat(a.conflicts);
    rows.push_back(row);
  }
  return rows;
}

Summary summarize(const std::vector<AggregateRow>& rows, Method method) {
  Summary s;
  int n = 0;
  for (const auto& r : rows) {
    if (r.method != method) continue;
    s.utility += r.utility.mean;
    s.load += r.load_mean.mean;
    s.coverage += r.coverage.mean;
    s.conflicts += r.conflicts.mean;
    ++n;
  }
  if (n > 0) {
    s.utility /= n;
    s.load /= n;
    s.coverage /= n;
    s.conflicts /= n;
  }
  return s;
}

}  // namespace radarnet::sim
