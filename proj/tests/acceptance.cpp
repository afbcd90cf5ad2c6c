// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "radarnet/cbba.hpp"
#include "radarnet/cli.hpp"
#include "radarnet/cop.hpp"
#include "radarnet/simkit.hpp"
#include "radarnet/tracking.hpp"
#include "support/oracles.hpp"

using namespace radarnet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------

void exact_solver() {
  int mismatches = 0, not_optimal = 0;
  double solve_time = 0.0, worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const cop::CopInstance inst = oracle::random_instance(seed, 3, 4);
    const auto t0 = Clock::now();
    const cop::SolveResult r = cop::solve_exact(inst);
    solve_time += seconds_since(t0);
    const double truth = oracle::brute_force(inst);
    const double diff = std::abs(r.objective - truth);
    worst = std::max(worst, diff);
    if (diff > 1e-9 || !cop::validate(inst, r.allocation).empty()) ++mismatches;
    if (!r.optimal) ++not_optimal;
  }
  report(1, mismatches == 0 && not_optimal == 0 && solve_time < 1.0,
         fmt("200 instances, %d mismatches, max |diff| %.3g, solver time %.3f s", mismatches, worst, solve_time));
}

// ---------------------------------------------------------------------------

struct StaticCase {
  std::vector<RadarConfig> radars;
  std::vector<int> targets;
  std::vector<std::vector<Load>> gamma;
  std::vector<cop::RadarEllipses> ells;
  std::vector<cbba::Observation> obs;
  double a_ref = 1.0;
  std::mt19937_64 rng;
};

// Up to 5 radars and 8 targets in an 80 km square; one load per target for
// the whole instance, budgets between one and five tracking slots.
StaticCase static_case(std::uint64_t seed) {
  StaticCase c;
  c.rng.seed(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> nr(1, 5), nt(1, 8), slots(1, 5), g(2, 6);
  const int nI = nr(c.rng), nJ = nt(c.rng);
  const Load gamma = Load::from_units(g(c.rng) * 50'000);
  for (int i = 0; i < nI; ++i) {
    RadarConfig r;
    r.id = i + 1;
    r.position = {80'000.0 * u(c.rng), 80'000.0 * u(c.rng)};
    r.budget = Load::from_units(gamma.units() * slots(c.rng));
    c.radars.push_back(r);
  }
  for (int j = 0; j < nJ; ++j) c.targets.push_back(j + 1);
  std::vector<Vec2> where;
  for (int j = 0; j < nJ; ++j) where.push_back({80'000.0 * u(c.rng), 80'000.0 * u(c.rng)});
  c.gamma.assign(nI, std::vector<Load>(nJ, gamma));
  c.a_ref = cop::reference_area(c.radars[0]);
  for (const RadarConfig& r : c.radars) {
    cop::RadarEllipses e;
    for (const Vec2& p : where) {
      e.ellipses.push_back(r.sees(p) && (p - r.position).norm() > 0.0 ? std::optional(pickup_ellipse(r, p))
                                                                       : std::nullopt);
    }
    c.obs.push_back(cbba::Observation{e.ellipses, c.a_ref});
    c.ells.push_back(std::move(e));
  }
  return c;
}

// Spanning tree over a random order plus a sprinkling of extra edges.
cbba::CommGraph random_connected(const std::vector<int>& ids, std::mt19937_64& rng) {
  std::vector<int> order = ids;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 1; i < order.size(); ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    edges.emplace_back(order[parent(rng)], order[i]);
  }
  std::bernoulli_distribution extra(0.15);
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      if (extra(rng)) edges.emplace_back(ids[a], ids[b]);
    }
  }
  return cbba::CommGraph(ids, edges);
}

struct StaticRun {
  cbba::Extraction final;
  long last_change = 0;        // last tick that altered any belief
  long main_rounds = 0;        // last tick whose main consensus round altered a belief
  long optional_rounds = 0;    // same for the optional auction
  bool settled = false;        // no change over the trailing window
};

StaticRun run_static(const StaticCase& c, const cbba::CommGraph& g) {
  constexpr long kTicks = 200, kQuiet = 60;
  cbba::Network net(c.radars, c.targets, c.gamma);
  StaticRun r;
  std::vector<cbba::AgentState> prev = net.agents();
  for (long k = 1; k <= kTicks; ++k) {
    r.final = net.tick(c.obs, g);
    if (!net.same_beliefs(prev)) r.last_change = k;
    if (net.consensus_changed(cbba::Role::Main)) r.main_rounds = k;
    if (net.consensus_changed(cbba::Role::Optional)) r.optional_rounds = k;
    prev = net.agents();
  }
  r.settled = r.last_change <= kTicks - kQuiet;
  return r;
}

void static_suite() {
  int below_half = 0, unsettled2 = 0, infeasible = 0;
  double min_ratio = 1e9;
  int over_bound = 0, unsettled3 = 0, whole_tick_over = 0, checked3 = 0;
  long max_main_slack = -1'000'000, max_opt_slack = -1'000'000;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    StaticCase c = static_case(seed);
    std::vector<int> ids;
    for (const auto& r : c.radars) ids.push_back(r.id);
    const cop::CopInstance inst = cop::build_instance(c.radars, c.targets, c.ells, c.gamma, c.a_ref);
    const double opt = cop::solve_exact(inst).objective;

    const StaticRun full = run_static(c, cbba::CommGraph::complete(ids));
    if (!full.settled) ++unsettled2;
    if (!cop::validate(inst, full.final.allocation).empty()) {
      ++infeasible;
    } else {
      const double got = cop::objective(inst, full.final.allocation);
      if (got < 0.5 * opt - 1e-12) ++below_half;
      if (opt > 0.0) min_ratio = std::min(min_ratio, got / opt);
    }

    const cbba::CommGraph g = random_connected(ids, c.rng);
    const StaticRun sparse = run_static(c, g);
    const long bound = static_cast<long>(g.diameter()) * static_cast<long>(c.targets.size());
    ++checked3;
    if (!sparse.settled) ++unsettled3;
    // The optional auction prices pairs against the main winners' ellipses,
    // so its instance is static only once the main auction has settled.
    const long opt_rounds = std::max(0L, sparse.optional_rounds - sparse.main_rounds);
    if (sparse.main_rounds > bound || opt_rounds > bound) {
      ++over_bound;
      std::printf("  convergence: seed %llu |I|=%zu |J|=%zu diameter %d main %ld optional %ld bound %ld\n",
                  static_cast<unsigned long long>(seed), c.radars.size(), c.targets.size(), g.diameter(),
                  sparse.main_rounds, opt_rounds, bound);
    }
    if (sparse.last_change > bound) ++whole_tick_over;
    max_main_slack = std::max(max_main_slack, sparse.main_rounds - bound);
    max_opt_slack = std::max(max_opt_slack, opt_rounds - bound);
  }
  report(2, below_half == 0 && unsettled2 == 0 && infeasible == 0,
         fmt("100 static instances, %d below half of optimum, min ratio %.4f, %d infeasible, %d unsettled", below_half,
             min_ratio, infeasible, unsettled2));
  report(3, over_bound == 0 && unsettled3 == 0,
         fmt("%d random connected graphs, %d over diameter x |J| consensus rounds (per auction), %d unsettled; "
             "max slack main %ld optional %ld; whole-tick count over bound in %d",
             checked3, over_bound, unsettled3, max_main_slack, max_opt_slack, whole_tick_over));
}

// ---------------------------------------------------------------------------

struct FamilyResult {
  sim::Summary cbba, central;
  long infeasible = 0, pairing = 0, non_optimal = 0;
  double seconds = 0.0;
};

FamilyResult run_family(sim::ScenarioKind kind) {
  FamilyResult fr;
  const auto t0 = Clock::now();
  std::vector<std::vector<sim::MetricsRecord>> per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::vector<sim::MetricsRecord> records;
    for (sim::Method m : {sim::Method::Cbba, sim::Method::Central}) {
      const sim::EpisodeResult r = sim::run_episode(sim::default_spec(kind, seed), m, 200);
      fr.infeasible += r.validation_failures + r.budget_failures;
      fr.pairing += r.pairing_failures;
      fr.non_optimal += r.non_optimal_solves;
      records.insert(records.end(), r.records.begin(), r.records.end());
    }
    per_seed.push_back(std::move(records));
  }
  const auto rows = sim::aggregate(per_seed);
  fr.cbba = sim::summarize(rows, sim::Method::Cbba);
  fr.central = sim::summarize(rows, sim::Method::Central);
  fr.seconds = seconds_since(t0);
  std::printf("  %-18s utility %.4f / %.4f  load %.4f / %.4f  coverage %.4f / %.4f  (cbba / central), %.1f s, "
              "%ld non-optimal solves\n",
              sim::kind_name(kind), fr.cbba.utility, fr.central.utility, fr.cbba.load, fr.central.load,
              fr.cbba.coverage, fr.central.coverage, fr.seconds, fr.non_optimal);
  std::fflush(stdout);
  return fr;
}

// ---------------------------------------------------------------------------

CovEllipse random_ellipse(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = 0.5 + 4.5 * u(rng), b = a / (1.0 + 9.0 * u(rng));
  const double phi = std::numbers::pi * u(rng), cs = std::cos(phi), sn = std::sin(phi);
  const Cov2 cov(cs * cs * a * a + sn * sn * b * b, cs * sn * (a * a - b * b), sn * sn * a * a + cs * cs * b * b);
  return CovEllipse({0.0, 0.0}, cov);
}

double minor_axis(const CovEllipse& e) { return e.k * std::sqrt(e.cov.eigenvalues().second); }

void geometry_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_mc = 0.0;
  int mc_fail = 0;
  for (int n = 0; n < 50; ++n) {
    const CovEllipse a = random_ellipse(rng);
    // Offset the second centre by less than the smaller minor semi-axis so
    // the overlap is never a sliver.
    const CovEllipse b0 = random_ellipse(rng);
    const double reach = std::min(minor_axis(a), minor_axis(b0));
    const CovEllipse b = b0.recentered({reach * u(rng) * 0.7, reach * u(rng) * 0.7});
    const double exact = ellipse_intersection_area(a, b);
    const double mc = oracle::mc_overlap(a, b, 1'000'000, 9000 + n);
    const double rel = std::abs(exact - mc) / mc;
    worst_mc = std::max(worst_mc, rel);
    if (!(rel < 0.02)) ++mc_fail;
  }
  double worst_lens = 0.0;
  int lens_fail = 0;
  for (int n = 0; n < 20; ++n) {
    const double r1 = 1.0 + 9.0 * (u(rng) + 1.0) / 2.0, r2 = 1.0 + 9.0 * (u(rng) + 1.0) / 2.0;
    const double d = (r1 + r2) * (u(rng) + 1.0) / 2.0;
    const double phi = std::numbers::pi * u(rng);
    const CovEllipse c1({5.0, -3.0}, Cov2(r1 * r1, 0.0, r1 * r1));
    const CovEllipse c2({5.0 + d * std::cos(phi), -3.0 + d * std::sin(phi)}, Cov2(r2 * r2, 0.0, r2 * r2));
    const double err = std::abs(ellipse_intersection_area(c1, c2) - oracle::circle_lens(r1, r2, d));
    worst_lens = std::max(worst_lens, err);
    if (!(err <= 1e-6)) ++lens_fail;
  }
  report(7, mc_fail == 0 && lens_fail == 0,
         fmt("50 Monte Carlo pairs (1e6 samples) max rel err %.4f; 20 lens pairs max abs err %.2e", worst_mc,
             worst_lens));
}

struct TraceCheck {
  int cases = 0;
  int rising = 0;      // an update tick whose trace exceeds the previous update's
  int after_init = 0;  // first update above the initial track's trace
};

// Stationary targets from 1 to 59 km, q = 0, 100 update ticks each.
TraceCheck trace_monotone() {
  TraceCheck out;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 0; n < 20; ++n) {
    RadarConfig cfg;
    cfg.id = 1;
    cfg.position = {1000.0 * unit(rng), -2000.0 * unit(rng)};
    const double range = 1000.0 + 58'000.0 * n / 19.0, bearing = 2.0 * std::numbers::pi * unit(rng);
    const Vec2 truth = cfg.position + Vec2{range * std::cos(bearing), range * std::sin(bearing)};
    const std::uint64_t seed = 500 + n;
    ++out.cases;
    TrackState t = init_track(synthesize_measurement(cfg, 1, truth, 0, seed), cfg.position, 300.0);
    const double initial = t.P(0, 0) + t.P(1, 1);
    double prev = 0.0;
    bool rising = false;
    for (long k = 1; k <= 100; ++k) {
      t = kf_update(kf_predict(t, 1.0, 0.0), synthesize_measurement(cfg, 1, truth, k, seed), cfg.position);
      const double tr = t.P(0, 0) + t.P(1, 1);
      if (k == 1 && tr > initial) ++out.after_init;
      if (k > 1 && tr > prev * (1.0 + 1e-12)) rising = true;
      prev = tr;
    }
    if (rising) ++out.rising;
  }
  return out;
}

// ---------------------------------------------------------------------------

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return fa.good() && fb.good() && sa.str() == sb.str() && !sa.str().empty();
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / "radarnet_acceptance";
  fs::remove_all(root);
  std::ostringstream sink;
  int codes = 0;
  for (const char* name : {"a", "b"}) {
    cli::RunConfig cfg;
    cfg.scenario = "several_saturated";
    cfg.seeds = {1, 2, 3};
    cfg.ticks = 40;
    cfg.jobs = 2;
    cfg.out_dir = (root / name).string();
    codes += cli::cmd_run(cfg, sink, sink);
  }
  int differing = 0, files = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    if (!same_bytes(entry.path(), root / "b" / entry.path().filename())) ++differing;
  }
  report(9, codes == 0 && files == 5 && differing == 0,
         fmt("%d CSV files compared, %d differ, exit codes %s", files, differing, codes == 0 ? "0" : "non-zero"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  exact_solver();
  static_suite();

  std::map<sim::ScenarioKind, FamilyResult> families;
  for (auto kind : {sim::ScenarioKind::NonSaturated, sim::ScenarioKind::FewSaturated,
                    sim::ScenarioKind::SeveralSaturated, sim::ScenarioKind::ManySaturated,
                    sim::ScenarioKind::IllPositioned}) {
    families[kind] = run_family(kind);
  }
  long infeasible = 0, pairing = 0;
  for (const auto& [kind, fr] : families) {
    infeasible += fr.infeasible;
    pairing += fr.pairing;
  }
  report(4, infeasible == 0, fmt("5 families x 10 seeds x 200 ticks x 2 methods, %ld infeasible allocations", infeasible));

  const FamilyResult& ns = families[sim::ScenarioKind::NonSaturated];
  const double ratio = ns.cbba.utility / ns.central.utility;
  report(5, ratio >= 0.8 && ns.cbba.load <= ns.central.load && ns.seconds <= 120.0,
         fmt("non_saturated utility ratio %.4f (>= 0.8), load cbba %.4f <= central %.4f, %.1f s", ratio, ns.cbba.load,
             ns.central.load, ns.seconds));

  const FamilyResult& ms = families[sim::ScenarioKind::ManySaturated];
  report(6, ms.central.coverage >= ms.cbba.coverage,
         fmt("many_saturated coverage central %.4f >= cbba %.4f", ms.central.coverage, ms.cbba.coverage));

  geometry_oracle();

  const TraceCheck tc = trace_monotone();
  report(8, tc.rising == 0 && pairing == 0,
         fmt("%d stationary targets, %d with a rising trace across 100 update ticks; pairing violations %ld "
             "(first update above the initial track in %d cases)",
             tc.cases, tc.rising, pairing, tc.after_init));

  determinism();
  std::printf("acceptance: %d failing, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
