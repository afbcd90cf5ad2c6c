#include "radarnet/cop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>

#include "radarnet/errors.hpp"

namespace radarnet::cop {

double pair_utility(const CovEllipse& main, double a_ref) {
  if (!(a_ref > 0.0)) throw ContractError("pair_utility: a_ref must be positive");
  return 1.0 / (1.0 + ellipse_area(main) / a_ref);
}

double pair_utility(const CovEllipse& main, const CovEllipse& optional, double a_ref) {
  if (!(a_ref > 0.0)) throw ContractError("pair_utility: a_ref must be positive");
  const Vec2 origin{};
  const double overlap = ellipse_intersection_area(main.recentered(origin), optional.recentered(origin));
  return 1.0 / (1.0 + overlap / a_ref);
}

double reference_area(const RadarConfig& cfg, double nominal_range) {
  RadarConfig probe = cfg;
  probe.max_range = std::max(cfg.max_range, nominal_range);
  return ellipse_area(pickup_ellipse(probe, probe.position + Vec2{nominal_range, 0.0}));
}

CopInstance::CopInstance(std::vector<int> radar_ids, std::vector<int> target_ids)
    : radar_ids_(std::move(radar_ids)), target_ids_(std::move(target_ids)) {
  if (radar_ids_.empty()) throw EmptyInstance("instance has no radars");
  if (target_ids_.empty()) throw EmptyInstance("instance has no targets");
  const auto unique = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  if (!unique(radar_ids_)) throw ContractError("duplicate radar id");
  if (!unique(target_ids_)) throw ContractError("duplicate target id");
  c_.assign(n_radars() * n_radars() * n_targets(), 0.0);
  gamma_.assign(n_radars() * n_targets(), Load::from_double(0.2));
  budget_.assign(n_radars(), Load::from_double(1.0));
}

void CopInstance::set_c(std::size_t i, std::size_t k, std::size_t j, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ContractError("utility must be finite and non-negative");
  c_[(i * n_radars() + k) * n_targets() + j] = v;
}

void CopInstance::set_gamma(std::size_t i, std::size_t j, Load v) {
  if (v <= Load{}) throw ContractError("gamma must be positive");
  gamma_[i * n_targets() + j] = v;
}

void CopInstance::set_budget(std::size_t i, Load v) {
  if (v <= Load{}) throw ContractError("budget must be positive");
  budget_[i] = v;
}

std::optional<std::size_t> CopInstance::radar_index(int id) const {
  const auto it = std::find(radar_ids_.begin(), radar_ids_.end(), id);
  if (it == radar_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - radar_ids_.begin());
}

std::optional<std::size_t> CopInstance::target_index(int id) const {
  const auto it = std::find(target_ids_.begin(), target_ids_.end(), id);
  if (it == target_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - target_ids_.begin());
}

std::size_t CopInstance::constraint_count() const {
  return n_radars() * n_radars() * n_targets() + n_targets() + n_radars();
}

void Allocation::assign(int main_id, int optional_id, int target_id) {
  main.emplace(main_id, target_id);
  optional.emplace(optional_id, target_id);
  w.insert(Triple{main_id, optional_id, target_id});
}

CopInstance build_instance(std::span<const RadarConfig> radars, const std::vector<int>& target_ids,
                           std::span<const RadarEllipses> per_radar,
                           const std::vector<std::vector<Load>>& gamma, double a_ref) {
  std::vector<int> radar_ids;
  radar_ids.reserve(radars.size());
  for (const auto& r : radars) radar_ids.push_back(r.id);
  CopInstance inst(std::move(radar_ids), target_ids);

  const std::size_t nI = inst.n_radars();
  const std::size_t nJ = inst.n_targets();
  if (per_radar.size() != nI || gamma.size() != nI) {
    throw ContractError("build_instance: need ellipses and gamma for every radar");
  }
  for (std::size_t i = 0; i < nI; ++i) {
    if (per_radar[i].ellipses.size() != nJ || gamma[i].size() != nJ) {
      throw ContractError("build_instance: need an ellipse slot and gamma for every target");
    }
    inst.set_budget(i, radars[i].budget);
    for (std::size_t j = 0; j < nJ; ++j) inst.set_gamma(i, j, gamma[i][j]);
  }

  for (std::size_t j = 0; j < nJ; ++j) {
    for (std::size_t i = 0; i < nI; ++i) {
      const auto& ei = per_radar[i].ellipses[j];
      if (!ei) continue;
      inst.set_c(i, i, j, pair_utility(*ei, a_ref));
      for (std::size_t k = i + 1; k < nI; ++k) {
        const auto& ek = per_radar[k].ellipses[j];
        if (!ek) continue;
        // Symmetric in the two ellipses.
        const double v = pair_utility(*ei, *ek, a_ref);
        inst.set_c(i, k, j, v);
        inst.set_c(k, i, j, v);
      }
    }
  }
  return inst;
}

namespace {

std::size_t require_radar(const CopInstance& inst, int id) {
  const auto idx = inst.radar_index(id);
  if (!idx) throw ContractError("unknown radar id " + std::to_string(id));
  return *idx;
}

std::size_t require_target(const CopInstance& inst, int id) {
  const auto idx = inst.target_index(id);
  if (!idx) throw ContractError("unknown target id " + std::to_string(id));
  return *idx;
}

std::string triple_str(const Triple& t) {
  return "(" + std::to_string(t.main) + "," + std::to_string(t.optional) + "," + std::to_string(t.target) + ")";
}

}  // namespace

std::vector<Load> radar_loads(const CopInstance& inst, const Allocation& a) {
  std::vector<Load> load(inst.n_radars());
  for (const auto& [r, t] : a.main) load[require_radar(inst, r)] += inst.gamma(require_radar(inst, r), require_target(inst, t));
  for (const auto& [r, t] : a.optional) load[require_radar(inst, r)] += inst.gamma(require_radar(inst, r), require_target(inst, t));
  for (const auto& w : a.w) {
    if (!w.single()) continue;
    const std::size_t i = require_radar(inst, w.main);
    load[i] -= inst.gamma(i, require_target(inst, w.target));
  }
  return load;
}

std::vector<Violation> validate(const CopInstance& inst, const Allocation& a) {
  std::vector<Violation> out;
  using Kind = Violation::Kind;

  for (const auto& [r, t] : a.main) require_radar(inst, r), require_target(inst, t);
  for (const auto& [r, t] : a.optional) require_radar(inst, r), require_target(inst, t);
  for (const auto& w : a.w) {
    require_radar(inst, w.main);
    require_radar(inst, w.optional);
    require_target(inst, w.target);
  }

  // (A): each w triple is backed by x_M and x_O ...
  for (const auto& w : a.w) {
    if (!a.main.contains({w.main, w.target}) || !a.optional.contains({w.optional, w.target})) {
      out.push_back({Kind::Coupling, 0, w.target, 0.0, "w" + triple_str(w) + " set without matching x_M and x_O"});
    }
  }
  // ... and every x_M ∧ x_O combination appears in w.
  std::map<int, std::vector<int>> mains, optionals;
  for (const auto& [r, t] : a.main) mains[t].push_back(r);
  for (const auto& [r, t] : a.optional) optionals[t].push_back(r);
  for (const auto& [t, ms] : mains) {
    for (int m : ms) {
      for (int o : optionals[t]) {
        const Triple w{m, o, t};
        if (!a.w.contains(w)) {
          out.push_back({Kind::Coupling, 0, t, 0.0, "x_M and x_O imply w" + triple_str(w) + " but it is unset"});
        }
      }
    }
  }
  std::set<std::pair<int, int>> covered_main, covered_opt;
  for (const auto& w : a.w) {
    covered_main.emplace(w.main, w.target);
    covered_opt.emplace(w.optional, w.target);
  }
  for (const auto& p : a.main) {
    if (!covered_main.contains(p)) {
      out.push_back({Kind::Coupling, p.first, p.second, 0.0, "x_M set without any w combination"});
    }
  }
  for (const auto& p : a.optional) {
    if (!covered_opt.contains(p)) {
      out.push_back({Kind::Coupling, p.first, p.second, 0.0, "x_O set without any w combination"});
    }
  }

  // (C2): at most one combination per target.
  std::map<int, int> per_target;
  for (const auto& w : a.w) ++per_target[w.target];
  for (const auto& [t, n] : per_target) {
    if (n > 1) {
      out.push_back({Kind::OneCombination, 0, t, static_cast<double>(n - 1),
                     std::to_string(n) + " combinations track target " + std::to_string(t)});
    }
  }

  // (L): per-radar load within budget.
  const auto loads = radar_loads(inst, a);
  for (std::size_t i = 0; i < inst.n_radars(); ++i) {
    if (loads[i] > inst.budget(i)) {
      const double excess = (loads[i] - inst.budget(i)).to_double();
      out.push_back({Kind::Load, inst.radar_ids()[i], 0, excess,
                     "radar " + std::to_string(inst.radar_ids()[i]) + " over budget by " + std::to_string(excess)});
    }
  }
  return out;
}

double objective(const CopInstance& inst, const Allocation& a) {
  const auto violations = validate(inst, a);
  if (!violations.empty()) throw ContractError("objective of infeasible allocation: " + violations.front().message);
  double total = 0.0;
  for (const auto& w : a.w) {
    total += inst.c(require_radar(inst, w.main), require_radar(inst, w.optional), require_target(inst, w.target));
  }
  return total;
}

namespace {

struct Choice {
  std::size_t main;
  std::size_t optional;
  double value;
  std::int64_t load_main;  // load units
  std::int64_t load_opt;   // 0 for single tracking
};

constexpr int kNone = -1;
constexpr double kEps = 1e-12;

// A candidate solution: one choice index per target, kNone when untracked.
using Assignment = std::vector<int>;
using Residual = std::vector<std::int64_t>;

class BranchAndBound {
 public:
  BranchAndBound(const CopInstance& inst, SolveLimits limits) : inst_(inst), limits_(limits) {
    const std::size_t nI = inst.n_radars(), nJ = inst.n_targets();
    choices_.resize(nJ);
    for (std::size_t j = 0; j < nJ; ++j) {
      for (std::size_t i = 0; i < nI; ++i) {
        for (std::size_t k = 0; k < nI; ++k) {
          const double v = inst.c(i, k, j);
          // A zero-utility choice never improves the objective.
          if (!(v > 0.0)) continue;
          const std::int64_t gi = inst.gamma(i, j).units();
          const std::int64_t gk = (k == i) ? 0 : inst.gamma(k, j).units();
          if (gi > inst.budget(i).units() || (k != i && gk > inst.budget(k).units())) continue;
          choices_[j].push_back({i, k, v, gi, gk});
        }
      }
      std::sort(choices_[j].begin(), choices_[j].end(), [](const Choice& a, const Choice& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.main != b.main) return a.main < b.main;
        return a.optional < b.optional;
      });
    }
    capacity_.resize(nI);
    for (std::size_t i = 0; i < nI; ++i) capacity_[i] = inst.budget(i).units();
    lambda_.assign(nI, 0.0);
  }

  SolveResult run() {
    start_ = std::chrono::steady_clock::now();
    const std::size_t nJ = choices_.size();

    Assignment greedy(nJ, kNone);
    improve(greedy);
    incumbent_ = greedy;
    incumbent_value_ = value_of(greedy);
    const double root_bound = dual_ascent();

    if (root_bound > incumbent_value_ + kEps) {
      prepare_search();
      residual_ = capacity_;
      current_.assign(nJ, kNone);
      dfs(0, 0.0);
    }

    SolveResult out;
    out.optimal = !aborted_;
    out.nodes = nodes_;
    for (std::size_t j = 0; j < nJ; ++j) {
      if (incumbent_[j] == kNone) continue;
      const Choice& c = choices_[j][static_cast<std::size_t>(incumbent_[j])];
      out.allocation.assign(inst_.radar_ids()[c.main], inst_.radar_ids()[c.optional], inst_.target_ids()[j]);
    }
    out.objective = objective(inst_, out.allocation);
    return out;
  }

 private:
  const Choice& choice(std::size_t j, int ci) const { return choices_[j][static_cast<std::size_t>(ci)]; }
  double value(std::size_t j, int ci) const { return ci == kNone ? 0.0 : choice(j, ci).value; }

  double value_of(const Assignment& a) const {
    double v = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) v += value(j, a[j]);
    return v;
  }

  static bool fits(const Residual& res, const Choice& c) {
    if (res[c.main] < c.load_main) return false;
    return c.optional == c.main || res[c.optional] >= c.load_opt;
  }

  void apply(Residual& res, std::size_t j, int ci, int sign) const {
    if (ci == kNone) return;
    const Choice& c = choice(j, ci);
    res[c.main] -= sign * c.load_main;
    if (c.optional != c.main) res[c.optional] -= sign * c.load_opt;
  }

  static bool uses(const Choice& c, std::size_t r) { return c.main == r || c.optional == r; }

  double reduced(const Choice& c, const std::vector<double>& lambda) const {
    return c.value - (lambda[c.main] * static_cast<double>(c.load_main) +
                      lambda[c.optional] * static_cast<double>(c.load_opt)) /
                         Load::kScale;
  }

  Residual residual_of(const Assignment& a) const {
    Residual res = capacity_;
    for (std::size_t j = 0; j < a.size(); ++j) apply(res, j, a[j], +1);
    return res;
  }

  // Best choice for j that fits `res`, or kNone.
  int best_fitting(const Residual& res, std::size_t j, std::optional<std::size_t> avoid = std::nullopt) const {
    for (std::size_t ci = 0; ci < choices_[j].size(); ++ci) {
      const Choice& c = choices_[j][ci];
      if (avoid && uses(c, *avoid)) continue;
      if (fits(res, c)) return static_cast<int>(ci);
    }
    return kNone;
  }

  // Downgrades choices on overloaded radars, cheapest loss first.
  void repair(Assignment& a) const {
    Residual res = residual_of(a);
    for (;;) {
      std::optional<std::size_t> over;
      for (std::size_t r = 0; r < res.size() && !over; ++r) {
        if (res[r] < 0) over = r;
      }
      if (!over) return;
      double best_loss = std::numeric_limits<double>::infinity();
      std::size_t best_j = 0;
      int best_alt = kNone;
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] == kNone || !uses(choice(j, a[j]), *over)) continue;
        apply(res, j, a[j], -1);
        Residual probe = res;
        probe[*over] = std::numeric_limits<std::int64_t>::min() / 2;
        const int alt = best_fitting(probe, j, *over);
        apply(res, j, a[j], +1);
        const double loss = value(j, a[j]) - value(j, alt);
        if (loss < best_loss) {
          best_loss = loss;
          best_j = j;
          best_alt = alt;
        }
      }
      apply(res, best_j, a[best_j], -1);
      a[best_j] = best_alt;
      apply(res, best_j, best_alt, +1);
    }
  }

  // Local search: single-target moves, then moves that free room on one
  // radar by re-choosing for another target.
  void improve(Assignment& a) const {
    Residual res = residual_of(a);
    for (int pass = 0; pass < 100; ++pass) {
      bool changed = false;
      for (std::size_t j = 0; j < a.size(); ++j) {
        apply(res, j, a[j], -1);
        const int alt = best_fitting(res, j);
        if (value(j, alt) > value(j, a[j]) + kEps) {
          a[j] = alt;
          changed = true;
        }
        apply(res, j, a[j], +1);
      }
      for (std::size_t j = 0; j < a.size(); ++j) {
        const double cur = value(j, a[j]);
        double best_gain = kEps;
        std::size_t best_j2 = 0;
        int best_ci = kNone, best_c2 = kNone;
        apply(res, j, a[j], -1);
        for (std::size_t ci = 0; ci < choices_[j].size(); ++ci) {
          const Choice& c = choices_[j][ci];
          const double gain = c.value - cur;
          if (!(gain > best_gain)) break;  // sorted by value
          if (fits(res, c)) continue;
          // Exactly one radar short of room.
          const bool main_short = res[c.main] < c.load_main;
          const bool opt_short = c.optional != c.main && res[c.optional] < c.load_opt;
          if (main_short && opt_short) continue;
          const std::size_t r = main_short ? c.main : c.optional;
          for (std::size_t j2 = 0; j2 < a.size(); ++j2) {
            if (j2 == j || a[j2] == kNone || !uses(choice(j2, a[j2]), r)) continue;
            Residual probe = res;
            apply(probe, j2, a[j2], -1);
            if (!fits(probe, c)) continue;
            apply(probe, j, static_cast<int>(ci), +1);
            const int c2 = best_fitting(probe, j2);
            const double delta = gain + value(j2, c2) - value(j2, a[j2]);
            if (delta > best_gain) {
              best_gain = delta;
              best_j2 = j2;
              best_ci = static_cast<int>(ci);
              best_c2 = c2;
            }
          }
        }
        if (best_ci != kNone) {
          apply(res, best_j2, a[best_j2], -1);
          a[j] = best_ci;
          a[best_j2] = best_c2;
          apply(res, best_j2, best_c2, +1);
          changed = true;
        }
        apply(res, j, a[j], +1);
      }
      if (!changed) break;
    }
  }

  // Subgradient search on the Lagrangian dual of the budget constraints,
  // with a repaired relaxed solution tried as incumbent along the way.
  // Returns the best dual bound.
  double dual_ascent() {
    const std::size_t nI = capacity_.size(), nJ = choices_.size();
    std::vector<double> lambda(nI, 0.0);
    double best_bound = std::numeric_limits<double>::infinity();
    double mu = 2.0;
    int stall = 0;
    for (int it = 0; it < 300; ++it) {
      std::vector<double> usage(nI, 0.0);
      Assignment relaxed(nJ, kNone);
      double bound = 0.0;
      for (std::size_t i = 0; i < nI; ++i) bound += lambda[i] * static_cast<double>(capacity_[i]) / Load::kScale;
      for (std::size_t j = 0; j < nJ; ++j) {
        double best = 0.0;
        for (std::size_t ci = 0; ci < choices_[j].size(); ++ci) {
          const double r = reduced(choices_[j][ci], lambda);
          if (r > best) {
            best = r;
            relaxed[j] = static_cast<int>(ci);
          }
        }
        bound += best;
        if (relaxed[j] != kNone) {
          const Choice& c = choice(j, relaxed[j]);
          usage[c.main] += static_cast<double>(c.load_main) / Load::kScale;
          usage[c.optional] += static_cast<double>(c.load_opt) / Load::kScale;
        }
      }
      if (bound < best_bound - kEps) {
        best_bound = bound;
        lambda_ = lambda;
        stall = 0;
      } else if (++stall >= 10) {
        mu /= 2.0;
        stall = 0;
      }
      if (it % 5 == 0) {
        repair(relaxed);
        improve(relaxed);
        const double v = value_of(relaxed);
        if (v > incumbent_value_ + kEps) {
          incumbent_value_ = v;
          incumbent_ = relaxed;
        }
      }
      if (best_bound <= incumbent_value_ + kEps || mu < 1e-6) break;
      double norm2 = 0.0;
      for (std::size_t i = 0; i < nI; ++i) {
        const double g = static_cast<double>(capacity_[i]) / Load::kScale - usage[i];
        norm2 += g * g;
      }
      if (norm2 == 0.0) break;
      const double step = mu * (bound - incumbent_value_) / norm2;
      for (std::size_t i = 0; i < nI; ++i) {
        const double g = static_cast<double>(capacity_[i]) / Load::kScale - usage[i];
        lambda[i] = std::max(0.0, lambda[i] - step * g);
      }
    }
    return best_bound;
  }

  void prepare_search() {
    const std::size_t nJ = choices_.size();
    // Children in order of reduced value; "untracked" competes at 0.
    child_order_.resize(nJ);
    std::vector<double> key(nJ, 0.0);
    for (std::size_t j = 0; j < nJ; ++j) {
      std::vector<std::pair<double, int>> ranked{{0.0, kNone}};
      for (std::size_t ci = 0; ci < choices_[j].size(); ++ci) {
        ranked.emplace_back(reduced(choices_[j][ci], lambda_), static_cast<int>(ci));
      }
      std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      for (const auto& [r, ci] : ranked) child_order_[j].push_back(ci);
      key[j] = choices_[j].empty() ? 0.0 : choices_[j].front().value;
    }
    order_.resize(nJ);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  }

  double upper_bound(std::size_t depth) const {
    double lagrangian = 0.0;
    for (std::size_t i = 0; i < residual_.size(); ++i) {
      lagrangian += lambda_[i] * static_cast<double>(residual_[i]) / Load::kScale;
    }
    double plain = 0.0;
    for (std::size_t d = depth; d < order_.size(); ++d) {
      const std::size_t j = order_[d];
      double best_plain = 0.0, best_reduced = 0.0;
      for (const Choice& c : choices_[j]) {
        if (!fits(residual_, c)) continue;
        best_plain = std::max(best_plain, c.value);
        best_reduced = std::max(best_reduced, reduced(c, lambda_));
      }
      plain += best_plain;
      lagrangian += best_reduced;
    }
    return std::min(plain, lagrangian);
  }

  bool out_of_budget() {
    if (limits_.node_limit > 0 && nodes_ >= limits_.node_limit) return true;
    if (limits_.time_limit.count() > 0 && (nodes_ & 255) == 0) {
      if (std::chrono::steady_clock::now() - start_ >= limits_.time_limit) return true;
    }
    return false;
  }

  void dfs(std::size_t depth, double value) {
    if (aborted_) return;
    ++nodes_;
    if (out_of_budget()) {
      aborted_ = true;
      return;
    }
    if (depth == order_.size()) {
      if (value > incumbent_value_ + kEps) {
        incumbent_value_ = value;
        incumbent_ = current_;
      }
      return;
    }
    if (value + upper_bound(depth) <= incumbent_value_ + kEps) return;

    const std::size_t j = order_[depth];
    for (int ci : child_order_[j]) {
      if (ci != kNone && !fits(residual_, choice(j, ci))) continue;
      apply(residual_, j, ci, +1);
      current_[j] = ci;
      dfs(depth + 1, value + this->value(j, ci));
      current_[j] = kNone;
      apply(residual_, j, ci, -1);
      if (aborted_) return;
    }
  }

  const CopInstance& inst_;
  SolveLimits limits_;
  std::vector<std::vector<Choice>> choices_;
  Residual capacity_;
  std::vector<double> lambda_;
  std::vector<std::vector<int>> child_order_;
  std::vector<std::size_t> order_;
  Residual residual_;
  Assignment current_;
  Assignment incumbent_;
  double incumbent_value_ = 0.0;
  bool aborted_ = false;
  long nodes_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SolveResult solve_exact(const CopInstance& inst, SolveLimits limits) {
  if (inst.n_radars() == 0 || inst.n_targets() == 0) throw EmptyInstance("solve_exact: empty instance");
  return BranchAndBound(inst, limits).run();
}

}  // namespace radarnet::cop
