#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "radarnet/geometry.hpp"
#include "radarnet/load.hpp"
#include "radarnet/tracking.hpp"

namespace radarnet::cop {

/// Utility of tracking a target with one radar: 1 / (1 + V(E) / a_ref).
double pair_utility(const CovEllipse& main, double a_ref);

/// Utility of a main/optional pair: 1 / (1 + V(E_main ∩ E_opt) / a_ref).
///
/// Both regions describe the same target, so they are compared about a
/// common center; only their shapes matter. Symmetric in its two ellipses.
double pair_utility(const CovEllipse& main, const CovEllipse& optional, double a_ref);

/// Reference area that maps to utility 0.5: the measurement ellipse of a
/// radar with this configuration at the given nominal range.
double reference_area(const RadarConfig& cfg, double nominal_range = 30'000.0);

/// The per-tick allocation problem over radars I and targets J.
///
/// Radars and targets are addressed by position (index) internally; ids are
/// the external names used in allocations and files.
class CopInstance {
 public:
  CopInstance(std::vector<int> radar_ids, std::vector<int> target_ids);

  std::size_t n_radars() const { return radar_ids_.size(); }
  std::size_t n_targets() const { return target_ids_.size(); }
  const std::vector<int>& radar_ids() const { return radar_ids_; }
  const std::vector<int>& target_ids() const { return target_ids_; }

  /// Utility c_ikj, main radar i, optional radar k (k == i for single tracking).
  double c(std::size_t i, std::size_t k, std::size_t j) const { return c_[(i * n_radars() + k) * n_targets() + j]; }
  void set_c(std::size_t i, std::size_t k, std::size_t j, double v);
  Load gamma(std::size_t i, std::size_t j) const { return gamma_[i * n_targets() + j]; }
  void set_gamma(std::size_t i, std::size_t j, Load v);
  Load budget(std::size_t i) const { return budget_[i]; }
  void set_budget(std::size_t i, Load v);

  /// Position of an id, or nullopt when unknown.
  std::optional<std::size_t> radar_index(int id) const;
  std::optional<std::size_t> target_index(int id) const;

  /// |I|^2 |J| + |J| + |I|.
  std::size_t constraint_count() const;

 private:
  std::vector<int> radar_ids_;
  std::vector<int> target_ids_;
  std::vector<double> c_;
  std::vector<Load> gamma_;
  std::vector<Load> budget_;
};

/// (main radar id, optional radar id, target id); main == optional encodes single tracking.
struct Triple {
  int main = 0;
  int optional = 0;
  int target = 0;

  bool single() const { return main == optional; }
  // Lexicographic on (target, main, optional).
  friend auto operator<=>(const Triple& a, const Triple& b) {
    return std::tie(a.target, a.main, a.optional) <=> std::tie(b.target, b.main, b.optional);
  }
  friend bool operator==(const Triple&, const Triple&) = default;
};

/// Values of x_M, x_O and w; pairs are (radar id, target id).
struct Allocation {
  std::set<std::pair<int, int>> main;
  std::set<std::pair<int, int>> optional;
  std::set<Triple> w;

  /// Adds a consistent assignment: single tracking sets x_M = x_O = 1 for the radar.
  void assign(int main_id, int optional_id, int target_id);
  bool empty() const { return main.empty() && optional.empty() && w.empty(); }
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

struct Violation {
  enum class Kind { Coupling, OneCombination, Load };
  Kind kind;
  int radar = 0;   // offending radar id (Load) or 0
  int target = 0;  // offending target id (Coupling, OneCombination) or 0
  double excess = 0.0;
  std::string message;
};

struct RadarEllipses {
  /// One entry per target; nullopt when the radar cannot see it.
  std::vector<std::optional<CovEllipse>> ellipses;
};

/// Fills c from pair_utility on each radar's candidate ellipses. Any c
/// involving a radar that cannot see j is 0. gamma is indexed [radar][target].
/// Throws EmptyInstance when there are no radars or no targets.
CopInstance build_instance(std::span<const RadarConfig> radars, const std::vector<int>& target_ids,
                           std::span<const RadarEllipses> per_radar,
                           const std::vector<std::vector<Load>>& gamma, double a_ref);

/// Violations of (A), (C2) and (L); empty iff the allocation is feasible.
/// Throws ContractError on ids not present in the instance.
std::vector<Violation> validate(const CopInstance& inst, const Allocation& a);

/// Sum of c over the w triples. Throws ContractError if a is infeasible.
double objective(const CopInstance& inst, const Allocation& a);

/// Per-radar load implied by the allocation, by radar index.
std::vector<Load> radar_loads(const CopInstance& inst, const Allocation& a);

struct SolveResult {
  Allocation allocation;
  double objective = 0.0;
  bool optimal = true;
  long nodes = 0;
};

/// Zero means unlimited. The node limit is deterministic; the time limit is not.
struct SolveLimits {
  std::chrono::milliseconds time_limit{0};
  long node_limit = 0;
};

/// Exact branch-and-bound over one choice per target from {untracked} ∪ I×I.
/// When a limit is hit, returns the best incumbent with optimal=false.
/// Throws EmptyInstance on an empty instance.
SolveResult solve_exact(const CopInstance& inst, SolveLimits limits = {});

inline SolveResult solve_exact(const CopInstance& inst, std::chrono::milliseconds time_limit) {
  return solve_exact(inst, SolveLimits{time_limit, 0});
}

}  // namespace radarnet::cop
