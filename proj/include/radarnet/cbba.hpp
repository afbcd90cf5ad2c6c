#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "radarnet/cop.hpp"
#include "radarnet/geometry.hpp"
#include "radarnet/load.hpp"
#include "radarnet/tracking.hpp"

namespace radarnet::cbba {

class TranscriptWriter;

enum class Role { Main, Optional };

const char* role_name(Role r);

inline constexpr int kNoWinner = -1;

/// Freshness of information about one agent: (tick, consensus round within the tick).
struct Stamp {
  long tick = -1;
  long seq = -1;
  friend auto operator<=>(const Stamp&, const Stamp&) = default;
};

using Timestamps = std::map<int, Stamp>;

/// One agent's view of one auction. Vectors are indexed by target position.
struct BeliefState {
  Role role = Role::Main;
  std::vector<double> y;                          // winning bid
  std::vector<int> z;                             // winner id or kNoWinner
  Timestamps s;                                   // per agent id
  std::vector<std::optional<CovEllipse>> e;       // ellipse of the winning main bid (Main only)
  std::vector<std::size_t> bundle;                // own claims, in insertion order

  BeliefState() = default;
  BeliefState(Role role, std::size_t n_targets);

  bool claims(std::size_t j) const;
  std::size_t n_targets() const { return y.size(); }

  /// Equality of y, z, e and bundle; timestamps are excluded.
  bool same_beliefs(const BeliefState& o) const;
};

struct ConsensusMessage {
  int sender = 0;
  Role role = Role::Main;
  long tick = 0;
  std::vector<double> y;
  std::vector<int> z;
  Timestamps s;
  std::vector<std::optional<CovEllipse>> e;
};

struct AgentState {
  RadarConfig radar;
  std::vector<Load> gamma;  // per target
  std::set<int> roster;     // every agent id in the team
  BeliefState main;
  BeliefState optional;
  Load spent_main;
  Load spent_optional;
  long dropped_messages = 0;

  AgentState() = default;
  AgentState(RadarConfig radar, std::vector<Load> gamma, std::set<int> roster);

  int id() const { return radar.id; }
  std::size_t n_targets() const { return gamma.size(); }
  BeliefState& belief(Role r) { return r == Role::Main ? main : optional; }
  const BeliefState& belief(Role r) const { return r == Role::Main ? main : optional; }
};

/// What one agent perceives this tick: its own candidate ellipse per target.
struct Observation {
  std::vector<std::optional<CovEllipse>> ellipses;
  double a_ref = 1.0;
};

/// c / n, with n the bundle size including the candidate.
double dmg_bid(double raw_utility, std::size_t bundle_size_after_insertion);

/// Higher bid wins; equal bids go to the lower winner id.
bool outbids(double bid, int bidder, double held, int holder);

/// Re-prices own claims at current utilities, then greedily claims targets
/// whose biased bid beats the known winning bid. Main bidding may borrow the
/// budget spent on optional tasks, releasing the lowest-valued ones.
/// Returns the biased bids inserted, in insertion order.
std::vector<double> bid_phase(AgentState& agent, Role role, const Observation& obs);

ConsensusMessage make_message(const AgentState& agent, Role role, long tick);

/// Resolves conflicts against neighbours' vectors, releases lost claims and
/// refreshes timestamps. Malformed messages are dropped and counted.
/// Returns the post-update snapshot.
ConsensusMessage consensus_phase(AgentState& agent, Role role, std::span<const ConsensusMessage> inbox,
                                 Stamp now);

struct Extraction {
  cop::Allocation allocation;
  int conflicts = 0;
};

/// Global allocation implied by the union of agent beliefs. Duplicate
/// claims are settled by bid then id and counted as conflicts. An optional
/// claim without any main claimant is reported as single tracking.
Extraction extract_allocation(std::span<const AgentState> agents, const std::vector<int>& target_ids);

/// Undirected communication graph over agent ids.
class CommGraph {
 public:
  CommGraph() = default;
  CommGraph(std::vector<int> nodes, const std::vector<std::pair<int, int>>& edges);
  static CommGraph complete(std::vector<int> nodes);

  const std::vector<int>& nodes() const { return nodes_; }
  const std::set<int>& neighbors(int id) const;
  bool connected() const;
  /// Longest shortest path; -1 when disconnected.
  int diameter() const;

 private:
  std::vector<int> nodes_;
  std::map<int, std::set<int>> adj_;
};

/// A team of agents exchanging messages in synchronous phases.
class Network {
 public:
  Network(std::span<const RadarConfig> radars, std::vector<int> target_ids,
          const std::vector<std::vector<Load>>& gamma);

  /// One step of the per-tick loop: main bidding, optional bidding, main
  /// consensus, optional consensus. Tracking is left to the caller.
  /// `obs` is ordered like the agents.
  Extraction tick(std::span<const Observation> obs, const CommGraph& graph);

  const std::vector<AgentState>& agents() const { return agents_; }
  std::vector<AgentState>& agents() { return agents_; }
  const std::vector<int>& target_ids() const { return target_ids_; }
  long ticks() const { return tick_; }

  void set_transcript(TranscriptWriter* writer) { transcript_ = writer; }

  /// Whether the last tick's consensus round for `role` altered any belief.
  bool consensus_changed(Role role) const { return role == Role::Main ? main_changed_ : optional_changed_; }

  /// True when every agent's beliefs (both roles) match `other`'s.
  bool same_beliefs(std::span<const AgentState> other) const;

 private:
  bool consensus_round(Role role, const CommGraph& graph);

  std::vector<AgentState> agents_;
  std::vector<int> target_ids_;
  long tick_ = 0;
  bool main_changed_ = false;
  bool optional_changed_ = false;
  TranscriptWriter* transcript_ = nullptr;
};

}  // namespace radarnet::cbba
