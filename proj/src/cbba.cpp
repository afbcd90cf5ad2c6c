#include "radarnet/cbba.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "radarnet/errors.hpp"
#include "radarnet/transcript.hpp"

namespace radarnet::cbba {

const char* role_name(Role r) { return r == Role::Main ? "main" : "optional"; }

BeliefState::BeliefState(Role r, std::size_t n_targets)
    : role(r), y(n_targets, 0.0), z(n_targets, kNoWinner), e(n_targets) {}

bool BeliefState::claims(std::size_t j) const {
  return std::find(bundle.begin(), bundle.end(), j) != bundle.end();
}

bool BeliefState::same_beliefs(const BeliefState& o) const {
  return role == o.role && y == o.y && z == o.z && e == o.e && bundle == o.bundle;
}

AgentState::AgentState(RadarConfig r, std::vector<Load> g, std::set<int> team)
    : radar(std::move(r)),
      gamma(std::move(g)),
      roster(std::move(team)),
      main(Role::Main, gamma.size()),
      optional(Role::Optional, gamma.size()) {
  roster.insert(radar.id);
}

double dmg_bid(double raw_utility, std::size_t n) {
  if (n == 0) throw ContractError("dmg_bid: bundle size after insertion must be at least 1");
  if (raw_utility < 0.0) throw ContractError("dmg_bid: utility must be non-negative");
  return raw_utility / static_cast<double>(n);
}

bool outbids(double bid, int bidder, double held, int holder) {
  if (holder == kNoWinner) return bid > 0.0;
  if (bid != held) return bid > held;
  return bidder < holder;
}

namespace {

Load& spent(AgentState& a, Role r) { return r == Role::Main ? a.spent_main : a.spent_optional; }

// Drops j from the bundle and refunds its load; belief entries are left to the caller.
void drop_claim(AgentState& a, Role r, std::size_t j) {
  auto& b = a.belief(r).bundle;
  const auto it = std::find(b.begin(), b.end(), j);
  if (it == b.end()) return;
  b.erase(it);
  spent(a, r) -= a.gamma[j];
}

// Releases an own claim and clears the entries this agent authored for it.
void reset_claim(AgentState& a, Role r, std::size_t j) {
  drop_claim(a, r, j);
  BeliefState& b = a.belief(r);
  b.y[j] = 0.0;
  b.z[j] = kNoWinner;
  b.e[j].reset();
}

std::vector<double> raw_utilities(const AgentState& a, Role role, const Observation& obs) {
  const std::size_t n = a.n_targets();
  std::vector<double> c(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& own = obs.ellipses[j];
    if (!own) continue;
    if (role == Role::Main) {
      c[j] = cop::pair_utility(*own, obs.a_ref);
    } else {
      // Pairing needs a known main winner other than ourselves.
      const int winner = a.main.z[j];
      if (winner == kNoWinner || winner == a.id() || a.main.claims(j) || !a.main.e[j]) continue;
      const double paired = cop::pair_utility(*a.main.e[j], *own, obs.a_ref);
      if (paired > cop::pair_utility(*a.main.e[j], obs.a_ref)) c[j] = paired;
    }
  }
  return c;
}

void rejustify(AgentState& a, Role role, const std::vector<double>& c, const Observation& obs) {
  BeliefState& b = a.belief(role);
  const std::vector<std::size_t> held = b.bundle;
  for (std::size_t j : held) {
    if (!(c[j] > 0.0)) reset_claim(a, role, j);
  }
  for (std::size_t pos = 0; pos < b.bundle.size(); ++pos) {
    const std::size_t j = b.bundle[pos];
    b.y[j] = dmg_bid(c[j], pos + 1);
    if (role == Role::Main) b.e[j] = obs.ellipses[j];
  }
}

// Lowest-valued optional claim, ties to the higher target position.
std::optional<std::size_t> cheapest_optional(const AgentState& a) {
  std::optional<std::size_t> worst;
  for (std::size_t j : a.optional.bundle) {
    if (!worst || a.optional.y[j] < a.optional.y[*worst] ||
        (a.optional.y[j] == a.optional.y[*worst] && j > *worst)) {
      worst = j;
    }
  }
  return worst;
}

}  // namespace

std::vector<double> bid_phase(AgentState& a, Role role, const Observation& obs) {
  if (obs.ellipses.size() != a.n_targets()) {
    throw ContractError("bid_phase: observation must cover every target");
  }
  const std::vector<double> c = raw_utilities(a, role, obs);
  rejustify(a, role, c, obs);

  BeliefState& b = a.belief(role);
  std::vector<double> inserted;
  for (;;) {
    const std::size_t n_after = b.bundle.size() + 1;
    // Main bids may borrow whatever is committed to optional tasks.
    const Load available = role == Role::Main ? a.radar.budget - a.spent_main
                                              : a.radar.budget - a.spent_main - a.spent_optional;
    std::optional<std::size_t> pick;
    double pick_bid = 0.0;
    for (std::size_t j = 0; j < a.n_targets(); ++j) {
      if (!(c[j] > 0.0) || b.claims(j) || a.gamma[j] > available) continue;
      if (role == Role::Optional && a.main.claims(j)) continue;
      const double bid = dmg_bid(c[j], n_after);
      if (!outbids(bid, a.id(), b.y[j], b.z[j])) continue;
      if (!pick || bid > pick_bid) {
        pick = j;
        pick_bid = bid;
      }
    }
    if (!pick) break;
    const std::size_t j = *pick;

    if (role == Role::Main) {
      if (a.optional.claims(j)) reset_claim(a, Role::Optional, j);
      while (a.spent_main + a.spent_optional + a.gamma[j] > a.radar.budget) {
        const auto victim = cheapest_optional(a);
        if (!victim) break;
        reset_claim(a, Role::Optional, *victim);
      }
    }
    b.bundle.push_back(j);
    b.y[j] = pick_bid;
    b.z[j] = a.id();
    if (role == Role::Main) b.e[j] = obs.ellipses[j];
    spent(a, role) += a.gamma[j];
    inserted.push_back(pick_bid);
  }
  return inserted;
}

ConsensusMessage make_message(const AgentState& a, Role role, long tick) {
  const BeliefState& b = a.belief(role);
  ConsensusMessage m;
  m.sender = a.id();
  m.role = role;
  m.tick = tick;
  m.y = b.y;
  m.z = b.z;
  m.s = b.s;
  if (role == Role::Main) {
    m.e = b.e;
  } else {
    m.e.assign(b.n_targets(), std::nullopt);
  }
  return m;
}

namespace {

enum class Action { Leave, Update, Reset };

Stamp stamp_of(const Timestamps& s, int id) {
  const auto it = s.find(id);
  return it == s.end() ? Stamp{} : it->second;
}

bool well_formed(const AgentState& a, Role role, const ConsensusMessage& m) {
  if (m.role != role || m.sender == a.id() || !a.roster.contains(m.sender)) return false;
  const std::size_t n = a.n_targets();
  if (m.y.size() != n || m.z.size() != n || m.e.size() != n) return false;
  for (std::size_t j = 0; j < n; ++j) {
    if (m.z[j] != kNoWinner && !a.roster.contains(m.z[j])) return false;
    if (!(m.y[j] >= 0.0)) return false;
  }
  for (const auto& [id, st] : m.s) {
    if (!a.roster.contains(id)) return false;
  }
  return true;
}

// Receiver i, sender k; the standard CBBA update/reset/leave table.
Action decide(int i, int k, double yk, int zk, const Timestamps& sk, double yi, int zi, const Timestamps& si) {
  const auto newer = [&](int m) { return stamp_of(sk, m) > stamp_of(si, m); };
  const auto higher = [&] { return outbids(yk, zk, yi, zi); };

  if (zk == k) {
    if (zi == i) return higher() ? Action::Update : Action::Leave;
    if (zi == k || zi == kNoWinner) return Action::Update;
    return (newer(zi) || higher()) ? Action::Update : Action::Leave;
  }
  if (zk == i) {
    if (zi == i || zi == kNoWinner) return Action::Leave;
    if (zi == k) return Action::Reset;
    return newer(zi) ? Action::Reset : Action::Leave;
  }
  if (zk == kNoWinner) {
    if (zi == i || zi == kNoWinner) return Action::Leave;
    if (zi == k) return Action::Update;
    return newer(zi) ? Action::Update : Action::Leave;
  }
  const int m = zk;
  if (zi == i) return (newer(m) && higher()) ? Action::Update : Action::Leave;
  if (zi == k) return newer(m) ? Action::Update : Action::Reset;
  if (zi == m || zi == kNoWinner) return newer(m) ? Action::Update : Action::Leave;
  const int n = zi;
  if (newer(m) && newer(n)) return Action::Update;
  if (newer(m) && higher()) return Action::Update;
  if (newer(n) && stamp_of(si, m) > stamp_of(sk, m)) return Action::Reset;
  return Action::Leave;
}

}  // namespace

ConsensusMessage consensus_phase(AgentState& a, Role role, std::span<const ConsensusMessage> inbox, Stamp now) {
  BeliefState& b = a.belief(role);
  const int self = a.id();
  std::vector<const ConsensusMessage*> accepted;

  for (const ConsensusMessage& m : inbox) {
    if (!well_formed(a, role, m)) {
      ++a.dropped_messages;
      continue;
    }
    accepted.push_back(&m);
    for (std::size_t j = 0; j < b.n_targets(); ++j) {
      switch (decide(self, m.sender, m.y[j], m.z[j], m.s, b.y[j], b.z[j], b.s)) {
        case Action::Update:
          b.y[j] = m.y[j];
          b.z[j] = m.z[j];
          b.e[j] = role == Role::Main ? m.e[j] : std::nullopt;
          break;
        case Action::Reset:
          b.y[j] = 0.0;
          b.z[j] = kNoWinner;
          b.e[j].reset();
          break;
        case Action::Leave:
          break;
      }
    }
  }

  // Unordered bundles: only the targets actually lost are released.
  const std::vector<std::size_t> held = b.bundle;
  for (std::size_t j : held) {
    if (b.z[j] != self) drop_claim(a, role, j);
  }

  for (const ConsensusMessage* m : accepted) {
    for (const auto& [id, st] : m->s) {
      auto& mine = b.s[id];
      mine = std::max(mine, st);
    }
  }
  for (const ConsensusMessage* m : accepted) b.s[m->sender] = now;
  b.s[self] = now;

  return make_message(a, role, now.tick);
}

Extraction extract_allocation(std::span<const AgentState> agents, const std::vector<int>& target_ids) {
  Extraction out;
  const auto winner_among = [&](Role role, std::size_t j, int exclude) -> std::optional<const AgentState*> {
    std::optional<const AgentState*> best;
    int claimants = 0;
    for (const AgentState& a : agents) {
      if (a.id() == exclude || j >= a.n_targets() || !a.belief(role).claims(j)) continue;
      ++claimants;
      const double y = a.belief(role).y[j];
      if (!best || outbids(y, a.id(), (*best)->belief(role).y[j], (*best)->id())) best = &a;
    }
    if (claimants > 1) out.conflicts += claimants - 1;
    return best;
  };

  for (std::size_t j = 0; j < target_ids.size(); ++j) {
    const auto main = winner_among(Role::Main, j, kNoWinner);
    const auto opt = winner_among(Role::Optional, j, main ? (*main)->id() : kNoWinner);
    if (main && opt) {
      out.allocation.assign((*main)->id(), (*opt)->id(), target_ids[j]);
    } else if (main) {
      out.allocation.assign((*main)->id(), (*main)->id(), target_ids[j]);
    } else if (opt) {
      out.allocation.assign((*opt)->id(), (*opt)->id(), target_ids[j]);
    }
  }
  return out;
}

CommGraph::CommGraph(std::vector<int> nodes, const std::vector<std::pair<int, int>>& edges) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  for (int n : nodes_) adj_[n];
  for (const auto& [u, v] : edges) {
    if (!adj_.contains(u) || !adj_.contains(v)) {
      throw ContractError("comm graph edge (" + std::to_string(u) + "," + std::to_string(v) + ") names an unknown node");
    }
    if (u == v) continue;
    adj_[u].insert(v);
    adj_[v].insert(u);
  }
}

CommGraph CommGraph::complete(std::vector<int> nodes) {
  std::vector<std::pair<int, int>> edges;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) edges.emplace_back(nodes[a], nodes[b]);
  }
  return CommGraph(std::move(nodes), edges);
}

const std::set<int>& CommGraph::neighbors(int id) const {
  static const std::set<int> none;
  const auto it = adj_.find(id);
  return it == adj_.end() ? none : it->second;
}

int CommGraph::diameter() const {
  int diam = 0;
  for (int src : nodes_) {
    std::map<int, int> dist{{src, 0}};
    std::deque<int> frontier{src};
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop_front();
      for (int v : neighbors(u)) {
        if (dist.contains(v)) continue;
        dist[v] = dist[u] + 1;
        diam = std::max(diam, dist[v]);
        frontier.push_back(v);
      }
    }
    if (dist.size() != nodes_.size()) return -1;
  }
  return diam;
}

bool CommGraph::connected() const { return diameter() >= 0; }

Network::Network(std::span<const RadarConfig> radars, std::vector<int> target_ids,
                 const std::vector<std::vector<Load>>& gamma)
    : target_ids_(std::move(target_ids)) {
  if (gamma.size() != radars.size()) throw ContractError("Network: gamma needs one row per radar");
  std::set<int> roster;
  for (const auto& r : radars) roster.insert(r.id);
  if (roster.size() != radars.size()) throw ContractError("Network: radar ids must be unique");
  for (std::size_t i = 0; i < radars.size(); ++i) {
    if (gamma[i].size() != target_ids_.size()) throw ContractError("Network: gamma row needs one entry per target");
    agents_.emplace_back(radars[i], gamma[i], roster);
  }
}

Extraction Network::tick(std::span<const Observation> obs, const CommGraph& graph) {
  if (obs.size() != agents_.size()) throw ContractError("Network::tick: one observation per agent required");
  ++tick_;
  for (std::size_t i = 0; i < agents_.size(); ++i) bid_phase(agents_[i], Role::Main, obs[i]);
  for (std::size_t i = 0; i < agents_.size(); ++i) bid_phase(agents_[i], Role::Optional, obs[i]);
  main_changed_ = consensus_round(Role::Main, graph);
  optional_changed_ = consensus_round(Role::Optional, graph);
  return extract_allocation(agents_, target_ids_);
}

bool Network::consensus_round(Role role, const CommGraph& graph) {
  // Synchronous barrier: everyone broadcasts the state reached after bidding.
  std::map<int, ConsensusMessage> outbox;
  for (const AgentState& a : agents_) outbox.emplace(a.id(), make_message(a, role, tick_));

  const Stamp now{tick_, 0};
  bool changed = false;
  for (AgentState& a : agents_) {
    std::vector<ConsensusMessage> inbox;
    for (int n : graph.neighbors(a.id())) {
      const auto it = outbox.find(n);
      if (it != outbox.end()) inbox.push_back(it->second);
    }
    if (transcript_) transcript_->before(tick_, role, now, a, inbox);
    const BeliefState before = a.belief(role);
    consensus_phase(a, role, inbox, now);
    changed = changed || !before.same_beliefs(a.belief(role));
    if (transcript_) transcript_->after(tick_, role, a);
  }
  return changed;
}

bool Network::same_beliefs(std::span<const AgentState> other) const {
  if (other.size() != agents_.size()) return false;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (agents_[i].id() != other[i].id()) return false;
    if (!agents_[i].main.same_beliefs(other[i].main)) return false;
    if (!agents_[i].optional.same_beliefs(other[i].optional)) return false;
  }
  return true;
}

}  // namespace radarnet::cbba
