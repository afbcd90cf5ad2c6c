#include "radarnet/transcript.hpp"

#include <cstdio>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <vector>

#include "radarnet/errors.hpp"

namespace radarnet::cbba {

using nlohmann::json;

std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json ellipses_json(const std::vector<std::optional<CovEllipse>>& e) {
  json out = json::array();
  for (const auto& x : e) {
    if (!x) {
      out.push_back(nullptr);
    } else {
      out.push_back({x->center.x, x->center.y, x->cov.xx(), x->cov.xy(), x->cov.yy(), x->k});
    }
  }
  return out;
}

std::vector<std::optional<CovEllipse>> ellipses_from(const json& j) {
  std::vector<std::optional<CovEllipse>> out;
  for (const auto& x : j) {
    if (x.is_null()) {
      out.emplace_back();
    } else {
      out.emplace_back(CovEllipse({x.at(0).get<double>(), x.at(1).get<double>()},
                                  Cov2(x.at(2).get<double>(), x.at(3).get<double>(), x.at(4).get<double>()),
                                  x.at(5).get<double>()));
    }
  }
  return out;
}

json stamps_json(const Timestamps& s) {
  json out = json::array();
  for (const auto& [id, st] : s) out.push_back({id, st.tick, st.seq});
  return out;
}

Timestamps stamps_from(const json& j) {
  Timestamps s;
  for (const auto& x : j) s[x.at(0).get<int>()] = Stamp{x.at(1).get<long>(), x.at(2).get<long>()};
  return s;
}

json belief_json(const BeliefState& b) {
  return {{"y", b.y}, {"z", b.z}, {"s", stamps_json(b.s)}, {"e", ellipses_json(b.e)}, {"bundle", b.bundle}};
}

BeliefState belief_from(const json& j, Role role) {
  BeliefState b;
  b.role = role;
  b.y = j.at("y").get<std::vector<double>>();
  b.z = j.at("z").get<std::vector<int>>();
  b.s = stamps_from(j.at("s"));
  b.e = ellipses_from(j.at("e"));
  b.bundle = j.at("bundle").get<std::vector<std::size_t>>();
  return b;
}

json agent_json(const AgentState& a) {
  std::vector<std::int64_t> gamma;
  for (Load g : a.gamma) gamma.push_back(g.units());
  return {{"id", a.id()},
          {"budget", a.radar.budget.units()},
          {"gamma", gamma},
          {"roster", a.roster},
          {"spent_main", a.spent_main.units()},
          {"spent_optional", a.spent_optional.units()},
          {"main", belief_json(a.main)},
          {"optional", belief_json(a.optional)}};
}

AgentState agent_from(const json& j) {
  AgentState a;
  a.radar.id = j.at("id").get<int>();
  a.radar.budget = Load::from_units(j.at("budget").get<std::int64_t>());
  for (auto u : j.at("gamma").get<std::vector<std::int64_t>>()) a.gamma.push_back(Load::from_units(u));
  a.roster = j.at("roster").get<std::set<int>>();
  a.spent_main = Load::from_units(j.at("spent_main").get<std::int64_t>());
  a.spent_optional = Load::from_units(j.at("spent_optional").get<std::int64_t>());
  a.main = belief_from(j.at("main"), Role::Main);
  a.optional = belief_from(j.at("optional"), Role::Optional);
  return a;
}

json message_json(const ConsensusMessage& m) {
  return {{"sender", m.sender},
          {"role", role_name(m.role)},
          {"tick", m.tick},
          {"y", m.y},
          {"z", m.z},
          {"s", stamps_json(m.s)},
          {"e", ellipses_json(m.e)}};
}

Role role_from(const std::string& s) {
  if (s == "main") return Role::Main;
  if (s == "optional") return Role::Optional;
  throw ContractError("unknown role '" + s + "'");
}

ConsensusMessage message_from(const json& j) {
  ConsensusMessage m;
  m.sender = j.at("sender").get<int>();
  m.role = role_from(j.at("role").get<std::string>());
  m.tick = j.at("tick").get<long>();
  m.y = j.at("y").get<std::vector<double>>();
  m.z = j.at("z").get<std::vector<int>>();
  m.s = stamps_from(j.at("s"));
  m.e = ellipses_from(j.at("e"));
  return m;
}

json post_record(long tick, Role role, const AgentState& a) {
  const BeliefState& b = a.belief(role);
  return {{"kind", "post"},
          {"tick", tick},
          {"role", role_name(role)},
          {"agent", a.id()},
          {"digest", digest(agent_json(a).dump())},
          {"y", digest(json(b.y).dump())},
          {"z", digest(json(b.z).dump())},
          {"s", digest(stamps_json(b.s).dump())},
          {"e", digest(ellipses_json(b.e).dump())}};
}

}  // namespace

void TranscriptWriter::before(long tick, Role role, Stamp now, const AgentState& agent,
                              std::span<const ConsensusMessage> inbox) {
  const json pre = {{"kind", "pre"},
                    {"tick", tick},
                    {"role", role_name(role)},
                    {"agent", agent.id()},
                    {"now", {now.tick, now.seq}},
                    {"state", agent_json(agent)}};
  out_ << pre.dump() << '\n';
  for (const ConsensusMessage& m : inbox) {
    const json body = message_json(m);
    const json rec = {{"kind", "msg"},
                      {"tick", tick},
                      {"role", role_name(role)},
                      {"sender", m.sender},
                      {"receiver", agent.id()},
                      {"msg", body},
                      {"digest", digest(body.dump())}};
    out_ << rec.dump() << '\n';
  }
}

void TranscriptWriter::after(long tick, Role role, const AgentState& agent) {
  out_ << post_record(tick, role, agent).dump() << '\n';
}

ReplayResult replay_transcript(std::istream& in) {
  ReplayResult result;
  std::optional<AgentState> agent;
  Stamp now;
  Role role = Role::Main;
  std::vector<ConsensusMessage> inbox;
  long line_no = 0;

  const auto fail = [&](long tick, std::string why) {
    result.ok = false;
    result.first_mismatch_tick = tick;
    result.detail = "line " + std::to_string(line_no) + ": " + std::move(why);
    return result;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    long tick = -1;
    try {
      rec = json::parse(line);
      tick = rec.at("tick").get<long>();
      const std::string kind = rec.at("kind").get<std::string>();
      if (kind == "pre") {
        agent = agent_from(rec.at("state"));
        role = role_from(rec.at("role").get<std::string>());
        now = Stamp{rec.at("now").at(0).get<long>(), rec.at("now").at(1).get<long>()};
        inbox.clear();
      } else if (kind == "msg") {
        if (!agent) return fail(tick, "message outside a consensus phase");
        const json& body = rec.at("msg");
        if (digest(body.dump()) != rec.at("digest").get<std::string>()) {
          return fail(tick, "message from " + std::to_string(rec.at("sender").get<int>()) + " does not match its digest");
        }
        inbox.push_back(message_from(body));
      } else if (kind == "post") {
        if (!agent || agent->id() != rec.at("agent").get<int>()) return fail(tick, "post record without matching pre");
        consensus_phase(*agent, role, inbox, now);
        const json expect = post_record(tick, role, *agent);
        for (const char* key : {"digest", "y", "z", "s", "e"}) {
          if (expect.at(key) != rec.at(key)) {
            return fail(tick, std::string("agent ") + std::to_string(agent->id()) + " " + role_name(role) +
                                  " diverged (" + key + ")");
          }
        }
        ++result.phases_checked;
        agent.reset();
      } else {
        return fail(tick, "unknown record kind '" + kind + "'");
      }
    } catch (const std::exception& e) {
      return fail(tick, std::string("malformed record: ") + e.what());
    }
  }
  if (agent) return fail(-1, "transcript ends inside a consensus phase");
  return result;
}

}  // namespace radarnet::cbba
