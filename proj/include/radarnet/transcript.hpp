#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "radarnet/cbba.hpp"

namespace radarnet::cbba {

// Message transcript: newline-delimited JSON, one record per line.
//
//   {"kind":"pre",  "tick":t, "role":"main", "agent":i, "now":[t,seq], "state":{...}}
//   {"kind":"msg",  "tick":t, "role":"main", "sender":k, "receiver":i, "msg":{...}, "digest":"..."}
//   {"kind":"post", "tick":t, "role":"main", "agent":i, "digest":"...",
//    "y":"...", "z":"...", "s":"...", "e":"..."}
//
// A "pre" record holds the receiver's full state after bidding; the "msg"
// records that follow are its inbox, and "post" carries digests of the
// state the consensus phase produced.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(std::ostream& out) : out_(out) {}

  void before(long tick, Role role, Stamp now, const AgentState& agent, std::span<const ConsensusMessage> inbox);
  void after(long tick, Role role, const AgentState& agent);

 private:
  std::ostream& out_;
};

struct ReplayResult {
  bool ok = true;
  long first_mismatch_tick = -1;
  long phases_checked = 0;
  std::string detail;
};

/// Re-executes every logged consensus phase and checks the resulting
/// digests and the integrity of every logged message.
ReplayResult replay_transcript(std::istream& in);

/// 64-bit FNV-1a as 16 hex digits.
std::string digest(const std::string& bytes);

}  // namespace radarnet::cbba
