#pragma once

#include <cstdint>
#include <string>

#include "agentlab/env.hpp"

namespace agentlab {

enum class PolicyKind { Dp, Greedy, Agent };
std::string to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s);

// Either every repetition replays one fixed path, or repetition i samples a
// fresh path seeded with path_seed + i.
struct Scenario {
  enum class Kind { FixedPath, Sampled };
  Kind kind = Kind::Sampled;
  PricePath fixed_path;        // FixedPath only
  std::uint64_t path_seed = 1; // Sampled only

  static Scenario fixed(PricePath p) {
    Scenario s;
    s.kind = Kind::FixedPath;
    s.fixed_path = std::move(p);
    return s;
  }
  static Scenario sampled(std::uint64_t seed) {
    Scenario s;
    s.kind = Kind::Sampled;
    s.path_seed = seed;
    return s;
  }
};

struct RunSpec {
  std::string run_id;
  Scenario scenario;
  PolicyKind policy_kind = PolicyKind::Greedy;
  std::string persona_id;      // Agent runs
  std::string backend_spec;    // e.g. "mock:greedy", "mock:dp", "http"
  int repetitions = 40;
  InterventionSchedule intervention;
  std::uint64_t base_seed = 1; // repetition i uses base_seed + i
  BatteryConfig cfg;
  PriceModel model;
  int workers = 4;

  void validate() const;
};

std::string runspec_to_json_string(const RunSpec& spec);
RunSpec runspec_from_json_string(const std::string& text);

}  // namespace agentlab
