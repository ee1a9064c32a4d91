#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "agentlab/env.hpp"

namespace agentlab {

struct Persona {
  std::string id;            // "thinker" | "realist" | "feeler" (extensible)
  std::string display_name;
  std::string mbti_axis;
  std::string prompt_text;   // full persona preamble, editable data

  void validate() const;
};

// Persona files: small front-matter (id/display_name/mbti_axis), a line with
// "---", then the prompt text.
Persona load_persona_file(const std::filesystem::path& path);
std::map<std::string, Persona> load_personas(const std::filesystem::path& dir);

struct AgentMemory {
  std::vector<std::pair<int, std::string>> journal;      // (day, text)
  std::vector<std::pair<int, std::string>> reflections;  // (day, text)
  int window = 0;  // journal entries included in a prompt; 0 = full history

  void append(int day, const std::string& journal_text, const std::string& reflection_text);
};

// Numeric facts behind a prompt, carried alongside the text so offline
// backends can act on them without re-parsing prose.
struct PromptContext {
  int day = 1;
  int horizon = 20;
  Cents price_cents = 0;
  WattHours soc_wh = 0;
  bool in_blackout = false;
  std::vector<Action> feasible;
  std::string persona_id;
};

struct DailyPrompt {
  std::string system_text;
  std::string user_text;
  PromptContext context;
};

struct AgentResponse {
  std::string thoughts;
  Action action = Action::Hold;
  std::string reflection;
  std::string journal;
  std::string raw;
};

// Deterministic text assembly: persona preamble, experiment rules (including
// the blackout possibility, stated identically for every arm), today's
// numbers, the feasible action list, recent journal entries, and the required
// JSON reply schema. Identical inputs give byte-identical prompts.
DailyPrompt build_prompt(const Persona& persona, const EnvState& state, Cents price_cents,
                         const AgentMemory& memory, const InterventionSchedule& schedule,
                         const BatteryConfig& cfg);

// Pulls the first balanced JSON object out of raw backend text and validates
// the four-field reply contract. Throws ParseError on malformed/missing
// fields and InfeasibleActionError when the action is valid but illegal.
AgentResponse parse_response(const std::string& raw, const std::vector<Action>& feasible);

struct ChatBackendParams {
  double temperature = 0.0;
  int max_tokens = 800;
  std::string model_name;
  int timeout_ms = 30000;
  int max_retries = 3;
  int backoff_base_ms = 250;
  int max_inflight = 4;

  void validate() const;
};

struct ChatBackend {
  virtual ~ChatBackend() = default;
  virtual std::string complete(const DailyPrompt& prompt, const ChatBackendParams& params) = 0;
  virtual std::string model_id() const = 0;
  // Episode boundary; backends with per-episode state (the mock's blackout
  // memory) reset here.
  virtual void begin_episode() {}
};

// One persona playing one episode: prompt -> completion -> parse (with
// corrective retries) -> environment step -> memory append. A reply that
// fails to parse never touches state or memory.
class Agent {
 public:
  Agent(Persona persona, std::shared_ptr<ChatBackend> backend, ChatBackendParams params,
        BatteryConfig cfg, InterventionSchedule schedule);

  struct StepResult {
    AgentResponse response;
    StepOutcome outcome;
    int attempts = 1;
  };

  StepResult act(const EnvState& state, Cents price_cents);

  const Persona& persona() const { return persona_; }
  const AgentMemory& memory() const { return memory_; }
  AgentMemory& memory() { return memory_; }
  ChatBackend& backend() { return *backend_; }
  const ChatBackendParams& params() const { return params_; }

 private:
  Persona persona_;
  std::shared_ptr<ChatBackend> backend_;
  ChatBackendParams params_;
  BatteryConfig cfg_;
  InterventionSchedule schedule_;
  AgentMemory memory_;
};

}  // namespace agentlab
