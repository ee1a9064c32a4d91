#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "agentlab/agent.hpp"
#include "agentlab/policy.hpp"

namespace agentlab {

// What a mock agent plays. Scripts act on the machine-readable prompt
// context, so a mock episode is exactly a policy rollout plus canned text.
struct MockScript {
  enum class Kind { Greedy, Hold, DpTable, ReserveKeeper, Custom };
  Kind kind = Kind::Greedy;

  // Choice on blackout days (clamped to Hold when infeasible).
  Action blackout_action = Action::Hold;

  std::shared_ptr<const DpSolution> dp;  // Kind::DpTable

  // Kind::ReserveKeeper: greedy until a blackout is experienced, then keep
  // at least this much charge (recharge below it at any price).
  WattHours reserve_floor_wh = 2000;

  // Swap the persona phrase bank for a cautious one once a blackout has been
  // experienced; drives the cluster-shift analyses offline.
  bool shift_phrases_after_blackout = false;

  std::function<Action(const PromptContext&)> custom;
};

// Deterministic offline backend: scripted action + seeded persona-flavored
// text. Identical (seed, prompt) pairs produce identical replies.
class MockBackend final : public ChatBackend {
 public:
  MockBackend(MockScript script, BatteryConfig cfg, PriceModel model, std::uint64_t seed,
              std::string id = "mock");

  std::string complete(const DailyPrompt& prompt, const ChatBackendParams& params) override;
  std::string model_id() const override { return id_; }
  void begin_episode() override { blackout_seen_ = false; }

  bool blackout_seen() const { return blackout_seen_; }

 private:
  Action decide(const PromptContext& ctx);

  MockScript script_;
  BatteryConfig cfg_;
  PriceModel model_;
  std::uint64_t seed_;
  std::string id_;
  bool blackout_seen_ = false;
};

// Chat-completions client: POST {base_url}/chat/completions with bearer auth,
// exponential backoff on transport errors, 429 and 5xx.
class HttpChatBackend final : public ChatBackend {
 public:
  HttpChatBackend(std::string base_url, std::string api_key, std::string model_name);

  std::string complete(const DailyPrompt& prompt, const ChatBackendParams& params) override;
  std::string model_id() const override { return model_name_; }

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_name_;
};

struct EmbeddingBackend {
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
  virtual std::string model_id() const = 0;
};

// POST {base_url}/embeddings with {model, input:[texts]}.
class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(std::string base_url, std::string api_key, std::string model_name,
                       int timeout_ms = 30000, int max_retries = 3, int backoff_base_ms = 250);

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
  std::string model_id() const override { return model_name_; }

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_name_;
  int timeout_ms_;
  int max_retries_;
  int backoff_base_ms_;
};

}  // namespace agentlab
