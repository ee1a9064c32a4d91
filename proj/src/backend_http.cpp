#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "agentlab/backend.hpp"
#include "httplib.h"
#include "json.hpp"

namespace agentlab {

namespace {

struct ParsedBase {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // optional path prefix, no trailing slash
};

ParsedBase parse_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("base URL must include a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedBase out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

// One POST with bounded retries: transport failures, 429 and 5xx back off
// exponentially; other statuses fail immediately.
nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const std::string& api_key, const std::string& body, int timeout_ms,
                         int max_retries, int backoff_base_ms) {
  const ParsedBase base = parse_base_url(base_url);

  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(backoff_base_ms) << (attempt - 1)));

    httplib::Client cli(base.origin);
    cli.set_connection_timeout(0, timeout_ms * 1000LL);
    cli.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    cli.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);

    auto res = cli.Post(base.prefix + path, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw BackendError(BackendError::Category::Format, res->status,
                           std::string("unparseable response body: ") + e.what());
      }
    }
    if (res->status == 429) {
      last_error = "rate limited (429)";
      if (attempt == max_retries)
        throw BackendError(BackendError::Category::RateLimited, 429, last_error);
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error (" + std::to_string(res->status) + ")";
      continue;
    }
    throw BackendError(BackendError::Category::Http, res->status,
                       "HTTP " + std::to_string(res->status) + " from " + base_url + path +
                           ": " + res->body);
  }
  throw BackendError(BackendError::Category::Transport, 0,
                     last_error + " after " + std::to_string(max_retries + 1) + " attempts");
}

// Caps concurrent in-flight requests per backend instance.
class InflightGate {
 public:
  void acquire(int limit) {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return count_ < limit; });
    ++count_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      --count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int count_ = 0;
};

InflightGate& chat_gate() {
  static InflightGate gate;
  return gate;
}

}  // namespace

HttpChatBackend::HttpChatBackend(std::string base_url, std::string api_key,
                                 std::string model_name)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      model_name_(std::move(model_name)) {
  if (base_url_.empty()) throw ConfigError("chat backend needs a base URL");
}

std::string HttpChatBackend::complete(const DailyPrompt& prompt,
                                      const ChatBackendParams& params) {
  params.validate();
  nlohmann::json body;
  body["model"] = model_name_;
  body["temperature"] = params.temperature;
  body["max_tokens"] = params.max_tokens;
  body["messages"] = {{{"role", "system"}, {"content", prompt.system_text}},
                      {{"role", "user"}, {"content", prompt.user_text}}};

  chat_gate().acquire(params.max_inflight);
  struct Release {
    ~Release() { chat_gate().release(); }
  } release_on_exit;

  const nlohmann::json reply =
      post_json(base_url_, "/chat/completions", api_key_, body.dump(), params.timeout_ms,
                params.max_retries, params.backoff_base_ms);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(BackendError::Category::Format, 0,
                       std::string("chat response missing choices[0].message.content: ") +
                           e.what());
  }
}

HttpEmbeddingBackend::HttpEmbeddingBackend(std::string base_url, std::string api_key,
                                           std::string model_name, int timeout_ms,
                                           int max_retries, int backoff_base_ms)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      model_name_(std::move(model_name)),
      timeout_ms_(timeout_ms),
      max_retries_(max_retries),
      backoff_base_ms_(backoff_base_ms) {
  if (base_url_.empty()) throw ConfigError("embedding backend needs a base URL");
}

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(
    const std::vector<std::string>& texts) {
  nlohmann::json body;
  body["model"] = model_name_;
  body["input"] = texts;
  const nlohmann::json reply = post_json(base_url_, "/embeddings", api_key_, body.dump(),
                                         timeout_ms_, max_retries_, backoff_base_ms_);
  try {
    std::vector<std::vector<double>> out;
    for (const auto& item : reply.at("data"))
      out.push_back(item.at("embedding").get<std::vector<double>>());
    if (out.size() != texts.size())
      throw BackendError(BackendError::Category::Format, 0,
                         "embedding count does not match input count");
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(BackendError::Category::Format, 0,
                       std::string("embeddings response malformed: ") + e.what());
  }
}

}  // namespace agentlab
