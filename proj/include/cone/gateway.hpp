#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

// Access to the two inference capabilities the pipeline uses: free-text LLM
// completion and pairwise entailment. Everything above this layer talks to a
// Gateway, which adds the persistent call cache and a bound on in-flight calls.
namespace cone::gateway {

struct LlmRequest {
  std::string system_instruction;
  std::string user_message;
  double temperature = 0.0;
  int max_output_tokens = 1024;
};

enum class EntailmentLabel { entailment, neutral, contradiction };

std::string to_string(EntailmentLabel label);
EntailmentLabel entailment_label_from_string(const std::string& s);

struct EntailmentQuery {
  std::string premise;
  std::string hypothesis;
};

struct EntailmentVerdict {
  EntailmentLabel label = EntailmentLabel::neutral;
  double score = 0.0;

  // Binary decision: the argmax class must be entailment; the score is not thresholded.
  bool entails() const noexcept { return label == EntailmentLabel::entailment; }

  friend bool operator==(const EntailmentVerdict&, const EntailmentVerdict&) = default;
};

void validate(const LlmRequest& request);
void validate(const EntailmentQuery& query);
void validate(const EntailmentVerdict& verdict);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string model_id() const = 0;
  virtual std::string complete(const LlmRequest& request) = 0;
};

class EntailmentBackend {
 public:
  virtual ~EntailmentBackend() = default;
  virtual std::string model_id() const = 0;
  virtual EntailmentVerdict entail(const EntailmentQuery& query) = 0;
};

// Append-only JSON-lines store keyed by a SHA-256 over the canonical request.
// Without a path it is a purely in-memory memo.
class CallCache {
 public:
  CallCache() = default;
  explicit CallCache(std::filesystem::path path);

  CallCache(const CallCache&) = delete;
  CallCache& operator=(const CallCache&) = delete;

  static nlohmann::json canonical_request(const LlmRequest& request);
  static nlohmann::json canonical_request(const EntailmentQuery& query);
  static std::string make_key(const std::string& kind, const std::string& model_id,
                              const nlohmann::json& canonical_request);

  std::optional<nlohmann::json> lookup(const std::string& key) const;
  void record(const std::string& key, const std::string& kind, const std::string& model_id,
              const nlohmann::json& canonical_request, const nlohmann::json& response);

  std::size_t size() const;
  const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, nlohmann::json> entries_;
};

struct GatewayOptions {
  std::size_t concurrency = 8;
  // When set, a cache miss is an error instead of a backend call.
  bool offline = false;
};

struct GatewayStats {
  std::size_t cache_hits = 0;
  std::size_t backend_calls = 0;
};

class Gateway {
 public:
  Gateway(std::shared_ptr<LlmBackend> llm, std::shared_ptr<EntailmentBackend> nli,
          std::shared_ptr<CallCache> cache = nullptr, GatewayOptions options = {});

  std::string complete(const LlmRequest& request);
  EntailmentVerdict entail(const EntailmentQuery& query);

  // Fan-out helpers; result i always answers request i.
  std::vector<std::string> complete_all(std::span<const LlmRequest> requests);
  std::vector<EntailmentVerdict> entail_all(std::span<const EntailmentQuery> queries);

  bool has_llm() const noexcept { return llm_ != nullptr; }
  bool has_nli() const noexcept { return nli_ != nullptr; }
  std::string llm_model() const { return llm_ ? llm_->model_id() : std::string(); }
  std::string nli_model() const { return nli_ ? nli_->model_id() : std::string(); }
  std::size_t concurrency() const noexcept { return options_.concurrency; }
  GatewayStats stats() const noexcept { return {hits_.load(), calls_.load()}; }
  CallCache& cache() noexcept { return *cache_; }
  // Highest number of simultaneous backend calls observed so far.
  std::size_t peak_in_flight() const noexcept { return peak_in_flight_.load(); }

 private:
  class Slot;
  friend class Slot;

  std::shared_ptr<LlmBackend> llm_;
  std::shared_ptr<EntailmentBackend> nli_;
  std::shared_ptr<CallCache> cache_;
  GatewayOptions options_;
  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  std::size_t in_flight_ = 0;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> peak_in_flight_{0};
};

}  // namespace cone::gateway
