#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "cone/gateway.hpp"

namespace cone::gateway {

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

struct HttpEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // request path, starting with '/'

  std::string url() const { return base + path; }
};

// Splits a URL into base and path; `default_path` is used when the URL has none.
HttpEndpoint parse_endpoint(const std::string& url, const std::string& default_path);

// POST /v1/chat/completions with a messages array; returns the first choice's
// message content.
class HttpLlmBackend final : public LlmBackend {
 public:
  HttpLlmBackend(const std::string& endpoint, std::string model, std::string api_key = {},
                 RetryPolicy retry = {}, std::chrono::seconds timeout = std::chrono::seconds(120));

  std::string model_id() const override { return model_; }
  std::string complete(const LlmRequest& request) override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
  std::string api_key_;
  RetryPolicy retry_;
  std::chrono::seconds timeout_;
};

// POST /entail {"premise", "hypothesis"} -> {"label", "score"}.
class HttpEntailmentBackend final : public EntailmentBackend {
 public:
  explicit HttpEntailmentBackend(const std::string& endpoint, std::string model = "nli-server",
                                 RetryPolicy retry = {},
                                 std::chrono::seconds timeout = std::chrono::seconds(60));

  std::string model_id() const override { return model_; }
  EntailmentVerdict entail(const EntailmentQuery& query) override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
  RetryPolicy retry_;
  std::chrono::seconds timeout_;
};

// Wire helpers shared by the HTTP client and test servers.
nlohmann::json chat_completion_body(const LlmRequest& request, const std::string& model);
std::string parse_chat_completion(const std::string& body);
nlohmann::json entail_body(const EntailmentQuery& query);
EntailmentVerdict parse_entail_reply(const std::string& body);

// --- mocks ------------------------------------------------------------------

// Answers from a prompt -> completion table keyed by user message. Unknown
// prompts fall back to `fallback` when set, otherwise raise BackendError.
class CannedLlm final : public LlmBackend {
 public:
  explicit CannedLlm(std::map<std::string, std::string> answers,
                     std::optional<std::string> fallback = std::nullopt);

  std::string model_id() const override { return "mock-canned"; }
  std::string complete(const LlmRequest& request) override;

 private:
  std::map<std::string, std::string> answers_;
  std::optional<std::string> fallback_;
};

class FunctionLlm final : public LlmBackend {
 public:
  using Fn = std::function<std::string(const LlmRequest&)>;
  explicit FunctionLlm(Fn fn, std::string model = "mock-function");

  std::string model_id() const override { return model_; }
  std::string complete(const LlmRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
  std::string model_;
};

// Deterministic stand-in for a hosted model that understands the pipeline's
// own prompts: extraction echoes each sentence of the text, NtR answers "yes"
// when the gold text occurs in the response (case-insensitive), and relevance
// grading scores query-term overlap on the 0-4 scale.
class HeuristicLlm final : public LlmBackend {
 public:
  std::string model_id() const override { return "mock-heuristic"; }
  std::string complete(const LlmRequest& request) override;
};

// premise == hypothesis.
class ExactMatchEntailment final : public EntailmentBackend {
 public:
  std::string model_id() const override { return "mock-exact"; }
  EntailmentVerdict entail(const EntailmentQuery& query) override;
};

// hypothesis is a substring of premise.
class SubstringEntailment final : public EntailmentBackend {
 public:
  std::string model_id() const override { return "mock-substring"; }
  EntailmentVerdict entail(const EntailmentQuery& query) override;
};

class FunctionEntailment final : public EntailmentBackend {
 public:
  using Fn = std::function<bool(const std::string& premise, const std::string& hypothesis)>;
  explicit FunctionEntailment(Fn fn, std::string model = "mock-function");

  std::string model_id() const override { return model_; }
  EntailmentVerdict entail(const EntailmentQuery& query) override;

 private:
  Fn fn_;
  std::string model_;
};

// Builds a backend from a spec string: "http[s]://..." for the wire protocol,
// "mock:exact" / "mock:substring" for NLI mocks, "mock:heuristic" or
// "mock:canned=<file.json>" for LLM mocks.
std::shared_ptr<LlmBackend> make_llm_backend(const std::string& spec, const std::string& model,
                                             const std::string& api_key, RetryPolicy retry = {});
std::shared_ptr<EntailmentBackend> make_entailment_backend(const std::string& spec,
                                                           const std::string& model,
                                                           RetryPolicy retry = {});

}  // namespace cone::gateway
