#include "cone/backends.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include <httplib.h>

#include "cone/corpus_io.hpp"
#include "cone/error.hpp"
#include "cone/prompts.hpp"
#include "cone/text.hpp"

namespace cone::gateway {

using nlohmann::json;

HttpEndpoint parse_endpoint(const std::string& url, const std::string& default_path) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint '" + url + "' must start with http:// or https://");
  const auto slash = url.find('/', scheme + 3);
  HttpEndpoint ep;
  if (slash == std::string::npos) {
    ep.base = url;
    ep.path = default_path;
  } else {
    ep.base = url.substr(0, slash);
    ep.path = url.substr(slash);
    if (ep.path == "/") ep.path = default_path;
  }
  return ep;
}

namespace {

std::string post_with_retry(const HttpEndpoint& ep, const httplib::Headers& headers, const std::string& body,
                            const RetryPolicy& retry, std::chrono::seconds timeout) {
  std::string last_error;
  auto backoff = retry.initial_backoff;
  const int attempts = std::max(retry.attempts, 1);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(ep.base);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      return res->body;
    } else if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      throw BackendError(ep.url() + " answered HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw BackendError(ep.url() + " failed after " + std::to_string(attempts) + " attempts (" + last_error + ")");
}

EntailmentVerdict verdict(bool entails) {
  return entails ? EntailmentVerdict{EntailmentLabel::entailment, 1.0}
                 : EntailmentVerdict{EntailmentLabel::neutral, 0.0};
}

std::set<std::string> content_terms(std::string_view s) {
  std::set<std::string> terms;
  for (auto& t : text::tokenize(s)) {
    if (t.size() >= 4) terms.insert(std::move(t));
  }
  return terms;
}

}  // namespace

json chat_completion_body(const LlmRequest& request, const std::string& model) {
  json messages = json::array();
  if (!request.system_instruction.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_instruction}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_message}});
  return {{"model", model},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_output_tokens}};
}

std::string parse_chat_completion(const std::string& body) {
  try {
    const auto doc = json::parse(body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw BackendError("chat completion content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed chat completion reply: ") + e.what());
  }
}

json entail_body(const EntailmentQuery& query) { return {{"premise", query.premise}, {"hypothesis", query.hypothesis}}; }

EntailmentVerdict parse_entail_reply(const std::string& body) {
  EntailmentVerdict v;
  try {
    const auto doc = json::parse(body);
    v.label = entailment_label_from_string(doc.at("label").get<std::string>());
    v.score = doc.at("score").get<double>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed entailment reply: ") + e.what());
  }
  validate(v);
  return v;
}

HttpLlmBackend::HttpLlmBackend(const std::string& endpoint, std::string model, std::string api_key,
                               RetryPolicy retry, std::chrono::seconds timeout)
    : endpoint_(parse_endpoint(endpoint, "/v1/chat/completions")),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      retry_(retry),
      timeout_(timeout) {}

std::string HttpLlmBackend::complete(const LlmRequest& request) {
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const auto body = post_with_retry(endpoint_, headers, chat_completion_body(request, model_).dump(), retry_, timeout_);
  return parse_chat_completion(body);
}

HttpEntailmentBackend::HttpEntailmentBackend(const std::string& endpoint, std::string model, RetryPolicy retry,
                                             std::chrono::seconds timeout)
    : endpoint_(parse_endpoint(endpoint, "/entail")), model_(std::move(model)), retry_(retry), timeout_(timeout) {}

EntailmentVerdict HttpEntailmentBackend::entail(const EntailmentQuery& query) {
  const auto body = post_with_retry(endpoint_, {}, entail_body(query).dump(), retry_, timeout_);
  return parse_entail_reply(body);
}

CannedLlm::CannedLlm(std::map<std::string, std::string> answers, std::optional<std::string> fallback)
    : answers_(std::move(answers)), fallback_(std::move(fallback)) {}

std::string CannedLlm::complete(const LlmRequest& request) {
  if (auto it = answers_.find(request.user_message); it != answers_.end()) return it->second;
  if (fallback_) return *fallback_;
  throw BackendError("mock-canned has no answer for the given prompt");
}

FunctionLlm::FunctionLlm(Fn fn, std::string model) : fn_(std::move(fn)), model_(std::move(model)) {}

std::string HeuristicLlm::complete(const LlmRequest& request) {
  const auto& prompt = request.user_message;
  if (auto f = prompts::parse_extraction_prompt(prompt)) {
    const auto query_terms = content_terms(f->query);
    std::string out;
    for (const auto& sentence : text::split_sentences(f->text)) {
      const auto terms = content_terms(sentence);
      const bool overlaps = std::any_of(terms.begin(), terms.end(),
                                        [&](const std::string& t) { return query_terms.count(t) != 0; });
      if (overlaps) out += sentence + "\n";
    }
    return out.empty() ? std::string(prompts::kNoNugget) : out;
  }
  if (auto f = prompts::parse_ntr_prompt(prompt)) {
    const auto gold = text::to_lower_ascii(text::normalize_whitespace(f->gold));
    const auto response = text::to_lower_ascii(text::normalize_whitespace(f->response));
    return response.find(gold) != std::string::npos ? "yes" : "no";
  }
  if (auto f = prompts::parse_relevance_prompt(prompt)) {
    const auto query_terms = content_terms(f->query);
    const auto passage_terms = content_terms(f->passage);
    if (query_terms.empty()) return "0";
    const auto shared = static_cast<double>(std::count_if(
        query_terms.begin(), query_terms.end(), [&](const std::string& t) { return passage_terms.count(t) != 0; }));
    return std::to_string(static_cast<int>(std::lround(4.0 * shared / static_cast<double>(query_terms.size()))));
  }
  throw BackendError("mock-heuristic cannot answer an unrecognised prompt");
}

EntailmentVerdict ExactMatchEntailment::entail(const EntailmentQuery& query) {
  return verdict(query.premise == query.hypothesis);
}

EntailmentVerdict SubstringEntailment::entail(const EntailmentQuery& query) {
  return verdict(query.premise.find(query.hypothesis) != std::string::npos);
}

FunctionEntailment::FunctionEntailment(Fn fn, std::string model) : fn_(std::move(fn)), model_(std::move(model)) {}

EntailmentVerdict FunctionEntailment::entail(const EntailmentQuery& query) {
  return verdict(fn_(query.premise, query.hypothesis));
}

std::shared_ptr<LlmBackend> make_llm_backend(const std::string& spec, const std::string& model,
                                             const std::string& api_key, RetryPolicy retry) {
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    if (model.empty()) throw ConfigError("an LLM model id is required for endpoint " + spec);
    return std::make_shared<HttpLlmBackend>(spec, model, api_key, retry);
  }
  if (spec == "mock:heuristic") return std::make_shared<HeuristicLlm>();
  if (spec.rfind("mock:canned=", 0) == 0) {
    const auto path = spec.substr(std::string("mock:canned=").size());
    json doc;
    try {
      doc = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
      throw ConfigError("canned answers '" + path + "': " + e.what());
    }
    std::map<std::string, std::string> answers = doc.value("answers", std::map<std::string, std::string>{});
    std::optional<std::string> fallback;
    if (doc.contains("default")) fallback = doc["default"].get<std::string>();
    return std::make_shared<CannedLlm>(std::move(answers), std::move(fallback));
  }
  throw ConfigError("unknown LLM backend '" + spec + "' (expected http(s)://..., mock:heuristic or mock:canned=FILE)");
}

std::shared_ptr<EntailmentBackend> make_entailment_backend(const std::string& spec, const std::string& model,
                                                           RetryPolicy retry) {
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    return std::make_shared<HttpEntailmentBackend>(spec, model.empty() ? "nli-server" : model, retry);
  }
  if (spec == "mock:exact") return std::make_shared<ExactMatchEntailment>();
  if (spec == "mock:substring") return std::make_shared<SubstringEntailment>();
  throw ConfigError("unknown entailment backend '" + spec + "' (expected http(s)://..., mock:exact or mock:substring)");
}

}  // namespace cone::gateway
