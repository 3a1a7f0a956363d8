#include "cone/gateway.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <openssl/evp.h>

#include "cone/error.hpp"
#include "cone/parallel.hpp"
#include "cone/text.hpp"

namespace cone::gateway {

using nlohmann::json;

std::string to_string(EntailmentLabel label) {
  switch (label) {
    case EntailmentLabel::entailment: return "entailment";
    case EntailmentLabel::neutral: return "neutral";
    case EntailmentLabel::contradiction: return "contradiction";
  }
  return "neutral";
}

EntailmentLabel entailment_label_from_string(const std::string& s) {
  const auto lower = text::to_lower_ascii(s);
  if (lower == "entailment") return EntailmentLabel::entailment;
  if (lower == "neutral") return EntailmentLabel::neutral;
  if (lower == "contradiction") return EntailmentLabel::contradiction;
  throw BackendError("unknown entailment label '" + s + "'");
}

void validate(const LlmRequest& request) {
  if (!(request.temperature >= 0.0)) throw BackendError("LLM request temperature must be >= 0");
  if (text::trim(request.user_message).empty()) throw BackendError("LLM request has an empty user message");
}

void validate(const EntailmentQuery& query) {
  if (text::trim(query.premise).empty() || text::trim(query.hypothesis).empty()) {
    throw BackendError("entailment query needs a non-empty premise and hypothesis");
  }
}

void validate(const EntailmentVerdict& verdict) {
  if (!(verdict.score >= 0.0 && verdict.score <= 1.0)) {
    throw BackendError("entailment score " + std::to_string(verdict.score) + " outside [0,1]");
  }
}

namespace {

std::string canonical_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\r' && i + 1 < s.size() && s[i + 1] == '\n') continue;
    out.push_back(s[i]);
  }
  return text::trim(out);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("backend-gateway", "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

json verdict_to_json(const EntailmentVerdict& v) { return {{"label", to_string(v.label)}, {"score", v.score}}; }

EntailmentVerdict verdict_from_json(const json& j) {
  EntailmentVerdict v;
  v.label = entailment_label_from_string(j.at("label").get<std::string>());
  v.score = j.at("score").get<double>();
  return v;
}

}  // namespace

CallCache::CallCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_);
  if (!in) return;  // first run: the file is created on the first record
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto entry = json::parse(line);
      entries_[entry.at("key").get<std::string>()] = entry.at("response");
    } catch (const json::exception& e) {
      throw Error("backend-gateway", "cache file '" + path_->string() + "' line " + std::to_string(line_no) +
                                         ": " + e.what());
    }
  }
}

json CallCache::canonical_request(const LlmRequest& request) {
  return {{"system", canonical_text(request.system_instruction)},
          {"user", canonical_text(request.user_message)},
          {"temperature", request.temperature},
          {"max_output_tokens", request.max_output_tokens}};
}

json CallCache::canonical_request(const EntailmentQuery& query) {
  return {{"premise", canonical_text(query.premise)}, {"hypothesis", canonical_text(query.hypothesis)}};
}

std::string CallCache::make_key(const std::string& kind, const std::string& model_id,
                                const json& canonical_request) {
  const json keyed = {{"kind", kind}, {"model", model_id}, {"request", canonical_request}};
  return sha256_hex(keyed.dump());
}

std::optional<json> CallCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CallCache::record(const std::string& key, const std::string& kind, const std::string& model_id,
                       const json& canonical_request, const json& response) {
  std::unique_lock lock(mutex_);
  if (!entries_.emplace(key, response).second) return;
  if (!path_) return;
  const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  const json entry = {{"key", key},           {"kind", kind},         {"model", model_id},
                      {"request", canonical_request}, {"response", response}, {"timestamp", now}};
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  std::ofstream out(*path_, std::ios::app);
  if (!out) throw Error("backend-gateway", "cannot append to cache file '" + path_->string() + "'");
  out << entry.dump() << '\n';
}

std::size_t CallCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

// RAII hold on one of the gateway's concurrency slots.
class Gateway::Slot {
 public:
  explicit Slot(Gateway& g) : g_(g) {
    std::unique_lock lock(g_.slots_mutex_);
    g_.slots_cv_.wait(lock, [&] { return g_.in_flight_ < std::max<std::size_t>(g_.options_.concurrency, 1); });
    ++g_.in_flight_;
    auto peak = g_.peak_in_flight_.load();
    while (g_.in_flight_ > peak && !g_.peak_in_flight_.compare_exchange_weak(peak, g_.in_flight_)) {
    }
  }
  ~Slot() {
    {
      std::lock_guard lock(g_.slots_mutex_);
      --g_.in_flight_;
    }
    g_.slots_cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  Gateway& g_;
};

Gateway::Gateway(std::shared_ptr<LlmBackend> llm, std::shared_ptr<EntailmentBackend> nli,
                 std::shared_ptr<CallCache> cache, GatewayOptions options)
    : llm_(std::move(llm)),
      nli_(std::move(nli)),
      cache_(cache ? std::move(cache) : std::make_shared<CallCache>()),
      options_(options) {}

std::string Gateway::complete(const LlmRequest& request) {
  validate(request);
  if (!llm_) throw BackendError("no LLM backend configured");
  const auto canonical = CallCache::canonical_request(request);
  const auto key = CallCache::make_key("llm", llm_->model_id(), canonical);
  if (auto hit = cache_->lookup(key)) {
    ++hits_;
    return hit->get<std::string>();
  }
  if (options_.offline) throw BackendError("offline mode: no cached completion for request " + key);
  std::string completion;
  {
    Slot slot(*this);
    ++calls_;
    completion = llm_->complete(request);
  }
  if (text::trim(completion).empty()) throw BackendError("LLM backend '" + llm_->model_id() + "' returned an empty completion");
  cache_->record(key, "llm", llm_->model_id(), canonical, completion);
  return completion;
}

EntailmentVerdict Gateway::entail(const EntailmentQuery& query) {
  validate(query);
  if (!nli_) throw BackendError("no entailment backend configured");
  const auto canonical = CallCache::canonical_request(query);
  const auto key = CallCache::make_key("nli", nli_->model_id(), canonical);
  if (auto hit = cache_->lookup(key)) {
    ++hits_;
    return verdict_from_json(*hit);
  }
  if (options_.offline) throw BackendError("offline mode: no cached verdict for request " + key);
  EntailmentVerdict verdict;
  {
    Slot slot(*this);
    ++calls_;
    verdict = nli_->entail(query);
  }
  validate(verdict);
  cache_->record(key, "nli", nli_->model_id(), canonical, verdict_to_json(verdict));
  return verdict;
}

std::vector<std::string> Gateway::complete_all(std::span<const LlmRequest> requests) {
  std::vector<std::string> out(requests.size());
  parallel_for(requests.size(), options_.concurrency, [&](std::size_t i) { out[i] = complete(requests[i]); });
  return out;
}

std::vector<EntailmentVerdict> Gateway::entail_all(std::span<const EntailmentQuery> queries) {
  std::vector<EntailmentVerdict> out(queries.size());
  parallel_for(queries.size(), options_.concurrency, [&](std::size_t i) { out[i] = entail(queries[i]); });
  return out;
}

}  // namespace cone::gateway
