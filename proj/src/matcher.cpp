#include "cone/matcher.hpp"

#include <cctype>

#include "cone/error.hpp"
#include "cone/prompts.hpp"
#include "cone/text.hpp"

namespace cone::matcher {

std::string to_string(MatchMode mode) {
  switch (mode) {
    case MatchMode::ntn: return "ntn";
    case MatchMode::ntr: return "ntr";
    case MatchMode::ntr_nli: return "ntr-nli";
  }
  return "ntn";
}

MatchMode match_mode_from_string(const std::string& s) {
  if (s == "ntn") return MatchMode::ntn;
  if (s == "ntr") return MatchMode::ntr;
  if (s == "ntr-nli" || s == "ntr_nli") return MatchMode::ntr_nli;
  throw ConfigError("unknown matching mode '" + s + "' (expected ntn, ntr or ntr-nli)");
}

void MatchMatrix::project() {
  covered_gold.clear();
  if (mode == MatchMode::ntn) {
    covering_extracted.emplace();
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      for (std::size_t j = 0; j < decisions[i].size(); ++j) {
        if (!decisions[i][j]) continue;
        covered_gold.insert(gold_ids[j]);
        covering_extracted->insert(extracted_ids[i]);
      }
    }
  } else {
    covering_extracted.reset();
    if (decisions.empty()) return;
    for (std::size_t j = 0; j < decisions.front().size(); ++j) {
      if (decisions.front()[j]) covered_gold.insert(gold_ids[j]);
    }
  }
}

namespace {

void check_same_turn(const NuggetSet& a, const NuggetSet& b) {
  if (!a.turn_id.empty() && !b.turn_id.empty() && a.turn_id != b.turn_id) {
    throw Error("matcher", "nugget sets belong to different turns ('" + a.turn_id + "' vs '" + b.turn_id + "')");
  }
}

MatchMatrix ntr_shell(MatchMode mode, const NuggetSet& gold) {
  MatchMatrix m;
  m.mode = mode;
  for (const auto& n : gold.nuggets) m.gold_ids.push_back(n.nugget_id);
  m.decisions.assign(1, std::vector<bool>(gold.size(), false));
  return m;
}

}  // namespace

MatchMatrix match_ntn(gateway::Gateway& gateway, const NuggetSet& extracted, const NuggetSet& gold) {
  check_same_turn(extracted, gold);
  std::vector<gateway::EntailmentQuery> queries;
  queries.reserve(extracted.size() * gold.size());
  for (const auto& p : extracted.nuggets) {
    for (const auto& g : gold.nuggets) queries.push_back({p.text, g.text});
  }
  const auto verdicts = gateway.entail_all(queries);
  return assemble_ntn(extracted, gold,
                      [&](std::size_t i, std::size_t j) { return verdicts[i * gold.size() + j].entails(); });
}

std::optional<bool> parse_yes_no(std::string_view reply) {
  const auto trimmed = text::trim(reply);
  std::size_t i = 0;
  while (i < trimmed.size() && !std::isalnum(static_cast<unsigned char>(trimmed[i]))) ++i;
  std::size_t j = i;
  while (j < trimmed.size() && std::isalnum(static_cast<unsigned char>(trimmed[j]))) ++j;
  const auto token = text::to_lower_ascii(std::string_view(trimmed).substr(i, j - i));
  if (token == "yes") return true;
  if (token == "no") return false;
  return std::nullopt;
}

MatchMatrix match_ntr(gateway::Gateway& gateway, const Response& response, const NuggetSet& gold,
                      ParseFailurePolicy policy) {
  if (text::trim(response.text).empty()) throw Error("matcher", "response text is empty");
  auto m = ntr_shell(MatchMode::ntr, gold);
  std::vector<gateway::LlmRequest> requests(gold.size());
  for (std::size_t j = 0; j < gold.size(); ++j) {
    requests[j].user_message = prompts::ntr_prompt(gold.nuggets[j].text, response.text);
  }
  const auto replies = gateway.complete_all(requests);
  for (std::size_t j = 0; j < gold.size(); ++j) {
    const auto decision = parse_yes_no(replies[j]);
    if (!decision) {
      if (policy == ParseFailurePolicy::abort) {
        throw Error("matcher", "unparseable NtR reply for nugget '" + gold.nuggets[j].nugget_id + "': " + replies[j]);
      }
      m.parse_failures.push_back(gold.nuggets[j].nugget_id);
    }
    m.decisions[0][j] = decision.value_or(false);
  }
  m.project();
  return m;
}

MatchMatrix match_ntr_nli(gateway::Gateway& gateway, const Response& response, const NuggetSet& gold) {
  if (text::trim(response.text).empty()) throw Error("matcher", "response text is empty");
  auto m = ntr_shell(MatchMode::ntr_nli, gold);
  std::vector<gateway::EntailmentQuery> queries;
  for (const auto& g : gold.nuggets) queries.push_back({response.text, g.text});
  const auto verdicts = gateway.entail_all(queries);
  for (std::size_t j = 0; j < gold.size(); ++j) m.decisions[0][j] = verdicts[j].entails();
  m.project();
  return m;
}

std::vector<bool> extracted_match_labels(const MatchMatrix& m) {
  std::vector<bool> labels(m.extracted_ids.size(), false);
  for (std::size_t i = 0; i < m.extracted_ids.size(); ++i) {
    labels[i] = m.covering_extracted && m.covering_extracted->count(m.extracted_ids[i]) != 0;
  }
  return labels;
}

}  // namespace cone::matcher
