#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cone/gateway.hpp"
#include "cone/types.hpp"

// Coverage of gold nuggets by a system response.
//
// NtN: a gold nugget is covered when some extracted nugget entails it. The
// direction matters: premise = extracted nugget, hypothesis = gold nugget.
// NtR: each gold nugget is checked against the whole response, either with
// the yes/no LLM prompt or with the entailment model (premise = response).
namespace cone::matcher {

enum class MatchMode { ntn, ntr, ntr_nli };

std::string to_string(MatchMode mode);
MatchMode match_mode_from_string(const std::string& s);

struct MatchMatrix {
  MatchMode mode = MatchMode::ntn;
  std::vector<std::string> extracted_ids;  // NtN rows; empty otherwise
  std::vector<std::string> gold_ids;       // columns
  // NtN: extracted_ids.size() rows of gold_ids.size() decisions.
  // NtR: a single row over gold_ids.
  std::vector<std::vector<bool>> decisions;
  std::set<std::string> covered_gold;
  // Present only in NtN mode.
  std::optional<std::set<std::string>> covering_extracted;
  // NtR replies that were neither "yes" nor "no" (by gold id).
  std::vector<std::string> parse_failures;

  // Recomputes the covered/covering projections from `decisions`.
  void project();
};

// Builds an NtN matrix from a precomputed decision function; used by the
// gateway-backed matcher and by oracles alike.
template <typename Decide>
MatchMatrix assemble_ntn(const NuggetSet& extracted, const NuggetSet& gold, Decide&& decide) {
  MatchMatrix m;
  m.mode = MatchMode::ntn;
  for (const auto& n : extracted.nuggets) m.extracted_ids.push_back(n.nugget_id);
  for (const auto& n : gold.nuggets) m.gold_ids.push_back(n.nugget_id);
  m.decisions.assign(extracted.size(), std::vector<bool>(gold.size(), false));
  for (std::size_t i = 0; i < extracted.size(); ++i) {
    for (std::size_t j = 0; j < gold.size(); ++j) m.decisions[i][j] = decide(i, j);
  }
  m.project();
  return m;
}

MatchMatrix match_ntn(gateway::Gateway& gateway, const NuggetSet& extracted, const NuggetSet& gold);

enum class ParseFailurePolicy { treat_as_no, abort };

// First token of the reply, lowercased with punctuation stripped: "yes" -> true,
// "no" -> false, anything else -> nullopt.
std::optional<bool> parse_yes_no(std::string_view reply);

MatchMatrix match_ntr(gateway::Gateway& gateway, const Response& response, const NuggetSet& gold,
                      ParseFailurePolicy policy = ParseFailurePolicy::treat_as_no);

MatchMatrix match_ntr_nli(gateway::Gateway& gateway, const Response& response, const NuggetSet& gold);

// Per extracted nugget: did it entail any gold nugget? (the per-nugget label report)
std::vector<bool> extracted_match_labels(const MatchMatrix& m);

}  // namespace cone::matcher
