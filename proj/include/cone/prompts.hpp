#pragma once

#include <optional>
#include <string>
#include <string_view>

// Zero-shot prompt templates. The extraction and NtR templates are fixed
// verbatim; the relevance-grading template is a versioned asset.
namespace cone::prompts {

std::string extraction_prompt(std::string_view resolved_utterance, std::string_view text);
std::string ntr_prompt(std::string_view gold_nugget, std::string_view response);

inline constexpr std::string_view kRelevancePromptVersion = "relevance-v1";
std::string relevance_prompt(std::string_view query, std::string_view passage);

// Sentinel the extraction prompt asks for when a text has nothing relevant.
inline constexpr std::string_view kNoNugget = "No nugget";

// Inverse of the builders, used by offline mocks that must answer these prompts.
struct ExtractionFields {
  std::string query;
  std::string text;
};
struct NtrFields {
  std::string gold;
  std::string response;
};
struct RelevanceFields {
  std::string query;
  std::string passage;
};

std::optional<ExtractionFields> parse_extraction_prompt(std::string_view prompt);
std::optional<NtrFields> parse_ntr_prompt(std::string_view prompt);
std::optional<RelevanceFields> parse_relevance_prompt(std::string_view prompt);

}  // namespace cone::prompts
