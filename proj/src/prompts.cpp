#include "cone/prompts.hpp"

namespace cone::prompts {

namespace {

constexpr std::string_view kExtractionInstruction =
    "# Instruction: I will give you a user query and a text to the user query. You should extract the "
    "nuggets of information related to the user query from the given text. The nuggets should be an exact "
    "copy of a span of text from the text. \n"
    "Please extract the nuggets and write each nugget in one line. If there is no nugget of information in "
    "the given text, please only say \"No nugget\". \n\n";
constexpr std::string_view kExtractionQuery = "# User query: ";
constexpr std::string_view kExtractionText = "\n# Text: ";
constexpr std::string_view kExtractionTail =
    "\n(Please copy exact spans from the text as nuggets)\n"
    "# Nuggets: \n";

constexpr std::string_view kNtrInstruction =
    "# Instruction: I will provide you with a response and a gold information piece. Your task is to "
    "determine whether the response captures this piece of information or not.\n\n";
constexpr std::string_view kNtrGold = "# Gold Information: ";
constexpr std::string_view kNtrResponse = "\n# Response: ";
constexpr std::string_view kNtrTail =
    "\n# Please answer the following: \n"
    "Does the Response capture the Gold Information? Only respond with \"yes\" or \"no\" without further "
    "explanation. \n"
    "# Answer (yes/no): \n";

constexpr std::string_view kRelevanceInstruction =
    "# Instruction: You are judging search results for a conversational assistant. Given the user's "
    "self-contained query and one passage, rate how well the passage satisfies the information need on "
    "this scale:\n"
    "0 = fails to meet: the passage is unrelated or useless for the query.\n"
    "1 = slightly meets: on topic but gives little of what the user asked for.\n"
    "2 = moderately meets: answers part of the need.\n"
    "3 = highly meets: answers most of the need.\n"
    "4 = fully meets: a complete and direct answer.\n"
    "Reply with the single digit only.\n\n";
constexpr std::string_view kRelevanceQuery = "# Query: ";
constexpr std::string_view kRelevancePassage = "\n# Passage: ";
constexpr std::string_view kRelevanceTail = "\n# Score (0-4): \n";

std::string assemble(std::initializer_list<std::string_view> parts) {
  std::string out;
  for (auto p : parts) out.append(p);
  return out;
}

// Recovers the two slot values of a template "<head><a><mid><b><tail>".
std::optional<std::pair<std::string, std::string>> split_slots(std::string_view prompt, std::string_view head,
                                                               std::string_view mid, std::string_view tail) {
  if (prompt.substr(0, head.size()) != head) return std::nullopt;
  if (prompt.size() < head.size() + tail.size()) return std::nullopt;
  if (prompt.substr(prompt.size() - tail.size()) != tail) return std::nullopt;
  auto body = prompt.substr(head.size(), prompt.size() - head.size() - tail.size());
  const auto m = body.find(mid);
  if (m == std::string_view::npos) return std::nullopt;
  return std::pair{std::string(body.substr(0, m)), std::string(body.substr(m + mid.size()))};
}

}  // namespace

std::string extraction_prompt(std::string_view resolved_utterance, std::string_view text) {
  return assemble({kExtractionInstruction, kExtractionQuery, resolved_utterance, kExtractionText, text,
                   kExtractionTail});
}

std::string ntr_prompt(std::string_view gold_nugget, std::string_view response) {
  return assemble({kNtrInstruction, kNtrGold, gold_nugget, kNtrResponse, response, kNtrTail});
}

std::string relevance_prompt(std::string_view query, std::string_view passage) {
  return assemble({kRelevanceInstruction, kRelevanceQuery, query, kRelevancePassage, passage, kRelevanceTail});
}

std::optional<ExtractionFields> parse_extraction_prompt(std::string_view prompt) {
  const auto head = assemble({kExtractionInstruction, kExtractionQuery});
  auto slots = split_slots(prompt, head, kExtractionText, kExtractionTail);
  if (!slots) return std::nullopt;
  return ExtractionFields{std::move(slots->first), std::move(slots->second)};
}

std::optional<NtrFields> parse_ntr_prompt(std::string_view prompt) {
  const auto head = assemble({kNtrInstruction, kNtrGold});
  auto slots = split_slots(prompt, head, kNtrResponse, kNtrTail);
  if (!slots) return std::nullopt;
  return NtrFields{std::move(slots->first), std::move(slots->second)};
}

std::optional<RelevanceFields> parse_relevance_prompt(std::string_view prompt) {
  const auto head = assemble({kRelevanceInstruction, kRelevanceQuery});
  auto slots = split_slots(prompt, head, kRelevancePassage, kRelevanceTail);
  if (!slots) return std::nullopt;
  return RelevanceFields{std::move(slots->first), std::move(slots->second)};
}

}  // namespace cone::prompts
