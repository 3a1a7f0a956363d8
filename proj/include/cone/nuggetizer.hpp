#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cone/error.hpp"
#include "cone/gateway.hpp"
#include "cone/types.hpp"

// LLM-driven nugget extraction. Every accepted nugget is a span of its source
// text; model lines that are not spans go through a repair pipeline (exact,
// whitespace-normalized, case-insensitive) before being dropped or rejected.
namespace cone::nuggetizer {

enum class RepairStatus { exact, whitespace, case_insensitive, no_match };

std::string to_string(RepairStatus s);

struct SpanMatch {
  CharSpan span;
  RepairStatus status = RepairStatus::exact;
};

// First occurrence of `candidate` in `source`, trying exact, then
// whitespace-normalized, then case-insensitive normalized matching. Offsets
// are byte offsets into `source`.
std::optional<SpanMatch> locate_span(std::string_view candidate, std::string_view source);

inline std::optional<CharSpan> validate_span(std::string_view candidate, std::string_view source) {
  if (auto m = locate_span(candidate, source)) return m->span;
  return std::nullopt;
}

struct LineOutcome {
  std::string raw_line;
  RepairStatus status = RepairStatus::no_match;
};

struct ExtractionOutcome {
  NuggetSet nuggets;
  // Lines that were not verbatim spans: repaired ones and dropped ones.
  std::vector<LineOutcome> non_span_lines;
  bool no_nugget = false;
};

struct ExtractOptions {
  TurnId turn_id;
  NuggetSource source = NuggetSource::llm;
  std::optional<PassageId> source_passage_id;
  // Strict mode turns an unrepairable line into a SpanError.
  bool strict_span = false;
};

class SpanError : public Error {
 public:
  SpanError(const std::string& what, ExtractionOutcome partial)
      : Error("nuggetizer", what), partial_(std::move(partial)) {}
  const ExtractionOutcome& partial() const noexcept { return partial_; }

 private:
  ExtractionOutcome partial_;
};

// Removes a leading list marker such as "1.", "2)", "-", "*" or "•".
std::string strip_list_marker(std::string_view line);

// Pure post-processing of a model completion against its source text.
ExtractionOutcome parse_completion(std::string_view completion, std::string_view source_text,
                                   const ExtractOptions& options);

ExtractionOutcome extract(gateway::Gateway& gateway, std::string_view source_text,
                          std::string_view resolved_utterance, const ExtractOptions& options);

struct PassageFailure {
  TurnId turn_id;
  PassageId passage_id;
  std::string message;
};

struct PoolExtraction {
  NuggetCollection nuggets;
  std::vector<PassageFailure> failures;
  std::vector<LineOutcome> non_span_lines;
};

// Runs extraction over every judged passage with grade >= min_grade and merges
// the nuggets per turn, passages in id order. Nugget ids are "<turn_id>:<i>".
PoolExtraction extract_for_pool(gateway::Gateway& gateway, const Qrels& qrels, const PassageLookup& passages,
                                const std::map<TurnId, std::string>& resolved_utterances, int min_grade = 2,
                                bool strict_span = false);

}  // namespace cone::nuggetizer
