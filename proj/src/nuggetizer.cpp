#include "cone/nuggetizer.hpp"

#include <set>

#include "cone/parallel.hpp"
#include "cone/prompts.hpp"
#include "cone/text.hpp"

namespace cone::nuggetizer {

std::string to_string(RepairStatus s) {
  switch (s) {
    case RepairStatus::exact: return "exact";
    case RepairStatus::whitespace: return "repaired-whitespace";
    case RepairStatus::case_insensitive: return "repaired-case";
    case RepairStatus::no_match: return "no-match";
  }
  return "no-match";
}

namespace {

std::optional<CharSpan> find_normalized(std::string_view candidate, const text::NormalizedText& source,
                                        bool fold_case) {
  auto needle = text::normalize_whitespace(candidate);
  if (needle.empty()) return std::nullopt;
  std::string hay = source.text;
  if (fold_case) {
    needle = text::to_lower_ascii(needle);
    hay = text::to_lower_ascii(hay);
  }
  const auto pos = hay.find(needle);
  if (pos == std::string::npos) return std::nullopt;
  return CharSpan{source.origin[pos], source.origin[pos + needle.size() - 1] + 1};
}

bool is_sentinel(std::string_view line) {
  auto s = text::to_lower_ascii(text::trim(line));
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '"')) s.pop_back();
  while (!s.empty() && s.front() == '"') s.erase(s.begin());
  return s == text::to_lower_ascii(prompts::kNoNugget);
}

}  // namespace

std::optional<SpanMatch> locate_span(std::string_view candidate, std::string_view source) {
  if (candidate.empty()) return std::nullopt;
  if (const auto pos = source.find(candidate); pos != std::string_view::npos) {
    return SpanMatch{{pos, pos + candidate.size()}, RepairStatus::exact};
  }
  const auto normalized = text::normalize_with_offsets(source);
  if (auto span = find_normalized(candidate, normalized, false)) return SpanMatch{*span, RepairStatus::whitespace};
  if (auto span = find_normalized(candidate, normalized, true)) {
    return SpanMatch{*span, RepairStatus::case_insensitive};
  }
  return std::nullopt;
}

std::string strip_list_marker(std::string_view line) {
  auto s = text::trim(line);
  std::size_t i = 0;
  if (s.rfind("\xE2\x80\xA2", 0) == 0) {  // U+2022 bullet
    i = 3;
  } else if (!s.empty() && (s[0] == '-' || s[0] == '*')) {
    i = 1;
  } else {
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == 0 || i == s.size() || (s[i] != '.' && s[i] != ')')) return s;
    ++i;
  }
  if (i < s.size() && s[i] != ' ' && s[i] != '\t') return s;
  return text::trim(std::string_view(s).substr(i));
}

ExtractionOutcome parse_completion(std::string_view completion, std::string_view source_text,
                                   const ExtractOptions& options) {
  ExtractionOutcome out;
  out.nuggets.turn_id = options.turn_id;
  bool saw_sentinel = false;
  std::set<std::string> seen_texts;
  for (const auto& raw : text::split_lines(completion)) {
    if (text::trim(raw).empty()) continue;
    if (is_sentinel(raw)) {
      saw_sentinel = true;
      continue;
    }
    const auto candidate = strip_list_marker(raw);
    if (candidate.empty()) continue;
    const auto match = locate_span(candidate, source_text);
    if (!match) {
      out.non_span_lines.push_back({raw, RepairStatus::no_match});
      if (options.strict_span) throw SpanError("line is not a span of the source text: \"" + raw + "\"", out);
      continue;
    }
    if (match->status != RepairStatus::exact) out.non_span_lines.push_back({raw, match->status});
    auto span_text = std::string(source_text.substr(match->span.start, match->span.end - match->span.start));
    if (!seen_texts.insert(span_text).second) continue;
    Nugget n;
    n.nugget_id = options.turn_id + ":" + std::to_string(out.nuggets.nuggets.size());
    n.turn_id = options.turn_id;
    n.text = std::move(span_text);
    n.source = options.source;
    n.source_passage_id = options.source_passage_id;
    n.char_span = match->span;
    out.nuggets.nuggets.push_back(std::move(n));
  }
  out.no_nugget = saw_sentinel && out.nuggets.empty();
  return out;
}

ExtractionOutcome extract(gateway::Gateway& gateway, std::string_view source_text,
                          std::string_view resolved_utterance, const ExtractOptions& options) {
  if (text::trim(source_text).empty()) throw Error("nuggetizer", "extraction source text is empty");
  if (text::trim(resolved_utterance).empty()) {
    throw Error("nuggetizer", "resolved utterance is empty for turn '" + options.turn_id + "'");
  }
  gateway::LlmRequest request;
  request.user_message = prompts::extraction_prompt(resolved_utterance, source_text);
  return parse_completion(gateway.complete(request), source_text, options);
}

PoolExtraction extract_for_pool(gateway::Gateway& gateway, const Qrels& qrels, const PassageLookup& passages,
                                const std::map<TurnId, std::string>& resolved_utterances, int min_grade,
                                bool strict_span) {
  struct Job {
    TurnId turn;
    PassageId passage;
  };
  std::vector<Job> jobs;
  std::vector<std::string> missing;
  for (const auto& [turn, docs] : qrels.judgments) {
    for (const auto& [doc, grade] : docs) {
      if (grade < min_grade) continue;
      if (passages.count(doc) == 0) missing.push_back(doc);
      jobs.push_back({turn, doc});
    }
    if (!jobs.empty() && jobs.back().turn == turn && resolved_utterances.count(turn) == 0) {
      throw Error("nuggetizer", "no resolved utterance for turn '" + turn + "'");
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 5; ++i) list += (i ? ", " : "") + missing[i];
    throw Error("nuggetizer", std::to_string(missing.size()) + " relevant passage(s) lack text, e.g. " + list);
  }

  struct JobResult {
    std::optional<ExtractionOutcome> outcome;
    std::string error;
  };
  std::vector<JobResult> results(jobs.size());
  parallel_for(jobs.size(), gateway.concurrency(), [&](std::size_t i) {
    ExtractOptions options;
    options.turn_id = jobs[i].turn;
    options.source = NuggetSource::llm;
    options.source_passage_id = jobs[i].passage;
    options.strict_span = strict_span;
    try {
      results[i].outcome = extract(gateway, passages.at(jobs[i].passage), resolved_utterances.at(jobs[i].turn), options);
    } catch (const Error& e) {
      results[i].error = e.what();
    }
  });

  PoolExtraction out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& set = out.nuggets[jobs[i].turn];
    set.turn_id = jobs[i].turn;
    if (!results[i].outcome) {
      out.failures.push_back({jobs[i].turn, jobs[i].passage, results[i].error});
      continue;
    }
    for (auto& line : results[i].outcome->non_span_lines) out.non_span_lines.push_back(std::move(line));
    for (auto& n : results[i].outcome->nuggets.nuggets) {
      n.nugget_id = jobs[i].turn + ":" + std::to_string(set.nuggets.size());
      set.nuggets.push_back(std::move(n));
    }
  }
  return out;
}

}  // namespace cone::nuggetizer
