#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cone {

using TurnId = std::string;
using PassageId = std::string;
using RunTag = std::string;

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct PtkbStatement {
  std::string statement_id;
  std::string text;
  // Organizer and assessor judgments are released separately and kept apart.
  std::map<TurnId, int> organizer_labels;
  std::map<TurnId, int> assessor_labels;
};

struct Turn {
  TurnId turn_id;
  int turn_index = 0;
  std::string utterance;
  std::string resolved_utterance;
  std::string canonical_response;
  std::vector<PassageId> response_provenance;
  std::vector<std::string> ptkb_provenance;
  bool assessed = false;
  bool personal = false;
};

struct Topic {
  std::string topic_id;
  std::string title;
  std::vector<PtkbStatement> ptkb;
  std::vector<Turn> turns;
};

struct CollectionStats {
  std::size_t topics = 0;
  std::size_t turns = 0;
  std::size_t assessed_turns = 0;
  std::size_t assessed_topics = 0;
  std::size_t ptkb_statements = 0;
};

enum class NuggetSource { human, llm, response };

struct Nugget {
  std::string nugget_id;
  TurnId turn_id;
  std::string text;
  std::optional<PassageId> source_passage_id;
  NuggetSource source = NuggetSource::human;
  std::optional<CharSpan> char_span;
};

struct NuggetSet {
  TurnId turn_id;
  std::vector<Nugget> nuggets;
  bool deduplicated = false;

  std::size_t size() const noexcept { return nuggets.size(); }
  bool empty() const noexcept { return nuggets.empty(); }
};

using NuggetCollection = std::map<TurnId, NuggetSet>;

enum class RunCategory { automatic, manual, generation_only };

struct RankedPassage {
  PassageId passage_id;
  double score = 0.0;
  int rank = 0;
};

struct RetrievalRun {
  RunTag run_tag;
  RunCategory category = RunCategory::automatic;
  std::map<TurnId, std::vector<RankedPassage>> rankings;
};

struct Response {
  std::string text;
  std::vector<PassageId> passage_provenance;
  int rank = 1;

  std::size_t length_words() const;
};

struct GenerationRun {
  RunTag run_tag;
  // Rank-1 response per turn; this is what gets evaluated.
  std::map<TurnId, Response> responses;
  // Lower-ranked responses, preserved for round-tripping but not evaluated.
  std::map<TurnId, std::vector<Response>> alternates;
};

struct Qrels {
  std::map<TurnId, std::map<PassageId, int>> judgments;

  std::optional<int> grade(const TurnId& turn, const PassageId& passage) const;
  std::size_t size() const;
};

struct GoldResponse {
  TurnId turn_id;
  std::string text;
  std::vector<PassageId> supporting_passage_ids;
};

struct ExternalScoreTable {
  std::string metric_name;
  std::map<RunTag, double> scores;
};

using PassageLookup = std::map<PassageId, std::string>;

std::string to_string(NuggetSource s);
NuggetSource nugget_source_from_string(const std::string& s);
std::string to_string(RunCategory c);
RunCategory run_category_from_string(const std::string& s);

}  // namespace cone
