#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cone/gateway.hpp"
#include "cone/matcher.hpp"
#include "cone/metrics.hpp"
#include "cone/types.hpp"

// End-to-end evaluation of one submitted run and rendering of the report
// artifacts: aggregate nugget precision/recall per gold variant, per-turn
// metrics, leaderboard rank against reference scores, per-nugget labels.
namespace cone::report {

inline const std::vector<std::string> kGoldVariants = {"human", "human-dedup", "llm", "llm-dedup"};

struct GoldVariant {
  std::string name;
  NuggetCollection nuggets;
};

struct GenerationInputs {
  GenerationRun run;
  std::vector<GoldVariant> gold;
  // Topic turns; supplies resolved utterances for extraction and the personal flag.
  std::map<TurnId, Turn> turns;
  // Precomputed response nuggets; when absent NtN extracts them on the fly.
  std::optional<NuggetCollection> extracted;
  std::optional<std::map<TurnId, GoldResponse>> gold_responses;
  std::optional<PassageLookup> passages;
  // Reference scores for the leaderboard section.
  std::vector<ExternalScoreTable> participants;
};

struct GenerationOptions {
  matcher::MatchMode mode = matcher::MatchMode::ntn;
  bool strict_span = false;
  matcher::ParseFailurePolicy parse_policy = matcher::ParseFailurePolicy::treat_as_no;
  std::size_t groundedness_top_k = 3;
};

struct Issue {
  std::string module;
  TurnId turn_id;
  std::string message;
  std::string hint;
};

struct NuggetLabel {
  std::string nugget_id;
  std::string text;
  bool matched = false;
};

struct TurnResult {
  TurnId turn_id;
  std::optional<bool> personal;
  // "<variant>/precision", "<variant>/recall", "rouge1_f1", "groundedness", ...
  std::map<std::string, metrics::Value> metrics;
  // NtN: the response's extracted nuggets; NtR: the gold nuggets.
  std::map<std::string, std::vector<NuggetLabel>> labels;
};

struct Summary {
  std::map<std::string, double> means;
  std::size_t turns = 0;
};

struct VariantAggregate {
  std::map<std::string, double> means;  // "precision", "recall"
  std::size_t turns_evaluated = 0;
  std::vector<TurnId> turns_excluded;
  std::optional<Summary> personal;
  std::optional<Summary> non_personal;
};

struct LeaderboardEntry {
  std::string metric;
  double score = 0.0;
  double rank = 0.0;
  std::size_t total = 0;
};

struct GenerationReport {
  RunTag run_tag;
  matcher::MatchMode mode = matcher::MatchMode::ntn;
  std::string llm_model;
  std::string nli_model;
  std::vector<std::string> variants;
  std::vector<TurnResult> turns;
  std::map<std::string, VariantAggregate> aggregate;
  std::map<std::string, double> reference;  // ROUGE and groundedness means
  std::vector<LeaderboardEntry> leaderboard;
  std::vector<Issue> errors;
  std::vector<std::string> warnings;

  bool complete() const noexcept { return errors.empty(); }
};

GenerationReport evaluate_generation(gateway::Gateway& gateway, const GenerationInputs& inputs,
                                     const GenerationOptions& options = {});

// Run-level metric name as used by the leaderboard, e.g. "ntn_human_recall".
std::string metric_key(matcher::MatchMode mode, const std::string& variant, const std::string& metric);

nlohmann::json to_json(const GenerationReport& report);
std::string per_turn_tsv(const GenerationReport& report);
std::string aggregate_tsv(const GenerationReport& report);
std::string leaderboard_tsv(const std::vector<LeaderboardEntry>& leaderboard);
nlohmann::json nugget_labels_json(const GenerationReport& report);

// Ranks `scores` (metric -> value of the submitted run) against every column of
// `participants` with the same name. A participant sharing the submitted run's
// tag is replaced by the submission.
std::vector<LeaderboardEntry> leaderboard(const RunTag& run_tag, const std::map<std::string, double>& scores,
                                          const std::vector<ExternalScoreTable>& participants);

// --- retrieval -----------------------------------------------------------------

struct RetrievalOptions {
  std::vector<std::size_t> cutoffs = {5, 20};
  std::size_t depth = 1000;
  int rel_threshold = 1;
  metrics::Gain gain = metrics::Gain::linear;
};

struct RetrievalReport {
  RunTag run_tag;
  std::map<std::string, metrics::PerTurn> metrics;  // "ndcg@5", "P@20", "R@1000", "map"
  std::vector<LeaderboardEntry> leaderboard;
  std::vector<TurnId> missing_turns;  // judged turns the run does not rank
};

RetrievalReport evaluate_retrieval(const RetrievalRun& run, const Qrels& qrels, const RetrievalOptions& options = {},
                                   const std::vector<ExternalScoreTable>& participants = {});

nlohmann::json to_json(const RetrievalReport& report);
std::string per_turn_tsv(const RetrievalReport& report);

// Bundled reference scores of the participant runs.
std::vector<ExternalScoreTable> bundled_generation_scores();
std::vector<ExternalScoreTable> bundled_retrieval_scores();

// Fixed-precision rendering used in every TSV cell.
std::string format_number(double v);

}  // namespace cone::report
