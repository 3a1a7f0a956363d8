#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cone/types.hpp"

// Readers and writers for every collection artifact. Parsers throw
// cone::ParseError (with a 1-based line number for line formats) or
// cone::ValidationError when the content is well-formed but violates an
// invariant.
namespace cone::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// --- TREC run: "qid Q0 docid rank score tag" ---------------------------------

struct RunParseOptions {
  // Strict mode rejects an empty run.
  bool strict = false;
  RunCategory category = RunCategory::automatic;
};

RetrievalRun parse_trec_run(std::istream& in, const RunParseOptions& options = {});
RetrievalRun parse_trec_run(std::string_view content, const RunParseOptions& options = {});
void write_trec_run(std::ostream& out, const RetrievalRun& run);

// Restores the canonical order: score descending, then submitted rank, then docid.
void sort_ranking(std::vector<RankedPassage>& ranking);

// --- qrels: "qid 0 docid grade" ----------------------------------------------

Qrels parse_qrels(std::istream& in);
Qrels parse_qrels(std::string_view content);
void write_qrels(std::ostream& out, const Qrels& qrels);

// --- generation run JSON -----------------------------------------------------

GenerationRun parse_generation_run(std::string_view json_text);
std::string serialize_generation_run(const GenerationRun& run);

// --- nugget JSON: {"<turn_id>": [{nugget_id?, text, source_passage_id?}]} -----

struct NuggetParseOptions {
  NuggetSource source = NuggetSource::human;
  bool deduplicated = false;
  // When set, every turn id in the file must be one of these.
  const std::set<TurnId>* known_turns = nullptr;
};

NuggetCollection parse_nugget_file(std::string_view json_text, const NuggetParseOptions& options = {});
std::string serialize_nugget_file(const NuggetCollection& nuggets);

// --- topics JSON -------------------------------------------------------------

std::vector<Topic> parse_topics(std::string_view json_text);
std::string serialize_topics(const std::vector<Topic>& topics);
CollectionStats collection_stats(const std::vector<Topic>& topics);
std::map<TurnId, Turn> index_turns(const std::vector<Topic>& topics);

// --- gold responses JSON: [{turn_id, text, supporting_passage_ids}] -----------

std::map<TurnId, GoldResponse> parse_gold_responses(std::string_view json_text);
std::string serialize_gold_responses(const std::map<TurnId, GoldResponse>& gold);

// --- score tables TSV: header "run_tag<TAB>metric[<TAB>metric...]" ------------

std::vector<ExternalScoreTable> parse_score_tables(std::istream& in);
ExternalScoreTable parse_score_table(std::istream& in);
void write_score_tables(std::ostream& out, const std::vector<ExternalScoreTable>& tables);

// Every run tag in the table must be one of `known_runs`.
void check_score_table(const ExternalScoreTable& table, const std::set<RunTag>& known_runs);

// --- passage text lookup: TSV "id<TAB>text" or JSON lines {"id", "contents"} --

PassageLookup parse_passages(std::istream& in);
PassageLookup parse_passages(std::string_view content);

}  // namespace cone::io
