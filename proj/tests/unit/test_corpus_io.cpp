#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "cone/corpus_io.hpp"
#include "cone/error.hpp"

using namespace cone;

TEST(TrecRun, ParsesAndSortsByScore) {
  const auto run = io::parse_trec_run(
      "t1 Q0 d2 2 0.5 tagA\n"
      "t1 Q0 d1 1 0.9 tagA\n"
      "t2 Q0 d3 1 0.1 tagA\n");
  EXPECT_EQ(run.run_tag, "tagA");
  ASSERT_EQ(run.rankings.at("t1").size(), 2u);
  EXPECT_EQ(run.rankings.at("t1")[0].passage_id, "d1");
  EXPECT_EQ(run.rankings.at("t1")[1].passage_id, "d2");
  EXPECT_EQ(run.rankings.at("t2")[0].passage_id, "d3");
}

TEST(TrecRun, MalformedLineReportsLineNumber) {
  try {
    io::parse_trec_run("t1 Q0 d1 1 0.9 tag\nt1 Q0 d2 2\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.module(), "corpus-io");
  }
}

TEST(TrecRun, RejectsBadScoreDuplicateAndMixedTags) {
  EXPECT_THROW(io::parse_trec_run("t1 Q0 d1 1 abc tag\n"), ParseError);
  EXPECT_THROW(io::parse_trec_run("t1 Q0 d1 1 0.9 tag\nt1 Q0 d1 2 0.8 tag\n"), Error);
  EXPECT_THROW(io::parse_trec_run("t1 Q0 d1 1 0.9 a\nt1 Q0 d2 2 0.8 b\n"), Error);
}

TEST(TrecRun, EmptyRunOnlyFailsInStrictMode) {
  EXPECT_TRUE(io::parse_trec_run("").rankings.empty());
  io::RunParseOptions strict;
  strict.strict = true;
  EXPECT_THROW(io::parse_trec_run("", strict), Error);
}

TEST(TrecRun, TiesBreakOnSubmittedRankThenDocid) {
  const auto run = io::parse_trec_run("t Q0 b 2 1.0 x\nt Q0 c 1 1.0 x\nt Q0 a 2 1.0 x\n");
  const auto& r = run.rankings.at("t");
  EXPECT_EQ(r[0].passage_id, "c");
  EXPECT_EQ(r[1].passage_id, "a");
  EXPECT_EQ(r[2].passage_id, "b");
}

TEST(TrecRun, LineOrderDoesNotChangeTheParsedRun) {
  std::vector<std::string> lines;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  for (int t = 0; t < 4; ++t) {
    for (int d = 0; d < 12; ++d) {
      std::ostringstream l;
      l << "t" << t << " Q0 d" << d << " " << d + 1 << " " << static_cast<int>(score(rng) * 5) << " tag\n";
      lines.push_back(l.str());
    }
  }
  auto join = [&] {
    std::string s;
    for (const auto& l : lines) s += l;
    return s;
  };
  const auto reference = io::parse_trec_run(join());
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(lines.begin(), lines.end(), rng);
    const auto shuffled = io::parse_trec_run(join());
    for (const auto& [turn, ranking] : reference.rankings) {
      const auto& other = shuffled.rankings.at(turn);
      ASSERT_EQ(ranking.size(), other.size());
      for (std::size_t i = 0; i < ranking.size(); ++i) EXPECT_EQ(ranking[i].passage_id, other[i].passage_id);
    }
  }
}

TEST(TrecRun, WriteThenParseRoundTrips) {
  const auto run = io::parse_trec_run("t1 Q0 d1 1 0.875 tag\nt1 Q0 d2 2 0.125 tag\nt2 Q0 d9 1 3 tag\n");
  std::ostringstream out;
  io::write_trec_run(out, run);
  const auto again = io::parse_trec_run(out.str());
  ASSERT_EQ(again.rankings.size(), run.rankings.size());
  for (const auto& [turn, ranking] : run.rankings) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      EXPECT_EQ(again.rankings.at(turn)[i].passage_id, ranking[i].passage_id);
      EXPECT_EQ(again.rankings.at(turn)[i].score, ranking[i].score);
    }
  }
}

TEST(Qrels, ParsesGradesAndRejectsOutOfRange) {
  const auto q = io::parse_qrels("t1 0 d1 3\nt1 0 d2 0\n");
  EXPECT_EQ(q.grade("t1", "d1"), 3);
  EXPECT_EQ(q.grade("t1", "d2"), 0);
  EXPECT_FALSE(q.grade("t1", "d3").has_value());
  EXPECT_THROW(io::parse_qrels("t1 0 d1 5\n"), Error);
  EXPECT_THROW(io::parse_qrels("t1 0 d1\n"), ParseError);
}

TEST(Qrels, DuplicateJudgmentMustAgree) {
  EXPECT_NO_THROW(io::parse_qrels("t1 0 d1 2\nt1 0 d1 2\n"));
  EXPECT_THROW(io::parse_qrels("t1 0 d1 2\nt1 0 d1 3\n"), Error);
}

TEST(Qrels, RoundTrip) {
  const auto q = io::parse_qrels("t1 0 d1 3\nt2 0 d2 1\nt2 0 d3 0\n");
  std::ostringstream out;
  io::write_qrels(out, q);
  EXPECT_EQ(io::parse_qrels(out.str()).judgments, q.judgments);
}

TEST(GenerationRun, KeepsRankOneAndAlternates) {
  const auto run = io::parse_generation_run(R"({"run_tag":"r","turns":[
    {"turn_id":"t1","responses":[{"rank":2,"text":"B","passage_provenance":[]},
                                 {"rank":1,"text":"A","passage_provenance":["p1","p2"]}]}]})");
  EXPECT_EQ(run.responses.at("t1").text, "A");
  EXPECT_EQ(run.responses.at("t1").passage_provenance, (std::vector<std::string>{"p1", "p2"}));
  ASSERT_EQ(run.alternates.at("t1").size(), 1u);
  EXPECT_EQ(run.alternates.at("t1")[0].text, "B");
}

TEST(GenerationRun, RejectsMissingTurnIdAndMissingRankOne) {
  EXPECT_THROW(io::parse_generation_run(R"({"run_tag":"r","turns":[{"responses":[{"rank":1,"text":"A"}]}]})"),
               Error);
  EXPECT_THROW(
      io::parse_generation_run(R"({"run_tag":"r","turns":[{"turn_id":"t","responses":[{"rank":2,"text":"A"}]}]})"),
      Error);
  EXPECT_THROW(io::parse_generation_run("{not json"), ParseError);
}

TEST(GenerationRun, RoundTrip) {
  const auto run = io::parse_generation_run(R"({"run_tag":"r","turns":[
    {"turn_id":"t1","responses":[{"rank":1,"text":"A b.","passage_provenance":["p1"]},
                                 {"rank":2,"text":"C","passage_provenance":[]}]},
    {"turn_id":"t2","responses":[{"rank":1,"text":"D","passage_provenance":[]}]}]})");
  const auto again = io::parse_generation_run(io::serialize_generation_run(run));
  EXPECT_EQ(io::serialize_generation_run(again), io::serialize_generation_run(run));
  EXPECT_EQ(again.responses.size(), 2u);
}

TEST(Nuggets, SynthesizesIdsAndRejectsEmptyText) {
  const auto c = io::parse_nugget_file(R"({"t1":[{"text":"a"},{"nugget_id":"x","text":"b"},"c"]})");
  const auto& n = c.at("t1").nuggets;
  ASSERT_EQ(n.size(), 3u);
  EXPECT_EQ(n[0].nugget_id, "t1:0");
  EXPECT_EQ(n[1].nugget_id, "x");
  EXPECT_EQ(n[2].text, "c");
  EXPECT_THROW(io::parse_nugget_file(R"({"t1":[{"text":"  "}]})"), ValidationError);
}

TEST(Nuggets, UnknownTurnRejectedWhenTurnsKnown) {
  const std::set<TurnId> known = {"t1"};
  io::NuggetParseOptions opts;
  opts.known_turns = &known;
  EXPECT_THROW(io::parse_nugget_file(R"({"t9":[{"text":"a"}]})", opts), ValidationError);
}

TEST(Nuggets, RoundTripKeepsSpansAndProvenance) {
  NuggetCollection c;
  c["t1"].turn_id = "t1";
  c["t1"].nuggets.push_back({"t1:0", "t1", "cat sat", std::string("p1"), NuggetSource::llm, CharSpan{4, 11}});
  const auto again = io::parse_nugget_file(io::serialize_nugget_file(c));
  const auto& n = again.at("t1").nuggets.at(0);
  EXPECT_EQ(n.text, "cat sat");
  EXPECT_EQ(n.source, NuggetSource::llm);
  EXPECT_EQ(n.source_passage_id, std::optional<std::string>("p1"));
  EXPECT_EQ(n.char_span, std::optional<CharSpan>(CharSpan{4, 11}));
}

namespace {

const char* kTopics = R"([
  {"topic_id":"9","title":"x",
   "ptkb":[{"statement_id":"1","text":"I am vegan.",
            "relevance":{"organizer":{"9-1":1},"assessor":{"9-2":0}}}],
   "turns":[
     {"turn_index":1,"utterance":"u1","resolved_utterance":"r1","assessed":true},
     {"turn_index":2,"utterance":"u2","resolved_utterance":"r2","assessed":true},
     {"turn_index":3,"utterance":"u3","ptkb_provenance":["1"]}]}])";

}  // namespace

TEST(Topics, ParsesTurnsAndPersonalFlags) {
  const auto topics = io::parse_topics(kTopics);
  ASSERT_EQ(topics.size(), 1u);
  const auto turns = io::index_turns(topics);
  EXPECT_TRUE(turns.at("9-1").personal);
  EXPECT_FALSE(turns.at("9-2").personal);
  EXPECT_TRUE(turns.at("9-3").personal);
  const auto stats = io::collection_stats(topics);
  EXPECT_EQ(stats.topics, 1u);
  EXPECT_EQ(stats.turns, 3u);
  EXPECT_EQ(stats.assessed_turns, 2u);
  EXPECT_EQ(stats.assessed_topics, 1u);
  EXPECT_EQ(stats.ptkb_statements, 1u);
}

TEST(Topics, RejectsIndexGapAndAssessedTurnWithoutRewrite) {
  EXPECT_THROW(io::parse_topics(R"([{"topic_id":"1","turns":[{"turn_index":1},{"turn_index":3}]}])"),
               ValidationError);
  EXPECT_THROW(io::parse_topics(R"([{"topic_id":"1","turns":[{"turn_index":1,"assessed":true}]}])"),
               ValidationError);
}

TEST(Topics, RoundTrip) {
  const auto topics = io::parse_topics(kTopics);
  EXPECT_EQ(io::serialize_topics(io::parse_topics(io::serialize_topics(topics))), io::serialize_topics(topics));
}

TEST(GoldResponses, RoundTripAndRejectEmpty) {
  const auto g = io::parse_gold_responses(R"([{"turn_id":"t1","text":"Answer.","supporting_passage_ids":["p"]}])");
  EXPECT_EQ(g.at("t1").text, "Answer.");
  EXPECT_EQ(io::parse_gold_responses(io::serialize_gold_responses(g)).at("t1").supporting_passage_ids,
            std::vector<std::string>{"p"});
  EXPECT_THROW(io::parse_gold_responses(R"([{"turn_id":"t1","text":" "}])"), ValidationError);
}

TEST(ScoreTables, ParsesColumnsSkipsMissingAndChecksRuns) {
  std::istringstream in("run_tag\tbem\tllmeval\n# comment\nr1\t0.5\tNA\nr2\t0.25\t1\n");
  const auto tables = io::parse_score_tables(in);
  ASSERT_EQ(tables.size(), 2u);
  EXPECT_EQ(tables[0].metric_name, "bem");
  EXPECT_EQ(tables[0].scores.at("r2"), 0.25);
  EXPECT_EQ(tables[1].scores.count("r1"), 0u);
  EXPECT_NO_THROW(io::check_score_table(tables[0], {"r1", "r2", "r3"}));
  EXPECT_THROW(io::check_score_table(tables[0], {"r1"}), Error);

  std::ostringstream out;
  io::write_score_tables(out, tables);
  std::istringstream back(out.str());
  const auto again = io::parse_score_tables(back);
  EXPECT_EQ(again[0].scores, tables[0].scores);
  EXPECT_EQ(again[1].scores, tables[1].scores);
}

TEST(Passages, AcceptsTsvAndJsonLines) {
  const auto tsv = io::parse_passages("p1\tSome text.\np2\tMore\ttabs\n");
  EXPECT_EQ(tsv.at("p1"), "Some text.");
  EXPECT_EQ(tsv.at("p2"), "More\ttabs");
  const auto jsonl = io::parse_passages(R"({"id":"a","contents":"x"}
{"id":"b","text":"y"}
)");
  EXPECT_EQ(jsonl.at("a"), "x");
  EXPECT_EQ(jsonl.at("b"), "y");
}

TEST(CollectionStats, ReleasedTopicsWhenAvailable) {
  const char* root = std::getenv("CONE_IKAT_DATA");
  if (root == nullptr) GTEST_SKIP() << "CONE_IKAT_DATA not set";
  const auto path = std::filesystem::path(root) / "topics.json";
  if (!std::filesystem::exists(path)) GTEST_SKIP() << path << " not found";
  const auto stats = cone::io::collection_stats(cone::io::parse_topics(cone::io::read_file(path)));
  EXPECT_EQ(stats.topics, 17u);
  EXPECT_EQ(stats.turns, 218u);
  EXPECT_EQ(stats.assessed_turns, 116u);
  EXPECT_EQ(stats.ptkb_statements, 288u);
}
