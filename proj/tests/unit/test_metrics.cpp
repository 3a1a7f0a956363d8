#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cone/backends.hpp"
#include "cone/matcher.hpp"
#include "cone/metrics.hpp"
#include "cone/text.hpp"
#include "oracles.hpp"

using namespace cone;
using namespace cone::metrics;

namespace {

NuggetSet make_set(std::size_t n, const std::string& prefix) {
  NuggetSet s;
  s.turn_id = "t";
  for (std::size_t i = 0; i < n; ++i) s.nuggets.push_back({prefix + std::to_string(i), "t", prefix + std::to_string(i), std::nullopt, NuggetSource::human, std::nullopt});
  return s;
}

matcher::MatchMatrix matrix(const NuggetSet& ext, const NuggetSet& gold, const std::vector<std::vector<bool>>& d) {
  return matcher::assemble_ntn(ext, gold, [&](std::size_t i, std::size_t j) { return d[i][j]; });
}

RetrievalRun run_of(const std::vector<std::string>& ids) {
  RetrievalRun r;
  r.run_tag = "r";
  int rank = 1;
  for (const auto& id : ids) r.rankings["t"].push_back({id, 100.0 - rank, rank}), ++rank;
  return r;
}

Qrels qrels_of(const std::map<std::string, int>& j) {
  Qrels q;
  q.judgments["t"] = j;
  return q;
}

}  // namespace

TEST(NuggetMetrics, RecallPrecisionExamples) {
  const auto gold = make_set(4, "g");
  const auto ext = make_set(3, "e");
  const auto m = matrix(ext, gold, {{true, false, false, false}, {false, true, false, false}, {false, false, false, false}});
  EXPECT_DOUBLE_EQ(recall_ntn(m, gold).value, 0.5);
  EXPECT_DOUBLE_EQ(precision_ntn(m, ext).value, 2.0 / 3.0);

  const auto none = matrix(ext, gold, std::vector<std::vector<bool>>(3, std::vector<bool>(4, false)));
  EXPECT_DOUBLE_EQ(recall_ntn(none, gold).value, 0.0);
  EXPECT_DOUBLE_EQ(precision_ntn(none, ext).value, 0.0);

  const auto all = matrix(ext, gold, std::vector<std::vector<bool>>(3, std::vector<bool>(4, true)));
  EXPECT_DOUBLE_EQ(recall_ntn(all, gold).value, 1.0);
  EXPECT_DOUBLE_EQ(precision_ntn(all, ext).value, 1.0);
}

TEST(NuggetMetrics, EmptySetsAreFlagged) {
  const auto empty = make_set(0, "g");
  const auto ext = make_set(2, "e");
  const auto m = matrix(ext, empty, {{}, {}});
  const auto r = recall_ntn(m, empty);
  EXPECT_TRUE(r.excluded);
  EXPECT_FALSE(r.flag.empty());

  const auto gold = make_set(2, "g");
  const auto m2 = matrix(empty, gold, {});
  const auto p = precision_ntn(m2, empty);
  EXPECT_DOUBLE_EQ(p.value, 0.0);
  EXPECT_FALSE(p.flag.empty());
  EXPECT_FALSE(p.excluded);
}

TEST(NuggetMetrics, AgreeWithOracleOnRandomMatrices) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ne = rng() % 6 + 1, ng = rng() % 6 + 1;
    std::vector<std::vector<bool>> d(ne, std::vector<bool>(ng));
    for (auto& row : d)
      for (std::size_t j = 0; j < ng; ++j) row[j] = rng() % 3 == 0;
    const auto ext = make_set(ne, "e"), gold = make_set(ng, "g");
    const auto m = matrix(ext, gold, d);
    EXPECT_DOUBLE_EQ(recall_ntn(m, gold).value, oracle::recall_ntn(d, ng));
    EXPECT_DOUBLE_EQ(precision_ntn(m, ext).value, oracle::precision_ntn(d, ng));
  }
}

TEST(NuggetMetrics, RecallMonotoneInExtractedNuggets) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t ng = 5;
    std::vector<std::vector<bool>> d;
    double prev = 0.0;
    for (std::size_t ne = 1; ne <= 6; ++ne) {
      std::vector<bool> row(ng);
      for (std::size_t j = 0; j < ng; ++j) row[j] = rng() % 4 == 0;
      d.push_back(row);
      const auto gold = make_set(ng, "g");
      const double r = recall_ntn(matrix(make_set(ne, "e"), gold, d), gold).value;
      EXPECT_GE(r, prev);
      prev = r;
    }
  }
}

TEST(Rouge, WorkedExamples) {
  const auto l = rouge("a c d", "a b c d", RougeVariant::rougeL);
  EXPECT_DOUBLE_EQ(l.precision, 1.0);
  EXPECT_DOUBLE_EQ(l.recall, 0.75);
  EXPECT_NEAR(l.f1, 0.857142857, 1e-9);
  for (auto v : {RougeVariant::rouge1, RougeVariant::rouge2, RougeVariant::rougeL}) {
    const auto same = rouge("the cat sat on the mat", "the cat sat on the mat", v);
    EXPECT_DOUBLE_EQ(same.f1, 1.0);
  }
  const auto zero = rouge("c d", "a b", RougeVariant::rouge1);
  EXPECT_DOUBLE_EQ(zero.precision, 0.0);
  EXPECT_DOUBLE_EQ(zero.recall, 0.0);
  EXPECT_DOUBLE_EQ(zero.f1, 0.0);
}

TEST(Rouge, ClippedCountsAndEmptyReference) {
  const auto r = rouge("the the the", "the cat", RougeVariant::rouge1);
  EXPECT_DOUBLE_EQ(r.precision, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  const auto e = rouge("words", "", RougeVariant::rouge2);
  EXPECT_TRUE(e.empty_reference);
  EXPECT_DOUBLE_EQ(e.f1, 0.0);
}

TEST(Rouge, SwappingCandidateAndReferenceSwapsPrecisionAndRecall) {
  std::mt19937 rng(5);
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> x, y;
    for (std::size_t i = rng() % 8 + 1; i > 0; --i) x.push_back(vocab[rng() % 4]);
    for (std::size_t i = rng() % 8 + 1; i > 0; --i) y.push_back(vocab[rng() % 4]);
    for (auto v : {RougeVariant::rouge1, RougeVariant::rouge2, RougeVariant::rougeL}) {
      const auto xy = rouge_tokens(x, y, v), yx = rouge_tokens(y, x, v);
      EXPECT_DOUBLE_EQ(xy.precision, yx.recall);
      EXPECT_DOUBLE_EQ(xy.recall, yx.precision);
    }
    EXPECT_EQ(lcs_length(x, y), oracle::lcs(x, y));
    EXPECT_NEAR(rouge_tokens(x, y, RougeVariant::rougeL).f1, oracle::rouge_l_f1(x, y), 1e-12);
  }
}

TEST(Groundedness, Examples) {
  PassageLookup passages{{"p1", "Snake plants tolerate drought."}, {"p2", "Cacti store water."}};
  gateway::Gateway sub(nullptr, std::make_shared<gateway::SubstringEntailment>());
  Response copied{"Snake plants tolerate drought.", {"p1"}, 1};
  EXPECT_DOUBLE_EQ(groundedness(sub, copied, passages).value, 1.0);

  gateway::Gateway never(nullptr, std::make_shared<gateway::FunctionEntailment>(
                                      [](const std::string&, const std::string&) { return false; }));
  EXPECT_DOUBLE_EQ(groundedness(never, copied, passages).value, 0.0);

  Response half{"Cacti store water. Ferns love shade.", {"p1", "p2"}, 1};
  EXPECT_DOUBLE_EQ(groundedness(sub, half, passages).value, 0.5);

  Response beyond{"Cacti store water.", {"p1", "p2"}, 1};
  EXPECT_DOUBLE_EQ(groundedness(sub, beyond, passages, 1).value, 0.0);

  Response orphan{"Cacti store water.", {}, 1};
  const auto v = groundedness(sub, orphan, passages);
  EXPECT_DOUBLE_EQ(v.value, 0.0);
  EXPECT_FALSE(v.flag.empty());
}

TEST(Retrieval, NdcgExamples) {
  EXPECT_NEAR(ndcg(run_of({"d2", "d1"}), qrels_of({{"d1", 3}, {"d2", 1}}), 2).mean, 0.7967075809905066, 1e-12);
  EXPECT_DOUBLE_EQ(ndcg(run_of({"d1", "x", "y"}), qrels_of({{"d1", 3}}), 5).mean, 1.0);
  EXPECT_DOUBLE_EQ(ndcg(run_of({"x", "y"}), qrels_of({{"d1", 3}}), 5).mean, 0.0);
}

TEST(Retrieval, NdcgExponentialGain) {
  const double dcg2 = 1.0 + 7.0 / std::log2(3.0);
  const double idcg = 7.0 + 1.0 / std::log2(3.0);
  EXPECT_NEAR(ndcg(run_of({"d2", "d1"}), qrels_of({{"d1", 3}, {"d2", 1}}), 2, Gain::exponential).mean, dcg2 / idcg,
              1e-12);
}

TEST(Retrieval, MissingTurnScoresZeroAndEmptyQrelsTurnIsExcluded) {
  Qrels q;
  q.judgments["t"] = {{"d1", 2}};
  q.judgments["u"] = {{"d9", 2}};
  q.judgments["z"] = {{"d5", 0}};
  const auto r = ndcg(run_of({"d1"}), q, 5);
  EXPECT_DOUBLE_EQ(r.values.at("u"), 0.0);
  EXPECT_EQ(r.excluded, std::vector<TurnId>{"z"});
  EXPECT_DOUBLE_EQ(r.mean, 0.5);
}

TEST(Retrieval, PrecisionRecallAndAp) {
  const auto q = qrels_of({{"a", 1}, {"b", 2}});
  EXPECT_DOUBLE_EQ(precision_at(run_of({"a", "b"}), q, 2).mean, 1.0);
  EXPECT_DOUBLE_EQ(precision_at(run_of({"a", "x", "y", "z"}), q, 4).mean, 0.25);
  EXPECT_DOUBLE_EQ(recall_at(run_of({"a", "x"}), q, 2).mean, 0.5);
  EXPECT_DOUBLE_EQ(average_precision(run_of({"a"}), qrels_of({{"a", 1}})).mean, 1.0);
  EXPECT_DOUBLE_EQ(average_precision(run_of({"x", "a", "y", "b"}), q).mean, 0.5);
  EXPECT_DOUBLE_EQ(precision_at(run_of({"a", "b"}), q, 2, 2).mean, 0.5);
  EXPECT_DOUBLE_EQ(average_precision(run_of({"x", "a"}), q, 1, 1).mean, 0.0);
}

TEST(Retrieval, IdealOrderingScoresOneAndValuesAreInRange) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::string, int> j;
    std::vector<std::string> docs;
    for (int d = 0; d < 8; ++d) {
      docs.push_back("d" + std::to_string(d));
      if (rng() % 2) j[docs.back()] = static_cast<int>(rng() % 5);
    }
    std::shuffle(docs.begin(), docs.end(), rng);
    const std::size_t k = rng() % 6 + 1;
    const double v = ndcg_for_ranking(docs, j, k, Gain::linear);
    EXPECT_NEAR(v, oracle::ndcg(docs, j, k), 1e-9);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-12);
    if (oracle::relevant_total(j, 1) > 0) {
      EXPECT_NEAR(ap_for_ranking(docs, j, 1, 1000), oracle::average_precision(docs, j, 1), 1e-12);
    }

    auto ideal = docs;
    std::stable_sort(ideal.begin(), ideal.end(), [&](const auto& a, const auto& b) {
      return (j.count(a) ? j.at(a) : 0) > (j.count(b) ? j.at(b) : 0);
    });
    if (oracle::relevant_total(j, 1) > 0) {
      EXPECT_DOUBLE_EQ(ndcg_for_ranking(ideal, j, k, Gain::linear), 1.0);
    }
  }
}

TEST(Aggregation, MeanOfSkipsExcludedTurns) {
  std::map<TurnId, Value> v{{"a", {0.2, "", false}}, {"b", {0.4, "", false}}, {"c", {0.0, "empty-gold", true}}};
  EXPECT_NEAR(*mean_of(v), 0.3, 1e-15);
  EXPECT_FALSE(mean_of({{"c", {0.0, "empty-gold", true}}}));
}
