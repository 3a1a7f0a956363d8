#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cone/analysis.hpp"
#include "cone/error.hpp"
#include "oracles.hpp"

using namespace cone;
using namespace cone::analysis;

namespace {

std::vector<double> random_scores(std::mt19937& rng, std::size_t n, int levels) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(rng() % levels) / levels;
  return v;
}

SystemRanking ranking(const std::string& name, const std::vector<double>& v) {
  std::map<RunTag, double> s;
  for (std::size_t i = 0; i < v.size(); ++i) s["run" + std::to_string(i)] = v[i];
  return SystemRanking::from_scores(name, s);
}

}  // namespace

TEST(Correlation, IdentityAndReversal) {
  const std::vector<double> x{0.9, 0.5, 0.3, 0.1};
  const std::vector<double> r{0.1, 0.3, 0.5, 0.9};
  EXPECT_DOUBLE_EQ(kendall_tau(x, x), 1.0);
  EXPECT_DOUBLE_EQ(spearman_rho(x, x), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(x, r), -1.0);
  EXPECT_DOUBLE_EQ(spearman_rho(x, r), -1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(ranking("a", x), ranking("b", r)), -1.0);
}

TEST(Correlation, TauBMatchesPairCountingWithTies) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = rng() % 7 + 2;
    const auto x = random_scores(rng, n, 4), y = random_scores(rng, n, 4);
    const double ox = oracle::kendall_tau_b(x, y);
    if (std::isnan(ox)) {
      EXPECT_THROW(kendall_tau(x, y), Error);
      continue;
    }
    EXPECT_NEAR(kendall_tau(x, y), ox, 1e-12);
    EXPECT_DOUBLE_EQ(kendall_tau(x, y), kendall_tau(y, x));
  }
}

TEST(Correlation, RhoMatchesRankPearsonWithTies) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = rng() % 7 + 2;
    const auto x = random_scores(rng, n, 4), y = random_scores(rng, n, 4);
    const double o = oracle::spearman(x, y);
    if (std::isnan(o)) {
      EXPECT_THROW(spearman_rho(x, y), Error);
      continue;
    }
    EXPECT_NEAR(spearman_rho(x, y), o, 1e-12);
  }
}

TEST(Correlation, RhoMatchesClosedFormWithoutTies) {
  std::vector<double> base{1, 2, 3, 4, 5, 6};
  std::vector<double> p = base;
  do {
    EXPECT_NEAR(spearman_rho(base, p), oracle::spearman_no_ties(base, p), 1e-12);
    EXPECT_NEAR(kendall_tau(base, p, TauVariant::a), kendall_tau(base, p, TauVariant::b), 1e-12);
  } while (std::next_permutation(p.begin(), p.end()));
}

TEST(Correlation, InvariantUnderMonotoneTransforms) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_scores(rng, 7, 5), y = random_scores(rng, 7, 5);
    if (std::isnan(oracle::kendall_tau_b(x, y))) continue;
    std::vector<double> tx(x.size());
    std::transform(x.begin(), x.end(), tx.begin(), [](double v) { return std::exp(3 * v) + 2; });
    EXPECT_NEAR(kendall_tau(tx, y), kendall_tau(x, y), 1e-12);
    EXPECT_NEAR(spearman_rho(tx, y), spearman_rho(x, y), 1e-12);
  }
}

TEST(Correlation, Errors) {
  EXPECT_THROW(kendall_tau(std::vector<double>{1}, std::vector<double>{1}), Error);
  EXPECT_THROW(spearman_rho(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), Error);
  const auto a = SystemRanking::from_scores("a", {{"x", 1}, {"y", 2}});
  const auto b = SystemRanking::from_scores("b", {{"x", 1}, {"z", 2}});
  EXPECT_THROW(kendall_tau(a, b), Error);
}

TEST(Ranking, AverageRanksAndSubmissionRank) {
  EXPECT_EQ(average_ranks({0.5, 0.9, 0.5, 0.1}), (std::vector<double>{2.5, 1.0, 2.5, 4.0}));
  const auto r = SystemRanking::from_scores("m", {{"A", 0.5}, {"target", 0.4}, {"B", 0.3}});
  const auto s = rank_submission("target", r);
  EXPECT_DOUBLE_EQ(s.rank, 2.0);
  EXPECT_EQ(s.total, 3u);
  EXPECT_DOUBLE_EQ(rank_submission("target", SystemRanking::from_scores("m", {{"A", 0.5}, {"target", 0.5}})).rank,
                   1.5);
  const auto one = rank_submission("t", SystemRanking::from_scores("m", {{"t", 0.1}}));
  EXPECT_DOUBLE_EQ(one.rank, 1.0);
  EXPECT_EQ(one.total, 1u);
  EXPECT_THROW(rank_submission("nope", r), Error);
  EXPECT_EQ(r.entries.front().run_tag, "A");
}

TEST(Agreement, Examples) {
  const auto same = agreement(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1});
  EXPECT_DOUBLE_EQ(same.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(same.kappa, 1.0);
  const auto half = agreement(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 1, 0});
  EXPECT_DOUBLE_EQ(half.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(half.kappa, 0.0);
  EXPECT_DOUBLE_EQ(agreement(std::vector<int>{1, 1}, std::vector<int>{1, 1}).kappa, 1.0);
  EXPECT_DOUBLE_EQ(agreement(std::vector<int>{1, 1}, std::vector<int>{0, 0}).kappa, 0.0);
  EXPECT_THROW(agreement(std::vector<int>{1}, std::vector<int>{1, 0}), Error);
}

TEST(Agreement, KeySequencesMustMatch) {
  LabelVector h{LabelSource::human, {{"r", "n1"}, {"r", "n2"}}, {1, 0}};
  LabelVector m{LabelSource::model, {{"r", "n2"}, {"r", "n1"}}, {0, 1}};
  EXPECT_THROW(agreement(h, m), Error);
  m.keys = h.keys;
  EXPECT_DOUBLE_EQ(agreement(h, m).accuracy, 0.0);
}

TEST(MajorityVote, Examples) {
  EXPECT_EQ(majority_vote({{1, 1, 0}, {0, 0, 0}, {0, 1, 1}}), (std::vector<int>{1, 0, 1}));
  EXPECT_THROW(majority_vote({{1, 0}}), Error);
  const auto lv = majority_vote({{"r", "n"}}, {{1, 0, 1}});
  EXPECT_EQ(lv.labels, std::vector<int>{1});
}
