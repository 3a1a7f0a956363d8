#include <gtest/gtest.h>

#include <random>

#include "cone/backends.hpp"
#include "cone/error.hpp"
#include "cone/pooling.hpp"
#include "cone/prompts.hpp"
#include "oracles.hpp"

using namespace cone;
using namespace cone::pooling;

namespace {

RetrievalRun run_of(const std::string& tag, const std::map<TurnId, std::vector<std::string>>& lists) {
  RetrievalRun r;
  r.run_tag = tag;
  for (const auto& [turn, ids] : lists) {
    int rank = 1;
    for (const auto& id : ids) r.rankings[turn].push_back({id, 1000.0 - rank, rank}), ++rank;
  }
  return r;
}

std::vector<std::string> range(const std::string& prefix, int from, int to) {
  std::vector<std::string> out;
  for (int i = from; i < to; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::set<std::string> ids(const Pool& p, const TurnId& t) {
  std::set<std::string> out;
  if (!p.turns.count(t)) return out;
  for (const auto& [id, e] : p.turns.at(t)) out.insert(id);
  return out;
}

}  // namespace

TEST(Pool, FilterCollapses) {
  const auto a = run_of("a", {{"t", range("x", 0, 40)}});
  const auto b = run_of("b", {{"t", range("y", 0, 40)}});
  const auto acc = build_pool({a, b}, accept_all());
  EXPECT_EQ(acc.pool.size(), 60u);
  const auto rej = build_pool({a, b}, reject_all());
  EXPECT_EQ(rej.pool.size(), 10u);
  for (const auto& [id, e] : rej.pool.turns.at("t")) EXPECT_EQ(e.tier, Tier::guaranteed);
}

TEST(Pool, DisjointTopFiveWithOverlappingDepthMatchesOracle) {
  std::vector<std::string> a = range("a", 0, 5), b = range("b", 0, 5);
  const auto shared = range("s", 0, 25);
  a.insert(a.end(), shared.begin(), shared.end());
  std::vector<std::string> sb(shared.rbegin(), shared.rend());
  b.insert(b.end(), sb.begin(), sb.end());
  std::map<std::string, int> grades;
  for (std::size_t i = 0; i < shared.size(); ++i) grades[shared[i]] = static_cast<int>(i % 3);
  const auto accept = [&](const std::string& p) { return grades.count(p) && grades.at(p) >= 1; };

  const auto built = build_pool({run_of("A", {{"t", a}}), run_of("B", {{"t", b}})},
                                [&](const TurnId&, const PassageId& p) { return accept(p); });
  EXPECT_EQ(ids(built.pool, "t"), oracle::pool({a, b}, 5, 30, accept));
  EXPECT_EQ(built.filter_calls, 25u);
}

TEST(Pool, FilterCalledOncePerUniqueDeepPair) {
  std::atomic<int> calls{0};
  const Filter f = [&](const TurnId&, const PassageId&) {
    ++calls;
    return true;
  };
  const auto r1 = run_of("a", {{"t", range("p", 0, 30)}, {"u", range("p", 0, 30)}});
  const auto r2 = run_of("b", {{"t", range("p", 0, 30)}});
  PoolOptions o;
  o.concurrency = 4;
  const auto built = build_pool({r1, r2}, f, o);
  EXPECT_EQ(calls.load(), 50);
  EXPECT_EQ(built.filter_calls, 50u);
}

TEST(Pool, GuaranteedPassageIsNotFiltered) {
  const auto r1 = run_of("a", {{"t", {"p", "q1", "q2", "q3", "q4", "z"}}});
  const auto r2 = run_of("b", {{"t", {"z1", "z2", "z3", "z4", "z5", "p"}}});
  std::atomic<int> calls{0};
  const auto built = build_pool({r1, r2}, [&](const TurnId&, const PassageId&) {
    ++calls;
    return false;
  });
  EXPECT_EQ(calls.load(), 1);
  EXPECT_EQ(built.pool.turns.at("t").at("p").contributions.size(), 2u);
  EXPECT_FALSE(built.pool.turns.at("t").count("z"));
}

TEST(Pool, FilterFailureExcludesPairWithWarning) {
  const auto r = run_of("a", {{"t", range("p", 0, 8)}});
  const auto built = build_pool({r}, [](const TurnId&, const PassageId& p) -> bool {
    if (p == "p6") throw BackendError("down");
    return true;
  });
  EXPECT_EQ(built.pool.size(), 7u);
  EXPECT_EQ(built.warnings.size(), 1u);
}

TEST(Pool, MonotoneAndSupersetOfGuaranteedTier) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RetrievalRun> runs;
    for (int r = 0; r < 3; ++r) {
      auto docs = range("d", 0, 40);
      std::shuffle(docs.begin(), docs.end(), rng);
      docs.resize(35);
      runs.push_back(run_of("r" + std::to_string(r), {{"t", docs}}));
    }
    const Filter f = [](const TurnId&, const PassageId& p) { return (p.back() - '0') % 2 == 0; };
    const auto two = build_pool({runs[0], runs[1]}, f);
    const auto three = build_pool(runs, f);
    const auto floor = build_pool(runs, reject_all());
    const auto s2 = ids(two.pool, "t"), s3 = ids(three.pool, "t"), sf = ids(floor.pool, "t");
    EXPECT_TRUE(std::includes(s3.begin(), s3.end(), s2.begin(), s2.end()));
    EXPECT_TRUE(std::includes(s3.begin(), s3.end(), sf.begin(), sf.end()));
  }
}

TEST(Pool, InvalidDepthsAreRejected) {
  PoolOptions o;
  o.k_guaranteed = 10;
  o.k_max = 5;
  EXPECT_THROW(build_pool({}, accept_all(), o), Error);
}

TEST(Pool, SerializationRoundTrip) {
  const auto built = build_pool({run_of("a", {{"t", range("p", 0, 8)}})}, accept_all());
  const auto back = parse_pool(serialize_pool(built.pool));
  EXPECT_EQ(serialize_pool(back), serialize_pool(built.pool));
  EXPECT_EQ(back.k_max, 30u);
  EXPECT_EQ(back.turns.at("t").at("p6").tier, Tier::filtered);
}

TEST(Grade, CannedJudgeAndClamp) {
  const auto built = build_pool({run_of("a", {{"t", {"p1", "p2", "p3"}}})}, accept_all());
  std::map<std::string, int> canned{{"p1", 3}, {"p2", 0}, {"p3", 7}, {"extra", 2}};
  const auto g = grade_pool(built.pool, [&](const TurnId&, const PassageId& p) { return canned.at(p); });
  EXPECT_EQ(g.qrels.judgments.at("t"), (std::map<PassageId, int>{{"p1", 3}, {"p2", 0}, {"p3", 4}}));
  EXPECT_EQ(g.warnings.size(), 1u);
  EXPECT_EQ(g.distribution, (std::array<std::size_t, 5>{1, 0, 0, 1, 1}));
}

TEST(Grade, LlmJudgeUsesRelevancePrompt) {
  auto llm = std::make_shared<gateway::FunctionLlm>([](const gateway::LlmRequest& r) {
    const auto f = prompts::parse_relevance_prompt(r.user_message);
    return f && f->passage == "good passage" ? std::string("Grade: 3") : std::string("0");
  });
  gateway::Gateway gw(llm, nullptr);
  PassageLookup passages{{"p1", "good passage"}, {"p2", "bad passage"}};
  LlmRelevanceJudge judge(gw, {{"t", "query"}}, passages);
  EXPECT_EQ(judge("t", "p1"), 3);
  EXPECT_EQ(judge("t", "p2"), 0);
  EXPECT_THROW(judge("t", "missing"), Error);
  EXPECT_EQ(parse_grade("I would say 2."), 2);
  EXPECT_THROW(parse_grade("relevant"), BackendError);
  const auto f = judge_filter([&](const TurnId& t, const PassageId& p) { return judge(t, p); }, 1);
  EXPECT_TRUE(f("t", "p1"));
  EXPECT_FALSE(f("t", "p2"));
}
