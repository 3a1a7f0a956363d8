#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cone/gateway.hpp"
#include "cone/types.hpp"

// Adaptive assessment pools: every passage any run puts in its top
// `k_guaranteed` is pooled unconditionally; passages at deeper positions up to
// `k_max` enter only if the relevance filter accepts them.
namespace cone::pooling {

enum class Tier { guaranteed, filtered };

struct Contribution {
  RunTag run_tag;
  std::size_t position = 0;  // 1-based position in the run's sorted ranking
};

struct PoolEntry {
  PassageId passage_id;
  Tier tier = Tier::guaranteed;
  std::vector<Contribution> contributions;
};

struct Pool {
  std::size_t k_guaranteed = 5;
  std::size_t k_max = 30;
  std::map<TurnId, std::map<PassageId, PoolEntry>> turns;

  std::size_t size() const;
};

// Decides whether a deep candidate joins the pool; may throw on failure.
// Must be safe to call concurrently.
using Filter = std::function<bool(const TurnId&, const PassageId&)>;

struct PoolOptions {
  std::size_t k_guaranteed = 5;
  std::size_t k_max = 30;
  std::size_t concurrency = 1;
};

struct PoolBuild {
  Pool pool;
  std::size_t filter_calls = 0;
  std::vector<std::string> warnings;
};

PoolBuild build_pool(const std::vector<RetrievalRun>& runs, const Filter& filter, const PoolOptions& options = {});

Filter accept_all();
Filter reject_all();

using Judge = std::function<int(const TurnId&, const PassageId&)>;

struct GradedPool {
  Qrels qrels;
  std::array<std::size_t, 5> distribution{};  // passages per grade 0..4
  std::vector<std::string> warnings;
};

// Grades every pooled passage; out-of-range grades are clamped to 0..4.
GradedPool grade_pool(const Pool& pool, const Judge& judge, std::size_t concurrency = 1);

// Grades a (turn, passage) pair with the LLM using the versioned relevance prompt.
class LlmRelevanceJudge {
 public:
  LlmRelevanceJudge(gateway::Gateway& gateway, std::map<TurnId, std::string> queries, const PassageLookup& passages);

  int operator()(const TurnId& turn, const PassageId& passage) const;

 private:
  gateway::Gateway& gateway_;
  std::map<TurnId, std::string> queries_;
  const PassageLookup& passages_;
};

// First integer in the reply; throws BackendError when there is none.
int parse_grade(std::string_view reply);

// The pool filter built from a judge: accept when grade >= min_grade.
Filter judge_filter(Judge judge, int min_grade = 1);

std::string serialize_pool(const Pool& pool);
Pool parse_pool(std::string_view json_text);

}  // namespace cone::pooling
