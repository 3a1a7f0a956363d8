#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cone/types.hpp"

// System-level comparison: rank runs by a metric, correlate two rankings,
// and measure agreement between binary label vectors.
namespace cone::analysis {

struct RankedRun {
  RunTag run_tag;
  double score = 0.0;
  double rank = 0.0;  // 1-based, ties share the average rank
};

struct SystemRanking {
  std::string metric_name;
  std::vector<RankedRun> entries;  // score non-increasing

  static SystemRanking from_scores(std::string metric_name, const std::map<RunTag, double>& scores);
  std::map<RunTag, double> scores() const;
};

// Average ranks (1-based) of `values` in descending order.
std::vector<double> average_ranks(const std::vector<double>& values);

enum class TauVariant { a, b };

// Both functions pair runs by tag; the run sets must match and hold >= 2 runs.
double kendall_tau(const SystemRanking& a, const SystemRanking& b, TauVariant variant = TauVariant::b);
double spearman_rho(const SystemRanking& a, const SystemRanking& b);

// Vector forms over paired observations.
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y, TauVariant variant = TauVariant::b);
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

enum class LabelSource { human, model };

struct LabelVector {
  LabelSource source = LabelSource::human;
  std::vector<std::pair<std::string, std::string>> keys;  // (response_id, nugget_id)
  std::vector<int> labels;                                // 0 or 1
};

struct Agreement {
  double accuracy = 0.0;
  double kappa = 0.0;
};

Agreement agreement(const LabelVector& human, const LabelVector& model);
Agreement agreement(const std::vector<int>& a, const std::vector<int>& b);

struct SubmissionRank {
  double rank = 0.0;
  std::size_t total = 0;
};

SubmissionRank rank_submission(const RunTag& target, const SystemRanking& ranking);

// Per-item majority of an odd number of binary votes.
std::vector<int> majority_vote(const std::vector<std::vector<int>>& votes);
LabelVector majority_vote(const std::vector<std::pair<std::string, std::string>>& keys,
                          const std::vector<std::vector<int>>& votes);

}  // namespace cone::analysis
