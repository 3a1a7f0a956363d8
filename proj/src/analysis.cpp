#include "cone/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cone/error.hpp"

namespace cone::analysis {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error("analysis", what); }

int sign(double v) { return (v > 0) - (v < 0); }

std::pair<std::vector<double>, std::vector<double>> paired(const SystemRanking& a, const SystemRanking& b) {
  const auto sa = a.scores();
  const auto sb = b.scores();
  if (sa.size() != a.entries.size() || sb.size() != b.entries.size()) fail("ranking contains a duplicate run tag");
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [tag, score] : sa) {
    auto it = sb.find(tag);
    if (it == sb.end()) fail("run '" + tag + "' is ranked by " + a.metric_name + " but not by " + b.metric_name);
    x.push_back(score);
    y.push_back(it->second);
  }
  if (sb.size() != sa.size()) fail("rankings '" + a.metric_name + "' and '" + b.metric_name + "' cover different runs");
  return {std::move(x), std::move(y)};
}

double tie_pairs(const std::vector<double>& v) {
  std::map<double, std::size_t> groups;
  for (double d : v) ++groups[d];
  double sum = 0.0;
  for (const auto& [value, t] : groups) sum += static_cast<double>(t) * static_cast<double>(t - 1) / 2.0;
  return sum;
}

}  // namespace

SystemRanking SystemRanking::from_scores(std::string metric_name, const std::map<RunTag, double>& scores) {
  SystemRanking r;
  r.metric_name = std::move(metric_name);
  for (const auto& [tag, score] : scores) r.entries.push_back({tag, score, 0.0});
  std::stable_sort(r.entries.begin(), r.entries.end(),
                   [](const RankedRun& a, const RankedRun& b) { return a.score > b.score; });
  std::vector<double> values;
  for (const auto& e : r.entries) values.push_back(e.score);
  const auto ranks = average_ranks(values);
  for (std::size_t i = 0; i < ranks.size(); ++i) r.entries[i].rank = ranks[i];
  return r;
}

std::map<RunTag, double> SystemRanking::scores() const {
  std::map<RunTag, double> out;
  for (const auto& e : entries) out[e.run_tag] = e.score;
  return out;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(values.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y, TauVariant variant) {
  if (x.size() != y.size()) fail("kendall_tau: vectors differ in length");
  const std::size_t n = x.size();
  if (n < 2) fail("kendall_tau: needs at least 2 runs");
  double concordant = 0.0;
  double discordant = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int s = sign(x[i] - x[j]) * sign(y[i] - y[j]);
      if (s > 0) concordant += 1.0;
      if (s < 0) discordant += 1.0;
    }
  }
  const double n0 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  if (variant == TauVariant::a) return (concordant - discordant) / n0;
  const double denom = std::sqrt((n0 - tie_pairs(x)) * (n0 - tie_pairs(y)));
  if (denom == 0.0) fail("kendall_tau: all scores tied in one ranking, tau-b undefined");
  return (concordant - discordant) / denom;
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail("spearman_rho: vectors differ in length");
  if (x.size() < 2) fail("spearman_rho: needs at least 2 runs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) fail("spearman_rho: zero rank variance, correlation undefined");
  return sxy / std::sqrt(sxx * syy);
}

double kendall_tau(const SystemRanking& a, const SystemRanking& b, TauVariant variant) {
  const auto [x, y] = paired(a, b);
  return kendall_tau(x, y, variant);
}

double spearman_rho(const SystemRanking& a, const SystemRanking& b) {
  const auto [x, y] = paired(a, b);
  return spearman_rho(x, y);
}

Agreement agreement(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) fail("agreement: label vectors differ in length");
  if (a.empty()) fail("agreement: label vectors are empty");
  const double n = static_cast<double>(a.size());
  double equal = 0.0;
  double ones_a = 0.0;
  double ones_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] != 0 && a[i] != 1) || (b[i] != 0 && b[i] != 1)) fail("agreement: labels must be 0 or 1");
    equal += a[i] == b[i];
    ones_a += a[i];
    ones_b += b[i];
  }
  Agreement out;
  out.accuracy = equal / n;
  const double pa = ones_a / n;
  const double pb = ones_b / n;
  const double expected = pa * pb + (1.0 - pa) * (1.0 - pb);
  if (expected == 1.0) {
    if (out.accuracy == 1.0) {
      out.kappa = 1.0;
      return out;
    }
    fail("agreement: chance agreement is 1, kappa undefined");
  }
  out.kappa = (out.accuracy - expected) / (1.0 - expected);
  return out;
}

Agreement agreement(const LabelVector& human, const LabelVector& model) {
  if (human.keys != model.keys) fail("agreement: label vectors do not share the same key sequence");
  if (human.labels.size() != human.keys.size() || model.labels.size() != model.keys.size()) {
    fail("agreement: label count does not match key count");
  }
  return agreement(human.labels, model.labels);
}

SubmissionRank rank_submission(const RunTag& target, const SystemRanking& ranking) {
  for (const auto& e : ranking.entries) {
    if (e.run_tag == target) return {e.rank, ranking.entries.size()};
  }
  fail("rank_submission: run '" + target + "' is not in the " + ranking.metric_name + " ranking");
}

std::vector<int> majority_vote(const std::vector<std::vector<int>>& votes) {
  std::vector<int> out;
  out.reserve(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) {
    const auto& v = votes[i];
    if (v.empty()) fail("majority_vote: item " + std::to_string(i) + " has no votes");
    std::size_t ones = 0;
    for (int label : v) {
      if (label != 0 && label != 1) fail("majority_vote: labels must be 0 or 1");
      ones += static_cast<std::size_t>(label);
    }
    const std::size_t zeros = v.size() - ones;
    if (ones == zeros) fail("majority_vote: no majority for item " + std::to_string(i));
    out.push_back(ones > zeros ? 1 : 0);
  }
  return out;
}

LabelVector majority_vote(const std::vector<std::pair<std::string, std::string>>& keys,
                          const std::vector<std::vector<int>>& votes) {
  if (keys.size() != votes.size()) fail("majority_vote: key and vote counts differ");
  LabelVector out;
  out.source = LabelSource::human;
  out.keys = keys;
  out.labels = majority_vote(votes);
  return out;
}

}  // namespace cone::analysis
