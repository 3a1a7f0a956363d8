#include "cone/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cone/error.hpp"
#include "cone/text.hpp"

namespace cone::metrics {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

Value require_mode(const matcher::MatchMatrix& m, matcher::MatchMode expected, const char* metric) {
  if (m.mode != expected) {
    throw Error("metrics", std::string(metric) + " needs a " + matcher::to_string(expected) + " matrix, got " +
                               matcher::to_string(m.mode));
  }
  return {};
}

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

double mean_values(const std::map<TurnId, double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [turn, v] : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<PassageId> ranked_ids(const RetrievalRun& run, const TurnId& turn) {
  std::vector<PassageId> ids;
  if (auto it = run.rankings.find(turn); it != run.rankings.end()) {
    for (const auto& p : it->second) ids.push_back(p.passage_id);
  }
  return ids;
}

std::size_t count_relevant(const std::map<PassageId, int>& judged, int threshold) {
  return static_cast<std::size_t>(
      std::count_if(judged.begin(), judged.end(), [&](const auto& kv) { return kv.second >= threshold; }));
}

bool is_relevant(const std::map<PassageId, int>& judged, const PassageId& id, int threshold) {
  auto it = judged.find(id);
  return it != judged.end() && it->second >= threshold;
}

}  // namespace

Value recall_ntn(const matcher::MatchMatrix& m, const NuggetSet& gold) {
  require_mode(m, matcher::MatchMode::ntn, "Recall_NtN");
  if (gold.empty()) return {0.0, "empty-gold", true};
  return {ratio(m.covered_gold.size(), gold.size()), "", false};
}

Value precision_ntn(const matcher::MatchMatrix& m, const NuggetSet& extracted) {
  require_mode(m, matcher::MatchMode::ntn, "Precision_NtN");
  if (extracted.empty()) return {0.0, "no-extracted-nuggets", false};
  return {ratio(m.covering_extracted ? m.covering_extracted->size() : 0, extracted.size()), "", false};
}

Value recall_ntr(const matcher::MatchMatrix& m, const NuggetSet& gold) {
  if (m.mode == matcher::MatchMode::ntn) throw Error("metrics", "Recall_NtR needs an ntr or ntr-nli matrix");
  if (gold.empty()) return {0.0, "empty-gold", true};
  return {ratio(m.covered_gold.size(), gold.size()), "", false};
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference,
                        RougeVariant variant) {
  RougeScore s;
  if (reference.empty()) {
    s.empty_reference = true;
    return s;
  }
  if (variant == RougeVariant::rougeL) {
    const auto lcs = lcs_length(candidate, reference);
    s.precision = ratio(lcs, candidate.size());
    s.recall = ratio(lcs, reference.size());
  } else {
    const std::size_t n = variant == RougeVariant::rouge1 ? 1 : 2;
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    std::size_t overlap = 0;
    for (const auto& [gram, count] : cand) {
      if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(count, it->second);
    }
    const auto cand_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
    const auto ref_total = reference.size() >= n ? reference.size() - n + 1 : 0;
    s.precision = ratio(overlap, cand_total);
    s.recall = ratio(overlap, ref_total);
  }
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

RougeScore rouge(std::string_view candidate, std::string_view reference, RougeVariant variant) {
  return rouge_tokens(text::tokenize(candidate), text::tokenize(reference), variant);
}

Value groundedness(gateway::Gateway& gateway, const Response& response, const PassageLookup& passages,
                   std::size_t top_k) {
  std::vector<const std::string*> premises;
  for (const auto& id : response.passage_provenance) {
    if (premises.size() == top_k) break;
    auto it = passages.find(id);
    if (it == passages.end()) throw Error("metrics", "groundedness: no text for provenance passage '" + id + "'");
    premises.push_back(&it->second);
  }
  if (premises.empty()) return {0.0, "no-provenance", false};
  const auto sentences = text::split_sentences(response.text);
  if (sentences.empty()) return {0.0, "no-sentences", false};

  std::vector<gateway::EntailmentQuery> queries;
  for (const auto& s : sentences) {
    for (const auto* p : premises) queries.push_back({*p, s});
  }
  const auto verdicts = gateway.entail_all(queries);
  std::size_t supported = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    bool any = false;
    for (std::size_t j = 0; j < premises.size(); ++j) any = any || verdicts[i * premises.size() + j].entails();
    if (any) ++supported;
  }
  return {ratio(supported, sentences.size()), "operationalized", false};
}

double dcg(const std::vector<int>& gains_in_rank_order, std::size_t k, Gain gain) {
  double sum = 0.0;
  for (std::size_t i = 0; i < gains_in_rank_order.size() && i < k; ++i) {
    const double g = gain == Gain::linear ? gains_in_rank_order[i] : std::pow(2.0, gains_in_rank_order[i]) - 1.0;
    sum += g / std::log2(static_cast<double>(i) + 2.0);
  }
  return sum;
}

double ndcg_for_ranking(const std::vector<PassageId>& ranking, const std::map<PassageId, int>& judged, std::size_t k,
                        Gain gain) {
  std::vector<int> ideal;
  for (const auto& [doc, grade] : judged) {
    if (grade > 0) ideal.push_back(grade);
  }
  std::sort(ideal.rbegin(), ideal.rend());
  const double idcg = dcg(ideal, k, gain);
  if (idcg == 0.0) return 0.0;
  std::vector<int> gains;
  for (const auto& id : ranking) {
    auto it = judged.find(id);
    gains.push_back(it == judged.end() ? 0 : std::max(it->second, 0));
  }
  return dcg(gains, k, gain) / idcg;
}

double ap_for_ranking(const std::vector<PassageId>& ranking, const std::map<PassageId, int>& judged,
                      int rel_threshold, std::size_t depth) {
  const auto total = count_relevant(judged, rel_threshold);
  if (total == 0) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranking.size() && i < depth; ++i) {
    if (!is_relevant(judged, ranking[i], rel_threshold)) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(total);
}

PerTurn ndcg(const RetrievalRun& run, const Qrels& qrels, std::size_t k, Gain gain) {
  if (k == 0) throw Error("metrics", "nDCG cutoff must be >= 1");
  PerTurn out;
  for (const auto& [turn, judged] : qrels.judgments) {
    if (count_relevant(judged, 1) == 0) {
      out.excluded.push_back(turn);
      continue;
    }
    out.values[turn] = ndcg_for_ranking(ranked_ids(run, turn), judged, k, gain);
  }
  out.mean = mean_values(out.values);
  return out;
}

PerTurn precision_at(const RetrievalRun& run, const Qrels& qrels, std::size_t k, int rel_threshold) {
  if (k == 0) throw Error("metrics", "P@k cutoff must be >= 1");
  PerTurn out;
  for (const auto& [turn, judged] : qrels.judgments) {
    const auto ranking = ranked_ids(run, turn);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranking.size() && i < k; ++i) hits += is_relevant(judged, ranking[i], rel_threshold);
    out.values[turn] = ratio(hits, k);
  }
  out.mean = mean_values(out.values);
  return out;
}

PerTurn recall_at(const RetrievalRun& run, const Qrels& qrels, std::size_t k, int rel_threshold) {
  if (k == 0) throw Error("metrics", "R@k cutoff must be >= 1");
  PerTurn out;
  for (const auto& [turn, judged] : qrels.judgments) {
    const auto total = count_relevant(judged, rel_threshold);
    if (total == 0) {
      out.excluded.push_back(turn);
      continue;
    }
    const auto ranking = ranked_ids(run, turn);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranking.size() && i < k; ++i) hits += is_relevant(judged, ranking[i], rel_threshold);
    out.values[turn] = ratio(hits, total);
  }
  out.mean = mean_values(out.values);
  return out;
}

PerTurn average_precision(const RetrievalRun& run, const Qrels& qrels, int rel_threshold, std::size_t depth) {
  PerTurn out;
  for (const auto& [turn, judged] : qrels.judgments) {
    if (count_relevant(judged, rel_threshold) == 0) {
      out.excluded.push_back(turn);
      continue;
    }
    out.values[turn] = ap_for_ranking(ranked_ids(run, turn), judged, rel_threshold, depth);
  }
  out.mean = mean_values(out.values);
  return out;
}

std::optional<double> mean_of(const std::map<TurnId, Value>& per_turn) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [turn, v] : per_turn) {
    if (v.excluded) continue;
    sum += v.value;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace cone::metrics
