#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cone/gateway.hpp"
#include "cone/matcher.hpp"
#include "cone/types.hpp"

namespace cone::metrics {

// A metric value plus the reason it is flagged, if any. Flagged values are
// still reported but may be excluded from means (see `excluded`).
struct Value {
  double value = 0.0;
  std::string flag;
  bool excluded = false;
};

// --- nugget metrics ------------------------------------------------------------

// |covered gold| / |gold|; excluded when the gold set is empty.
Value recall_ntn(const matcher::MatchMatrix& m, const NuggetSet& gold);
// |covering extracted| / |extracted|; 0 with a flag when nothing was extracted.
Value precision_ntn(const matcher::MatchMatrix& m, const NuggetSet& extracted);
Value recall_ntr(const matcher::MatchMatrix& m, const NuggetSet& gold);

// --- ROUGE -----------------------------------------------------------------------

enum class RougeVariant { rouge1, rouge2, rougeL };

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool empty_reference = false;
};

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

RougeScore rouge_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference,
                        RougeVariant variant);
RougeScore rouge(std::string_view candidate, std::string_view reference, RougeVariant variant);

// --- groundedness ------------------------------------------------------------------

// Fraction of response sentences entailed by at least one of the response's
// first `top_k` provenance passages (premise = passage text).
Value groundedness(gateway::Gateway& gateway, const Response& response, const PassageLookup& passages,
                   std::size_t top_k = 3);

// --- retrieval -----------------------------------------------------------------------

enum class Gain { linear, exponential };

struct PerTurn {
  std::map<TurnId, double> values;
  std::vector<TurnId> excluded;  // no relevant documents in qrels
  double mean = 0.0;
};

// Turns come from the qrels; turns the run misses score 0.
PerTurn ndcg(const RetrievalRun& run, const Qrels& qrels, std::size_t k, Gain gain = Gain::linear);
PerTurn precision_at(const RetrievalRun& run, const Qrels& qrels, std::size_t k, int rel_threshold = 1);
PerTurn recall_at(const RetrievalRun& run, const Qrels& qrels, std::size_t k, int rel_threshold = 1);
PerTurn average_precision(const RetrievalRun& run, const Qrels& qrels, int rel_threshold = 1,
                          std::size_t depth = 1000);

// Single-ranking building blocks, exposed for oracles and tests.
double dcg(const std::vector<int>& gains_in_rank_order, std::size_t k, Gain gain);
double ndcg_for_ranking(const std::vector<PassageId>& ranking, const std::map<PassageId, int>& judged,
                        std::size_t k, Gain gain);
double ap_for_ranking(const std::vector<PassageId>& ranking, const std::map<PassageId, int>& judged,
                      int rel_threshold, std::size_t depth);

// Unweighted mean over the non-excluded entries.
std::optional<double> mean_of(const std::map<TurnId, Value>& per_turn);

}  // namespace cone::metrics
