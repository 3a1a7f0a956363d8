#include "cone/dedup.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "cone/error.hpp"

namespace cone::dedup {

namespace {

class EntailmentMemo {
 public:
  EntailmentMemo(gateway::Gateway& gateway, const NuggetSet& set) : gateway_(gateway), set_(set) {}

  // Resolves every (premise, hypothesis) index pair not already known, in one fan-out.
  void prefetch(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<std::pair<std::size_t, std::size_t>> todo;
    std::vector<gateway::EntailmentQuery> queries;
    for (const auto& p : pairs) {
      if (p.first == p.second || known_.count(p) != 0) continue;
      todo.push_back(p);
      queries.push_back({set_.nuggets[p.first].text, set_.nuggets[p.second].text});
    }
    const auto verdicts = gateway_.entail_all(queries);
    queries_ += queries.size();
    for (std::size_t i = 0; i < todo.size(); ++i) known_[todo[i]] = verdicts[i].entails();
  }

  bool entails(std::size_t premise, std::size_t hypothesis) const { return known_.at({premise, hypothesis}); }
  std::size_t queries() const noexcept { return queries_; }

 private:
  gateway::Gateway& gateway_;
  const NuggetSet& set_;
  std::map<std::pair<std::size_t, std::size_t>, bool> known_;
  std::size_t queries_ = 0;
};

}  // namespace

DedupOutcome deduplicate(gateway::Gateway& gateway, const NuggetSet& input) {
  const std::size_t n = input.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return input.nuggets[a].text.size() > input.nuggets[b].text.size();
  });

  EntailmentMemo memo(gateway, input);
  std::vector<bool> retained(n, false);
  std::vector<std::size_t> kept;
  try {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t c = order[k];
      std::vector<std::pair<std::size_t, std::size_t>> wanted;
      for (auto r : kept) wanted.emplace_back(r, c);
      for (std::size_t l = k + 1; l < n; ++l) wanted.emplace_back(order[l], c);
      memo.prefetch(wanted);

      bool drop = std::any_of(kept.begin(), kept.end(), [&](std::size_t r) { return memo.entails(r, c); });
      if (!drop) {
        std::vector<std::pair<std::size_t, std::size_t>> reverse;
        for (std::size_t l = k + 1; l < n; ++l) {
          if (memo.entails(order[l], c)) reverse.emplace_back(c, order[l]);
        }
        memo.prefetch(reverse);
        drop = std::any_of(reverse.begin(), reverse.end(),
                           [&](const auto& p) { return !memo.entails(p.first, p.second); });
      }
      if (!drop) {
        retained[c] = true;
        kept.push_back(c);
      }
    }
  } catch (const Error& e) {
    DedupOutcome failed;
    failed.nuggets = input;
    failed.error = e.what();
    failed.queries = memo.queries();
    return failed;
  }

  DedupOutcome out;
  out.nuggets.turn_id = input.turn_id;
  out.nuggets.deduplicated = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (retained[i]) out.nuggets.nuggets.push_back(input.nuggets[i]);
  }
  out.queries = memo.queries();
  return out;
}

NuggetCollection deduplicate_all(gateway::Gateway& gateway, const NuggetCollection& input,
                                 std::map<TurnId, std::string>* errors) {
  NuggetCollection out;
  for (const auto& [turn, set] : input) {
    auto result = deduplicate(gateway, set);
    if (result.error && errors != nullptr) (*errors)[turn] = *result.error;
    out.emplace(turn, std::move(result.nuggets));
  }
  return out;
}

}  // namespace cone::dedup
