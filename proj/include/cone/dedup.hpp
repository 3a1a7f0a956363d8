#pragma once

#include <optional>
#include <string>

#include "cone/gateway.hpp"
#include "cone/types.hpp"

namespace cone::dedup {

struct DedupOutcome {
  NuggetSet nuggets;
  // Set when the backend failed; `nuggets` is then the unmodified input.
  std::optional<std::string> error;
  std::size_t queries = 0;
};

// Entailment-based duplicate removal within one nugget set.
//
// Candidates are visited longest text first (ties: original position). A
// candidate is dropped when an already-retained nugget entails it, or when a
// later, still-live nugget entails it strictly (one-way). Under mutual
// entailment the earlier candidate, i.e. the longest, survives. Self-pairs
// are never queried.
DedupOutcome deduplicate(gateway::Gateway& gateway, const NuggetSet& input);

NuggetCollection deduplicate_all(gateway::Gateway& gateway, const NuggetCollection& input,
                                 std::map<TurnId, std::string>* errors = nullptr);

}  // namespace cone::dedup
