#include "cone/pooling.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>
#include <tuple>

#include <json.hpp>

#include "cone/error.hpp"
#include "cone/parallel.hpp"
#include "cone/prompts.hpp"

namespace cone::pooling {

using nlohmann::json;

std::size_t Pool::size() const {
  std::size_t n = 0;
  for (const auto& [turn, entries] : turns) n += entries.size();
  return n;
}

Filter accept_all() {
  return [](const TurnId&, const PassageId&) { return true; };
}

Filter reject_all() {
  return [](const TurnId&, const PassageId&) { return false; };
}

PoolBuild build_pool(const std::vector<RetrievalRun>& runs, const Filter& filter, const PoolOptions& options) {
  if (options.k_guaranteed > options.k_max) throw Error("pooling", "k_guaranteed must not exceed k_max");
  PoolBuild out;
  out.pool.k_guaranteed = options.k_guaranteed;
  out.pool.k_max = options.k_max;

  // Deep candidates with every run/position that nominated them.
  std::map<std::pair<TurnId, PassageId>, std::vector<Contribution>> deep;
  for (const auto& run : runs) {
    for (const auto& [turn, ranking] : run.rankings) {
      for (std::size_t i = 0; i < ranking.size() && i < options.k_max; ++i) {
        const auto& id = ranking[i].passage_id;
        Contribution c{run.run_tag, i + 1};
        if (i < options.k_guaranteed) {
          auto& entry = out.pool.turns[turn][id];
          entry.passage_id = id;
          entry.tier = Tier::guaranteed;
          entry.contributions.push_back(std::move(c));
        } else {
          deep[{turn, id}].push_back(std::move(c));
        }
      }
    }
  }

  std::vector<std::pair<TurnId, PassageId>> candidates;
  for (auto& [key, contributions] : deep) {
    auto turn = out.pool.turns.find(key.first);
    if (turn != out.pool.turns.end()) {
      if (auto hit = turn->second.find(key.second); hit != turn->second.end()) {
        // Already guaranteed; deeper nominations are provenance only.
        for (auto& c : contributions) hit->second.contributions.push_back(std::move(c));
        continue;
      }
    }
    candidates.push_back(key);
  }

  enum class Decision { reject, accept, failed };
  std::vector<Decision> decisions(candidates.size(), Decision::reject);
  std::vector<std::string> errors(candidates.size());
  parallel_for(candidates.size(), options.concurrency, [&](std::size_t i) {
    try {
      decisions[i] = filter(candidates[i].first, candidates[i].second) ? Decision::accept : Decision::reject;
    } catch (const std::exception& e) {
      decisions[i] = Decision::failed;
      errors[i] = e.what();
    }
  });
  out.filter_calls = candidates.size();

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& [turn, id] = candidates[i];
    if (decisions[i] == Decision::failed) {
      out.warnings.push_back("filter failed for (" + turn + ", " + id + "), excluded: " + errors[i]);
      continue;
    }
    if (decisions[i] == Decision::reject) continue;
    auto& entry = out.pool.turns[turn][id];
    entry.passage_id = id;
    entry.tier = Tier::filtered;
    entry.contributions = std::move(deep[candidates[i]]);
  }
  for (auto& [turn, entries] : out.pool.turns) {
    for (auto& [id, entry] : entries) {
      std::sort(entry.contributions.begin(), entry.contributions.end(), [](const auto& a, const auto& b) {
        return std::tie(a.run_tag, a.position) < std::tie(b.run_tag, b.position);
      });
    }
  }
  return out;
}

GradedPool grade_pool(const Pool& pool, const Judge& judge, std::size_t concurrency) {
  std::vector<std::pair<TurnId, PassageId>> pairs;
  for (const auto& [turn, entries] : pool.turns) {
    for (const auto& [id, entry] : entries) pairs.emplace_back(turn, id);
  }
  std::vector<std::optional<int>> grades(pairs.size());
  std::vector<std::string> errors(pairs.size());
  parallel_for(pairs.size(), concurrency, [&](std::size_t i) {
    try {
      grades[i] = judge(pairs[i].first, pairs[i].second);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  GradedPool out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [turn, id] = pairs[i];
    if (!grades[i]) {
      out.warnings.push_back("judge failed for (" + turn + ", " + id + "), left unjudged: " + errors[i]);
      continue;
    }
    int g = *grades[i];
    if (g < 0 || g > 4) {
      const int clamped = std::clamp(g, 0, 4);
      out.warnings.push_back("judge returned grade " + std::to_string(g) + " for (" + turn + ", " + id +
                             "), clamped to " + std::to_string(clamped));
      g = clamped;
    }
    out.qrels.judgments[turn][id] = g;
    ++out.distribution[static_cast<std::size_t>(g)];
  }
  return out;
}

int parse_grade(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size() && !std::isdigit(static_cast<unsigned char>(reply[i]))) ++i;
  if (i == reply.size()) throw BackendError("relevance judge reply has no grade: \"" + std::string(reply) + "\"");
  const bool negative = i > 0 && reply[i - 1] == '-';
  int value = 0;
  while (i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i])) && value < 1000) {
    value = value * 10 + (reply[i] - '0');
    ++i;
  }
  return negative ? -value : value;
}

LlmRelevanceJudge::LlmRelevanceJudge(gateway::Gateway& gateway, std::map<TurnId, std::string> queries,
                                     const PassageLookup& passages)
    : gateway_(gateway), queries_(std::move(queries)), passages_(passages) {}

int LlmRelevanceJudge::operator()(const TurnId& turn, const PassageId& passage) const {
  auto q = queries_.find(turn);
  if (q == queries_.end()) throw Error("pooling", "no query text for turn '" + turn + "'");
  auto p = passages_.find(passage);
  if (p == passages_.end()) throw Error("pooling", "no text for passage '" + passage + "'");
  gateway::LlmRequest request;
  request.user_message = prompts::relevance_prompt(q->second, p->second);
  request.max_output_tokens = 8;
  return parse_grade(gateway_.complete(request));
}

Filter judge_filter(Judge judge, int min_grade) {
  return [judge = std::move(judge), min_grade](const TurnId& turn, const PassageId& passage) {
    return judge(turn, passage) >= min_grade;
  };
}

std::string serialize_pool(const Pool& pool) {
  json turns = json::object();
  for (const auto& [turn, entries] : pool.turns) {
    json arr = json::array();
    for (const auto& [id, entry] : entries) {
      json contributions = json::array();
      for (const auto& c : entry.contributions) contributions.push_back({{"run", c.run_tag}, {"position", c.position}});
      arr.push_back({{"passage_id", id},
                     {"tier", entry.tier == Tier::guaranteed ? "guaranteed" : "filtered"},
                     {"contributions", std::move(contributions)}});
    }
    turns[turn] = std::move(arr);
  }
  json doc = {{"k_guaranteed", pool.k_guaranteed}, {"k_max", pool.k_max}, {"turns", std::move(turns)}};
  return doc.dump(2) + "\n";
}

Pool parse_pool(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pool: ") + e.what());
  }
  Pool pool;
  try {
    pool.k_guaranteed = doc.at("k_guaranteed").get<std::size_t>();
    pool.k_max = doc.at("k_max").get<std::size_t>();
    for (const auto& [turn, arr] : doc.at("turns").items()) {
      auto& entries = pool.turns[turn];
      for (const auto& e : arr) {
        PoolEntry entry;
        entry.passage_id = e.at("passage_id").get<std::string>();
        entry.tier = e.at("tier").get<std::string>() == "guaranteed" ? Tier::guaranteed : Tier::filtered;
        for (const auto& c : e.value("contributions", json::array())) {
          entry.contributions.push_back({c.at("run").get<std::string>(), c.at("position").get<std::size_t>()});
        }
        entries.emplace(entry.passage_id, std::move(entry));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("pool: ") + e.what());
  }
  return pool;
}

}  // namespace cone::pooling
