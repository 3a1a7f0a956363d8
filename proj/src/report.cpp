#include "cone/report.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "cone/analysis.hpp"
#include "cone/assets.hpp"
#include "cone/corpus_io.hpp"
#include "cone/error.hpp"
#include "cone/nuggetizer.hpp"
#include "cone/parallel.hpp"

namespace cone::report {

using nlohmann::json;

namespace {

std::string hint_for(const std::string& module) {
  if (module == "corpus-io") return "check the input file against the expected format";
  if (module == "backend-gateway") return "check that the backend is reachable, or rerun against a warm cache";
  if (module == "nuggetizer") return "rerun without --strict-span to drop unrepairable lines";
  if (module == "matcher") return "rerun with --parse-failures no, or inspect the judge replies in the cache";
  if (module == "metrics") return "make sure the passage file covers every provenance passage";
  if (module == "cli-report") return "check the configuration and input paths";
  return "see the message for details";
}

Issue issue_from(const TurnId& turn, const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  const std::string module = err ? err->module() : "cli-report";
  return {module, turn, e.what(), hint_for(module)};
}

metrics::Value excluded(const std::string& flag) { return {0.0, flag, true}; }

struct TurnWork {
  TurnResult result;
  std::vector<Issue> issues;
  std::vector<std::string> warnings;
};

TurnWork evaluate_turn(gateway::Gateway& gw, const GenerationInputs& in, const GenerationOptions& opt,
                       const TurnId& turn, const Response& response) {
  TurnWork w;
  w.result.turn_id = turn;
  const auto topic_turn = in.turns.find(turn);
  if (topic_turn != in.turns.end()) w.result.personal = topic_turn->second.personal;

  bool any_gold = false;
  for (const auto& variant : in.gold) {
    auto g = variant.nuggets.find(turn);
    any_gold = any_gold || (g != variant.nuggets.end() && !g->second.empty());
  }

  std::optional<NuggetSet> extracted;
  if (opt.mode == matcher::MatchMode::ntn && any_gold) {
    if (in.extracted) {
      auto it = in.extracted->find(turn);
      extracted = it != in.extracted->end() ? it->second : NuggetSet{turn, {}, false};
    } else if (topic_turn == in.turns.end()) {
      w.issues.push_back({"cli-report", turn, "no topic turn to take the resolved utterance from",
                          "pass --topics covering every turn of the run"});
    } else {
      const auto& q = topic_turn->second.resolved_utterance.empty() ? topic_turn->second.utterance
                                                                     : topic_turn->second.resolved_utterance;
      nuggetizer::ExtractOptions eo;
      eo.turn_id = turn;
      eo.source = NuggetSource::response;
      eo.strict_span = opt.strict_span;
      try {
        auto outcome = nuggetizer::extract(gw, response.text, q, eo);
        for (const auto& line : outcome.non_span_lines) {
          w.warnings.push_back("turn " + turn + ": extracted line " + nuggetizer::to_string(line.status) + ": " +
                               line.raw_line);
        }
        extracted = std::move(outcome.nuggets);
      } catch (const std::exception& e) {
        w.issues.push_back(issue_from(turn, e));
      }
    }
  }

  for (const auto& variant : in.gold) {
    const std::string p_key = variant.name + "/precision";
    const std::string r_key = variant.name + "/recall";
    auto g = variant.nuggets.find(turn);
    if (g == variant.nuggets.end() || g->second.empty()) {
      w.result.metrics[r_key] = excluded("empty-gold");
      if (opt.mode == matcher::MatchMode::ntn) w.result.metrics[p_key] = excluded("empty-gold");
      continue;
    }
    const NuggetSet& gold = g->second;
    auto& labels = w.result.labels[variant.name];
    try {
      if (opt.mode == matcher::MatchMode::ntn) {
        if (!extracted) continue;
        const auto m = matcher::match_ntn(gw, *extracted, gold);
        w.result.metrics[r_key] = metrics::recall_ntn(m, gold);
        w.result.metrics[p_key] = metrics::precision_ntn(m, *extracted);
        const auto matched = matcher::extracted_match_labels(m);
        for (std::size_t i = 0; i < extracted->nuggets.size(); ++i) {
          labels.push_back({extracted->nuggets[i].nugget_id, extracted->nuggets[i].text, matched[i]});
        }
      } else {
        const auto m = opt.mode == matcher::MatchMode::ntr ? matcher::match_ntr(gw, response, gold, opt.parse_policy)
                                                          : matcher::match_ntr_nli(gw, response, gold);
        w.result.metrics[r_key] = metrics::recall_ntr(m, gold);
        for (const auto& id : m.parse_failures) {
          w.warnings.push_back("turn " + turn + ": unparseable judge reply for gold nugget " + id +
                               " (" + variant.name + "), counted as no");
        }
        for (const auto& n : gold.nuggets) labels.push_back({n.nugget_id, n.text, m.covered_gold.count(n.nugget_id) != 0});
      }
    } catch (const std::exception& e) {
      w.issues.push_back(issue_from(turn, e));
    }
  }

  if (in.gold_responses) {
    if (auto ref = in.gold_responses->find(turn); ref != in.gold_responses->end()) {
      const std::pair<const char*, metrics::RougeVariant> variants[] = {{"rouge1_f1", metrics::RougeVariant::rouge1},
                                                                        {"rouge2_f1", metrics::RougeVariant::rouge2},
                                                                        {"rougeL_f1", metrics::RougeVariant::rougeL}};
      for (const auto& [name, v] : variants) {
        const auto s = metrics::rouge(response.text, ref->second.text, v);
        w.result.metrics[name] = s.empty_reference ? excluded("empty-reference") : metrics::Value{s.f1, "", false};
      }
    }
  }

  if (in.passages) {
    try {
      w.result.metrics["groundedness"] = metrics::groundedness(gw, response, *in.passages, opt.groundedness_top_k);
    } catch (const std::exception& e) {
      w.issues.push_back(issue_from(turn, e));
    }
  }
  return w;
}

std::optional<double> mean_over(const std::vector<TurnResult>& turns, const std::string& key,
                                const std::optional<bool>& personal, std::size_t* count) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : turns) {
    if (personal && t.personal != personal) continue;
    auto it = t.metrics.find(key);
    if (it == t.metrics.end() || it->second.excluded) continue;
    sum += it->second.value;
    ++n;
  }
  if (count) *count = n;
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<Summary> summarize(const std::vector<TurnResult>& turns, const std::string& variant,
                                 bool personal) {
  Summary s;
  for (const char* metric : {"precision", "recall"}) {
    std::size_t n = 0;
    if (auto m = mean_over(turns, variant + "/" + metric, personal, &n)) {
      s.means[metric] = *m;
      s.turns = std::max(s.turns, n);
    }
  }
  if (s.means.empty()) return std::nullopt;
  return s;
}

json summary_json(const Summary& s) {
  json j = json::object();
  for (const auto& [k, v] : s.means) j[k] = v;
  j["turns"] = s.turns;
  return j;
}

std::vector<ExternalScoreTable> parse_bundled(std::string_view tsv) {
  std::istringstream in{std::string(tsv)};
  return io::parse_score_tables(in);
}

json leaderboard_json(const std::vector<LeaderboardEntry>& board) {
  json arr = json::array();
  for (const auto& e : board) {
    arr.push_back({{"metric", e.metric}, {"score", e.score}, {"rank", e.rank}, {"total", e.total}});
  }
  return arr;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string metric_key(matcher::MatchMode mode, const std::string& variant, const std::string& metric) {
  return matcher::to_string(mode) + "_" + variant + "_" + metric;
}

std::vector<LeaderboardEntry> leaderboard(const RunTag& run_tag, const std::map<std::string, double>& scores,
                                          const std::vector<ExternalScoreTable>& participants) {
  std::vector<LeaderboardEntry> out;
  for (const auto& table : participants) {
    auto own = scores.find(table.metric_name);
    if (own == scores.end()) continue;
    auto all = table.scores;
    all[run_tag] = own->second;
    const auto ranking = analysis::SystemRanking::from_scores(table.metric_name, all);
    const auto r = analysis::rank_submission(run_tag, ranking);
    out.push_back({table.metric_name, own->second, r.rank, r.total});
  }
  return out;
}

GenerationReport evaluate_generation(gateway::Gateway& gateway, const GenerationInputs& inputs,
                                     const GenerationOptions& options) {
  GenerationReport report;
  report.run_tag = inputs.run.run_tag;
  report.mode = options.mode;
  report.llm_model = gateway.llm_model();
  report.nli_model = gateway.nli_model();
  for (const auto& v : inputs.gold) report.variants.push_back(v.name);

  std::vector<std::pair<TurnId, const Response*>> todo;
  for (const auto& [turn, response] : inputs.run.responses) todo.emplace_back(turn, &response);

  std::vector<TurnWork> work(todo.size());
  parallel_for(todo.size(), gateway.concurrency(), [&](std::size_t i) {
    work[i] = evaluate_turn(gateway, inputs, options, todo[i].first, *todo[i].second);
  });

  std::set<TurnId> missing;
  for (const auto& variant : inputs.gold) {
    for (const auto& [turn, set] : variant.nuggets) {
      if (!set.empty() && !inputs.run.responses.count(turn)) missing.insert(turn);
    }
  }
  for (const auto& turn : missing) report.warnings.push_back("run has no response for gold turn " + turn);

  for (auto& w : work) {
    for (auto& i : w.issues) report.errors.push_back(std::move(i));
    for (auto& s : w.warnings) report.warnings.push_back(std::move(s));
    report.turns.push_back(std::move(w.result));
  }

  const bool split = std::any_of(report.turns.begin(), report.turns.end(),
                                 [](const TurnResult& t) { return t.personal.has_value(); });
  std::map<std::string, double> run_scores;
  for (const auto& variant : report.variants) {
    VariantAggregate agg;
    for (const char* metric : {"precision", "recall"}) {
      std::size_t n = 0;
      if (auto m = mean_over(report.turns, variant + "/" + metric, std::nullopt, &n)) {
        agg.means[metric] = *m;
        agg.turns_evaluated = std::max(agg.turns_evaluated, n);
        run_scores[metric_key(options.mode, variant, metric)] = *m;
      }
    }
    for (const auto& t : report.turns) {
      auto it = t.metrics.find(variant + "/recall");
      if (it != t.metrics.end() && it->second.excluded) agg.turns_excluded.push_back(t.turn_id);
    }
    if (split) {
      agg.personal = summarize(report.turns, variant, true);
      agg.non_personal = summarize(report.turns, variant, false);
    }
    report.aggregate[variant] = std::move(agg);
  }
  for (const char* metric : {"rouge1_f1", "rouge2_f1", "rougeL_f1", "groundedness"}) {
    if (auto m = mean_over(report.turns, metric, std::nullopt, nullptr)) {
      report.reference[metric] = *m;
      run_scores[metric] = *m;
    }
  }
  report.leaderboard = leaderboard(report.run_tag, run_scores, inputs.participants);
  return report;
}

json to_json(const GenerationReport& report) {
  json doc;
  doc["schema"] = "cone.generation-report/1";
  doc["run_tag"] = report.run_tag;
  doc["matching"] = matcher::to_string(report.mode);
  doc["complete"] = report.complete();
  doc["backends"] = {{"llm", report.llm_model.empty() ? json() : json(report.llm_model)},
                     {"nli", report.nli_model.empty() ? json() : json(report.nli_model)}};
  doc["gold_variants"] = report.variants;

  json aggregate = json::object();
  for (const auto& [variant, agg] : report.aggregate) {
    json a = json::object();
    for (const auto& [k, v] : agg.means) a[k] = v;
    a["turns_evaluated"] = agg.turns_evaluated;
    a["turns_excluded"] = agg.turns_excluded;
    if (agg.personal) a["personal"] = summary_json(*agg.personal);
    if (agg.non_personal) a["non_personal"] = summary_json(*agg.non_personal);
    aggregate[variant] = std::move(a);
  }
  doc["aggregate"] = std::move(aggregate);

  json reference = json::object();
  for (const auto& [k, v] : report.reference) reference[k] = v;
  if (report.reference.count("groundedness")) reference["groundedness_definition"] = "operationalized";
  doc["reference"] = std::move(reference);

  json per_turn = json::array();
  for (const auto& t : report.turns) {
    json metrics = json::object();
    json flags = json::object();
    for (const auto& [k, v] : t.metrics) {
      metrics[k] = v.excluded ? json() : json(v.value);
      if (!v.flag.empty()) flags[k] = v.flag;
    }
    per_turn.push_back({{"turn_id", t.turn_id},
                        {"personal", t.personal ? json(*t.personal) : json()},
                        {"metrics", std::move(metrics)},
                        {"flags", std::move(flags)}});
  }
  doc["per_turn"] = std::move(per_turn);
  doc["leaderboard"] = leaderboard_json(report.leaderboard);
  doc["nugget_labels"] = nugget_labels_json(report);

  json errors = json::array();
  for (const auto& e : report.errors) {
    errors.push_back({{"module", e.module}, {"turn_id", e.turn_id}, {"message", e.message}, {"hint", e.hint}});
  }
  doc["errors"] = std::move(errors);
  doc["warnings"] = report.warnings;
  return doc;
}

json nugget_labels_json(const GenerationReport& report) {
  json out = json::object();
  for (const auto& variant : report.variants) {
    json turns = json::array();
    for (const auto& t : report.turns) {
      auto it = t.labels.find(variant);
      if (it == t.labels.end()) continue;
      json nuggets = json::array();
      for (const auto& l : it->second) {
        nuggets.push_back({{"nugget_id", l.nugget_id}, {"text", l.text}, {"matched", l.matched}});
      }
      turns.push_back({{"turn_id", t.turn_id}, {"nuggets", std::move(nuggets)}});
    }
    out[variant] = std::move(turns);
  }
  return out;
}

std::string per_turn_tsv(const GenerationReport& report) {
  std::set<std::string> columns;
  for (const auto& t : report.turns) {
    for (const auto& [k, v] : t.metrics) columns.insert(k);
  }
  std::ostringstream out;
  out << "turn_id\tpersonal";
  for (const auto& c : columns) out << '\t' << c;
  out << '\n';
  for (const auto& t : report.turns) {
    out << t.turn_id << '\t' << (t.personal ? (*t.personal ? "yes" : "no") : "NA");
    for (const auto& c : columns) {
      auto it = t.metrics.find(c);
      out << '\t' << (it == t.metrics.end() || it->second.excluded ? "NA" : format_number(it->second.value));
    }
    out << '\n';
  }
  return out.str();
}

std::string aggregate_tsv(const GenerationReport& report) {
  std::ostringstream out;
  out << "section\tsubset\tmetric\tvalue\tturns\n";
  for (const auto& [variant, agg] : report.aggregate) {
    for (const auto& [metric, v] : agg.means) {
      out << variant << "\tall\t" << metric << '\t' << format_number(v) << '\t' << agg.turns_evaluated << '\n';
    }
    const std::pair<const char*, const std::optional<Summary>*> subsets[] = {{"personal", &agg.personal},
                                                                             {"non_personal", &agg.non_personal}};
    for (const auto& [name, s] : subsets) {
      if (!*s) continue;
      for (const auto& [metric, v] : (*s)->means) {
        out << variant << '\t' << name << '\t' << metric << '\t' << format_number(v) << '\t' << (*s)->turns << '\n';
      }
    }
  }
  for (const auto& [metric, v] : report.reference) {
    std::size_t n = 0;
    mean_over(report.turns, metric, std::nullopt, &n);
    out << "reference\tall\t" << metric << '\t' << format_number(v) << '\t' << n << '\n';
  }
  return out.str();
}

std::string leaderboard_tsv(const std::vector<LeaderboardEntry>& board) {
  std::ostringstream out;
  out << "metric\tscore\trank\ttotal\n";
  for (const auto& e : board) {
    out << e.metric << '\t' << format_number(e.score) << '\t' << e.rank << '\t' << e.total << '\n';
  }
  return out.str();
}

RetrievalReport evaluate_retrieval(const RetrievalRun& run, const Qrels& qrels, const RetrievalOptions& options,
                                   const std::vector<ExternalScoreTable>& participants) {
  if (options.cutoffs.empty()) throw ConfigError("eval-retrieval needs at least one cutoff");
  RetrievalReport report;
  report.run_tag = run.run_tag;
  for (const auto k : options.cutoffs) {
    report.metrics["ndcg@" + std::to_string(k)] = metrics::ndcg(run, qrels, k, options.gain);
    report.metrics["P@" + std::to_string(k)] = metrics::precision_at(run, qrels, k, options.rel_threshold);
    report.metrics["R@" + std::to_string(k)] = metrics::recall_at(run, qrels, k, options.rel_threshold);
  }
  report.metrics["R@" + std::to_string(options.depth)] =
      metrics::recall_at(run, qrels, options.depth, options.rel_threshold);
  report.metrics["map"] = metrics::average_precision(run, qrels, options.rel_threshold, options.depth);
  for (const auto& [turn, judged] : qrels.judgments) {
    if (!run.rankings.count(turn)) report.missing_turns.push_back(turn);
  }
  std::map<std::string, double> scores;
  for (const auto& [name, per_turn] : report.metrics) scores[name] = per_turn.mean;
  report.leaderboard = leaderboard(run.run_tag, scores, participants);
  return report;
}

json to_json(const RetrievalReport& report) {
  json doc;
  doc["schema"] = "cone.retrieval-report/1";
  doc["run_tag"] = report.run_tag;
  json aggregate = json::object();
  json excluded_turns = json::object();
  std::map<TurnId, json> per_turn;
  for (const auto& [name, m] : report.metrics) {
    aggregate[name] = {{"mean", m.mean}, {"turns", m.values.size()}};
    if (!m.excluded.empty()) excluded_turns[name] = m.excluded;
    for (const auto& [turn, v] : m.values) per_turn[turn][name] = v;
  }
  doc["aggregate"] = std::move(aggregate);
  doc["excluded_turns"] = std::move(excluded_turns);
  json turns = json::array();
  for (auto& [turn, m] : per_turn) turns.push_back({{"turn_id", turn}, {"metrics", std::move(m)}});
  doc["per_turn"] = std::move(turns);
  doc["missing_turns"] = report.missing_turns;
  doc["leaderboard"] = leaderboard_json(report.leaderboard);
  return doc;
}

std::string per_turn_tsv(const RetrievalReport& report) {
  std::set<TurnId> turns;
  for (const auto& [name, m] : report.metrics) {
    for (const auto& [turn, v] : m.values) turns.insert(turn);
  }
  std::ostringstream out;
  out << "turn_id";
  for (const auto& [name, m] : report.metrics) out << '\t' << name;
  out << '\n';
  for (const auto& turn : turns) {
    out << turn;
    for (const auto& [name, m] : report.metrics) {
      auto it = m.values.find(turn);
      out << '\t' << (it == m.values.end() ? "NA" : format_number(it->second));
    }
    out << '\n';
  }
  out << "all";
  for (const auto& [name, m] : report.metrics) out << '\t' << format_number(m.mean);
  out << '\n';
  return out.str();
}

std::vector<ExternalScoreTable> bundled_generation_scores() { return parse_bundled(assets::kParticipantsGeneration); }

std::vector<ExternalScoreTable> bundled_retrieval_scores() { return parse_bundled(assets::kParticipantsRetrieval); }

}  // namespace cone::report
