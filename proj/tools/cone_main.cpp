// cone: command-line driver for the nugget-based evaluation pipeline.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cone/analysis.hpp"
#include "cone/backends.hpp"
#include "cone/corpus_io.hpp"
#include "cone/dedup.hpp"
#include "cone/error.hpp"
#include "cone/gateway.hpp"
#include "cone/nuggetizer.hpp"
#include "cone/pooling.hpp"
#include "cone/report.hpp"
#include "cone/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitIncomplete = 1;
constexpr int kExitConfig = 2;

struct Globals {
  std::string cache;
  std::size_t concurrency = 8;
  std::string config;
  bool offline = false;
  std::string llm;
  std::string llm_model = "gpt-4o";
  std::string nli;
  std::string nli_model = "nli-server";
  int retries = 3;
  int backoff_ms = 1000;
};

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw cone::ConfigError("missing required option " + flag);
}

std::string read_input(const std::string& path, const std::string& what) {
  if (path.empty()) throw cone::ConfigError("missing " + what);
  if (!fs::exists(path)) throw cone::ConfigError(what + " not found: " + path);
  return cone::io::read_file(path);
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  cone::io::write_file(path, content);
}

std::unique_ptr<cone::gateway::Gateway> make_gateway(const Globals& g, bool need_llm, bool need_nli,
                                                      const std::string& purpose) {
  if (need_llm && g.llm.empty()) {
    throw cone::ConfigError(purpose + " needs an LLM backend: pass --llm or set CONE_LLM_ENDPOINT");
  }
  if (need_nli && g.nli.empty()) {
    throw cone::ConfigError(purpose + " needs an entailment backend: pass --nli or set CONE_NLI_ENDPOINT");
  }
  cone::gateway::RetryPolicy retry{g.retries, std::chrono::milliseconds(g.backoff_ms)};
  std::shared_ptr<cone::gateway::LlmBackend> llm;
  std::shared_ptr<cone::gateway::EntailmentBackend> nli;
  if (need_llm) {
    const char* key = std::getenv("CONE_LLM_KEY");
    llm = cone::gateway::make_llm_backend(g.llm, g.llm_model, key ? key : "", retry);
  }
  if (need_nli) nli = cone::gateway::make_entailment_backend(g.nli, g.nli_model, retry);
  auto cache = g.cache.empty() ? std::make_shared<cone::gateway::CallCache>()
                               : std::make_shared<cone::gateway::CallCache>(g.cache);
  cone::gateway::GatewayOptions options;
  options.concurrency = g.concurrency;
  options.offline = g.offline;
  return std::make_unique<cone::gateway::Gateway>(std::move(llm), std::move(nli), std::move(cache), options);
}

std::map<cone::TurnId, cone::Turn> load_turns(const std::string& path) {
  return cone::io::index_turns(cone::io::parse_topics(read_input(path, "topics file")));
}

std::map<cone::TurnId, std::string> resolved_utterances(const std::map<cone::TurnId, cone::Turn>& turns) {
  std::map<cone::TurnId, std::string> out;
  for (const auto& [id, t] : turns) out[id] = t.resolved_utterance.empty() ? t.utterance : t.resolved_utterance;
  return out;
}

cone::NuggetCollection load_nuggets(const std::string& path, const std::string& what, cone::NuggetSource source,
                                    bool deduplicated) {
  cone::io::NuggetParseOptions opts;
  opts.source = source;
  opts.deduplicated = deduplicated;
  return cone::io::parse_nugget_file(read_input(path, what), opts);
}

cone::PassageLookup load_passages(const std::string& path) {
  return cone::io::parse_passages(read_input(path, "passage file"));
}

std::vector<cone::ExternalScoreTable> load_participants(const std::string& path, bool generation) {
  if (path == "none") return {};
  if (path.empty()) {
    return generation ? cone::report::bundled_generation_scores() : cone::report::bundled_retrieval_scores();
  }
  std::istringstream in(read_input(path, "participant score table"));
  return cone::io::parse_score_tables(in);
}

// --- config file -------------------------------------------------------------

// Flat "key = value" lines; '#' starts a comment. Keys are long option names.
std::vector<std::pair<std::string, std::string>> parse_config(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t n = 0;
  for (const auto& raw : cone::text::split_lines(read_input(path, "config file"))) {
    ++n;
    const auto line = cone::text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find_first_of("=:");
    if (eq == std::string::npos) {
      throw cone::ConfigError(path + ":" + std::to_string(n) + ": expected 'key = value'");
    }
    auto key = cone::text::trim(line.substr(0, eq));
    auto value = cone::text::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// Options given on the command line win over the config file.
void apply_config(CLI::App& app, const std::string& path) {
  CLI::App* active = &app;
  while (!active->get_subcommands().empty()) active = active->get_subcommands().front();
  for (const auto& [key, value] : parse_config(path)) {
    CLI::Option* opt = nullptr;
    for (CLI::App* scope = active; scope != nullptr && opt == nullptr; scope = scope->get_parent()) {
      opt = scope->get_option_no_throw("--" + key);
    }
    if (opt == nullptr) throw cone::ConfigError(path + ": unknown key '" + key + "' for this command");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

// --- correlate sources ---------------------------------------------------------

std::map<std::string, double> report_scores(const json& doc) {
  std::map<std::string, double> out;
  const auto schema = doc.value("schema", "");
  if (schema.rfind("cone.generation-report", 0) == 0) {
    const auto mode = cone::matcher::match_mode_from_string(doc.at("matching").get<std::string>());
    for (const auto& [variant, agg] : doc.at("aggregate").items()) {
      for (const char* metric : {"precision", "recall"}) {
        if (agg.contains(metric)) out[cone::report::metric_key(mode, variant, metric)] = agg.at(metric).get<double>();
      }
    }
    for (const auto& [k, v] : doc.at("reference").items()) {
      if (v.is_number()) out[k] = v.get<double>();
    }
  } else if (schema.rfind("cone.retrieval-report", 0) == 0) {
    for (const auto& [k, v] : doc.at("aggregate").items()) out[k] = v.at("mean").get<double>();
  } else {
    throw cone::ConfigError("not a cone report (schema '" + schema + "')");
  }
  return out;
}

// SOURCE:COLUMN where SOURCE is a score-table TSV, a report JSON, a directory of
// report JSONs, or "bundled-generation" / "bundled-retrieval".
cone::ExternalScoreTable load_metric(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size()) {
    throw cone::ConfigError("metric '" + spec + "' must look like SOURCE:COLUMN");
  }
  const std::string source = spec.substr(0, colon);
  const std::string column = spec.substr(colon + 1);
  cone::ExternalScoreTable out;
  out.metric_name = spec;

  std::vector<cone::ExternalScoreTable> tables;
  if (source == "bundled-generation") {
    tables = cone::report::bundled_generation_scores();
  } else if (source == "bundled-retrieval") {
    tables = cone::report::bundled_retrieval_scores();
  } else if (fs::is_directory(source) || fs::path(source).extension() == ".json") {
    std::vector<fs::path> files;
    if (fs::is_directory(source)) {
      for (const auto& e : fs::directory_iterator(source)) {
        if (e.path().extension() == ".json") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(source);
    }
    for (const auto& f : files) {
      const auto doc = json::parse(read_input(f.string(), "report"));
      const auto scores = report_scores(doc);
      auto it = scores.find(column);
      if (it == scores.end()) throw cone::ConfigError(f.string() + " has no metric '" + column + "'");
      out.scores[doc.at("run_tag").get<std::string>()] = it->second;
    }
    return out;
  } else {
    std::istringstream in(read_input(source, "score table"));
    tables = cone::io::parse_score_tables(in);
  }
  for (auto& t : tables) {
    if (t.metric_name == column) {
      out.scores = std::move(t.scores);
      return out;
    }
  }
  throw cone::ConfigError(source + " has no column '" + column + "'");
}

// --- subcommands ------------------------------------------------------------------

struct ExtractArgs {
  std::string input, topics, mode = "passage", qrels, out;
  bool strict_span = false;
  int min_grade = 2;
};

int run_extract(const Globals& g, const ExtractArgs& a) {
  const auto turns = load_turns(a.topics);
  const auto queries = resolved_utterances(turns);
  int status = 0;
  cone::NuggetCollection nuggets;
  if (a.mode == "passage") {
    const auto passages = load_passages(a.input);
    const auto qrels = cone::io::parse_qrels(read_input(a.qrels, "qrels file (--qrels)"));
    auto gw = make_gateway(g, true, false, "extract");
    auto result = cone::nuggetizer::extract_for_pool(*gw, qrels, passages, queries, a.min_grade, a.strict_span);
    for (const auto& f : result.failures) {
      std::cerr << "warning: extraction failed for (" << f.turn_id << ", " << f.passage_id << "): " << f.message
                << "\n";
      status = kExitIncomplete;
    }
    for (const auto& l : result.non_span_lines) {
      std::cerr << "note: " << cone::nuggetizer::to_string(l.status) << ": " << l.raw_line << "\n";
    }
    nuggets = std::move(result.nuggets);
  } else if (a.mode == "response") {
    const auto run = cone::io::parse_generation_run(read_input(a.input, "generation run"));
    for (const auto& [turn, response] : run.responses) {
      if (!queries.count(turn)) throw cone::ConfigError("topics file has no turn '" + turn + "'");
    }
    auto gw = make_gateway(g, true, false, "extract");
    for (const auto& [turn, response] : run.responses) {
      cone::nuggetizer::ExtractOptions eo;
      eo.turn_id = turn;
      eo.source = cone::NuggetSource::response;
      eo.strict_span = a.strict_span;
      try {
        nuggets[turn] = cone::nuggetizer::extract(*gw, response.text, queries.at(turn), eo).nuggets;
      } catch (const cone::Error& e) {
        std::cerr << "error [" << e.module() << "] turn " << turn << ": " << e.what() << "\n";
        status = kExitIncomplete;
      }
    }
  } else {
    throw cone::ConfigError("--mode must be passage or response");
  }
  write_output(a.out, cone::io::serialize_nugget_file(nuggets));
  return status;
}

struct GenerationArgs {
  std::string run, topics, extracted, gold_responses, passages, participants, matching = "ntn";
  std::string parse_failures = "no";
  std::size_t top_k = 3;
  bool strict_span = false;
};

cone::report::GenerationInputs load_generation_inputs(const GenerationArgs& a,
                                                      std::vector<cone::report::GoldVariant> gold) {
  cone::report::GenerationInputs in;
  in.run = cone::io::parse_generation_run(read_input(a.run, "generation run (--run)"));
  in.gold = std::move(gold);
  if (!a.topics.empty()) in.turns = load_turns(a.topics);
  if (!a.extracted.empty()) {
    in.extracted = load_nuggets(a.extracted, "extracted nugget file", cone::NuggetSource::response, false);
  }
  if (!a.gold_responses.empty()) {
    in.gold_responses = cone::io::parse_gold_responses(read_input(a.gold_responses, "gold response file"));
  }
  if (!a.passages.empty()) in.passages = load_passages(a.passages);
  in.participants = load_participants(a.participants, true);
  return in;
}

cone::report::GenerationOptions generation_options(const GenerationArgs& a) {
  cone::report::GenerationOptions o;
  o.mode = cone::matcher::match_mode_from_string(a.matching);
  o.strict_span = a.strict_span;
  o.groundedness_top_k = a.top_k;
  if (a.parse_failures == "abort") {
    o.parse_policy = cone::matcher::ParseFailurePolicy::abort;
  } else if (a.parse_failures != "no") {
    throw cone::ConfigError("--parse-failures must be no or abort");
  }
  return o;
}

cone::report::GenerationReport run_generation(const Globals& g, const GenerationArgs& a,
                                              const cone::report::GenerationInputs& in) {
  const auto opts = generation_options(a);
  const bool ntn = opts.mode == cone::matcher::MatchMode::ntn;
  if (ntn && !in.extracted && in.turns.empty()) {
    throw cone::ConfigError("ntn matching extracts response nuggets and needs --topics (or --extracted)");
  }
  const bool need_llm = (ntn && !in.extracted) || opts.mode == cone::matcher::MatchMode::ntr;
  const bool need_nli = ntn || opts.mode == cone::matcher::MatchMode::ntr_nli || in.passages.has_value();
  auto gw = make_gateway(g, need_llm, need_nli, cone::matcher::to_string(opts.mode) + " evaluation");
  return cone::report::evaluate_generation(*gw, in, opts);
}

void report_status(const cone::report::GenerationReport& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& e : r.errors) {
    std::cerr << "error [" << e.module << "] turn " << e.turn_id << ": " << e.message << " (hint: " << e.hint << ")\n";
  }
  if (!r.complete()) std::cerr << "report incomplete: " << r.errors.size() << " error(s)\n";
}

struct EvalGenerationArgs {
  GenerationArgs common;
  std::string gold, gold_source = "human", out, tsv;
};

int run_eval_generation(const Globals& g, const EvalGenerationArgs& a) {
  const auto& variants = cone::report::kGoldVariants;
  if (std::find(variants.begin(), variants.end(), a.gold_source) == variants.end()) {
    throw cone::ConfigError("--gold-source must be one of human, human-dedup, llm, llm-dedup");
  }
  const bool llm = a.gold_source.rfind("llm", 0) == 0;
  const bool dedup = a.gold_source.find("dedup") != std::string::npos;
  std::vector<cone::report::GoldVariant> gold;
  gold.push_back({a.gold_source, load_nuggets(a.gold, "gold nugget file (--gold-nuggets)",
                                              llm ? cone::NuggetSource::llm : cone::NuggetSource::human, dedup)});
  const auto in = load_generation_inputs(a.common, std::move(gold));
  const auto report = run_generation(g, a.common, in);
  write_output(a.out, cone::report::to_json(report).dump(2) + "\n");
  if (!a.tsv.empty()) write_output(a.tsv, cone::report::per_turn_tsv(report));
  report_status(report);
  return report.complete() ? 0 : kExitIncomplete;
}

struct ReportArgs {
  GenerationArgs common;
  std::map<std::string, std::string> gold;  // variant -> path
  std::string out_dir;
};

int run_report(const Globals& g, const ReportArgs& a) {
  require(a.out_dir, "--out-dir");
  std::vector<cone::report::GoldVariant> gold;
  for (const auto& variant : cone::report::kGoldVariants) {
    auto it = a.gold.find(variant);
    if (it == a.gold.end() || it->second.empty()) continue;
    const bool llm = variant.rfind("llm", 0) == 0;
    gold.push_back({variant, load_nuggets(it->second, variant + " gold nugget file",
                                          llm ? cone::NuggetSource::llm : cone::NuggetSource::human,
                                          variant.find("dedup") != std::string::npos)});
  }
  if (gold.empty()) throw cone::ConfigError("report needs at least one gold nugget file (--gold-human, ...)");
  const auto in = load_generation_inputs(a.common, std::move(gold));
  const auto report = run_generation(g, a.common, in);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  cone::io::write_file(dir / "report.json", cone::report::to_json(report).dump(2) + "\n");
  cone::io::write_file(dir / "aggregate.tsv", cone::report::aggregate_tsv(report));
  cone::io::write_file(dir / "per_turn.tsv", cone::report::per_turn_tsv(report));
  cone::io::write_file(dir / "leaderboard.tsv", cone::report::leaderboard_tsv(report.leaderboard));
  cone::io::write_file(dir / "nugget_labels.json", cone::report::nugget_labels_json(report).dump(2) + "\n");
  report_status(report);
  return report.complete() ? 0 : kExitIncomplete;
}

struct MatchArgs {
  GenerationArgs common;
  std::string gold, out;
};

int run_match(const Globals& g, const MatchArgs& a) {
  std::vector<cone::report::GoldVariant> gold;
  gold.push_back({"gold", load_nuggets(a.gold, "gold nugget file (--gold)", cone::NuggetSource::human, false)});
  auto common = a.common;
  common.participants = "none";
  const auto in = load_generation_inputs(common, std::move(gold));
  auto report = run_generation(g, common, in);
  json doc;
  doc["run_tag"] = report.run_tag;
  doc["matching"] = cone::matcher::to_string(report.mode);
  doc["complete"] = report.complete();
  doc["turns"] = cone::report::nugget_labels_json(report)["gold"];
  write_output(a.out, doc.dump(2) + "\n");
  report_status(report);
  return report.complete() ? 0 : kExitIncomplete;
}

struct DedupArgs {
  std::string in, out;
};

int run_dedup(const Globals& g, const DedupArgs& a) {
  const auto nuggets = load_nuggets(a.in, "nugget file (--in)", cone::NuggetSource::human, false);
  auto gw = make_gateway(g, false, true, "dedup");
  std::map<cone::TurnId, std::string> errors;
  const auto out = cone::dedup::deduplicate_all(*gw, nuggets, &errors);
  std::size_t before = 0;
  std::size_t after = 0;
  for (const auto& [t, s] : nuggets) before += s.size();
  for (const auto& [t, s] : out) after += s.size();
  for (const auto& [turn, message] : errors) {
    std::cerr << "warning: turn " << turn << " left undeduplicated: " << message << "\n";
  }
  std::cerr << "dedup: " << before << " -> " << after << " nuggets\n";
  write_output(a.out, cone::io::serialize_nugget_file(out));
  return errors.empty() ? 0 : kExitIncomplete;
}

struct RetrievalArgs {
  std::string run, qrels, k = "5,20", gain = "linear", participants, out, tsv;
  std::size_t depth = 1000;
  int rel_threshold = 1;
};

int run_eval_retrieval(const RetrievalArgs& a) {
  cone::report::RetrievalOptions o;
  o.cutoffs.clear();
  for (const auto& part : cone::text::split_lines(a.k)) {
    std::stringstream ss(part);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = cone::text::trim(item);
      if (item.empty()) continue;
      std::size_t used = 0;
      long v = 0;
      try {
        v = std::stol(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || v < 1) throw cone::ConfigError("--k takes positive integers, got '" + item + "'");
      o.cutoffs.push_back(static_cast<std::size_t>(v));
    }
  }
  o.depth = a.depth;
  o.rel_threshold = a.rel_threshold;
  if (a.gain == "exponential") {
    o.gain = cone::metrics::Gain::exponential;
  } else if (a.gain != "linear") {
    throw cone::ConfigError("--gain must be linear or exponential");
  }
  if (a.rel_threshold < 1 || a.rel_threshold > 4) throw cone::ConfigError("--rel-threshold must be in 1..4");
  std::istringstream run_in(read_input(a.run, "run file (--run)"));
  const auto run = cone::io::parse_trec_run(run_in);
  const auto qrels = cone::io::parse_qrels(read_input(a.qrels, "qrels file (--qrels)"));
  const auto report = cone::report::evaluate_retrieval(run, qrels, o, load_participants(a.participants, false));
  write_output(a.out, cone::report::to_json(report).dump(2) + "\n");
  if (!a.tsv.empty()) write_output(a.tsv, cone::report::per_turn_tsv(report));
  for (const auto& [name, m] : report.metrics) {
    if (!m.excluded.empty()) {
      std::cerr << "warning: " << name << ": " << m.excluded.size() << " turn(s) without relevant passages excluded\n";
    }
  }
  return 0;
}

struct CorrelateArgs {
  std::string metric_a;
  std::vector<std::string> metric_b;
  std::string tau = "b", out;
};

int run_correlate(const CorrelateArgs& a) {
  require(a.metric_a, "--metric-a");
  if (a.metric_b.empty()) throw cone::ConfigError("missing required option --metric-b");
  if (a.tau != "a" && a.tau != "b") throw cone::ConfigError("--tau must be a or b");
  const auto variant = a.tau == "a" ? cone::analysis::TauVariant::a : cone::analysis::TauVariant::b;
  const auto base = load_metric(a.metric_a);
  std::ostringstream out;
  out << "metric_a\tmetric_b\truns\ttau_" << a.tau << "\trho\n";
  for (const auto& spec : a.metric_b) {
    const auto other = load_metric(spec);
    std::map<cone::RunTag, double> xa;
    std::map<cone::RunTag, double> xb;
    for (const auto& [tag, s] : base.scores) {
      if (auto it = other.scores.find(tag); it != other.scores.end()) {
        xa[tag] = s;
        xb[tag] = it->second;
      }
    }
    const auto dropped = base.scores.size() + other.scores.size() - 2 * xa.size();
    if (dropped > 0) std::cerr << "note: " << dropped << " run(s) not shared by " << a.metric_a << " and " << spec << "\n";
    const auto ra = cone::analysis::SystemRanking::from_scores(base.metric_name, xa);
    const auto rb = cone::analysis::SystemRanking::from_scores(other.metric_name, xb);
    out << a.metric_a << '\t' << spec << '\t' << xa.size() << '\t'
        << cone::report::format_number(cone::analysis::kendall_tau(ra, rb, variant)) << '\t'
        << cone::report::format_number(cone::analysis::spearman_rho(ra, rb)) << '\n';
  }
  write_output(a.out, out.str());
  return 0;
}

struct PoolArgs {
  std::string runs, out, filter = "llm", topics, passages;
  std::size_t k5 = 5, kmax = 30;
  int min_grade = 1;
};

struct GradeArgs {
  std::string pool, out, topics, passages;
};

int run_pool(const Globals& g, const PoolArgs& a) {
  require(a.runs, "--runs");
  if (!fs::is_directory(a.runs)) throw cone::ConfigError("run directory not found: " + a.runs);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.runs)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<cone::RetrievalRun> runs;
  for (const auto& f : files) {
    std::istringstream in(cone::io::read_file(f));
    runs.push_back(cone::io::parse_trec_run(in));
  }
  if (runs.empty()) throw cone::ConfigError("no run files in " + a.runs);

  cone::pooling::PoolOptions opts{a.k5, a.kmax, g.concurrency};
  std::unique_ptr<cone::gateway::Gateway> gw;
  cone::PassageLookup passages;
  cone::pooling::Filter filter;
  if (a.filter == "accept-all") {
    filter = cone::pooling::accept_all();
  } else if (a.filter == "reject-all") {
    filter = cone::pooling::reject_all();
  } else if (a.filter == "llm") {
    const auto turns = load_turns(a.topics);
    passages = load_passages(a.passages);
    gw = make_gateway(g, true, false, "the pool relevance filter");
    filter = cone::pooling::judge_filter(cone::pooling::LlmRelevanceJudge(*gw, resolved_utterances(turns), passages),
                                         a.min_grade);
  } else {
    throw cone::ConfigError("--filter must be llm, accept-all or reject-all");
  }
  const auto build = cone::pooling::build_pool(runs, filter, opts);
  for (const auto& w : build.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "pool: " << build.pool.size() << " passages over " << build.pool.turns.size() << " turns ("
            << build.filter_calls << " filter calls)\n";
  write_output(a.out, cone::pooling::serialize_pool(build.pool));
  return 0;
}

int run_pool_grade(const Globals& g, const GradeArgs& a) {
  const auto pool = cone::pooling::parse_pool(read_input(a.pool, "pool file (--pool)"));
  const auto turns = load_turns(a.topics);
  const auto passages = load_passages(a.passages);
  auto gw = make_gateway(g, true, false, "pool grading");
  cone::pooling::LlmRelevanceJudge judge(*gw, resolved_utterances(turns), passages);
  const auto graded = cone::pooling::grade_pool(pool, judge, g.concurrency);
  for (const auto& w : graded.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "grades 0-4:";
  for (auto n : graded.distribution) std::cerr << ' ' << n;
  std::cerr << "\n";
  std::ostringstream out;
  cone::io::write_qrels(out, graded.qrels);
  write_output(a.out, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cone: nugget-based evaluation for retrieval-augmented generation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--cache", g.cache, "JSON-lines call cache");
  app.add_option("--concurrency", g.concurrency, "maximum in-flight backend calls")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config, "flat key = value file with defaults for any long option");
  app.add_flag("--offline", g.offline, "serve only from the cache; a miss is an error");
  app.add_option("--llm", g.llm, "LLM backend: http(s)://host[:port], mock:heuristic, mock:canned=FILE")
      ->envname("CONE_LLM_ENDPOINT");
  app.add_option("--llm-model", g.llm_model, "model id sent to the LLM endpoint")->envname("CONE_LLM_MODEL");
  app.add_option("--nli", g.nli, "entailment backend: http(s)://host[:port], mock:exact, mock:substring")
      ->envname("CONE_NLI_ENDPOINT");
  app.add_option("--nli-model", g.nli_model, "model id recorded for the entailment backend");
  app.add_option("--retries", g.retries, "attempts per backend call")->check(CLI::Range(1, 10));
  app.add_option("--backoff-ms", g.backoff_ms, "initial retry backoff in milliseconds")->check(CLI::NonNegativeNumber);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "extract nuggets from judged passages or from responses");
  extract->add_option("--input", ex.input, "passage file (passage mode) or generation run (response mode)");
  extract->add_option("--topics", ex.topics, "topics JSON with resolved utterances");
  extract->add_option("--mode", ex.mode, "passage or response")->check(CLI::IsMember({"passage", "response"}));
  extract->add_option("--qrels", ex.qrels, "qrels selecting the relevant passages (passage mode)");
  extract->add_option("--min-grade", ex.min_grade, "lowest grade counted as relevant")->check(CLI::Range(0, 4));
  extract->add_flag("--strict-span", ex.strict_span, "fail on completion lines that are not spans");
  extract->add_option("--out", ex.out, "output nugget JSON (default stdout)");

  auto add_generation = [](CLI::App* sub, GenerationArgs& c) {
    sub->add_option("--run", c.run, "generation run JSON");
    sub->add_option("--topics", c.topics, "topics JSON (resolved utterances, personal flags)");
    sub->add_option("--extracted", c.extracted, "precomputed response nuggets for ntn matching");
    sub->add_option("--matching", c.matching, "ntn, ntr or ntr-nli")->check(CLI::IsMember({"ntn", "ntr", "ntr-nli"}));
    sub->add_option("--gold-responses", c.gold_responses, "reference responses for ROUGE");
    sub->add_option("--passages", c.passages, "passage texts; enables groundedness");
    sub->add_option("--top-k", c.top_k, "provenance passages used for groundedness")->check(CLI::PositiveNumber);
    sub->add_option("--participants", c.participants, "reference score TSV for the leaderboard, or 'none'");
    sub->add_option("--parse-failures", c.parse_failures, "ntr replies that are neither yes nor no: no or abort");
    sub->add_flag("--strict-span", c.strict_span, "fail on extracted lines that are not spans");
  };

  MatchArgs ma;
  auto* match = app.add_subcommand("match", "label each nugget of a run as matched or not");
  add_generation(match, ma.common);
  match->add_option("--mode", ma.common.matching, "alias of --matching")
      ->check(CLI::IsMember({"ntn", "ntr", "ntr-nli"}));
  match->add_option("--gold", ma.gold, "gold nugget JSON");
  match->add_option("--out", ma.out, "output matches JSON (default stdout)");

  DedupArgs dd;
  auto* dedup = app.add_subcommand("dedup", "remove nuggets entailed by another nugget of the same turn");
  dedup->add_option("--in", dd.in, "nugget JSON");
  dedup->add_option("--out", dd.out, "output nugget JSON (default stdout)");

  EvalGenerationArgs eg;
  auto* eval_gen = app.add_subcommand("eval-generation", "score a generation run against one gold nugget set");
  add_generation(eval_gen, eg.common);
  eval_gen->add_option("--gold-nuggets", eg.gold, "gold nugget JSON");
  eval_gen->add_option("--gold-source", eg.gold_source, "human, human-dedup, llm or llm-dedup")
      ->check(CLI::IsMember(cone::report::kGoldVariants));
  eval_gen->add_option("--out", eg.out, "report JSON (default stdout)");
  eval_gen->add_option("--tsv", eg.tsv, "per-turn TSV");

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "write every report artifact for a generation run");
  add_generation(report, rp.common);
  for (const auto& variant : cone::report::kGoldVariants) {
    report->add_option("--gold-" + variant, rp.gold[variant], variant + " gold nugget JSON");
  }
  report->add_option("--out-dir", rp.out_dir, "output directory");

  RetrievalArgs er;
  auto* eval_ret = app.add_subcommand("eval-retrieval", "score a TREC run against qrels");
  eval_ret->add_option("--run", er.run, "TREC run file");
  eval_ret->add_option("--qrels", er.qrels, "qrels file");
  eval_ret->add_option("--k", er.k, "comma-separated cutoffs");
  eval_ret->add_option("--depth", er.depth, "evaluation depth for AP and deep recall")->check(CLI::PositiveNumber);
  eval_ret->add_option("--rel-threshold", er.rel_threshold, "lowest relevant grade");
  eval_ret->add_option("--gain", er.gain, "nDCG gain: linear or exponential");
  eval_ret->add_option("--participants", er.participants, "reference score TSV for the leaderboard, or 'none'");
  eval_ret->add_option("--out", er.out, "report JSON (default stdout)");
  eval_ret->add_option("--tsv", er.tsv, "per-turn TSV");

  CorrelateArgs co;
  auto* correlate = app.add_subcommand("correlate", "rank correlation between system rankings");
  correlate->add_option("--metric-a", co.metric_a, "SOURCE:COLUMN");
  correlate->add_option("--metric-b", co.metric_b, "SOURCE:COLUMN, repeatable");
  correlate->add_option("--tau", co.tau, "Kendall variant: a or b");
  correlate->add_option("--out", co.out, "output TSV (default stdout)");

  PoolArgs po;
  auto* pool = app.add_subcommand("pool", "build an assessment pool from retrieval runs");
  pool->require_subcommand(0, 1);
  pool->add_option("--runs", po.runs, "directory of TREC run files");
  pool->add_option("--k5", po.k5, "depth pooled unconditionally");
  pool->add_option("--kmax", po.kmax, "deepest position considered");
  pool->add_option("--filter", po.filter, "llm, accept-all or reject-all");
  pool->add_option("--min-grade", po.min_grade, "lowest judged grade accepted by the llm filter");
  pool->add_option("--topics", po.topics, "topics JSON (llm filter)");
  pool->add_option("--passages", po.passages, "passage texts (llm filter)");
  pool->add_option("--out", po.out, "pool JSON (default stdout)");

  GradeArgs gr;
  auto* grade = pool->add_subcommand("grade", "grade a pool with the LLM relevance judge");
  grade->add_option("--pool", gr.pool, "pool JSON");
  grade->add_option("--topics", gr.topics, "topics JSON");
  grade->add_option("--passages", gr.passages, "passage texts");
  grade->add_option("--out", gr.out, "qrels output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!g.config.empty()) apply_config(app, g.config);
    if (extract->parsed()) return run_extract(g, ex);
    if (match->parsed()) return run_match(g, ma);
    if (dedup->parsed()) return run_dedup(g, dd);
    if (eval_gen->parsed()) return run_eval_generation(g, eg);
    if (report->parsed()) return run_report(g, rp);
    if (eval_ret->parsed()) return run_eval_retrieval(er);
    if (correlate->parsed()) return run_correlate(co);
    if (grade->parsed()) return run_pool_grade(g, gr);
    if (pool->parsed()) return run_pool(g, po);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const cone::Error& e) {
    std::cerr << "error [" << e.module() << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
