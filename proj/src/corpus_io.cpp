#include "cone/corpus_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cone/error.hpp"
#include "cone/text.hpp"

namespace cone {

std::size_t Response::length_words() const { return text::word_count(text); }

std::optional<int> Qrels::grade(const TurnId& turn, const PassageId& passage) const {
  auto t = judgments.find(turn);
  if (t == judgments.end()) return std::nullopt;
  auto p = t->second.find(passage);
  if (p == t->second.end()) return std::nullopt;
  return p->second;
}

std::size_t Qrels::size() const {
  std::size_t n = 0;
  for (const auto& [turn, docs] : judgments) n += docs.size();
  return n;
}

std::string to_string(NuggetSource s) {
  switch (s) {
    case NuggetSource::human: return "human";
    case NuggetSource::llm: return "llm";
    case NuggetSource::response: return "response";
  }
  return "human";
}

NuggetSource nugget_source_from_string(const std::string& s) {
  if (s == "human") return NuggetSource::human;
  if (s == "llm") return NuggetSource::llm;
  if (s == "response") return NuggetSource::response;
  throw ValidationError("unknown nugget source '" + s + "'");
}

std::string to_string(RunCategory c) {
  switch (c) {
    case RunCategory::automatic: return "automatic";
    case RunCategory::manual: return "manual";
    case RunCategory::generation_only: return "generation_only";
  }
  return "automatic";
}

RunCategory run_category_from_string(const std::string& s) {
  if (s == "automatic") return RunCategory::automatic;
  if (s == "manual") return RunCategory::manual;
  if (s == "generation_only" || s == "generation-only") return RunCategory::generation_only;
  throw ValidationError("unknown run category '" + s + "'");
}

}  // namespace cone

namespace cone::io {

using nlohmann::json;

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

std::string require_string(const json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError(context + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& context) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ValidationError(context + ": '" + key + "' must be an array");
  for (const auto& v : *it) {
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_number_integer()) {
      out.push_back(std::to_string(v.get<long long>()));
    } else {
      throw ValidationError(context + ": '" + key + "' entries must be strings");
    }
  }
  return out;
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ValidationError("identifier must be a string or integer");
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("corpus-io", "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("corpus-io", "cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void sort_ranking(std::vector<RankedPassage>& ranking) {
  std::sort(ranking.begin(), ranking.end(), [](const RankedPassage& a, const RankedPassage& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.passage_id < b.passage_id;
  });
}

RetrievalRun parse_trec_run(std::istream& in, const RunParseOptions& options) {
  RetrievalRun run;
  run.category = options.category;
  std::map<TurnId, std::set<PassageId>> seen;
  std::string line;
  std::size_t line_no = 0;
  bool have_tag = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 6) {
      throw ParseError("expected 6 fields (qid Q0 docid rank score tag), got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    RankedPassage p;
    p.passage_id = std::string(fields[2]);
    if (!parse_number(fields[3], p.rank)) throw ParseError("bad rank '" + std::string(fields[3]) + "'", line_no);
    if (!parse_number(fields[4], p.score)) throw ParseError("bad score '" + std::string(fields[4]) + "'", line_no);
    const std::string qid(fields[0]);
    const std::string tag(fields[5]);
    if (!have_tag) {
      run.run_tag = tag;
      have_tag = true;
    } else if (tag != run.run_tag) {
      throw ParseError("inconsistent run tag '" + tag + "' (expected '" + run.run_tag + "')", line_no);
    }
    if (!seen[qid].insert(p.passage_id).second) {
      throw ParseError("duplicate passage '" + p.passage_id + "' for turn '" + qid + "'", line_no);
    }
    run.rankings[qid].push_back(std::move(p));
  }
  if (options.strict && run.rankings.empty()) throw ParseError("empty run");
  for (auto& [turn, ranking] : run.rankings) sort_ranking(ranking);
  return run;
}

RetrievalRun parse_trec_run(std::string_view content, const RunParseOptions& options) {
  std::istringstream in{std::string(content)};
  return parse_trec_run(in, options);
}

void write_trec_run(std::ostream& out, const RetrievalRun& run) {
  for (const auto& [turn, ranking] : run.rankings) {
    for (const auto& p : ranking) {
      out << turn << " Q0 " << p.passage_id << ' ' << p.rank << ' ' << format_double(p.score) << ' '
          << run.run_tag << '\n';
    }
  }
}

Qrels parse_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields (qid 0 docid grade), got " + std::to_string(fields.size()), line_no);
    }
    int grade = 0;
    if (!parse_number(fields[3], grade)) throw ParseError("bad grade '" + std::string(fields[3]) + "'", line_no);
    if (grade < 0 || grade > 4) {
      throw ParseError("grade " + std::to_string(grade) + " outside 0-4", line_no);
    }
    auto& docs = qrels.judgments[std::string(fields[0])];
    auto [it, inserted] = docs.emplace(std::string(fields[2]), grade);
    if (!inserted && it->second != grade) {
      throw ParseError("conflicting grades for (" + std::string(fields[0]) + ", " + std::string(fields[2]) + ")",
                       line_no);
    }
  }
  return qrels;
}

Qrels parse_qrels(std::string_view content) {
  std::istringstream in{std::string(content)};
  return parse_qrels(in);
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& [turn, docs] : qrels.judgments) {
    for (const auto& [doc, grade] : docs) out << turn << " 0 " << doc << ' ' << grade << '\n';
  }
}

GenerationRun parse_generation_run(std::string_view json_text) {
  const json doc = parse_json(json_text, "generation run");
  if (!doc.is_object()) throw ValidationError("generation run: top level must be an object");
  GenerationRun run;
  run.run_tag = require_string(doc, "run_tag", "generation run");
  auto turns = doc.find("turns");
  if (turns == doc.end() || !turns->is_array()) {
    throw ValidationError("generation run: missing 'turns' array");
  }
  std::size_t index = 0;
  for (const auto& entry : *turns) {
    const std::string where = "generation run entry " + std::to_string(index++);
    if (!entry.is_object() || !entry.contains("turn_id")) throw ValidationError(where + ": missing turn_id");
    const TurnId turn_id = id_string(entry["turn_id"]);
    if (run.responses.count(turn_id) != 0) throw ValidationError("generation run: duplicate turn_id '" + turn_id + "'");
    auto responses = entry.find("responses");
    if (responses == entry.end() || !responses->is_array()) {
      throw ValidationError("generation run: turn '" + turn_id + "' has no responses array");
    }
    std::vector<Response> parsed;
    for (const auto& r : *responses) {
      Response resp;
      resp.rank = r.value("rank", 1);
      resp.text = require_string(r, "text", "turn '" + turn_id + "'");
      resp.passage_provenance = string_list(r, "passage_provenance", "turn '" + turn_id + "'");
      parsed.push_back(std::move(resp));
    }
    auto primary = std::find_if(parsed.begin(), parsed.end(), [](const Response& r) { return r.rank == 1; });
    if (primary == parsed.end()) throw ValidationError("generation run: turn '" + turn_id + "' has no rank-1 response");
    if (std::count_if(parsed.begin(), parsed.end(), [](const Response& r) { return r.rank == 1; }) > 1) {
      throw ValidationError("generation run: turn '" + turn_id + "' has more than one rank-1 response");
    }
    if (text::trim(primary->text).empty()) {
      throw ValidationError("generation run: turn '" + turn_id + "' rank-1 response is empty");
    }
    run.responses.emplace(turn_id, *primary);
    std::vector<Response> rest;
    for (auto& r : parsed) {
      if (r.rank != 1) rest.push_back(std::move(r));
    }
    if (!rest.empty()) run.alternates.emplace(turn_id, std::move(rest));
  }
  return run;
}

std::string serialize_generation_run(const GenerationRun& run) {
  json turns = json::array();
  for (const auto& [turn_id, primary] : run.responses) {
    json responses = json::array();
    auto emit = [&](const Response& r) {
      responses.push_back({{"rank", r.rank}, {"text", r.text}, {"passage_provenance", r.passage_provenance}});
    };
    emit(primary);
    if (auto alt = run.alternates.find(turn_id); alt != run.alternates.end()) {
      for (const auto& r : alt->second) emit(r);
    }
    turns.push_back({{"turn_id", turn_id}, {"responses", std::move(responses)}});
  }
  json doc = {{"run_tag", run.run_tag}, {"turns", std::move(turns)}};
  return doc.dump(2) + "\n";
}

NuggetCollection parse_nugget_file(std::string_view json_text, const NuggetParseOptions& options) {
  const json doc = parse_json(json_text, "nugget file");
  if (!doc.is_object()) throw ValidationError("nugget file: top level must be an object keyed by turn_id");
  NuggetCollection out;
  for (const auto& [turn_id, entries] : doc.items()) {
    if (options.known_turns != nullptr && options.known_turns->count(turn_id) == 0) {
      throw ValidationError("nugget file: unknown turn_id '" + turn_id + "'");
    }
    if (!entries.is_array()) throw ValidationError("nugget file: turn '" + turn_id + "' must map to an array");
    NuggetSet set;
    set.turn_id = turn_id;
    set.deduplicated = options.deduplicated;
    std::set<std::string> ids;
    std::size_t index = 0;
    for (const auto& e : entries) {
      const std::string where = "nugget file: turn '" + turn_id + "' entry " + std::to_string(index);
      Nugget n;
      n.turn_id = turn_id;
      n.text = e.is_string() ? e.get<std::string>() : require_string(e, "text", where);
      if (text::trim(n.text).empty()) throw ValidationError(where + ": empty nugget text");
      n.source = options.source;
      if (e.is_object()) {
        n.nugget_id = e.contains("nugget_id") ? id_string(e["nugget_id"]) : "";
        if (auto p = e.find("source_passage_id"); p != e.end() && !p->is_null()) n.source_passage_id = id_string(*p);
        if (auto s = e.find("source"); s != e.end() && s->is_string()) {
          n.source = nugget_source_from_string(s->get<std::string>());
        }
        if (auto span = e.find("char_span"); span != e.end() && span->is_array() && span->size() == 2) {
          n.char_span = CharSpan{(*span)[0].get<std::size_t>(), (*span)[1].get<std::size_t>()};
        }
      }
      if (n.nugget_id.empty()) n.nugget_id = turn_id + ":" + std::to_string(index);
      if (!ids.insert(n.nugget_id).second) throw ValidationError(where + ": duplicate nugget_id '" + n.nugget_id + "'");
      set.nuggets.push_back(std::move(n));
      ++index;
    }
    out.emplace(turn_id, std::move(set));
  }
  return out;
}

std::string serialize_nugget_file(const NuggetCollection& nuggets) {
  json doc = json::object();
  for (const auto& [turn_id, set] : nuggets) {
    json arr = json::array();
    for (const auto& n : set.nuggets) {
      json e = {{"nugget_id", n.nugget_id}, {"text", n.text}, {"source", to_string(n.source)}};
      if (n.source_passage_id) e["source_passage_id"] = *n.source_passage_id;
      if (n.char_span) e["char_span"] = {n.char_span->start, n.char_span->end};
      arr.push_back(std::move(e));
    }
    doc[turn_id] = std::move(arr);
  }
  return doc.dump(2) + "\n";
}

namespace {

void read_labels(const json& labels, std::map<TurnId, int>& out, const std::string& where) {
  if (!labels.is_object()) throw ValidationError(where + ": relevance labels must be an object");
  for (const auto& [turn, v] : labels.items()) {
    const int label = v.get<int>();
    if (label != 0 && label != 1) throw ValidationError(where + ": label for '" + turn + "' must be 0 or 1");
    out[turn] = label;
  }
}

bool turn_is_personal(const Turn& turn, const std::vector<PtkbStatement>& ptkb) {
  // Assessor judgments win where the turn has any; organizer labels otherwise.
  bool any_assessor = false;
  bool assessor_relevant = false;
  bool organizer_relevant = false;
  for (const auto& s : ptkb) {
    if (auto it = s.assessor_labels.find(turn.turn_id); it != s.assessor_labels.end()) {
      any_assessor = true;
      assessor_relevant = assessor_relevant || it->second == 1;
    }
    if (auto it = s.organizer_labels.find(turn.turn_id); it != s.organizer_labels.end()) {
      organizer_relevant = organizer_relevant || it->second == 1;
    }
  }
  if (any_assessor) return assessor_relevant;
  return organizer_relevant || !turn.ptkb_provenance.empty();
}

}  // namespace

std::vector<Topic> parse_topics(std::string_view json_text) {
  const json doc = parse_json(json_text, "topics");
  if (!doc.is_array()) throw ValidationError("topics: top level must be an array");
  std::vector<Topic> topics;
  std::set<std::string> topic_ids;
  std::set<TurnId> turn_ids;
  for (const auto& t : doc) {
    Topic topic;
    if (!t.contains("topic_id")) throw ValidationError("topics: entry without topic_id");
    topic.topic_id = id_string(t["topic_id"]);
    if (topic.topic_id.empty()) throw ValidationError("topics: empty topic_id");
    if (!topic_ids.insert(topic.topic_id).second) {
      throw ValidationError("topics: duplicate topic_id '" + topic.topic_id + "'");
    }
    const std::string where = "topic '" + topic.topic_id + "'";
    topic.title = t.value("title", "");
    for (const auto& s : t.value("ptkb", json::array())) {
      PtkbStatement st;
      st.statement_id = id_string(s.at("statement_id"));
      st.text = require_string(s, "text", where);
      if (auto rel = s.find("relevance"); rel != s.end()) {
        if (auto o = rel->find("organizer"); o != rel->end()) read_labels(*o, st.organizer_labels, where);
        if (auto a = rel->find("assessor"); a != rel->end()) read_labels(*a, st.assessor_labels, where);
      }
      topic.ptkb.push_back(std::move(st));
    }
    for (const auto& u : t.value("turns", json::array())) {
      Turn turn;
      turn.turn_index = u.at("turn_index").get<int>();
      turn.turn_id = u.contains("turn_id") ? id_string(u["turn_id"])
                                           : topic.topic_id + "-" + std::to_string(turn.turn_index);
      turn.utterance = u.value("utterance", "");
      turn.resolved_utterance = u.value("resolved_utterance", "");
      turn.canonical_response = u.value("canonical_response", "");
      turn.response_provenance = string_list(u, "response_provenance", where);
      turn.ptkb_provenance = string_list(u, "ptkb_provenance", where);
      turn.assessed = u.value("assessed", false);
      if (turn.assessed && text::trim(turn.resolved_utterance).empty()) {
        throw ValidationError(where + ": assessed turn '" + turn.turn_id + "' has no resolved_utterance");
      }
      if (!turn_ids.insert(turn.turn_id).second) {
        throw ValidationError("topics: duplicate turn_id '" + turn.turn_id + "'");
      }
      topic.turns.push_back(std::move(turn));
    }
    std::sort(topic.turns.begin(), topic.turns.end(),
              [](const Turn& a, const Turn& b) { return a.turn_index < b.turn_index; });
    for (std::size_t i = 1; i < topic.turns.size(); ++i) {
      if (topic.turns[i].turn_index != topic.turns[i - 1].turn_index + 1) {
        throw ValidationError(where + ": turn indices have a gap or repeat at " +
                              std::to_string(topic.turns[i].turn_index));
      }
    }
    for (auto& turn : topic.turns) turn.personal = turn_is_personal(turn, topic.ptkb);
    topics.push_back(std::move(topic));
  }
  return topics;
}

std::string serialize_topics(const std::vector<Topic>& topics) {
  json doc = json::array();
  for (const auto& topic : topics) {
    json ptkb = json::array();
    for (const auto& s : topic.ptkb) {
      json rel = json::object();
      if (!s.organizer_labels.empty()) rel["organizer"] = s.organizer_labels;
      if (!s.assessor_labels.empty()) rel["assessor"] = s.assessor_labels;
      ptkb.push_back({{"statement_id", s.statement_id}, {"text", s.text}, {"relevance", rel}});
    }
    json turns = json::array();
    for (const auto& t : topic.turns) {
      turns.push_back({{"turn_id", t.turn_id},
                       {"turn_index", t.turn_index},
                       {"utterance", t.utterance},
                       {"resolved_utterance", t.resolved_utterance},
                       {"canonical_response", t.canonical_response},
                       {"response_provenance", t.response_provenance},
                       {"ptkb_provenance", t.ptkb_provenance},
                       {"assessed", t.assessed}});
    }
    doc.push_back({{"topic_id", topic.topic_id}, {"title", topic.title}, {"ptkb", ptkb}, {"turns", turns}});
  }
  return doc.dump(2) + "\n";
}

CollectionStats collection_stats(const std::vector<Topic>& topics) {
  CollectionStats stats;
  stats.topics = topics.size();
  for (const auto& topic : topics) {
    stats.turns += topic.turns.size();
    stats.ptkb_statements += topic.ptkb.size();
    const auto assessed = static_cast<std::size_t>(
        std::count_if(topic.turns.begin(), topic.turns.end(), [](const Turn& t) { return t.assessed; }));
    stats.assessed_turns += assessed;
    if (assessed > 0) ++stats.assessed_topics;
  }
  return stats;
}

std::map<TurnId, Turn> index_turns(const std::vector<Topic>& topics) {
  std::map<TurnId, Turn> out;
  for (const auto& topic : topics) {
    for (const auto& t : topic.turns) out.emplace(t.turn_id, t);
  }
  return out;
}

std::map<TurnId, GoldResponse> parse_gold_responses(std::string_view json_text) {
  const json doc = parse_json(json_text, "gold responses");
  if (!doc.is_array()) throw ValidationError("gold responses: top level must be an array");
  std::map<TurnId, GoldResponse> out;
  for (const auto& e : doc) {
    GoldResponse g;
    if (!e.contains("turn_id")) throw ValidationError("gold responses: entry without turn_id");
    g.turn_id = id_string(e["turn_id"]);
    g.text = require_string(e, "text", "gold response '" + g.turn_id + "'");
    if (text::trim(g.text).empty()) throw ValidationError("gold response '" + g.turn_id + "': empty text");
    g.supporting_passage_ids = string_list(e, "supporting_passage_ids", "gold response '" + g.turn_id + "'");
    if (!out.emplace(g.turn_id, g).second) throw ValidationError("gold responses: duplicate turn '" + g.turn_id + "'");
  }
  return out;
}

std::string serialize_gold_responses(const std::map<TurnId, GoldResponse>& gold) {
  json doc = json::array();
  for (const auto& [turn, g] : gold) {
    doc.push_back({{"turn_id", g.turn_id}, {"text", g.text}, {"supporting_passage_ids", g.supporting_passage_ids}});
  }
  return doc.dump(2) + "\n";
}

std::vector<ExternalScoreTable> parse_score_tables(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<ExternalScoreTable> tables;
  auto split_tabs = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto tab = s.find('\t', start);
      cells.push_back(text::trim(s.substr(start, tab == std::string::npos ? std::string::npos : tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    return cells;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line[0] == '#') continue;
    const auto cells = split_tabs(line);
    if (tables.empty()) {
      if (cells.size() < 2) throw ParseError("score table header needs run_tag and at least one metric", line_no);
      for (std::size_t i = 1; i < cells.size(); ++i) tables.push_back(ExternalScoreTable{cells[i], {}});
      continue;
    }
    if (cells.size() != tables.size() + 1) {
      throw ParseError("expected " + std::to_string(tables.size() + 1) + " tab-separated cells", line_no);
    }
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (cells[i].empty() || cells[i] == "-" || cells[i] == "NA") continue;
      double v = 0;
      if (!parse_number(std::string_view(cells[i]), v)) throw ParseError("bad score '" + cells[i] + "'", line_no);
      if (!tables[i - 1].scores.emplace(cells[0], v).second) {
        throw ParseError("duplicate run tag '" + cells[0] + "'", line_no);
      }
    }
  }
  if (tables.empty()) throw ParseError("empty score table");
  return tables;
}

ExternalScoreTable parse_score_table(std::istream& in) { return parse_score_tables(in).front(); }

void write_score_tables(std::ostream& out, const std::vector<ExternalScoreTable>& tables) {
  out << "run_tag";
  std::set<RunTag> tags;
  for (const auto& t : tables) {
    out << '\t' << t.metric_name;
    for (const auto& [tag, v] : t.scores) tags.insert(tag);
  }
  out << '\n';
  for (const auto& tag : tags) {
    out << tag;
    for (const auto& t : tables) {
      auto it = t.scores.find(tag);
      out << '\t' << (it == t.scores.end() ? std::string("NA") : format_double(it->second));
    }
    out << '\n';
  }
}

void check_score_table(const ExternalScoreTable& table, const std::set<RunTag>& known_runs) {
  for (const auto& [tag, v] : table.scores) {
    if (known_runs.count(tag) == 0) {
      throw ValidationError("score table '" + table.metric_name + "': unknown run tag '" + tag + "'");
    }
  }
}

PassageLookup parse_passages(std::istream& in) {
  PassageLookup out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (line.find_first_not_of(" \t") != std::string::npos && line[line.find_first_not_of(" \t")] == '{') {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("passage line: ") + e.what(), line_no);
      }
      if (!obj.contains("id")) throw ParseError("passage object without 'id'", line_no);
      const auto id = id_string(obj["id"]);
      const auto key = obj.contains("contents") ? "contents" : "text";
      if (!obj.contains(key) || !obj[key].is_string()) throw ParseError("passage without text", line_no);
      out[id] = obj[key].get<std::string>();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected 'id<TAB>text'", line_no);
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

PassageLookup parse_passages(std::string_view content) {
  std::istringstream in{std::string(content)};
  return parse_passages(in);
}

}  // namespace cone::io
