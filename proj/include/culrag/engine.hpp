#ifndef CULRAG_ENGINE_HPP
#define CULRAG_ENGINE_HPP

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "culrag/cascade.hpp"
#include "culrag/config.hpp"
#include "culrag/errors.hpp"
#include "culrag/evaluator.hpp"
#include "culrag/kb.hpp"
#include "culrag/mock_model.hpp"
#include "culrag/model_client.hpp"
#include "culrag/prompts.hpp"
#include "culrag/providers.hpp"
#include "culrag/question.hpp"
#include "culrag/routing.hpp"
#include "culrag/search.hpp"
#include "culrag/vector_store.hpp"

namespace culrag {

/// Wired generation/embedding/search backends for one run. The endpoint
/// scheme `mock:<dataset path>` swaps in the deterministic offline pair
/// (reference-oracle generator + feature-hashing embedder); anything else
/// is treated as a live serving endpoint.
struct Providers {
  std::shared_ptr<TextGenerator> generator;
  std::shared_ptr<TextEmbedder> embedder;
  std::unique_ptr<SearchProvider> search;  // null in cache-only mode
  std::optional<std::filesystem::path> cache_dir;
  std::string cache_only_key = "duckduckgo";
};

inline bool is_mock_endpoint(const std::string& endpoint) {
  return endpoint.rfind("mock:", 0) == 0;
}

inline Providers make_providers(const EngineConfig& config, bool allow_live_search) {
  Providers p;
  if (is_mock_endpoint(config.endpoint)) {
    const std::string dataset = config.endpoint.substr(5);
    if (dataset.empty()) throw ConfigError("mock endpoint needs a dataset path: mock:<file>");
    p.generator = std::make_shared<OracleGenerator>(load_questions(dataset, std::nullopt));
    p.embedder = std::make_shared<HashingEmbedder>(256);
  } else {
    auto client = std::make_shared<ModelClient>(config.endpoint);
    p.generator = client;
    p.embedder = client;
  }

  const std::string& s = config.search;
  if (s == "live") {
    if (!allow_live_search) {
      throw ConfigError(
          "live web search is not allowed in evaluation runs; use fixture:<dir> or cache-only");
    }
    p.search = std::make_unique<DuckDuckGoProvider>();
  } else if (s.rfind("fixture:", 0) == 0) {
    const std::string dir = s.substr(8);
    if (dir.empty()) throw ConfigError("fixture search needs a directory: fixture:<dir>");
    p.search = std::make_unique<FixtureSearchProvider>(dir);
  } else if (s == "cache-only") {
    p.search = nullptr;
  } else {
    throw ConfigError("unknown search mode \"" + s +
                      "\" (expected live, fixture:<dir>, or cache-only)");
  }
  if (!config.search_cache_dir.empty()) p.cache_dir = config.search_cache_dir;
  return p;
}

// KB building and indexing ---------------------------------------------

struct BuildSummary {
  std::size_t wiki_summary = 0;
  std::size_t wiki_body = 0;
  std::size_t curated = 0;
  std::filesystem::path entries_path;

  std::size_t total() const { return wiki_summary + wiki_body + curated; }
};

/// Builds kb/<COUNTRY>/entries.jsonl for the country of `locale` from a
/// keyword list, a directory of pre-fetched pages, and (optionally) a
/// curated facts file filtered to that country.
inline BuildSummary build_kb(const EngineConfig& config, const Locale& locale,
                             const std::filesystem::path& keywords_path,
                             const std::filesystem::path& pages_dir,
                             const std::optional<std::filesystem::path>& curated_path) {
  const std::vector<std::string> keywords = load_keywords(keywords_path);
  const std::vector<WikiPage> pages = load_wiki_pages(pages_dir);

  ExtractOptions options;
  options.chunking = config.chunking;
  std::vector<KBEntry> entries = extract_wiki_entries(pages, keywords, options, locale);

  if (curated_path) {
    for (auto& e : load_curated_facts(*curated_path)) {
      if (e.country == locale.region) entries.push_back(std::move(e));
    }
  }
  const KnowledgeBase validated(entries);  // rejects duplicate ids

  BuildSummary summary;
  for (const auto& e : entries) {
    switch (e.source) {
      case EntrySource::WIKI_SUMMARY: ++summary.wiki_summary; break;
      case EntrySource::WIKI_BODY: ++summary.wiki_body; break;
      case EntrySource::CURATED: ++summary.curated; break;
    }
  }
  summary.entries_path =
      std::filesystem::path(config.kb_root) / locale.region / "entries.jsonl";
  save_entries(entries, summary.entries_path);
  return summary;
}

struct IndexSummary {
  std::size_t items = 0;
  std::size_t dimension = 0;
  std::filesystem::path index_dir;
};

/// Embeds kb/<COUNTRY>/entries.jsonl and persists kb/<COUNTRY>/index.
inline IndexSummary index_country(const EngineConfig& config, const std::string& country,
                                  TextEmbedder& embedder) {
  const auto dir = std::filesystem::path(config.kb_root) / country;
  const auto entries = load_entries(dir / "entries.jsonl");
  const VectorIndex index = build_index(entries, embedder, country, config.embed_model);
  save_index(index, dir / "index");
  return IndexSummary{index.items.size(), index.dimension, dir / "index"};
}

// Per-country data as consumed during a run ----------------------------

struct CountryData {
  KnowledgeBase kb;
  VectorIndex index;
};

inline std::vector<std::string> routed_countries(const std::vector<Question>& questions) {
  std::set<std::string> seen;
  for (const auto& q : questions) seen.insert(q.locale.region);
  return {seen.begin(), seen.end()};
}

/// Loads entries + index for every routed country. A missing KB is fatal
/// when the local DB is enabled (all missing countries listed at once) and
/// skipped otherwise.
inline std::map<std::string, CountryData> load_country_data(
    const EngineConfig& config, const std::vector<Question>& questions) {
  std::map<std::string, CountryData> out;
  std::vector<std::string> missing;
  for (const auto& country : routed_countries(questions)) {
    const auto dir = std::filesystem::path(config.kb_root) / country;
    const bool present =
        std::filesystem::is_regular_file(dir / "entries.jsonl") && index_exists(dir / "index");
    if (!present) {
      if (config.use_local_db) missing.push_back(country);
      continue;
    }
    CountryData data;
    data.kb = KnowledgeBase(load_entries(dir / "entries.jsonl"));
    data.index = load_index(dir / "index");
    if (data.index.model_id != config.embed_model) {
      throw ConfigError("index for " + country + " was embedded with \"" +
                        data.index.model_id + "\" but the run is configured for \"" +
                        config.embed_model + "\"; rebuild the index or change embed_model");
    }
    out.emplace(country, std::move(data));
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (i) list += ", ";
      list += missing[i];
    }
    throw ConfigError(
        (missing.size() == 1 ? "no knowledge base for routed country "
                             : "no knowledge base for routed countries ") +
        list + " under " + config.kb_root +
        " (run build-kb and index first, or pass --no-local-db)");
  }
  return out;
}

// Answering ------------------------------------------------------------

inline AnswerRecord answer_question(const Question& question, const EngineConfig& config,
                                    const Providers& providers,
                                    const std::map<std::string, CountryData>& countries) {
  const RouteDecision decision = route(question.locale, config.routing);
  const CountryData* data = nullptr;
  if (auto it = countries.find(decision.kb_id); it != countries.end()) data = &it->second;

  if (config.mode() == Mode::RAG_BASE) {
    RagBaseContext ctx;
    ctx.index = (config.use_local_db && data) ? &data->index : nullptr;
    ctx.kb = data ? &data->kb : nullptr;
    ctx.embedder = providers.embedder.get();
    ctx.generator = providers.generator.get();
    ctx.route = decision;
    ctx.embed_model = config.embed_model;
    ctx.template_id = config.template_id;
    ctx.k = config.k;
    ctx.similarity_floor = config.similarity_floor;
    ctx.gen = config.gen;
    return answer_rag_base(question, ctx);
  }

  RagWebContext ctx;
  ctx.generator = providers.generator.get();
  ctx.embedder = providers.embedder.get();
  ctx.search_provider = providers.search.get();
  ctx.cache_dir = providers.cache_dir;
  ctx.cache_only_key = providers.cache_only_key;
  ctx.index = data ? &data->index : nullptr;
  ctx.kb = data ? &data->kb : nullptr;
  ctx.route = decision;
  ctx.embed_model = config.embed_model;
  ctx.template_id = config.template_id;
  ctx.k = config.k;
  ctx.similarity_floor = config.similarity_floor;
  ctx.web_top_n = config.web_top_n;
  ctx.use_local_db = config.use_local_db;
  ctx.patterns = config.patterns;
  ctx.gen = config.gen;
  return answer_rag_web(question, ctx);
}

// Run outputs ----------------------------------------------------------

/// Stable prediction line: no timestamps or latencies, so two identical
/// runs produce byte-identical files.
inline nlohmann::ordered_json prediction_to_json(const AnswerRecord& record) {
  nlohmann::ordered_json j;
  j["id"] = record.question_id;
  j["answer"] = record.final.kind == AnswerKind::ABSTAIN ? std::string(kNoAnswerToken)
                                                         : record.final.text;
  j["source_stage"] = stage_name(record.source_stage);
  auto evidence = nlohmann::ordered_json::array();
  for (const auto& e : record.evidence_used) evidence.push_back(e.text);
  j["evidence"] = evidence;
  return j;
}

/// Full diagnostic record, including per-stage timings and errors.
inline nlohmann::ordered_json record_to_json(const AnswerRecord& record,
                                             const std::string& question_error = "") {
  nlohmann::ordered_json j = prediction_to_json(record);
  j["route"] = {{"model", record.route.model_id},
                {"kb", record.route.kb_id},
                {"locale", record.route.prompt_language.str()}};
  if (!record.retrieval_log.empty()) j["retrieval_log"] = record.retrieval_log;
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : record.stages) {
    nlohmann::ordered_json sj;
    sj["stage"] = stage_name(s.stage);
    sj["succeeded"] = s.succeeded;
    sj["evidence_count"] = s.evidence.size();
    sj["latency_ms"] = s.latency_ms;
    if (!s.error.empty()) sj["error"] = s.error;
    stages.push_back(std::move(sj));
  }
  j["stages"] = stages;
  if (!question_error.empty()) j["error"] = question_error;
  return j;
}

struct RunOutcome {
  std::vector<AnswerRecord> records;  // dataset order
  std::vector<std::string> errors;    // parallel to records; "" when clean
  std::size_t error_count = 0;
  std::optional<Report> report;
  std::filesystem::path out_dir;
};

namespace detail {

inline AnswerRecord abstain_record(const Question& question, const RouteDecision& decision) {
  AnswerRecord record;
  record.question_id = question.id;
  record.final = ParsedAnswer{AnswerKind::ABSTAIN, "", std::string(kNoAnswerToken)};
  record.source_stage = Stage::NONE;
  record.route = decision;
  return record;
}

inline bool is_labeled(const Question& q) {
  return q.track == Track::MCQ ? q.gold_label.has_value() : !q.references.empty();
}

}  // namespace detail

/// Scores answered questions against their labels. Unlabeled questions are
/// excluded with a warning; a question with no prediction scores incorrect
/// with a warning.
inline Report evaluate_predictions(const std::vector<Question>& questions,
                                   const std::map<std::string, std::string>& answers_by_id,
                                   AggregationScheme scheme) {
  std::vector<ItemResult> items;
  std::vector<std::string> warnings;
  std::size_t unlabeled = 0;
  std::size_t missing = 0;
  for (const auto& q : questions) {
    if (!detail::is_labeled(q)) {
      ++unlabeled;
      continue;
    }
    ItemResult item;
    item.id = q.id;
    item.locale = q.locale;
    auto it = answers_by_id.find(q.id);
    if (it == answers_by_id.end()) {
      ++missing;
      item.correct = false;
    } else {
      item.correct = score_item(q, it->second);
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) {
    throw ConfigError("dataset carries no reference labels; nothing to score");
  }
  if (unlabeled) {
    warnings.push_back(std::to_string(unlabeled) + " unlabeled question(s) excluded from scoring");
  }
  if (missing) {
    warnings.push_back(std::to_string(missing) + " question(s) had no prediction; scored incorrect");
  }
  Report report = aggregate(items, scheme);
  report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
  return report;
}

struct PredictionRecord {
  std::string id;
  std::string answer;
  std::string source_stage;
  std::vector<std::string> evidence;
};

inline std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open predictions file " + path.string());
  std::vector<PredictionRecord> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": invalid JSON: " + e.what());
    }
    PredictionRecord p;
    try {
      p.id = rec.at("id").get<std::string>();
      p.answer = rec.at("answer").get<std::string>();
      p.source_stage = rec.value("source_stage", "");
      if (rec.contains("evidence")) {
        for (const auto& e : rec.at("evidence")) p.evidence.push_back(e.get<std::string>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!ids.insert(p.id).second) throw ParseError(where + ": duplicate prediction for id " + p.id);
    out.push_back(std::move(p));
  }
  return out;
}

/// Answers a full track: loads the dataset, fails fast on missing KBs,
/// answers every question (the worker pool preserves dataset order in the
/// outputs), writes predictions/records plus the resolved config, and
/// scores when the dataset carries labels. Per-question failures are
/// recorded and counted, never fatal to the run.
inline RunOutcome run_track(const std::filesystem::path& dataset, Track track,
                            const EngineConfig& config, const std::filesystem::path& out_dir,
                            AggregationScheme scheme = AggregationScheme::SIMPLE_AVG) {
  const std::vector<Question> questions = load_questions(dataset, track);
  const Providers providers = make_providers(config, /*allow_live_search=*/false);
  const std::map<std::string, CountryData> countries = load_country_data(config, questions);

  RunOutcome outcome;
  outcome.out_dir = out_dir;
  outcome.records.resize(questions.size());
  outcome.errors.resize(questions.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= questions.size()) return;
      try {
        outcome.records[i] = answer_question(questions[i], config, providers, countries);
      } catch (const std::exception& ex) {
        outcome.records[i] =
            detail::abstain_record(questions[i], route(questions[i].locale, config.routing));
        outcome.errors[i] = ex.what();
      }
    }
  };
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(config.jobs, questions.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : outcome.errors) {
    if (!e.empty()) ++outcome.error_count;
  }

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream pred(out_dir / "predictions.jsonl");
    if (!pred) throw Error("cannot write " + (out_dir / "predictions.jsonl").string());
    std::ofstream recs(out_dir / "records.jsonl");
    if (!recs) throw Error("cannot write " + (out_dir / "records.jsonl").string());
    for (std::size_t i = 0; i < outcome.records.size(); ++i) {
      pred << prediction_to_json(outcome.records[i]).dump() << "\n";
      recs << record_to_json(outcome.records[i], outcome.errors[i]).dump() << "\n";
    }
  }
  save_config(config, out_dir / "config.json");

  const bool any_labels = std::any_of(questions.begin(), questions.end(), detail::is_labeled);
  if (any_labels) {
    std::map<std::string, std::string> answers;
    for (const auto& r : outcome.records) {
      answers[r.question_id] =
          r.final.kind == AnswerKind::ABSTAIN ? std::string(kNoAnswerToken) : r.final.text;
    }
    Report report = evaluate_predictions(questions, answers, scheme);
    std::ofstream rj(out_dir / "report.json");
    rj << report_to_json(report).dump(2) << "\n";
    std::ofstream rt(out_dir / "report.txt");
    rt << format_report_table(report);
    outcome.report = std::move(report);
  }
  return outcome;
}

/// Standalone scoring of an existing predictions file against a dataset.
inline Report evaluate_run(const std::filesystem::path& dataset, Track track,
                           const std::filesystem::path& predictions_path,
                           AggregationScheme scheme) {
  const std::vector<Question> questions = load_questions(dataset, track);
  const std::vector<PredictionRecord> predictions = load_predictions(predictions_path);
  std::map<std::string, std::string> answers;
  std::set<std::string> known;
  for (const auto& q : questions) known.insert(q.id);
  std::size_t extraneous = 0;
  for (const auto& p : predictions) {
    if (!known.count(p.id)) {
      ++extraneous;
      continue;
    }
    answers[p.id] = p.answer;
  }
  Report report = evaluate_predictions(questions, answers, scheme);
  if (extraneous) {
    report.warnings.push_back(std::to_string(extraneous) +
                              " prediction(s) matched no dataset question; ignored");
  }
  return report;
}

/// One full evaluation pass per prompt variant; routing, retrieval, and
/// providers are identical across variants. Emits ablation.json and the
/// plot-ready curve.csv into out_dir, with per-variant run artifacts in
/// out_dir/<prompt>/.
inline AblationTable run_ablation(const std::filesystem::path& dataset, Track track,
                                  const EngineConfig& config,
                                  const std::vector<TemplateId>& prompt_ids,
                                  const std::filesystem::path& out_dir,
                                  AggregationScheme scheme = AggregationScheme::SIMPLE_AVG) {
  AblationTable table;
  table.track = track;
  for (const TemplateId id : prompt_ids) {
    EngineConfig variant = config;
    variant.template_id = id;
    try {
      RunOutcome out = run_track(dataset, track, variant, out_dir / template_name(id), scheme);
      if (!out.report) {
        throw ConfigError("dataset carries no reference labels; ablation cannot score");
      }
      if (out.error_count) {
        table.partial = true;
        table.errors.push_back(std::string(template_name(id)) + ": " +
                               std::to_string(out.error_count) + " question error(s)");
      }
      table.rows.push_back(AblationRow{id, *out.report});
    } catch (const std::exception& ex) {
      table.partial = true;
      table.errors.push_back(std::string(template_name(id)) + ": " + ex.what());
    }
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream aj(out_dir / "ablation.json");
  aj << ablation_to_json(table).dump(2) << "\n";
  std::ofstream curve(out_dir / "curve.csv");
  curve << ablation_curve_csv(table);
  return table;
}

/// Answers selected questions interactively (live search permitted).
/// Per-question failures are recorded on the record, not thrown.
struct AskOutcome {
  std::vector<AnswerRecord> records;
  std::vector<std::string> errors;  // parallel; "" when clean
  std::size_t error_count = 0;
};

inline AskOutcome ask_questions(const std::vector<Question>& questions,
                                const EngineConfig& config) {
  const Providers providers = make_providers(config, /*allow_live_search=*/true);
  const std::map<std::string, CountryData> countries = load_country_data(config, questions);
  AskOutcome outcome;
  for (const auto& q : questions) {
    try {
      outcome.records.push_back(answer_question(q, config, providers, countries));
      outcome.errors.emplace_back();
    } catch (const std::exception& ex) {
      outcome.records.push_back(detail::abstain_record(q, route(q.locale, config.routing)));
      outcome.errors.emplace_back(ex.what());
      ++outcome.error_count;
    }
  }
  return outcome;
}

// Optional network helper ------------------------------------------------

struct FetchOutcome {
  std::size_t fetched = 0;
  std::vector<std::string> failures;
};

namespace detail {

inline std::string percent_encode_path(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    const bool keep = std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~';
    if (keep) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

inline std::string page_slug(const std::string& keyword) {
  std::string slug;
  for (unsigned char c : keyword) {
    slug += std::isalnum(c) ? static_cast<char>(c) : '_';
  }
  return slug;
}

}  // namespace detail

/// Fetches page summaries from a Wikipedia-compatible REST endpoint and
/// writes them as pre-fetched page files. Network is required here and
/// nowhere else in the build pipeline.
inline FetchOutcome fetch_wiki(const std::vector<std::string>& keywords,
                               const std::string& language,
                               const std::filesystem::path& out_dir,
                               std::string base_url = "") {
  if (base_url.empty()) base_url = "https://" + language + ".wikipedia.org";
  httplib::Client client(base_url);
  client.set_connection_timeout(20, 0);
  client.set_read_timeout(20, 0);
  client.set_follow_location(true);

  std::filesystem::create_directories(out_dir);
  FetchOutcome outcome;
  for (const auto& keyword : keywords) {
    std::string title = keyword;
    for (auto& c : title) {
      if (c == ' ') c = '_';
    }
    const std::string path = "/api/rest_v1/page/summary/" + detail::percent_encode_path(title);
    auto res = client.Get(path);
    if (!res || res->status != 200) {
      outcome.failures.push_back(keyword + ": " +
                                 (res ? "HTTP " + std::to_string(res->status)
                                      : "connection failed"));
      continue;
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      outcome.failures.push_back(keyword + ": invalid JSON: " + e.what());
      continue;
    }
    nlohmann::ordered_json page;
    page["title"] = doc.value("title", keyword);
    page["summary"] = doc.value("extract", "");
    std::ofstream out(out_dir / (detail::page_slug(keyword) + ".json"));
    out << page.dump(2) << "\n";
    ++outcome.fetched;
  }
  return outcome;
}

}  // namespace culrag

#endif  // CULRAG_ENGINE_HPP
