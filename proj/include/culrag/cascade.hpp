#ifndef CULRAG_CASCADE_HPP
#define CULRAG_CASCADE_HPP

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "culrag/kb.hpp"
#include "culrag/prompts.hpp"
#include "culrag/providers.hpp"
#include "culrag/question.hpp"
#include "culrag/routing.hpp"
#include "culrag/search.hpp"
#include "culrag/vector_store.hpp"

namespace culrag {

enum class Stage { DIRECT, WEB_SEARCH, LOCAL_KB, WIKI_SUMMARY, NONE };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::DIRECT: return "DIRECT";
    case Stage::WEB_SEARCH: return "WEB_SEARCH";
    case Stage::LOCAL_KB: return "LOCAL_KB";
    case Stage::WIKI_SUMMARY: return "WIKI_SUMMARY";
    case Stage::NONE: return "NONE";
  }
  return "NONE";
}

struct StageOutcome {
  Stage stage = Stage::NONE;
  bool succeeded = false;
  std::vector<std::string> evidence;
  std::optional<ParsedAnswer> answer;
  std::string error;  // transport failures recorded, cascade continues
  std::int64_t latency_ms = 0;
};

struct EvidenceItem {
  std::string source;  // "web", "kb", "wiki"
  std::string text;
};

/// Per-question outcome with provenance. final is ABSTAIN exactly when no
/// stage produced an answer (source_stage NONE).
struct AnswerRecord {
  std::string question_id;
  ParsedAnswer final;
  Stage source_stage = Stage::NONE;
  std::vector<EvidenceItem> evidence_used;
  RouteDecision route;
  std::vector<StageOutcome> stages;
  std::string retrieval_log;  // rag-base: retrieved sentences, or "NULL"
};

/// Per-language patterns marking encyclopedic questions that may skip
/// retrieval. The shipped list is deliberately short: a false positive here
/// skips evidence gathering entirely.
struct DirectPatterns {
  std::map<std::string, std::vector<std::string>> by_language;

  static DirectPatterns defaults() {
    DirectPatterns p;
    p.by_language["en"] = {R"(\bcapital (?:city )?of\b)", R"(\bofficial currency\b)",
                           R"(\bofficial language\b)", R"(\bin (?:what|which) year\b)"};
    p.by_language["es"] = {R"(\bcapital de\b)", R"(\bmoneda oficial\b)",
                           R"(\bidioma oficial\b)", R"(\ben qué año\b)"};
    p.by_language["zh"] = {"首都", "官方货币", "官方语言", "哪一年"};
    return p;
  }
};

/// True when the question matches a configured encyclopedic pattern for its
/// language. Patterns are case-insensitive regexes over the question text.
inline bool should_answer_direct(const Question& question, const DirectPatterns& patterns) {
  auto it = patterns.by_language.find(question.locale.language);
  if (it == patterns.by_language.end()) return false;
  for (const auto& pat : it->second) {
    try {
      std::regex re(pat, std::regex::ECMAScript | std::regex::icase);
      if (std::regex_search(question.text, re)) return true;
    } catch (const std::regex_error&) {
      throw ConfigError("invalid direct-answer pattern: " + pat);
    }
  }
  return false;
}

struct GenOptions {
  double temperature = 0.0;
  int max_tokens = 256;
  std::vector<std::string> stop = {"\n\n"};
};

struct RagBaseContext {
  const VectorIndex* index = nullptr;   // routed country's index
  const KnowledgeBase* kb = nullptr;    // entry texts for retrieved ids
  TextEmbedder* embedder = nullptr;
  TextGenerator* generator = nullptr;
  RouteDecision route;
  std::string embed_model;
  TemplateId template_id = TemplateId::RP_V1;
  std::size_t k = 3;
  double similarity_floor = 0.35;
  GenOptions gen;
};

namespace detail {

inline std::int64_t ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                               t0)
      .count();
}

inline GenerationRequest make_request(const std::string& model_id, std::string prompt,
                                      const GenOptions& gen) {
  GenerationRequest req;
  req.model_id = model_id;
  req.prompt = std::move(prompt);
  req.temperature = gen.temperature;
  req.max_tokens = gen.max_tokens;
  req.stop = gen.stop;
  return req;
}

/// Top-k entries above the similarity floor, optionally restricted to one
/// entry source.
inline std::vector<const KBEntry*> retrieve(const VectorIndex* index, const KnowledgeBase* kb,
                                            TextEmbedder& embedder,
                                            const std::string& embed_model,
                                            const std::string& query, std::size_t k,
                                            double floor,
                                            std::optional<EntrySource> only_source) {
  std::vector<const KBEntry*> out;
  if (!index || !kb || index->items.empty() || query.empty()) return out;
  const Vector q = embedder.embed(embed_model, query);
  // Scan everything and filter; KB scale makes this cheap and it keeps the
  // source-restricted view consistent with the full ranking.
  const auto hits = search(*index, q, index->items.size());
  for (const auto& hit : hits) {
    if (hit.score < floor) break;  // hits are sorted descending
    const KBEntry* e = kb->find(hit.entry_id);
    if (!e) continue;
    if (only_source && e->source != *only_source) continue;
    out.push_back(e);
    if (out.size() == k) break;
  }
  return out;
}

}  // namespace detail

/// Single-pass retrieval + generation. Retrieval hits above the floor are
/// logged verbatim; an empty retrieval logs the literal marker NULL and
/// generation proceeds context-free. This pipeline never abstains by
/// design: an abstaining first pass triggers one context-free regeneration.
inline AnswerRecord answer_rag_base(const Question& question, const RagBaseContext& ctx) {
  AnswerRecord record;
  record.question_id = question.id;
  record.route = ctx.route;

  StageOutcome stage;
  stage.stage = Stage::LOCAL_KB;
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::string> context;
  try {
    if (ctx.embedder) {
      const auto hits = detail::retrieve(ctx.index, ctx.kb, *ctx.embedder, ctx.embed_model,
                                         question.text, ctx.k, ctx.similarity_floor, std::nullopt);
      for (const KBEntry* e : hits) context.push_back(e->text);
    }
  } catch (const std::exception& ex) {
    stage.error = std::string("retrieval failed: ") + ex.what();
  }
  if (context.empty()) {
    record.retrieval_log = "NULL";
  } else {
    std::string log;
    for (std::size_t i = 0; i < context.size(); ++i) {
      if (i) log += "\n";
      log += context[i];
    }
    record.retrieval_log = log;
  }

  auto generate_or_rethrow = [&](const std::vector<std::string>& c) {
    try {
      return ctx.generator->generate(
          detail::make_request(ctx.route.model_id, render(ctx.template_id, question, c), ctx.gen));
    } catch (const TimeoutError& ex) {
      throw TimeoutError("question " + question.id + ": " + ex.what(), ex.elapsed_ms());
    } catch (const TransportError& ex) {
      throw TransportError("question " + question.id + ": " + ex.what());
    }
  };

  GenerationResult gen = generate_or_rethrow(context);
  ParsedAnswer parsed = parse_answer(gen.text, question.locale);
  bool used_context = !context.empty();
  if (parsed.kind == AnswerKind::ABSTAIN) {
    // Context-free fallback pass.
    gen = generate_or_rethrow({});
    parsed = parse_answer(gen.text, question.locale);
    used_context = false;
  }

  stage.latency_ms = detail::ms_since(t0);
  stage.evidence = context;
  stage.answer = parsed;
  stage.succeeded = parsed.kind == AnswerKind::ANSWER;
  record.stages.push_back(stage);

  record.final = parsed;
  if (parsed.kind == AnswerKind::ANSWER) {
    record.source_stage = used_context ? Stage::LOCAL_KB : Stage::DIRECT;
    if (used_context) {
      for (const auto& c : context) record.evidence_used.push_back({"kb", c});
    }
  } else {
    record.source_stage = Stage::NONE;
  }
  return record;
}

struct RagWebContext {
  TextGenerator* generator = nullptr;
  TextEmbedder* embedder = nullptr;        // may be null when no KB is present
  SearchProvider* search_provider = nullptr;  // null in cache-only mode
  std::optional<std::filesystem::path> cache_dir;
  std::string cache_only_key = "duckduckgo";
  const VectorIndex* index = nullptr;      // routed country's index, if any
  const KnowledgeBase* kb = nullptr;
  RouteDecision route;
  std::string embed_model;
  TemplateId template_id = TemplateId::RP_V1;
  std::size_t k = 3;
  double similarity_floor = 0.35;
  std::size_t web_top_n = 8;
  bool use_local_db = true;
  DirectPatterns patterns = DirectPatterns::defaults();
  GenOptions gen;
};

inline constexpr std::string_view kSupportInstruction =
    "Answer ONLY if the answer is explicitly supported by the context above. "
    "If the context does not support an answer, output <NO_ANSWER>.";

/// Prioritized cascade: direct parametric answer (encyclopedic questions
/// only), then web search, then the local KB (optional), then the
/// Wikipedia-summary entries. The first stage whose generation yields a
/// non-empty answer wins; stage transport errors are recorded and the
/// cascade moves on; if nothing succeeds the record abstains with
/// <NO_ANSWER>.
inline AnswerRecord answer_rag_web(const Question& question, const RagWebContext& ctx) {
  AnswerRecord record;
  record.question_id = question.id;
  record.route = ctx.route;

  auto run_generation = [&](Stage stage_id, const std::vector<std::string>& evidence,
                            bool supported_only) -> StageOutcome {
    StageOutcome outcome;
    outcome.stage = stage_id;
    outcome.evidence = evidence;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      RenderOptions opts;
      if (supported_only) opts.instruction = std::string(kSupportInstruction);
      const GenerationResult gen = ctx.generator->generate(detail::make_request(
          ctx.route.model_id, render(ctx.template_id, question, evidence, opts), ctx.gen));
      ParsedAnswer parsed = parse_answer(gen.text, question.locale);
      outcome.answer = parsed;
      outcome.succeeded = parsed.kind == AnswerKind::ANSWER && !parsed.text.empty();
    } catch (const std::exception& ex) {
      outcome.error = ex.what();
      outcome.succeeded = false;
    }
    outcome.latency_ms = detail::ms_since(t0);
    return outcome;
  };

  auto finish = [&](const StageOutcome& outcome, const char* source_tag) {
    record.final = *outcome.answer;
    record.source_stage = outcome.stage;
    if (outcome.stage != Stage::DIRECT) {
      for (const auto& e : outcome.evidence) record.evidence_used.push_back({source_tag, e});
    }
  };

  // Stage 1: direct model-only response, reserved for encyclopedic queries.
  if (should_answer_direct(question, ctx.patterns)) {
    StageOutcome outcome = run_generation(Stage::DIRECT, {}, /*supported_only=*/false);
    record.stages.push_back(outcome);
    if (outcome.succeeded) {
      finish(outcome, "");
      return record;
    }
  }

  // Stage 2: web search evidence.
  {
    StageOutcome outcome;
    outcome.stage = Stage::WEB_SEARCH;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> evidence;
    bool stage_error = false;
    try {
      const auto snippets = web_search(question.text, ctx.search_provider, ctx.web_top_n,
                                       ctx.cache_dir, ctx.cache_only_key);
      for (const auto& s : snippets) {
        evidence.push_back(s.text.empty() ? s.title : s.text);
      }
    } catch (const std::exception& ex) {
      outcome.error = ex.what();
      stage_error = true;
    }
    if (!stage_error && !evidence.empty()) {
      outcome = run_generation(Stage::WEB_SEARCH, evidence, /*supported_only=*/true);
    } else {
      outcome.latency_ms = detail::ms_since(t0);
    }
    record.stages.push_back(outcome);
    if (outcome.succeeded) {
      finish(outcome, "web");
      return record;
    }
  }

  // Stage 3: local country KB, only when enabled.
  if (ctx.use_local_db) {
    StageOutcome outcome;
    outcome.stage = Stage::LOCAL_KB;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> evidence;
    bool stage_error = false;
    try {
      if (ctx.embedder) {
        const auto hits =
            detail::retrieve(ctx.index, ctx.kb, *ctx.embedder, ctx.embed_model, question.text,
                             ctx.k, ctx.similarity_floor, std::nullopt);
        for (const KBEntry* e : hits) evidence.push_back(e->text);
      }
    } catch (const std::exception& ex) {
      outcome.error = ex.what();
      stage_error = true;
    }
    if (!stage_error && !evidence.empty()) {
      outcome = run_generation(Stage::LOCAL_KB, evidence, /*supported_only=*/true);
    } else {
      outcome.latency_ms = detail::ms_since(t0);
    }
    record.stages.push_back(outcome);
    if (outcome.succeeded) {
      finish(outcome, "kb");
      return record;
    }
  }

  // Stage 4: semantic search over the country's Wikipedia summaries.
  {
    StageOutcome outcome;
    outcome.stage = Stage::WIKI_SUMMARY;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> evidence;
    bool stage_error = false;
    try {
      if (ctx.embedder) {
        const auto hits =
            detail::retrieve(ctx.index, ctx.kb, *ctx.embedder, ctx.embed_model, question.text,
                             ctx.k, ctx.similarity_floor, EntrySource::WIKI_SUMMARY);
        for (const KBEntry* e : hits) evidence.push_back(e->text);
      }
    } catch (const std::exception& ex) {
      outcome.error = ex.what();
      stage_error = true;
    }
    if (!stage_error && !evidence.empty()) {
      outcome = run_generation(Stage::WIKI_SUMMARY, evidence, /*supported_only=*/true);
    } else {
      outcome.latency_ms = detail::ms_since(t0);
    }
    record.stages.push_back(outcome);
    if (outcome.succeeded) {
      finish(outcome, "wiki");
      return record;
    }
  }

  record.final = ParsedAnswer{AnswerKind::ABSTAIN, "", std::string(kNoAnswerToken)};
  record.source_stage = Stage::NONE;
  return record;
}

}  // namespace culrag

#endif  // CULRAG_CASCADE_HPP
