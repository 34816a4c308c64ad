// Release gate. Each check below guards one shipping criterion and prints a
// single PASS/FAIL line, so a failed build shows exactly which guarantee
// broke. The binary exits nonzero when any required check fails; the live
// endpoint check is optional and reports SKIP when no endpoint is exported.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "culrag/cascade.hpp"
#include "culrag/chunker.hpp"
#include "culrag/config.hpp"
#include "culrag/engine.hpp"
#include "culrag/evaluator.hpp"
#include "culrag/kb.hpp"
#include "culrag/locale.hpp"
#include "culrag/prompts.hpp"
#include "culrag/providers.hpp"
#include "culrag/question.hpp"
#include "culrag/routing.hpp"
#include "culrag/search.hpp"
#include "culrag/sha256.hpp"
#include "culrag/unicode.hpp"
#include "culrag/vector_store.hpp"
#include "test_util.h"

namespace culrag {
namespace {

struct CheckResult {
  bool pass = true;
  bool skipped = false;
  std::string detail;
};

// Keeps the first failure; later ones usually cascade from it.
void fail(CheckResult& result, const std::string& message) {
  if (result.pass) {
    result.pass = false;
    result.detail = message;
  }
}

class Stopwatch {
 public:
  std::int64_t ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::filesystem::path e2e_dir() {
  return test_util::source_dir() / "tests" / "fixtures" / "e2e";
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

// Runs a shell command with stdout+stderr captured into log_file.
CommandResult run_command(const std::string& command, const std::filesystem::path& log_file) {
  const std::string full = command + " > " + quoted(log_file.string()) + " 2>&1";
  const int status = std::system(full.c_str());
  CommandResult result;
  if (status != -1 && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  if (std::filesystem::exists(log_file)) result.output = test_util::read_file(log_file);
  return result;
}

// 1. The three per-language score rows, averaged per track and prompt
// variant, must reproduce the six reported column averages exactly.
CheckResult check_published_averages() {
  CheckResult result;
  const Stopwatch watch;
  struct Column {
    const char* name;
    std::vector<double> language_scores;  // en, es, zh
    const char* expected;
  };
  const std::vector<Column> columns = {
      {"SAQ mp", {17.14, 4.17, 27.14}, "16.15"},
      {"SAQ rp-v1", {24.29, 35.00, 41.43}, "33.57"},
      {"SAQ rp-v2", {37.14, 47.50, 48.57}, "44.40"},
      {"MCQ mp", {82.86, 80.83, 65.71}, "76.46"},
      {"MCQ rp-v1", {82.86, 85.00, 82.86}, "83.57"},
      {"MCQ rp-v2", {82.86, 70.00, 68.57}, "73.81"},
  };
  for (const Column& column : columns) {
    const std::string got = format2(average_language_scores(column.language_scores));
    if (got != column.expected) {
      fail(result, std::string(column.name) + ": got " + got + ", want " + column.expected);
    }
  }
  if (watch.ms() >= 1000) {
    fail(result, "took " + std::to_string(watch.ms()) + " ms, budget is 1000 ms");
  }
  if (result.pass) {
    result.detail = "six averages exact in " + std::to_string(watch.ms()) + " ms";
  }
  return result;
}

// 2. Rendering each template with no context and an empty question slot must
// yield exactly the shipped preamble bytes, whose SHA-256 digests are pinned
// in prompts/checksums.txt.
CheckResult check_prompt_checksums() {
  CheckResult result;
  const auto dir = test_util::source_dir() / "prompts";
  std::ifstream list(dir / "checksums.txt");
  if (!list) {
    fail(result, "cannot open " + (dir / "checksums.txt").string());
    return result;
  }
  std::map<std::string, std::string> pinned;  // file name -> digest
  std::string digest, name;
  while (list >> digest >> name) pinned[name] = digest;

  const std::map<std::string, TemplateId> files = {
      {"mp.txt", TemplateId::MP},
      {"rp_v1.txt", TemplateId::RP_V1},
      {"rp_v2.txt", TemplateId::RP_V2},
  };
  if (pinned.size() != files.size()) {
    fail(result, "checksums.txt pins " + std::to_string(pinned.size()) + " files, want 3");
  }
  const std::string scaffold = "Question: \nAnswer:";
  for (const auto& [file, id] : files) {
    const auto it = pinned.find(file);
    if (it == pinned.end()) {
      fail(result, "no pinned checksum for " + file);
      continue;
    }
    Question blank;
    blank.track = Track::SAQ;
    const std::string rendered = render(id, blank, {});
    if (rendered.size() < scaffold.size() ||
        rendered.substr(rendered.size() - scaffold.size()) != scaffold) {
      fail(result, file + ": rendered prompt lost the question scaffold");
      continue;
    }
    const std::string body = rendered.substr(0, rendered.size() - scaffold.size());
    if (body != preamble(id)) fail(result, file + ": rendered preamble drifted");
    if (sha256_hex(body) != it->second) fail(result, file + ": SHA-256 mismatch");
    if (test_util::read_file(dir / file) != body) {
      fail(result, file + ": shipped fixture bytes differ from the rendered preamble");
    }
  }
  if (result.pass) result.detail = "3 preamble checksums match";
  return result;
}

// 3. Top-k retrieval must agree with an independently computed brute-force
// cosine ranking, including the ascending-id tie-break. Every tenth vector
// duplicates its neighbour so exact score ties actually occur.
CheckResult check_vector_search_oracle() {
  CheckResult result;
  const Stopwatch watch;
  std::mt19937 rng(64121);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  const std::size_t count = 1000;
  const std::size_t dim = 64;

  VectorIndex index;
  index.kb_id = "oracle";
  index.dimension = dim;
  index.model_id = "acceptance";
  for (std::size_t i = 0; i < count; ++i) {
    Vector v(dim);
    if (i % 10 == 9) {
      v = index.items.back().second;
    } else {
      for (float& x : v) x = gauss(rng);
    }
    char id[16];
    std::snprintf(id, sizeof(id), "e%04zu", i);
    index.items.emplace_back(id, std::move(v));
  }

  const auto oracle_cosine = [](const Vector& a, const Vector& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x = a[i], y = b[i];
      dot += x * y;
      na += x * x;
      nb += y * y;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
  };

  std::size_t lists_checked = 0;
  std::size_t tie_pairs = 0;
  for (int qi = 0; qi < 50 && result.pass; ++qi) {
    Vector query(dim);
    for (float& x : query) x = gauss(rng);

    std::vector<std::pair<double, std::string>> ranked;
    ranked.reserve(count);
    for (const auto& [id, vec] : index.items) {
      ranked.emplace_back(oracle_cosine(vec, query), id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });

    for (const std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{20}}) {
      const std::vector<ScoredHit> hits = search(index, query, k);
      if (hits.size() != k) {
        fail(result, "k=" + std::to_string(k) + ": got " + std::to_string(hits.size()) + " hits");
        break;
      }
      for (std::size_t i = 0; i < k; ++i) {
        if (hits[i].entry_id != ranked[i].second || hits[i].rank != i + 1) {
          fail(result, "query " + std::to_string(qi) + " k=" + std::to_string(k) + " rank " +
                           std::to_string(i + 1) + ": got " + hits[i].entry_id +
                           ", oracle says " + ranked[i].second);
          break;
        }
        if (i + 1 < k && ranked[i].first == ranked[i + 1].first) ++tie_pairs;
      }
      ++lists_checked;
    }
  }
  if (tie_pairs == 0) fail(result, "no score ties reached the top ranks; tie-break untested");
  if (watch.ms() >= 10000) {
    fail(result, "took " + std::to_string(watch.ms()) + " ms, budget is 10000 ms");
  }
  if (result.pass) {
    result.detail = std::to_string(lists_checked) + " ranked lists match the oracle, " +
                    std::to_string(tie_pairs) + " tie pairs, in " + std::to_string(watch.ms()) +
                    " ms";
  }
  return result;
}

// Empty string means the case holds; otherwise the first broken property.
std::string chunk_case_error(const std::string& text, const ChunkingConfig& config) {
  const std::u32string cps = uni::to_utf32(text);
  const std::vector<Chunk> chunks = chunk_text(text, config);
  if (cps.empty()) return chunks.empty() ? "" : "empty text produced chunks";
  if (chunks.empty()) return "non-empty text produced no chunks";

  const std::size_t stride = config.chunk_size - config.overlap;
  std::u32string rebuilt(cps.size(), U'\0');
  std::vector<bool> covered(cps.size(), false);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const std::u32string piece = uni::to_utf32(chunks[i].text);
    if (chunks[i].start_offset != i * stride) {
      return "chunk " + std::to_string(i) + " starts at " +
             std::to_string(chunks[i].start_offset) + ", want " + std::to_string(i * stride);
    }
    if (piece.empty() || piece.size() > config.chunk_size) {
      return "chunk " + std::to_string(i) + " length " + std::to_string(piece.size()) +
             " is out of bounds";
    }
    if (i + 1 < chunks.size() && piece.size() != config.chunk_size) {
      return "interior chunk " + std::to_string(i) + " is not a full window";
    }
    for (std::size_t j = 0; j < piece.size(); ++j) {
      const std::size_t pos = chunks[i].start_offset + j;
      if (pos >= cps.size()) return "chunk " + std::to_string(i) + " spills past the end";
      if (covered[pos] && rebuilt[pos] != piece[j]) {
        return "overlapping chunks disagree at position " + std::to_string(pos);
      }
      rebuilt[pos] = piece[j];
      covered[pos] = true;
    }
  }
  const std::size_t last_len = uni::to_utf32(chunks.back().text).size();
  if (chunks.back().start_offset + last_len != cps.size()) {
    return "last chunk does not end at the text end";
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) return "coverage gap";
  if (rebuilt != cps) return "reconstructed text differs from the input";
  return "";
}

// 4. Stride, window-size, and coverage properties over randomized mixed
// script inputs, plus the documented fixed-window example.
CheckResult check_chunker_properties() {
  CheckResult result;

  ChunkingConfig fixed;
  fixed.chunk_size = 500;
  fixed.overlap = 100;
  const auto offsets_of = [&](std::size_t length) {
    std::vector<std::size_t> offsets;
    for (const Chunk& c : chunk_text(std::string(length, 'x'), fixed)) {
      offsets.push_back(c.start_offset);
    }
    return offsets;
  };
  if (offsets_of(1000) != std::vector<std::size_t>{0, 400, 800}) {
    fail(result, "length-1000 text: offsets are not (0, 400, 800)");
  }
  if (offsets_of(500) != std::vector<std::size_t>{0}) {
    fail(result, "length-500 text: expected the single offset 0");
  }
  if (offsets_of(100) != std::vector<std::size_t>{0}) {
    fail(result, "length-100 text: expected the single offset 0");
  }

  std::mt19937 rng(411);
  const std::vector<std::string> alphabet = {"a", "b", "c", " ", "é", "ñ", "茶", "节", "。", "?"};
  std::uniform_int_distribution<std::size_t> length_dist(0, 600);
  std::uniform_int_distribution<std::size_t> size_dist(1, 80);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int round = 0; round < 500; ++round) {
    ChunkingConfig config;
    config.chunk_size = size_dist(rng);
    config.overlap = std::uniform_int_distribution<std::size_t>(0, config.chunk_size - 1)(rng);
    std::string text;
    const std::size_t length = length_dist(rng);
    for (std::size_t i = 0; i < length; ++i) text += alphabet[pick(rng)];
    const std::string error = chunk_case_error(text, config);
    if (!error.empty()) {
      fail(result, "round " + std::to_string(round) + ": " + error);
      return result;
    }
  }
  if (result.pass) result.detail = "500 random cases and the fixed offsets hold";
  return result;
}

// 5. Routing is a pure function of (locale, config); the configured variant
// set, not the language code, selects the large Chinese model.
CheckResult check_routing_determinism() {
  CheckResult result;
  std::mt19937 rng(5150);
  RoutingConfig web;
  web.mode = Mode::RAG_WEB;
  const RoutingConfig base;  // rag-base by default

  // Bias some draws toward the interesting locales so both sides of the
  // variant-set membership are exercised (zh-HK is Chinese but unlisted).
  const std::vector<std::string> pinned = {"zh-CN", "zh-TW", "zh-SG", "zh-HK", "es-MX", "en-GB"};
  std::uniform_int_distribution<int> lower('a', 'z');
  std::uniform_int_distribution<int> upper('A', 'Z');
  std::uniform_int_distribution<int> coin(0, 9);
  std::uniform_int_distribution<std::size_t> pick(0, pinned.size() - 1);
  for (int i = 0; i < 10000; ++i) {
    Locale locale;
    if (coin(rng) == 0) {
      locale = *Locale::from_string(pinned[pick(rng)]);
    } else {
      locale.language = std::string{static_cast<char>(lower(rng)), static_cast<char>(lower(rng))};
      locale.region = std::string{static_cast<char>(upper(rng)), static_cast<char>(upper(rng))};
    }
    if (!locale.valid()) {
      fail(result, "fuzzer produced an invalid locale");
      return result;
    }
    const RouteDecision first = route(locale, web);
    const RouteDecision second = route(locale, web);
    if (!(first == second)) {
      fail(result, locale.str() + ": two identical calls disagree");
      return result;
    }
    const bool variant = web.chinese_variants.contains(locale.str());
    if (first.model_id != (variant ? web.chinese_model : web.default_model)) {
      fail(result, locale.str() + ": wrong rag-web model " + first.model_id);
      return result;
    }
    if (first.kb_id != locale.region || !(first.prompt_language == locale)) {
      fail(result, locale.str() + ": kb or prompt language does not follow the locale");
      return result;
    }
    const RouteDecision b = route(locale, base);
    if (b.model_id != base.base_model || b.kb_id != locale.region) {
      fail(result, locale.str() + ": wrong rag-base decision");
      return result;
    }
  }
  for (const std::string& variant : web.chinese_variants) {
    const auto locale = Locale::from_string(variant);
    if (!locale) {
      fail(result, "configured Chinese variant \"" + variant + "\" is not a locale");
      continue;
    }
    if (route(*locale, web).model_id != web.chinese_model) {
      fail(result, variant + " does not select the Chinese model");
    }
  }
  if (route(*Locale::from_string("zh-CN"), web).model_id != "deepseek-llm:67b") {
    fail(result, "zh-CN must route to deepseek-llm:67b under the default config");
  }
  if (route(*Locale::from_string("es-MX"), web).model_id != "mistral:7b") {
    fail(result, "es-MX must route to mistral:7b under the default config");
  }
  if (result.pass) result.detail = "10000 locales routed consistently";
  return result;
}

// 6. Every success/failure combination of the four stages resolves to the
// first successful stage; when all fail the record abstains with the
// literal token and source NONE.
CheckResult check_cascade_combinations() {
  CheckResult result;
  const Locale locale = *Locale::from_string("en-GB");

  Question question;
  question.id = "q-en-GB-9";
  question.locale = locale;
  question.text = "Which drink pairs with scones?";
  question.track = Track::SAQ;

  KBEntry curated;
  curated.id = "facts#L1";
  curated.text = "kb marker fact";
  curated.source = EntrySource::CURATED;
  curated.locale = locale;
  curated.country = "GB";
  KBEntry wiki;
  wiki.id = "page#s0";
  wiki.text = "wiki marker sentence";
  wiki.source = EntrySource::WIKI_SUMMARY;
  wiki.locale = locale;
  wiki.country = "GB";
  const KnowledgeBase kb({curated, wiki});

  FunctionEmbedder embedder([](const std::string&) { return Vector{1.0f, 0.0f}; });
  const VectorIndex index = build_index(kb.entries(), embedder, "GB", "test-embed");

  test_util::TempDir tmp;
  test_util::write_file(
      FixtureSearchProvider::fixture_path(tmp.path(), question.text),
      R"({"results": [{"title": "", "text": "web marker snippet", "url": ""}]})");
  FixtureSearchProvider search_provider(tmp.path());

  // The stage is recognizable from which marker text reached the prompt;
  // local KB evidence carries both markers, so web is checked first.
  bool direct_ok = false, web_ok = false, kb_ok = false, wiki_ok = false;
  FunctionGenerator generator([&](const GenerationRequest& req) -> std::string {
    const std::string& p = req.prompt;
    if (p.find("web marker") != std::string::npos) {
      return web_ok ? "web answer" : std::string(kNoAnswerToken);
    }
    if (p.find("kb marker") != std::string::npos) {
      return kb_ok ? "kb answer" : std::string(kNoAnswerToken);
    }
    if (p.find("wiki marker") != std::string::npos) {
      return wiki_ok ? "wiki answer" : std::string(kNoAnswerToken);
    }
    return direct_ok ? "direct answer" : std::string(kNoAnswerToken);
  });

  RagWebContext ctx;
  ctx.generator = &generator;
  ctx.embedder = &embedder;
  ctx.search_provider = &search_provider;
  ctx.index = &index;
  ctx.kb = &kb;
  ctx.route = RouteDecision{"test-model", "GB", locale};
  ctx.embed_model = "test-embed";
  ctx.patterns.by_language = {{"en", {"scones"}}};

  const std::map<Stage, std::string> stage_text = {{Stage::DIRECT, "direct answer"},
                                                   {Stage::WEB_SEARCH, "web answer"},
                                                   {Stage::LOCAL_KB, "kb answer"},
                                                   {Stage::WIKI_SUMMARY, "wiki answer"}};
  for (int mask = 0; mask < 16; ++mask) {
    direct_ok = mask & 1;
    web_ok = mask & 2;
    kb_ok = mask & 4;
    wiki_ok = mask & 8;
    const AnswerRecord record = answer_rag_web(question, ctx);

    Stage want = Stage::NONE;
    if (direct_ok) {
      want = Stage::DIRECT;
    } else if (web_ok) {
      want = Stage::WEB_SEARCH;
    } else if (kb_ok) {
      want = Stage::LOCAL_KB;
    } else if (wiki_ok) {
      want = Stage::WIKI_SUMMARY;
    }
    const std::string label = "mask " + std::to_string(mask);
    if (record.source_stage != want) {
      fail(result, label + ": source " + stage_name(record.source_stage) + ", want " +
                       stage_name(want));
      continue;
    }
    if (want == Stage::NONE) {
      if (record.final.kind != AnswerKind::ABSTAIN ||
          record.final.raw != std::string(kNoAnswerToken)) {
        fail(result, label + ": all-fail must abstain with the literal token");
      }
      if (record.stages.size() != 4) {
        fail(result, label + ": expected all four stages to be attempted");
      }
      continue;
    }
    if (record.final.text != stage_text.at(want)) {
      fail(result, label + ": answer \"" + record.final.text + "\" is not the winning stage's");
    }
    if (want == Stage::DIRECT) {
      if (!record.evidence_used.empty()) fail(result, label + ": direct answers carry no evidence");
    } else {
      const char* tag = want == Stage::WEB_SEARCH ? "web"
                        : want == Stage::LOCAL_KB ? "kb"
                                                  : "wiki";
      if (record.evidence_used.empty() || record.evidence_used.front().source != tag) {
        fail(result, label + ": evidence provenance is not \"" + std::string(tag) + "\"");
      }
    }
  }
  if (result.pass) result.detail = "16 stage combinations resolved to the expected source";
  return result;
}

// 7. Full offline pipeline through the CLI: KB build + index + scored runs.
// The oracle endpoint answers correctly exactly when the evidence contains
// the reference, so a complete KB scores 100.00 and an evidence-starved
// rag-web run scores 0.00; reruns must be byte-identical.
CheckResult check_end_to_end_runs() {
  CheckResult result;
  test_util::TempDir tmp;
  const std::string cli = CULRAG_CLI_PATH;
  const auto e2e = e2e_dir();
  const std::string dataset = (e2e / "saq_questions.jsonl").string();
  const std::string kb_root = (tmp / "kb").string();
  const std::string endpoint = "mock:" + dataset;
  const auto log = tmp / "command.log";

  const struct {
    const char* locale;
    const char* country;
  } countries[] = {{"en-GB", "GB"}, {"es-MX", "MX"}, {"zh-CN", "CN"}};
  for (const auto& c : countries) {
    const CommandResult built = run_command(
        cli + " build-kb --locale " + c.locale + " --keywords " +
            quoted((e2e / "keywords.txt").string()) + " --pages " +
            quoted((e2e / "pages").string()) + " --curated " +
            quoted((e2e / "facts.jsonl").string()) + " --kb-root " + quoted(kb_root),
        log);
    if (built.exit_code != 0) {
      fail(result, std::string("build-kb ") + c.country + " exited with " +
                       std::to_string(built.exit_code));
      return result;
    }
    const CommandResult indexed =
        run_command(cli + " index --country " + c.country + " --kb-root " + quoted(kb_root) +
                        " --endpoint " + quoted(endpoint),
                    log);
    if (indexed.exit_code != 0) {
      fail(result, std::string("index ") + c.country + " exited with " +
                       std::to_string(indexed.exit_code));
      return result;
    }
  }

  const std::string common = " --dataset " + quoted(dataset) + " --track SAQ --kb-root " +
                             quoted(kb_root) + " --endpoint " + quoted(endpoint) +
                             " --search cache-only --jobs 1";

  const CommandResult run1 = run_command(
      cli + " run-track" + common + " --mode rag-base --out " + quoted((tmp / "run1").string()),
      log);
  if (run1.exit_code != 0) {
    fail(result, "run-track exited with " + std::to_string(run1.exit_code));
    return result;
  }
  const auto report1 = nlohmann::json::parse(test_util::read_file(tmp / "run1" / "report.json"));
  if (report1.at("overall").get<double>() != 100.0) {
    fail(result, "full-KB run scored " + format2(report1.at("overall").get<double>()) +
                     ", want 100.00");
  }

  const CommandResult run2 = run_command(
      cli + " run-track" + common + " --mode rag-base --out " + quoted((tmp / "run2").string()),
      log);
  if (run2.exit_code != 0) {
    fail(result, "second run-track exited with " + std::to_string(run2.exit_code));
    return result;
  }
  const std::string predictions1 = test_util::read_file(tmp / "run1" / "predictions.jsonl");
  const std::string predictions2 = test_util::read_file(tmp / "run2" / "predictions.jsonl");
  if (predictions1.empty() || predictions1 != predictions2) {
    fail(result, "consecutive runs did not produce byte-identical predictions");
  }

  const CommandResult evaluated =
      run_command(cli + " evaluate --dataset " + quoted(dataset) + " --track SAQ" +
                      " --predictions " + quoted((tmp / "run1" / "predictions.jsonl").string()),
                  tmp / "evaluate.log");
  if (evaluated.exit_code != 0) {
    fail(result, "evaluate exited with " + std::to_string(evaluated.exit_code));
  } else if (evaluated.output.find("100.00") == std::string::npos) {
    fail(result, "evaluate output does not report 100.00");
  }

  const CommandResult starved = run_command(cli + " run-track" + common +
                                                " --mode rag-web --no-local-db --out " +
                                                quoted((tmp / "starved").string()),
                                            log);
  if (starved.exit_code != 0) {
    fail(result, "evidence-starved run-track exited with " + std::to_string(starved.exit_code));
    return result;
  }
  const auto report0 =
      nlohmann::json::parse(test_util::read_file(tmp / "starved" / "report.json"));
  if (report0.at("overall").get<double>() != 0.0) {
    fail(result, "evidence-starved run scored " + format2(report0.at("overall").get<double>()) +
                     ", want 0.00");
  }
  if (result.pass) result.detail = "full KB 100.00, empty cache 0.00, reruns byte-identical";
  return result;
}

// 8. Building all three country KBs from the shipped keyword lists, page
// corpus, and curated facts lands within 10% of the reference volumes
// (about 700 wiki-derived entries and 200 curated facts).
CheckResult check_kb_volume() {
  CheckResult result;
  test_util::TempDir tmp;
  EngineConfig config;
  config.kb_root = (tmp / "kb").string();
  const auto data = test_util::source_dir() / "data";

  std::size_t wiki = 0;
  std::size_t curated = 0;
  const struct {
    const char* locale;
    const char* country;
  } countries[] = {{"en-GB", "GB"}, {"es-MX", "MX"}, {"zh-CN", "CN"}};
  for (const auto& c : countries) {
    const BuildSummary summary =
        build_kb(config, *Locale::from_string(c.locale),
                 data / "keywords" / (std::string(c.country) + ".txt"), data / "wiki" / c.country,
                 data / "curated" / "facts.jsonl");
    wiki += summary.wiki_summary + summary.wiki_body;
    curated += summary.curated;
  }
  if (wiki < 630 || wiki > 770) {
    fail(result, "wiki-derived entry count " + std::to_string(wiki) + " outside [630, 770]");
  }
  if (curated < 180 || curated > 220) {
    fail(result, "curated entry count " + std::to_string(curated) + " outside [180, 220]");
  }
  if (result.pass) {
    result.detail =
        std::to_string(wiki) + " wiki and " + std::to_string(curated) + " curated entries";
  }
  return result;
}

// 9. Optional: with a real serving endpoint exported, `ask` must answer five
// sample questions without transport errors and emit well-formed records.
// Accuracy is printed for information only, never asserted.
CheckResult check_live_smoke() {
  CheckResult result;
  const char* endpoint = std::getenv("CULRAG_LIVE_ENDPOINT");
  if (!endpoint || !*endpoint) {
    result.skipped = true;
    result.detail = "CULRAG_LIVE_ENDPOINT not set";
    return result;
  }

  test_util::TempDir tmp;
  const std::string dataset = (e2e_dir() / "saq_questions.jsonl").string();
  const CommandResult asked = run_command(
      std::string(CULRAG_CLI_PATH) + " ask --dataset " + quoted(dataset) +
          " --track SAQ --limit 5 --no-local-db --endpoint " + quoted(endpoint),
      tmp / "ask.log");
  if (asked.exit_code != 0) {
    fail(result, "ask exited with " + std::to_string(asked.exit_code));
    return result;
  }

  std::map<std::string, Question> by_id;
  for (const Question& q : load_questions(dataset, Track::SAQ)) by_id.emplace(q.id, q);

  std::size_t records = 0;
  std::size_t correct = 0;
  std::size_t pos = 0;
  const std::string& output = asked.output;
  while (pos < output.size()) {
    std::size_t nl = output.find('\n', pos);
    if (nl == std::string::npos) nl = output.size();
    const std::string line = output.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty() || line.front() != '{') continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(result, std::string("malformed record line: ") + e.what());
      return result;
    }
    for (const char* key : {"id", "answer", "source_stage", "evidence", "route", "stages"}) {
      if (!record.contains(key)) {
        fail(result, "record is missing \"" + std::string(key) + "\"");
        return result;
      }
    }
    if (record.contains("error")) {
      fail(result, "record carries an error: " + record.at("error").get<std::string>());
      return result;
    }
    const auto q = by_id.find(record.at("id").get<std::string>());
    if (q == by_id.end()) {
      fail(result, "record id " + record.at("id").get<std::string>() + " is not in the dataset");
      return result;
    }
    if (score_item(q->second, record.at("answer").get<std::string>())) ++correct;
    ++records;
  }
  if (records != 5) {
    fail(result, "expected 5 records, got " + std::to_string(records));
    return result;
  }
  result.detail = "5 questions answered; accuracy " +
                  format2(100.0 * static_cast<double>(correct) / 5.0) + " (informational)";
  return result;
}

template <typename Fn>
CheckResult guarded(Fn check) {
  try {
    return check();
  } catch (const std::exception& ex) {
    CheckResult result;
    result.pass = false;
    result.detail = std::string("unexpected exception: ") + ex.what();
    return result;
  }
}

int run_acceptance() {
  const struct {
    int number;
    const char* label;
    CheckResult (*check)();
  } criteria[] = {
      {1, "published averages", check_published_averages},
      {2, "prompt checksums", check_prompt_checksums},
      {3, "vector search oracle", check_vector_search_oracle},
      {4, "chunker properties", check_chunker_properties},
      {5, "routing determinism", check_routing_determinism},
      {6, "cascade combinations", check_cascade_combinations},
      {7, "offline end-to-end runs", check_end_to_end_runs},
      {8, "knowledge base volume", check_kb_volume},
      {9, "live smoke", check_live_smoke},
  };
  int failures = 0;
  for (const auto& criterion : criteria) {
    const CheckResult result = guarded(criterion.check);
    const char* status = result.skipped ? "SKIP" : result.pass ? "PASS" : "FAIL";
    if (!result.skipped && !result.pass) ++failures;
    std::printf("CRITERION %d (%s): %s", criterion.number, criterion.label, status);
    if (!result.detail.empty()) std::printf(" (%s)", result.detail.c_str());
    std::printf("\n");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace culrag

int main() { return culrag::run_acceptance(); }
