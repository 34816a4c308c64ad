// Command-line surface for the retrieval-augmented QA engine: knowledge
// base construction, indexing, single-question answering, track runs,
// scoring, and prompt ablations.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "culrag/engine.hpp"

namespace {

using namespace culrag;

// Flags shared by every pipeline command. Resolution order: built-in
// defaults, then --config file, then CULRAG_MODEL_ENDPOINT, then flags.
struct CommonFlags {
  std::string config_path;
  std::string mode;
  std::string prompt;
  std::string endpoint;
  std::string search;
  std::string kb_root;
  std::int64_t k = -1;
  std::int64_t jobs = -1;
  bool no_local_db = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--mode", f.mode, "pipeline mode")
      ->check(CLI::IsMember({"rag-base", "rag-web"}));
  cmd->add_option("--prompt", f.prompt, "prompt template")
      ->check(CLI::IsMember({"mp", "rp-v1", "rp-v2"}));
  cmd->add_option("--k", f.k, "retrieval depth")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-local-db", f.no_local_db, "disable the local KB stage");
  cmd->add_option("--endpoint", f.endpoint, "model endpoint (http://... or mock:<dataset>)");
  cmd->add_option("--search", f.search, "web search source: live, fixture:<dir>, cache-only");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--kb-root", f.kb_root, "knowledge base root directory");
}

EngineConfig resolve_config(const CommonFlags& f) {
  EngineConfig c;
  if (!f.config_path.empty()) c = load_config(f.config_path, std::move(c));
  apply_env(c);
  if (!f.mode.empty()) c.routing.mode = f.mode == "rag-web" ? Mode::RAG_WEB : Mode::RAG_BASE;
  if (!f.prompt.empty()) c.template_id = *template_from_name(f.prompt);
  if (f.k >= 0) c.k = static_cast<std::size_t>(f.k);
  if (f.no_local_db) c.use_local_db = false;
  if (!f.endpoint.empty()) c.endpoint = f.endpoint;
  if (!f.search.empty()) c.search = f.search;
  if (f.jobs >= 0) c.jobs = static_cast<std::size_t>(f.jobs);
  if (!f.kb_root.empty()) c.kb_root = f.kb_root;
  return c;
}

Track parse_track(const std::string& name) {
  auto t = track_from_name(name);
  if (!t) throw ConfigError("unknown track \"" + name + "\"");
  return *t;
}

AggregationScheme parse_scheme(const std::string& name) {
  if (name == "simple-avg") return AggregationScheme::SIMPLE_AVG;
  if (name == "weighted-by-count") return AggregationScheme::WEIGHTED_BY_COUNT;
  throw ConfigError("unknown scheme \"" + name + "\"");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"culrag: locale-routed retrieval-augmented question answering"};
  app.require_subcommand(1);

  // build-kb
  auto* build_cmd = app.add_subcommand("build-kb", "build a per-country knowledge base");
  CommonFlags build_flags;
  add_common_flags(build_cmd, build_flags);
  std::string build_locale, build_keywords, build_pages, build_curated;
  build_cmd->add_option("--locale", build_locale, "country locale, e.g. en-GB")->required();
  build_cmd->add_option("--keywords", build_keywords, "keyword list file")->required();
  build_cmd->add_option("--pages", build_pages, "directory of pre-fetched page files")->required();
  build_cmd->add_option("--curated", build_curated, "curated facts file (JSONL)");

  // index
  auto* index_cmd = app.add_subcommand("index", "embed a country KB into a vector index");
  CommonFlags index_flags;
  add_common_flags(index_cmd, index_flags);
  std::string index_country_code;
  index_cmd->add_option("--country", index_country_code, "country code, e.g. GB")->required();

  // ask
  auto* ask_cmd = app.add_subcommand("ask", "answer selected questions from a dataset");
  CommonFlags ask_flags;
  add_common_flags(ask_cmd, ask_flags);
  std::string ask_dataset, ask_track_name, ask_id;
  std::int64_t ask_limit = 0;
  ask_cmd->add_option("--dataset", ask_dataset, "question file (JSONL or JSON array)")->required();
  ask_cmd->add_option("--track", ask_track_name, "saq or mcq")->required();
  ask_cmd->add_option("--id", ask_id, "answer only this question id");
  ask_cmd->add_option("--limit", ask_limit, "answer only the first N questions")
      ->check(CLI::PositiveNumber);

  // run-track
  auto* run_cmd = app.add_subcommand("run-track", "answer a full track and write predictions");
  CommonFlags run_flags;
  add_common_flags(run_cmd, run_flags);
  std::string run_dataset, run_track_name, run_out, run_scheme = "simple-avg";
  run_cmd->add_option("--dataset", run_dataset, "question file")->required();
  run_cmd->add_option("--track", run_track_name, "saq or mcq")->required();
  run_cmd->add_option("--out", run_out, "output directory")->required();
  run_cmd->add_option("--scheme", run_scheme, "aggregation scheme")
      ->check(CLI::IsMember({"simple-avg", "weighted-by-count"}));

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score a predictions file against a dataset");
  std::string eval_dataset, eval_track_name, eval_predictions, eval_out,
      eval_scheme = "simple-avg";
  eval_cmd->add_option("--dataset", eval_dataset, "question file")->required();
  eval_cmd->add_option("--track", eval_track_name, "saq or mcq")->required();
  eval_cmd->add_option("--predictions", eval_predictions, "predictions file")->required();
  eval_cmd->add_option("--scheme", eval_scheme, "aggregation scheme")
      ->check(CLI::IsMember({"simple-avg", "weighted-by-count"}));
  eval_cmd->add_option("--out", eval_out, "write report JSON here");

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "run the prompt ablation over one track");
  CommonFlags ablate_flags;
  add_common_flags(ablate_cmd, ablate_flags);
  std::string ablate_dataset, ablate_track_name, ablate_out, ablate_scheme = "simple-avg";
  std::vector<std::string> ablate_prompts = {"mp", "rp-v1", "rp-v2"};
  ablate_cmd->add_option("--dataset", ablate_dataset, "question file")->required();
  ablate_cmd->add_option("--track", ablate_track_name, "saq or mcq")->required();
  ablate_cmd->add_option("--out", ablate_out, "output directory")->required();
  ablate_cmd->add_option("--prompts", ablate_prompts, "prompt variants to run, in order")
      ->check(CLI::IsMember({"mp", "rp-v1", "rp-v2"}));
  ablate_cmd->add_option("--scheme", ablate_scheme, "aggregation scheme")
      ->check(CLI::IsMember({"simple-avg", "weighted-by-count"}));

  // fetch-wiki
  auto* fetch_cmd = app.add_subcommand("fetch-wiki", "fetch page summaries (needs network)");
  std::string fetch_keywords, fetch_language, fetch_out, fetch_base;
  fetch_cmd->add_option("--keywords", fetch_keywords, "keyword list file")->required();
  fetch_cmd->add_option("--language", fetch_language, "wiki language code, e.g. en")->required();
  fetch_cmd->add_option("--out", fetch_out, "output directory for page files")->required();
  fetch_cmd->add_option("--base-url", fetch_base, "override the wiki endpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are a configuration error
  }

  try {
    if (build_cmd->parsed()) {
      const EngineConfig config = resolve_config(build_flags);
      auto locale = Locale::from_string(build_locale);
      if (!locale) throw ConfigError("malformed locale \"" + build_locale + "\"");
      std::optional<std::filesystem::path> curated;
      if (!build_curated.empty()) curated = build_curated;
      const BuildSummary s = build_kb(config, *locale, build_keywords, build_pages, curated);
      std::printf("built %s: %zu entries (%zu summary, %zu body, %zu curated)\n",
                  s.entries_path.string().c_str(), s.total(), s.wiki_summary, s.wiki_body,
                  s.curated);
      return 0;
    }

    if (index_cmd->parsed()) {
      const EngineConfig config = resolve_config(index_flags);
      const Providers providers = make_providers(config, /*allow_live_search=*/false);
      const IndexSummary s = index_country(config, index_country_code, *providers.embedder);
      std::printf("indexed %zu entries (dimension %zu) into %s\n", s.items, s.dimension,
                  s.index_dir.string().c_str());
      return 0;
    }

    if (ask_cmd->parsed()) {
      const EngineConfig config = resolve_config(ask_flags);
      const Track track = parse_track(ask_track_name);
      std::vector<Question> questions = load_questions(ask_dataset, track);
      if (!ask_id.empty()) {
        std::vector<Question> picked;
        for (auto& q : questions) {
          if (q.id == ask_id) picked.push_back(std::move(q));
        }
        if (picked.empty()) throw ConfigError("no question with id \"" + ask_id + "\"");
        questions = std::move(picked);
      } else if (ask_limit > 0 && static_cast<std::size_t>(ask_limit) < questions.size()) {
        questions.resize(static_cast<std::size_t>(ask_limit));
      }
      const AskOutcome outcome = ask_questions(questions, config);
      for (std::size_t i = 0; i < outcome.records.size(); ++i) {
        std::cout << record_to_json(outcome.records[i], outcome.errors[i]).dump() << "\n";
      }
      return outcome.error_count ? 1 : 0;
    }

    if (run_cmd->parsed()) {
      const EngineConfig config = resolve_config(run_flags);
      const Track track = parse_track(run_track_name);
      const RunOutcome outcome =
          run_track(run_dataset, track, config, run_out, parse_scheme(run_scheme));
      std::printf("answered %zu question(s), %zu error(s); outputs in %s\n",
                  outcome.records.size(), outcome.error_count, run_out.c_str());
      if (outcome.report) std::cout << format_report_table(*outcome.report);
      return outcome.error_count ? 1 : 0;
    }

    if (eval_cmd->parsed()) {
      const Track track = parse_track(eval_track_name);
      const Report report =
          evaluate_run(eval_dataset, track, eval_predictions, parse_scheme(eval_scheme));
      std::cout << format_report_table(report);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      if (!eval_out.empty()) {
        std::ofstream out(eval_out);
        if (!out) throw Error("cannot write report file " + eval_out);
        out << report_to_json(report).dump(2) << "\n";
      }
      return 0;
    }

    if (ablate_cmd->parsed()) {
      const EngineConfig config = resolve_config(ablate_flags);
      const Track track = parse_track(ablate_track_name);
      std::vector<TemplateId> ids;
      for (const auto& p : ablate_prompts) ids.push_back(*template_from_name(p));
      const AblationTable table =
          run_ablation(ablate_dataset, track, config, ids, ablate_out, parse_scheme(ablate_scheme));
      for (const auto& row : table.rows) {
        std::printf("%-6s overall %s\n", template_name(row.template_id),
                    format2(row.report.overall).c_str());
      }
      for (const auto& e : table.errors) std::cerr << "error: " << e << "\n";
      std::printf("ablation outputs in %s\n", ablate_out.c_str());
      return table.partial ? 1 : 0;
    }

    if (fetch_cmd->parsed()) {
      const auto keywords = load_keywords(fetch_keywords);
      const FetchOutcome outcome =
          fetch_wiki(keywords, fetch_language, fetch_out, fetch_base);
      std::printf("fetched %zu page(s) into %s\n", outcome.fetched, fetch_out.c_str());
      for (const auto& f : outcome.failures) std::cerr << "failed: " << f << "\n";
      return outcome.failures.empty() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable with require_subcommand(1)
}
