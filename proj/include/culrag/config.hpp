#ifndef CULRAG_CONFIG_HPP
#define CULRAG_CONFIG_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "culrag/cascade.hpp"
#include "culrag/chunker.hpp"
#include "culrag/errors.hpp"
#include "culrag/prompts.hpp"
#include "culrag/routing.hpp"

namespace culrag {

/// Everything a run needs, resolvable from defaults, a config file, the
/// environment, and CLI flags (later sources win in that order). The
/// resolved value is echoed into each run's output directory so a run can
/// be replayed from its artifacts alone.
struct EngineConfig {
  RoutingConfig routing;  // includes the rag-base/rag-web mode switch
  ChunkingConfig chunking;
  std::size_t k = 3;
  double similarity_floor = 0.35;
  std::string endpoint = "http://localhost:11434";
  std::string embed_model = "mistral:7b";
  TemplateId template_id = TemplateId::RP_V1;
  bool use_local_db = true;
  std::size_t jobs = 1;
  std::string search = "cache-only";  // "live" | "fixture:<dir>" | "cache-only"
  std::string search_cache_dir = "cache/search";
  std::size_t web_top_n = 8;
  std::string kb_root = "kb";
  GenOptions gen;
  DirectPatterns patterns = DirectPatterns::defaults();

  Mode mode() const { return routing.mode; }
};

inline nlohmann::ordered_json config_to_json(const EngineConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = mode_name(c.routing.mode);
  j["routing"] = {{"base_model", c.routing.base_model},
                  {"default_model", c.routing.default_model},
                  {"chinese_model", c.routing.chinese_model},
                  {"chinese_variants", c.routing.chinese_variants}};
  j["chunking"] = {{"chunk_size", c.chunking.chunk_size}, {"overlap", c.chunking.overlap}};
  j["k"] = c.k;
  j["similarity_floor"] = c.similarity_floor;
  j["endpoint"] = c.endpoint;
  j["embed_model"] = c.embed_model;
  j["prompt"] = template_name(c.template_id);
  j["use_local_db"] = c.use_local_db;
  j["jobs"] = c.jobs;
  j["search"] = c.search;
  j["search_cache_dir"] = c.search_cache_dir;
  j["web_top_n"] = c.web_top_n;
  j["kb_root"] = c.kb_root;
  j["generation"] = {{"temperature", c.gen.temperature},
                     {"max_tokens", c.gen.max_tokens},
                     {"stop", c.gen.stop}};
  nlohmann::ordered_json pats = nlohmann::ordered_json::object();
  for (const auto& [language, list] : c.patterns.by_language) pats[language] = list;
  j["direct_patterns"] = pats;
  return j;
}

/// Applies the fields present in `j` on top of `base`. Unknown keys are an
/// error: a typoed knob must not silently fall back to a default.
inline EngineConfig config_from_json(const nlohmann::json& j, EngineConfig base = {}) {
  if (!j.is_object()) throw ConfigError("config root is not a JSON object");
  static const std::set<std::string> known = {
      "mode",    "routing",      "chunking", "k",     "similarity_floor",
      "endpoint", "embed_model", "prompt",   "use_local_db", "jobs",
      "search",  "search_cache_dir", "web_top_n", "kb_root", "generation",
      "direct_patterns"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key \"" + key + "\"");
  }

  EngineConfig c = std::move(base);
  if (j.contains("mode")) {
    const std::string m = j.at("mode").get<std::string>();
    if (m == "rag-base") {
      c.routing.mode = Mode::RAG_BASE;
    } else if (m == "rag-web") {
      c.routing.mode = Mode::RAG_WEB;
    } else {
      throw ConfigError("unknown mode \"" + m + "\" (expected rag-base or rag-web)");
    }
  }
  if (j.contains("routing")) {
    const auto& r = j.at("routing");
    if (r.contains("base_model")) c.routing.base_model = r.at("base_model").get<std::string>();
    if (r.contains("default_model"))
      c.routing.default_model = r.at("default_model").get<std::string>();
    if (r.contains("chinese_model"))
      c.routing.chinese_model = r.at("chinese_model").get<std::string>();
    if (r.contains("chinese_variants")) {
      c.routing.chinese_variants.clear();
      for (const auto& v : r.at("chinese_variants"))
        c.routing.chinese_variants.insert(v.get<std::string>());
    }
  }
  if (j.contains("chunking")) {
    const auto& ch = j.at("chunking");
    if (ch.contains("chunk_size")) c.chunking.chunk_size = ch.at("chunk_size").get<std::size_t>();
    if (ch.contains("overlap")) c.chunking.overlap = ch.at("overlap").get<std::size_t>();
    c.chunking.validate();
  }
  if (j.contains("k")) c.k = j.at("k").get<std::size_t>();
  if (j.contains("similarity_floor")) c.similarity_floor = j.at("similarity_floor").get<double>();
  if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
  if (j.contains("embed_model")) c.embed_model = j.at("embed_model").get<std::string>();
  if (j.contains("prompt")) {
    const std::string p = j.at("prompt").get<std::string>();
    auto id = template_from_name(p);
    if (!id) throw ConfigError("unknown prompt template \"" + p + "\"");
    c.template_id = *id;
  }
  if (j.contains("use_local_db")) c.use_local_db = j.at("use_local_db").get<bool>();
  if (j.contains("jobs")) {
    c.jobs = j.at("jobs").get<std::size_t>();
    if (c.jobs == 0) throw ConfigError("jobs must be at least 1");
  }
  if (j.contains("search")) c.search = j.at("search").get<std::string>();
  if (j.contains("search_cache_dir"))
    c.search_cache_dir = j.at("search_cache_dir").get<std::string>();
  if (j.contains("web_top_n")) c.web_top_n = j.at("web_top_n").get<std::size_t>();
  if (j.contains("kb_root")) c.kb_root = j.at("kb_root").get<std::string>();
  if (j.contains("generation")) {
    const auto& g = j.at("generation");
    if (g.contains("temperature")) c.gen.temperature = g.at("temperature").get<double>();
    if (g.contains("max_tokens")) c.gen.max_tokens = g.at("max_tokens").get<int>();
    if (g.contains("stop")) {
      c.gen.stop.clear();
      for (const auto& s : g.at("stop")) c.gen.stop.push_back(s.get<std::string>());
    }
  }
  if (j.contains("direct_patterns")) {
    c.patterns.by_language.clear();
    for (const auto& [language, list] : j.at("direct_patterns").items()) {
      std::vector<std::string> pats;
      for (const auto& p : list) pats.push_back(p.get<std::string>());
      c.patterns.by_language[language] = std::move(pats);
    }
  }
  return c;
}

inline EngineConfig load_config(const std::filesystem::path& path, EngineConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(base));
}

/// Environment override, applied between the config file and CLI flags.
inline void apply_env(EngineConfig& config) {
  if (const char* ep = std::getenv("CULRAG_MODEL_ENDPOINT")) {
    if (*ep) config.endpoint = ep;
  }
}

inline void save_config(const EngineConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write config file " + path.string());
  out << config_to_json(config).dump(2) << "\n";
}

}  // namespace culrag

#endif  // CULRAG_CONFIG_HPP
