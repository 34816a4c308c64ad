#ifndef CULRAG_ROUTING_HPP
#define CULRAG_ROUTING_HPP

#include <set>
#include <string>

#include "culrag/locale.hpp"

namespace culrag {

enum class Mode { RAG_BASE, RAG_WEB };

inline const char* mode_name(Mode m) { return m == Mode::RAG_BASE ? "rag-base" : "rag-web"; }

/// Model selection knobs. Model identifiers are opaque strings; routing
/// logic never hard-codes them.
struct RoutingConfig {
  Mode mode = Mode::RAG_BASE;
  std::string base_model = "gemma3:4b";            // every locale under rag-base
  std::string default_model = "mistral:7b";        // non-Chinese locales under rag-web
  std::string chinese_model = "deepseek-llm:67b";  // configured Chinese variants under rag-web
  std::set<std::string> chinese_variants = {"zh-CN", "zh-TW", "zh-SG"};

  bool operator==(const RoutingConfig&) const = default;
};

/// The per-question serving decision: which model answers, which country
/// knowledge base is consulted, and the language the prompt addresses.
struct RouteDecision {
  std::string model_id;
  std::string kb_id;  // country component of the locale
  Locale prompt_language;

  bool operator==(const RouteDecision&) const = default;
};

/// Pure function of (locale, config). The Chinese-variant set, not the
/// language code, decides the large-model switch: a zh locale outside the
/// configured set routes to the default model.
inline RouteDecision route(const Locale& locale, const RoutingConfig& config) {
  RouteDecision d;
  if (config.mode == Mode::RAG_BASE) {
    d.model_id = config.base_model;
  } else {
    d.model_id = config.chinese_variants.contains(locale.str())
                     ? config.chinese_model
                     : config.default_model;
  }
  d.kb_id = locale.region;
  d.prompt_language = locale;
  return d;
}

}  // namespace culrag

#endif  // CULRAG_ROUTING_HPP
