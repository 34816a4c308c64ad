#include <gtest/gtest.h>

#include <optional>
#include <random>
#include <string>

#include "culrag/locale.hpp"
#include "culrag/routing.hpp"

namespace culrag {
namespace {

// Independent reference scan for the first xx-YY window, kept deliberately
// separate from the library implementation.
std::optional<std::string> reference_first_locale(const std::string& id) {
  for (std::size_t i = 0; i + 5 <= id.size(); ++i) {
    const bool match = id[i] >= 'a' && id[i] <= 'z' && id[i + 1] >= 'a' && id[i + 1] <= 'z' &&
                       id[i + 2] == '-' && id[i + 3] >= 'A' && id[i + 3] <= 'Z' &&
                       id[i + 4] >= 'A' && id[i + 4] <= 'Z';
    if (match) return id.substr(i, 5);
  }
  return std::nullopt;
}

TEST(Routing, RagBaseUsesTheBaseModelEverywhere) {
  const RoutingConfig config;  // mode defaults to RAG_BASE
  for (const char* tag : {"en-GB", "es-MX", "zh-CN", "zh-TW", "fr-FR"}) {
    const auto d = route(*Locale::from_string(tag), config);
    EXPECT_EQ(d.model_id, "gemma3:4b") << tag;
  }
}

TEST(Routing, RagWebSplitsOnConfiguredChineseVariants) {
  RoutingConfig config;
  config.mode = Mode::RAG_WEB;
  EXPECT_EQ(route(*Locale::from_string("zh-CN"), config).model_id, "deepseek-llm:67b");
  EXPECT_EQ(route(*Locale::from_string("zh-TW"), config).model_id, "deepseek-llm:67b");
  EXPECT_EQ(route(*Locale::from_string("zh-SG"), config).model_id, "deepseek-llm:67b");
  // zh outside the configured variant set routes to the default model:
  // membership is by full locale, not by language code.
  EXPECT_EQ(route(*Locale::from_string("zh-HK"), config).model_id, "mistral:7b");
  EXPECT_EQ(route(*Locale::from_string("en-GB"), config).model_id, "mistral:7b");
  EXPECT_EQ(route(*Locale::from_string("es-MX"), config).model_id, "mistral:7b");
}

TEST(Routing, KbAndPromptLanguageFollowTheLocale) {
  RoutingConfig config;
  config.mode = Mode::RAG_WEB;
  const Locale loc = *Locale::from_string("es-MX");
  const auto d = route(loc, config);
  EXPECT_EQ(d.kb_id, "MX");
  EXPECT_EQ(d.prompt_language, loc);
}

TEST(Routing, CustomConfigIsHonored) {
  RoutingConfig config;
  config.mode = Mode::RAG_WEB;
  config.default_model = "small";
  config.chinese_model = "large";
  config.chinese_variants = {"zh-HK"};
  EXPECT_EQ(route(*Locale::from_string("zh-HK"), config).model_id, "large");
  EXPECT_EQ(route(*Locale::from_string("zh-CN"), config).model_id, "small");

  config.mode = Mode::RAG_BASE;
  config.base_model = "tiny";
  EXPECT_EQ(route(*Locale::from_string("zh-HK"), config).model_id, "tiny");
}

TEST(Routing, FuzzedIdsMatchReferenceAndAreDeterministic) {
  // 10,000 generated ids: locale extraction agrees with the independent
  // reference scan, and the decision is a pure function of (locale, config).
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> lower('a', 'z');
  std::uniform_int_distribution<int> upper('A', 'Z');
  std::uniform_int_distribution<int> any_printable(0x20, 0x7E);
  std::uniform_int_distribution<int> len(0, 18);
  std::uniform_int_distribution<int> coin(0, 3);

  RoutingConfig web;
  web.mode = Mode::RAG_WEB;
  const RoutingConfig base;

  auto random_junk = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += static_cast<char>(any_printable(rng));
    return s;
  };
  auto random_token = [&] {
    std::string t;
    t += static_cast<char>(lower(rng));
    t += static_cast<char>(lower(rng));
    t += '-';
    t += static_cast<char>(upper(rng));
    t += static_cast<char>(upper(rng));
    return t;
  };

  int embedded = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string id = random_junk(len(rng));
    const bool embed = coin(rng) != 0;  // most ids carry a valid token
    if (embed) {
      id += random_token();
      if (coin(rng) == 0) id += random_token();  // second token is ignored
      id += random_junk(len(rng) / 2);
    }

    const auto expected = reference_first_locale(id);
    const auto got = find_locale(id);
    ASSERT_EQ(got.has_value(), expected.has_value()) << "id: " << id;
    if (!got) continue;
    ++embedded;
    EXPECT_EQ(got->str(), *expected) << "id: " << id;

    // Purity: identical inputs give identical decisions.
    const auto d1 = route(*got, web);
    const auto d2 = route(*got, web);
    EXPECT_EQ(d1, d2);
    EXPECT_EQ(d1.kb_id, got->region);

    const bool chinese_variant = web.chinese_variants.contains(got->str());
    EXPECT_EQ(d1.model_id, chinese_variant ? web.chinese_model : web.default_model);
    EXPECT_EQ(route(*got, base).model_id, base.base_model);
  }
  // The generator must actually exercise the extraction path.
  EXPECT_GT(embedded, 5000);
}

}  // namespace
}  // namespace culrag
