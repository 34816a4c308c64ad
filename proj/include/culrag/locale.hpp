#ifndef CULRAG_LOCALE_HPP
#define CULRAG_LOCALE_HPP

#include <optional>
#include <string>
#include <string_view>

#include "culrag/errors.hpp"

namespace culrag {

/// A language-region pair such as zh-CN: ISO 639-1 language code (two
/// lowercase letters) plus ISO 3166-1 alpha-2 region code (two uppercase
/// letters).
struct Locale {
  std::string language;
  std::string region;

  std::string str() const { return language + "-" + region; }

  bool operator==(const Locale&) const = default;
  auto operator<=>(const Locale&) const = default;

  bool valid() const {
    return language.size() == 2 && region.size() == 2 &&
           is_lower(language[0]) && is_lower(language[1]) &&
           is_upper(region[0]) && is_upper(region[1]);
  }

  /// Parses an exact `xx-YY` string.
  static std::optional<Locale> from_string(std::string_view s) {
    if (s.size() != 5 || s[2] != '-') return std::nullopt;
    Locale l{std::string(s.substr(0, 2)), std::string(s.substr(3, 2))};
    if (!l.valid()) return std::nullopt;
    return l;
  }

  static bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
  static bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
};

/// Scans left to right for the first `xx-YY` token embedded in a question id.
inline std::optional<Locale> find_locale(std::string_view id) noexcept {
  if (id.size() < 5) return std::nullopt;
  for (std::size_t i = 0; i + 5 <= id.size(); ++i) {
    if (Locale::is_lower(id[i]) && Locale::is_lower(id[i + 1]) &&
        id[i + 2] == '-' && Locale::is_upper(id[i + 3]) &&
        Locale::is_upper(id[i + 4])) {
      return Locale{std::string(id.substr(i, 2)), std::string(id.substr(i + 3, 2))};
    }
  }
  return std::nullopt;
}

/// Like find_locale but throws when the id carries no locale token.
inline Locale parse_locale(std::string_view question_id) {
  auto loc = find_locale(question_id);
  if (!loc) {
    throw ParseError("no locale token in id \"" + std::string(question_id) + "\"");
  }
  return *loc;
}

}  // namespace culrag

#endif  // CULRAG_LOCALE_HPP
