#ifndef CULRAG_NORMALIZE_HPP
#define CULRAG_NORMALIZE_HPP

#include <string>
#include <string_view>

#include "culrag/locale.hpp"
#include "culrag/unicode.hpp"

namespace culrag {

/// An answer string together with its canonical matching form.
struct NormalizedAnswer {
  std::string surface;
  std::string normalized;
};

namespace detail {

inline bool is_terminal_punct(char32_t cp) {
  switch (cp) {
    case U'.':
    case U'。':  // 。
    case U'!':
    case U'?':
    case U'！':  // ！
    case U'？':  // ？
      return true;
    default:
      return false;
  }
}

inline std::string normalize_pass(std::string_view text, const Locale& locale) {
  std::u32string cps = uni::to_utf32(uni::nfkc(text));

  // Trim, then collapse interior whitespace runs to a single space.
  std::u32string collapsed;
  collapsed.reserve(cps.size());
  std::size_t begin = 0, end = cps.size();
  while (begin < end && uni::is_space(cps[begin])) ++begin;
  while (end > begin && uni::is_space(cps[end - 1])) --end;
  bool in_run = false;
  for (std::size_t i = begin; i < end; ++i) {
    if (uni::is_space(cps[i])) {
      if (!in_run) collapsed.push_back(U' ');
      in_run = true;
    } else {
      collapsed.push_back(cps[i]);
      in_run = false;
    }
  }

  std::u32string folded = uni::to_utf32(uni::casefold(uni::to_utf8(collapsed)));

  while (!folded.empty() && is_terminal_punct(folded.back())) folded.pop_back();
  while (!folded.empty() && uni::is_space(folded.back())) folded.pop_back();

  if (locale.language == "zh") {
    std::u32string no_spaces;
    no_spaces.reserve(folded.size());
    for (char32_t cp : folded) {
      if (!uni::is_space(cp)) no_spaces.push_back(cp);
    }
    folded.swap(no_spaces);
  }
  return uni::to_utf8(folded);
}

}  // namespace detail

/// Canonical answer form: NFKC, whitespace trim/collapse, case folding,
/// terminal sentence punctuation stripped, and (for Chinese) all internal
/// spaces removed. Applied to a fixed point so the result is idempotent even
/// for inputs where case folding denormalizes.
inline std::string normalize_text(std::string_view text, const Locale& locale) {
  std::string current = detail::normalize_pass(text, locale);
  for (int i = 0; i < 3; ++i) {
    std::string next = detail::normalize_pass(current, locale);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

inline NormalizedAnswer normalize_answer(std::string_view text, const Locale& locale) {
  return NormalizedAnswer{std::string(text), normalize_text(text, locale)};
}

}  // namespace culrag

#endif  // CULRAG_NORMALIZE_HPP
