#ifndef CULRAG_PROMPTS_HPP
#define CULRAG_PROMPTS_HPP

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "culrag/locale.hpp"
#include "culrag/normalize.hpp"
#include "culrag/question.hpp"

namespace culrag {

enum class TemplateId { MP, RP_V1, RP_V2 };

inline constexpr std::array<TemplateId, 3> kAllTemplates = {TemplateId::MP, TemplateId::RP_V1,
                                                            TemplateId::RP_V2};

inline const char* template_name(TemplateId id) {
  switch (id) {
    case TemplateId::MP: return "mp";
    case TemplateId::RP_V1: return "rp-v1";
    case TemplateId::RP_V2: return "rp-v2";
  }
  return "mp";
}

inline std::optional<TemplateId> template_from_name(std::string_view s) {
  std::string k;
  for (char c : s) k.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (k == "mp") return TemplateId::MP;
  if (k == "rp-v1") return TemplateId::RP_V1;
  if (k == "rp-v2") return TemplateId::RP_V2;
  return std::nullopt;
}

// The three preambles are fixed text; the copies in prompts/*.txt carry the
// reference checksums and the fidelity test fails on any byte drift here.

inline constexpr std::string_view kMinimalPrompt =
    R"PROMPT(Our goal is to give one short, correct answer for each question in its original language.

)PROMPT";

inline constexpr std::string_view kRefinedPromptV1 =
    R"PROMPT(You are a factual multilingual assistant for a question-answering benchmark.
Your goal is to give one short, correct answer for each question in its original language.

Instructions:
- Read the question carefully.
- Respond ONLY with the concise answer — a word, number, name, or short phrase.
- Do not include explanations, reasoning, labels, or extra words.
- If the question asks for a person, place, or date, give only that entity.
- Keep the answer in the SAME language as the question
  (Chinese → Chinese, English → English, Spanish → Spanish).

Now answer the following question.

)PROMPT";

inline constexpr std::string_view kRefinedPromptV2 =
    R"PROMPT(You are a factual, multilingual assistant for a question-answering benchmark.
Your goal is to produce ONE short, correct answer for each question in its original language.
Before answering, please think about the task:

1. Question Analysis:
- Identify the language of the question.
- Identify what type of information is being asked (person, place, date, object, concept, number, or other).

2. Information Focus:
- Determine the single factual element required to answer the question.
- Ignore any irrelevant or descriptive details.

3. Answer Strategy:
- Recall general world knowledge relevant to the question.
- Prefer the most standard, widely accepted answer.
- Avoid over-specific or explanatory phrasing.

4. Error Avoidance:
- Do NOT include explanations, reasoning, or extra words.
- Do NOT translate or restate the question.
- Do NOT include multiple candidates or alternatives.

After this internal analysis, provide ONLY the final answer.

Answering Rules:
- Output a single short answer (a word, name, number, or short phrase).
- Keep the answer in the SAME language as the question.
- Do not include labels, punctuation, or additional text.
- If uncertain, give your best plausible short answer based on general knowledge.

Now answer the following question.

)PROMPT";

inline std::string_view preamble(TemplateId id) {
  switch (id) {
    case TemplateId::MP: return kMinimalPrompt;
    case TemplateId::RP_V1: return kRefinedPromptV1;
    case TemplateId::RP_V2: return kRefinedPromptV2;
  }
  return kMinimalPrompt;
}

struct RenderOptions {
  // Extra per-stage rule, rendered between the context block and the
  // question (the cascade uses it for its supported-by-context gate).
  std::string instruction;
};

/// Assembles the full prompt: preamble, optional Context block (one `- `
/// line per evidence item), optional stage instruction, the question, the
/// MCQ options in dataset order, and the trailing `Answer:` cue.
inline std::string render(TemplateId id, const Question& question,
                          const std::vector<std::string>& context,
                          const RenderOptions& options = {}) {
  std::string out(preamble(id));
  if (!context.empty()) {
    out += "Context:\n";
    for (const auto& item : context) {
      out += "- ";
      out += item;
      out += "\n";
    }
    out += "\n";
  }
  if (!options.instruction.empty()) {
    out += options.instruction;
    out += "\n\n";
  }
  out += "Question: ";
  out += question.text;
  out += "\n";
  if (question.track == Track::MCQ) {
    out += "Options:\n";
    for (const auto& o : question.options) {
      out += o.label;
      out += ") ";
      out += o.text;
      out += "\n";
    }
  }
  out += "Answer:";
  return out;
}

enum class AnswerKind { ANSWER, ABSTAIN };

inline constexpr std::string_view kNoAnswerToken = "<NO_ANSWER>";

/// Parsed model output. kind is ABSTAIN exactly when the raw output carries
/// the literal <NO_ANSWER> token; text keeps the stripped surface form and
/// normalization happens at match time.
struct ParsedAnswer {
  AnswerKind kind = AnswerKind::ANSWER;
  std::string text;
  std::string raw;

  bool operator==(const ParsedAnswer&) const = default;
};

namespace detail {

inline std::string_view trim_view(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool strip_prefix_ci(std::string_view& s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  s.remove_prefix(prefix.size());
  return true;
}

inline std::string_view strip_answer_label(std::string_view line) {
  for (std::string_view label : {"answer:", "respuesta:"}) {
    std::string_view s = line;
    if (strip_prefix_ci(s, label)) return trim_view(s);
  }
  for (std::string_view label : {"答案：", "答案:"}) {
    if (line.substr(0, label.size()) == label) return trim_view(line.substr(label.size()));
  }
  return line;
}

}  // namespace detail

/// Total over arbitrary model output. Abstention detection first, otherwise
/// the first non-empty line with a leading answer label stripped.
inline ParsedAnswer parse_answer(std::string_view raw, const Locale& /*locale*/) {
  ParsedAnswer parsed;
  parsed.raw = std::string(raw);
  if (raw.find(kNoAnswerToken) != std::string_view::npos) {
    parsed.kind = AnswerKind::ABSTAIN;
    return parsed;
  }
  parsed.kind = AnswerKind::ANSWER;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    std::string_view line = raw.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    std::string_view t = detail::trim_view(line);
    if (!t.empty()) {
      parsed.text = std::string(detail::strip_answer_label(t));
      return parsed;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return parsed;  // no non-empty line: empty answer text
}

/// MCQ label resolution: exact label match, then case-folded label match,
/// then normalized-text match against the option texts. No match means the
/// prediction cannot be credited.
inline std::optional<std::string> resolve_option_label(const ParsedAnswer& parsed,
                                                       const Question& question) {
  if (parsed.kind == AnswerKind::ABSTAIN) return std::nullopt;
  const std::string raw_text(detail::trim_view(parsed.text));
  for (const auto& o : question.options) {
    if (raw_text == o.label) return o.label;
  }
  const std::string norm = normalize_text(raw_text, question.locale);
  for (const auto& o : question.options) {
    if (norm == normalize_text(o.label, question.locale)) return o.label;
  }
  for (const auto& o : question.options) {
    if (!norm.empty() && norm == normalize_text(o.text, question.locale)) return o.label;
  }
  return std::nullopt;
}

}  // namespace culrag

#endif  // CULRAG_PROMPTS_HPP
