#ifndef CULRAG_EVALUATOR_HPP
#define CULRAG_EVALUATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "culrag/errors.hpp"
#include "culrag/locale.hpp"
#include "culrag/normalize.hpp"
#include "culrag/prompts.hpp"
#include "culrag/question.hpp"

namespace culrag {

enum class AggregationScheme { SIMPLE_AVG, WEIGHTED_BY_COUNT };

inline const char* scheme_name(AggregationScheme s) {
  return s == AggregationScheme::SIMPLE_AVG ? "SIMPLE_AVG" : "WEIGHTED_BY_COUNT";
}

/// Round a percentage to 2 decimals by truncation. The published averages
/// demand it: (82.86 + 80.83 + 65.71) / 3 = 76.466... is reported as 76.46,
/// which half-up rounding would print as 76.47. The epsilon keeps exact
/// two-decimal quotients (e.g. 48.45 / 3) from slipping a cent under
/// floating-point error.
inline double round2(double value) {
  return std::floor(value * 100.0 + 1e-7) / 100.0;
}

inline std::string format2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

/// True iff the normalized prediction matches any normalized reference.
/// Abstentions never score.
inline bool score_saq(const ParsedAnswer& prediction, const std::vector<std::string>& references,
                      const Locale& locale) {
  if (references.empty()) {
    throw Error("score_saq: no reference answers (unlabeled item reached the scorer)");
  }
  if (prediction.kind != AnswerKind::ANSWER) return false;
  const std::string pred = normalize_text(prediction.text, locale);
  for (const auto& r : references) {
    if (pred == normalize_text(r, locale)) return true;
  }
  return false;
}

/// True iff the prediction carries the gold option label. The caller
/// resolves free-form answers to a label first (resolve_option_label);
/// here the comparison is exact.
inline bool score_mcq(const ParsedAnswer& prediction, const std::string& gold_label) {
  if (prediction.kind != AnswerKind::ANSWER) return false;
  return prediction.text == gold_label;
}

/// Score one dataset question against the answer string recorded for it.
/// MCQ answers are resolved to an option label before comparison.
inline bool score_item(const Question& question, const std::string& answer) {
  ParsedAnswer parsed = parse_answer(answer, question.locale);
  if (question.track == Track::MCQ) {
    if (!question.gold_label) {
      throw Error("score_item: question " + question.id + " has no gold label");
    }
    if (parsed.kind != AnswerKind::ANSWER) return false;
    const auto label = resolve_option_label(parsed, question);
    if (!label) return false;
    parsed.text = *label;
    return score_mcq(parsed, *question.gold_label);
  }
  return score_saq(parsed, question.references, question.locale);
}

struct ItemResult {
  std::string id;
  Locale locale;
  bool correct = false;
};

/// Scores grouped at the three reporting levels. All percentages are
/// rounded to 2 decimals; each level derives from the rounded level below
/// it, which is the arithmetic that reproduces the published tables.
struct Report {
  std::map<std::string, double> per_variant;   // locale string -> accuracy %
  std::map<std::string, double> per_language;  // language -> accuracy %
  double overall = 0.0;
  std::map<std::string, std::size_t> counts;  // locale string -> question count
  AggregationScheme scheme = AggregationScheme::SIMPLE_AVG;
  std::vector<std::string> warnings;
};

/// Unweighted mean of per-language scores, rounded as reported. This is the
/// final column-average step of the ablation tables.
inline double average_language_scores(const std::vector<double>& scores) {
  if (scores.empty()) throw Error("average_language_scores: empty input");
  double sum = 0.0;
  for (double s : scores) sum += s;
  return round2(sum / static_cast<double>(scores.size()));
}

/// Fold per-item correctness into a Report. `requested` locales with zero
/// scored items are omitted from the report and flagged in warnings.
inline Report aggregate(const std::vector<ItemResult>& items, AggregationScheme scheme,
                        const std::vector<Locale>& requested = {}) {
  Report report;
  report.scheme = scheme;

  struct Tally {
    std::size_t correct = 0;
    std::size_t total = 0;
  };
  std::map<std::string, Tally> by_variant;
  for (const auto& item : items) {
    auto& t = by_variant[item.locale.str()];
    t.total += 1;
    if (item.correct) t.correct += 1;
  }

  for (const auto& loc : requested) {
    if (!by_variant.count(loc.str())) {
      report.warnings.push_back("no scored items for locale " + loc.str() + "; omitted");
    }
  }

  // language -> (variant accuracy, variant count) pairs
  std::map<std::string, std::vector<std::pair<double, std::size_t>>> by_language;
  for (const auto& [locale_str, tally] : by_variant) {
    const double acc = round2(100.0 * static_cast<double>(tally.correct) /
                              static_cast<double>(tally.total));
    report.per_variant[locale_str] = acc;
    report.counts[locale_str] = tally.total;
    by_language[locale_str.substr(0, 2)].push_back({acc, tally.total});
  }

  std::vector<double> language_scores;
  for (const auto& [language, variants] : by_language) {
    double value = 0.0;
    if (scheme == AggregationScheme::SIMPLE_AVG) {
      double sum = 0.0;
      for (const auto& [acc, n] : variants) sum += acc;
      value = round2(sum / static_cast<double>(variants.size()));
    } else {
      double weighted = 0.0;
      std::size_t total = 0;
      for (const auto& [acc, n] : variants) {
        weighted += acc * static_cast<double>(n);
        total += n;
      }
      value = round2(weighted / static_cast<double>(total));
    }
    report.per_language[language] = value;
    language_scores.push_back(value);
  }

  report.overall = language_scores.empty() ? 0.0 : average_language_scores(language_scores);
  return report;
}

inline nlohmann::ordered_json report_to_json(const Report& report) {
  nlohmann::ordered_json j;
  j["scheme"] = scheme_name(report.scheme);
  j["per_variant"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.per_variant) j["per_variant"][k] = v;
  j["per_language"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.per_language) j["per_language"][k] = v;
  j["overall"] = report.overall;
  j["counts"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.counts) j["counts"][k] = v;
  j["warnings"] = report.warnings;
  return j;
}

/// Fixed-width text view of a report, one locale per row, then the
/// language and overall summary lines.
inline std::string format_report_table(const Report& report) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %10s %8s\n", "variant", "accuracy", "count");
  out += line;
  out += std::string(32, '-') + "\n";
  for (const auto& [locale_str, acc] : report.per_variant) {
    std::snprintf(line, sizeof(line), "%-12s %10s %8zu\n", locale_str.c_str(),
                  format2(acc).c_str(), report.counts.at(locale_str));
    out += line;
  }
  out += std::string(32, '-') + "\n";
  for (const auto& [language, acc] : report.per_language) {
    std::snprintf(line, sizeof(line), "%-12s %10s\n", language.c_str(), format2(acc).c_str());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-12s %10s   (%s)\n", "overall",
                format2(report.overall).c_str(), scheme_name(report.scheme));
  out += line;
  return out;
}

struct AblationRow {
  TemplateId template_id;
  Report report;
};

struct AblationTable {
  std::vector<AblationRow> rows;  // in the requested prompt order
  Track track = Track::SAQ;
  bool partial = false;           // a variant pass aborted
  std::vector<std::string> errors;
};

/// Plot-ready series: one row per (prompt, language), prompts in table
/// order, languages alphabetical within a prompt.
inline std::string ablation_curve_csv(const AblationTable& table) {
  std::string out = "prompt_id,language,track,score\n";
  for (const auto& row : table.rows) {
    for (const auto& [language, score] : row.report.per_language) {
      out += template_name(row.template_id);
      out += ",";
      out += language;
      out += ",";
      out += track_name(table.track);
      out += ",";
      out += format2(score);
      out += "\n";
    }
  }
  return out;
}

inline nlohmann::ordered_json ablation_to_json(const AblationTable& table) {
  nlohmann::ordered_json j;
  j["track"] = track_name(table.track);
  j["partial"] = table.partial;
  j["errors"] = table.errors;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json r;
    r["prompt_id"] = template_name(row.template_id);
    r["report"] = report_to_json(row.report);
    j["rows"].push_back(std::move(r));
  }
  return j;
}

}  // namespace culrag

#endif  // CULRAG_EVALUATOR_HPP
