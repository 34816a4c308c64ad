#ifndef CULRAG_QUESTION_HPP
#define CULRAG_QUESTION_HPP

#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "culrag/errors.hpp"
#include "culrag/locale.hpp"

namespace culrag {

enum class Track { SAQ, MCQ };

inline const char* track_name(Track t) { return t == Track::SAQ ? "SAQ" : "MCQ"; }

inline std::optional<Track> track_from_name(std::string_view s) {
  if (s == "SAQ" || s == "saq") return Track::SAQ;
  if (s == "MCQ" || s == "mcq") return Track::MCQ;
  return std::nullopt;
}

struct Option {
  std::string label;
  std::string text;

  bool operator==(const Option&) const = default;
};

/// One locale-tagged benchmark item. Immutable after construction; safe to
/// share across workers.
struct Question {
  std::string id;
  Locale locale;
  std::string text;
  Track track = Track::SAQ;
  std::vector<Option> options;           // MCQ only
  std::vector<std::string> references;   // SAQ gold answers, may be empty
  std::optional<std::string> gold_label; // MCQ gold option label

  bool operator==(const Question&) const = default;
};

namespace detail {

inline Question question_from_json(const nlohmann::json& rec, std::optional<Track> expected,
                                   const std::string& where) {
  if (!rec.is_object()) throw ParseError(where + ": record is not an object");
  Question q;
  if (!rec.contains("id") || !rec.at("id").is_string()) {
    throw ParseError(where + ": missing or non-string field \"id\"");
  }
  q.id = rec.at("id").get<std::string>();
  auto loc = find_locale(q.id);
  if (!loc) throw ParseError(where + ": no locale token in id \"" + q.id + "\"");
  q.locale = *loc;

  if (!rec.contains("question") || !rec.at("question").is_string()) {
    throw ParseError(where + ": missing or non-string field \"question\"");
  }
  q.text = rec.at("question").get<std::string>();

  if (rec.contains("track")) {
    auto t = track_from_name(rec.at("track").get<std::string>());
    if (!t) throw ParseError(where + ": unknown track \"" + rec.at("track").get<std::string>() + "\"");
    if (expected && *t != *expected) {
      throw ParseError(where + ": record track " + std::string(track_name(*t)) +
                       " does not match requested track " + track_name(*expected));
    }
    q.track = *t;
  } else if (expected) {
    q.track = *expected;
  } else {
    throw ParseError(where + ": record has no \"track\" field and no track was requested");
  }

  if (rec.contains("options") && !rec.at("options").is_null()) {
    if (!rec.at("options").is_array()) throw ParseError(where + ": field \"options\" is not an array");
    std::set<std::string> seen;
    for (const auto& opt : rec.at("options")) {
      if (!opt.contains("label") || !opt.contains("text")) {
        throw ParseError(where + ": option missing \"label\" or \"text\"");
      }
      Option o{opt.at("label").get<std::string>(), opt.at("text").get<std::string>()};
      if (!seen.insert(o.label).second) {
        throw ParseError(where + ": duplicate option label \"" + o.label + "\"");
      }
      q.options.push_back(std::move(o));
    }
  }
  if (q.track == Track::MCQ && q.options.empty()) {
    throw ParseError(where + ": MCQ record has no options");
  }
  if (q.track == Track::SAQ && !q.options.empty()) {
    throw ParseError(where + ": SAQ record carries options");
  }

  if (rec.contains("references") && !rec.at("references").is_null()) {
    if (!rec.at("references").is_array()) throw ParseError(where + ": field \"references\" is not an array");
    for (const auto& r : rec.at("references")) q.references.push_back(r.get<std::string>());
  }
  if (rec.contains("gold") && !rec.at("gold").is_null()) {
    q.gold_label = rec.at("gold").get<std::string>();
  }
  return q;
}

}  // namespace detail

inline nlohmann::ordered_json question_to_json(const Question& q) {
  nlohmann::ordered_json rec;
  rec["id"] = q.id;
  rec["question"] = q.text;
  rec["track"] = track_name(q.track);
  if (!q.options.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& o : q.options) arr.push_back({{"label", o.label}, {"text", o.text}});
    rec["options"] = arr;
  }
  if (!q.references.empty()) rec["references"] = q.references;
  if (q.gold_label) rec["gold"] = *q.gold_label;
  return rec;
}

/// Loads a dataset file: line-delimited JSON records, or a single JSON array.
/// Input order is preserved and every record yields exactly one Question.
/// With no requested track, every record must carry its own "track" field.
inline std::vector<Question> load_questions(const std::filesystem::path& path,
                                            std::optional<Track> track) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file " + path.string());

  std::vector<Question> out;
  std::string first_significant;
  {
    // Peek at the first non-whitespace character to detect the array form.
    char c;
    while (in.get(c)) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        first_significant = c;
        break;
      }
    }
    in.clear();
    in.seekg(0);
  }
  if (first_significant == "[") {
    nlohmann::json arr;
    try {
      in >> arr;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": invalid JSON array: " + e.what());
    }
    if (!arr.is_array()) throw ParseError(path.string() + ": expected a JSON array");
    std::size_t idx = 0;
    for (const auto& rec : arr) {
      out.push_back(detail::question_from_json(rec, track,
                                               path.filename().string() + "[" + std::to_string(idx) + "]"));
      ++idx;
    }
    return out;
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.filename().string() + ":" + std::to_string(line_no) +
                       ": invalid JSON: " + e.what());
    }
    out.push_back(detail::question_from_json(rec, track,
                                             path.filename().string() + ":" + std::to_string(line_no)));
  }
  return out;
}

inline void save_questions(const std::vector<Question>& questions,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file " + path.string());
  for (const auto& q : questions) out << question_to_json(q).dump() << "\n";
}

}  // namespace culrag

#endif  // CULRAG_QUESTION_HPP
