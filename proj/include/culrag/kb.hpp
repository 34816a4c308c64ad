#ifndef CULRAG_KB_HPP
#define CULRAG_KB_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "culrag/chunker.hpp"
#include "culrag/errors.hpp"
#include "culrag/locale.hpp"
#include "culrag/unicode.hpp"

namespace culrag {

enum class EntrySource { WIKI_SUMMARY, WIKI_BODY, CURATED };

inline const char* entry_source_name(EntrySource s) {
  switch (s) {
    case EntrySource::WIKI_SUMMARY: return "WIKI_SUMMARY";
    case EntrySource::WIKI_BODY: return "WIKI_BODY";
    case EntrySource::CURATED: return "CURATED";
  }
  return "CURATED";
}

inline std::optional<EntrySource> entry_source_from_name(std::string_view s) {
  if (s == "WIKI_SUMMARY") return EntrySource::WIKI_SUMMARY;
  if (s == "WIKI_BODY") return EntrySource::WIKI_BODY;
  if (s == "CURATED") return EntrySource::CURATED;
  return std::nullopt;
}

/// One retrievable unit of evidence text. Ids derive from the origin
/// document plus position, so rebuilding from identical inputs yields
/// identical ids.
struct KBEntry {
  std::string id;
  std::string text;
  EntrySource source = EntrySource::CURATED;
  Locale locale;
  std::string country;
  std::string topic;
  std::string origin;

  bool operator==(const KBEntry&) const = default;
};

/// A pre-fetched article: title, introductory summary, optional body text.
/// origin identifies the source document (file stem when loaded from disk).
struct WikiPage {
  std::string title;
  std::string summary;
  std::string body;
  std::string origin;
};

struct ExtractOptions {
  ChunkingConfig chunking;
  // When set, summaries split on blank lines instead of sentence
  // terminators.
  bool paragraph_summaries = false;
};

namespace detail {

inline bool is_terminal_punct_kb(char32_t cp) {
  return cp == U'.' || cp == U'!' || cp == U'?' || cp == U'。' ||
         cp == U'！' || cp == U'？';
}

inline std::vector<std::string> split_paragraphs(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
    if (blank) {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      if (!current.empty()) current += ' ';
      current.append(line);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

inline std::string trimmed(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

/// Splits on the terminators . ! ? 。 ！ ？ when followed by whitespace or
/// end of text. Sentences keep their terminators; blank pieces are dropped.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  const std::u32string cps = uni::to_utf32(text);
  std::u32string current;
  auto flush = [&] {
    std::size_t b = 0, e = current.size();
    while (b < e && uni::is_space(current[b])) ++b;
    while (e > b && uni::is_space(current[e - 1])) --e;
    if (e > b) out.push_back(uni::to_utf8(std::u32string_view(current).substr(b, e - b)));
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    current.push_back(cps[i]);
    if (detail::is_terminal_punct_kb(cps[i]) &&
        (i + 1 == cps.size() || uni::is_space(cps[i + 1]))) {
      flush();
    }
  }
  flush();
  return out;
}

/// Case-insensitive substring test used for keyword/title matching.
inline bool keyword_matches_title(std::string_view keyword, std::string_view title) {
  const std::string k = uni::casefold(keyword);
  const std::string t = uni::casefold(title);
  return !k.empty() && t.find(k) != std::string::npos;
}

/// Turns pre-fetched pages into KB entries. Pages whose title matches no
/// keyword are skipped. Summaries become one WIKI_SUMMARY entry per
/// sentence; bodies are chunked into WIKI_BODY entries.
inline std::vector<KBEntry> extract_wiki_entries(const std::vector<WikiPage>& pages,
                                                 const std::vector<std::string>& keywords,
                                                 const ExtractOptions& options,
                                                 const Locale& locale) {
  if (keywords.empty()) throw ConfigError("keyword list is empty");
  options.chunking.validate();

  std::vector<KBEntry> entries;
  for (const auto& page : pages) {
    const bool selected = std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) {
      return keyword_matches_title(k, page.title);
    });
    if (!selected) continue;

    const std::string origin = page.origin.empty() ? page.title : page.origin;
    const std::vector<std::string> pieces =
        options.paragraph_summaries ? detail::split_paragraphs(page.summary)
                                    : split_sentences(page.summary);
    std::size_t idx = 0;
    for (const auto& sentence : pieces) {
      KBEntry e;
      e.id = origin + "#s" + std::to_string(idx++);
      e.text = sentence;
      e.source = EntrySource::WIKI_SUMMARY;
      e.locale = locale;
      e.country = locale.region;
      e.topic = page.title;
      e.origin = origin;
      entries.push_back(std::move(e));
    }
    if (!page.body.empty()) {
      for (const auto& chunk : chunk_text(page.body, options.chunking)) {
        KBEntry e;
        e.id = origin + "#b" + std::to_string(chunk.start_offset);
        e.text = chunk.text;
        e.source = EntrySource::WIKI_BODY;
        e.locale = locale;
        e.country = locale.region;
        e.topic = page.title;
        e.origin = origin;
        entries.push_back(std::move(e));
      }
    }
  }
  return entries;
}

/// Keyword list: one keyword per line, `#` starts a comment.
inline std::vector<std::string> load_keywords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open keyword file " + path.string());
  std::vector<std::string> keywords;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string k = detail::trimmed(line);
    if (!k.empty()) keywords.push_back(std::move(k));
  }
  return keywords;
}

/// Pre-fetched page file: {"title": str, "summary": str, "body": str?}.
inline WikiPage load_wiki_page(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open page file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("page file " + path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.contains("title") || !doc.contains("summary")) {
    throw ParseError("page file " + path.string() + ": missing \"title\" or \"summary\"");
  }
  WikiPage page;
  page.title = doc.at("title").get<std::string>();
  page.summary = doc.at("summary").get<std::string>();
  if (doc.contains("body") && !doc.at("body").is_null()) {
    page.body = doc.at("body").get<std::string>();
  }
  page.origin = path.stem().string();
  return page;
}

/// Loads every *.json page under dir, sorted by filename so extraction
/// order is deterministic.
inline std::vector<WikiPage> load_wiki_pages(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError("page directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& ent : std::filesystem::directory_iterator(dir)) {
    if (ent.is_regular_file() && ent.path().extension() == ".json") files.push_back(ent.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<WikiPage> pages;
  pages.reserve(files.size());
  for (const auto& f : files) pages.push_back(load_wiki_page(f));
  return pages;
}

/// Curated facts: line-delimited {"locale", "country"?, "topic"?, "text",
/// "source"?}. One CURATED entry per record, order preserved.
inline std::vector<KBEntry> load_curated_facts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open curated facts file " + path.string());
  std::vector<KBEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  const std::string stem = path.stem().string();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": invalid JSON: " + e.what());
    }
    if (!rec.contains("locale") || !rec.at("locale").is_string()) {
      throw ParseError(where + ": missing field \"locale\"");
    }
    if (!rec.contains("text") || !rec.at("text").is_string()) {
      throw ParseError(where + ": missing field \"text\"");
    }
    auto loc = Locale::from_string(rec.at("locale").get<std::string>());
    if (!loc) throw ParseError(where + ": malformed locale \"" + rec.at("locale").get<std::string>() + "\"");
    KBEntry e;
    e.text = rec.at("text").get<std::string>();
    if (detail::trimmed(e.text).empty()) throw ParseError(where + ": blank text");
    e.locale = *loc;
    e.country = rec.value("country", loc->region);
    e.topic = rec.value("topic", "");
    e.origin = rec.value("source", stem);
    e.source = EntrySource::CURATED;
    e.id = stem + "#L" + std::to_string(line_no);
    entries.push_back(std::move(e));
  }
  return entries;
}

inline nlohmann::ordered_json entry_to_json(const KBEntry& e) {
  nlohmann::ordered_json rec;
  rec["id"] = e.id;
  rec["text"] = e.text;
  rec["source"] = entry_source_name(e.source);
  rec["locale"] = e.locale.str();
  rec["country"] = e.country;
  rec["topic"] = e.topic;
  rec["origin"] = e.origin;
  return rec;
}

inline void save_entries(const std::vector<KBEntry>& entries,
                         const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write KB file " + path.string());
  for (const auto& e : entries) out << entry_to_json(e).dump() << "\n";
}

inline std::vector<KBEntry> load_entries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open KB file " + path.string());
  std::vector<KBEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": invalid JSON: " + e.what());
    }
    KBEntry e;
    try {
      e.id = rec.at("id").get<std::string>();
      e.text = rec.at("text").get<std::string>();
      auto src = entry_source_from_name(rec.at("source").get<std::string>());
      if (!src) throw ParseError(where + ": unknown source");
      e.source = *src;
      auto loc = Locale::from_string(rec.at("locale").get<std::string>());
      if (!loc) throw ParseError(where + ": malformed locale");
      e.locale = *loc;
      e.country = rec.value("country", loc->region);
      e.topic = rec.value("topic", "");
      e.origin = rec.value("origin", "");
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(where + ": " + ex.what());
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

/// In-memory KB with id lookup, as the cascade consumes it.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  explicit KnowledgeBase(std::vector<KBEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!by_id_.emplace(entries_[i].id, i).second) {
        throw ParseError("duplicate KB entry id \"" + entries_[i].id + "\"");
      }
    }
  }

  const std::vector<KBEntry>& entries() const { return entries_; }

  const KBEntry* find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &entries_[it->second];
  }

  bool empty() const { return entries_.empty(); }

 private:
  std::vector<KBEntry> entries_;
  std::map<std::string, std::size_t> by_id_;
};

}  // namespace culrag

#endif  // CULRAG_KB_HPP
