#ifndef CULRAG_SEARCH_HPP
#define CULRAG_SEARCH_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "culrag/errors.hpp"
#include "culrag/sha256.hpp"

namespace culrag {

struct Snippet {
  std::string title;
  std::string text;
  std::string url;

  bool operator==(const Snippet&) const = default;
};

/// Query-in/snippets-out provider. search() counts calls so tests can
/// observe that cache hits never reach the network.
class SearchProvider {
 public:
  virtual ~SearchProvider() = default;

  std::vector<Snippet> search(const std::string& query) {
    ++calls_;
    return do_search(query);
  }

  virtual std::string id() const = 0;

  /// Stable provider-family slug used in on-disk cache keys.
  virtual std::string cache_key() const = 0;

  int calls() const { return calls_; }

 protected:
  virtual std::vector<Snippet> do_search(const std::string& query) = 0;

 private:
  int calls_ = 0;
};

namespace detail {

inline nlohmann::ordered_json snippets_to_json(const std::string& query,
                                               const std::vector<Snippet>& snippets) {
  nlohmann::ordered_json doc;
  doc["query"] = query;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : snippets) {
    arr.push_back({{"title", s.title}, {"text", s.text}, {"url", s.url}});
  }
  doc["results"] = arr;
  return doc;
}

inline std::vector<Snippet> snippets_from_json(const nlohmann::json& doc) {
  std::vector<Snippet> out;
  if (!doc.contains("results") || !doc.at("results").is_array()) return out;
  for (const auto& r : doc.at("results")) {
    Snippet s;
    s.title = r.value("title", "");
    s.text = r.value("text", "");
    s.url = r.value("url", "");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

/// Replays canned results from <dir>/<sha256(query)>.json. A missing
/// fixture file is an empty result set, not a failure.
class FixtureSearchProvider : public SearchProvider {
 public:
  explicit FixtureSearchProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::string id() const override { return "fixture:" + dir_.string(); }

  std::string cache_key() const override { return "fixture"; }

  static std::filesystem::path fixture_path(const std::filesystem::path& dir,
                                            const std::string& query) {
    return dir / (sha256_hex(query) + ".json");
  }

 protected:
  std::vector<Snippet> do_search(const std::string& query) override {
    const auto path = fixture_path(dir_, query);
    std::ifstream in(path);
    if (!in) return {};
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("search fixture " + path.string() + ": " + e.what());
    }
    return detail::snippets_from_json(doc);
  }

 private:
  std::filesystem::path dir_;
};

/// Live client for a DuckDuckGo-compatible instant-answer endpoint
/// (GET /?q=...&format=json). Maps the abstract plus related topics to
/// snippets in rank order.
class DuckDuckGoProvider : public SearchProvider {
 public:
  explicit DuckDuckGoProvider(std::string base_url = "https://api.duckduckgo.com",
                              int timeout_ms = 20000)
      : base_url_(std::move(base_url)), timeout_ms_(timeout_ms) {}

  std::string id() const override { return "duckduckgo:" + base_url_; }

  std::string cache_key() const override { return "duckduckgo"; }

 protected:
  std::vector<Snippet> do_search(const std::string& query) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(std::chrono::milliseconds(timeout_ms_));
    client.set_read_timeout(std::chrono::milliseconds(timeout_ms_));
    client.set_follow_location(true);

    httplib::Params params{{"q", query}, {"format", "json"}, {"no_redirect", "1"}, {"no_html", "1"}};
    auto res = client.Get("/", params, httplib::Headers{});
    if (!res || res->status < 200 || res->status >= 300) {
      throw TransportError("web search failed for \"" + query + "\"" +
                           (res ? " (HTTP " + std::to_string(res->status) + ")"
                                : " (" + httplib::to_string(res.error()) + ")"));
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError("web search returned invalid JSON: " + std::string(e.what()));
    }
    std::vector<Snippet> out;
    const std::string abstract = doc.value("AbstractText", "");
    if (!abstract.empty()) {
      out.push_back(Snippet{doc.value("Heading", ""), abstract, doc.value("AbstractURL", "")});
    }
    if (doc.contains("RelatedTopics") && doc.at("RelatedTopics").is_array()) {
      for (const auto& topic : doc.at("RelatedTopics")) {
        if (topic.contains("Text")) {
          out.push_back(Snippet{"", topic.value("Text", ""), topic.value("FirstURL", "")});
        } else if (topic.contains("Topics") && topic.at("Topics").is_array()) {
          for (const auto& sub : topic.at("Topics")) {
            out.push_back(Snippet{"", sub.value("Text", ""), sub.value("FirstURL", "")});
          }
        }
      }
    }
    return out;
  }

 private:
  std::string base_url_;
  int timeout_ms_;
};

/// Retrieves at most top_n snippets for the query. Raw provider results are
/// cached on disk keyed by (provider family, query); a cached query never
/// reaches the provider again, which keeps evaluation reruns
/// offline-reproducible. With a null provider (cache-only mode) a cache
/// miss is an empty result set; cache_only_key selects whose cache entries
/// such a run replays.
inline std::vector<Snippet> web_search(const std::string& query, SearchProvider* provider,
                                       std::size_t top_n,
                                       const std::optional<std::filesystem::path>& cache_dir,
                                       const std::string& cache_only_key = "duckduckgo") {
  std::optional<std::filesystem::path> cache_file;
  if (cache_dir) {
    const std::string family = provider ? provider->cache_key() : cache_only_key;
    cache_file = *cache_dir / (family + "-" + sha256_hex(query) + ".json");
    std::ifstream in(*cache_file);
    if (in) {
      nlohmann::json doc;
      try {
        in >> doc;
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("search cache " + cache_file->string() + ": " + e.what());
      }
      auto all = detail::snippets_from_json(doc);
      if (all.size() > top_n) all.resize(top_n);
      return all;
    }
  }
  if (!provider) return {};
  std::vector<Snippet> all = provider->search(query);
  if (cache_file) {
    std::filesystem::create_directories(*cache_dir);
    std::ofstream out(*cache_file);
    if (out) out << detail::snippets_to_json(query, all).dump(2) << "\n";
  }
  if (all.size() > top_n) all.resize(top_n);
  return all;
}

}  // namespace culrag

#endif  // CULRAG_SEARCH_HPP
