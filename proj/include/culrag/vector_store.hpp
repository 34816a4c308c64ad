#ifndef CULRAG_VECTOR_STORE_HPP
#define CULRAG_VECTOR_STORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "culrag/errors.hpp"
#include "culrag/kb.hpp"
#include "culrag/providers.hpp"

namespace culrag {

/// Exhaustive-scan vector index over one country's KB entries. Immutable
/// after build/load; concurrent searches are safe.
struct VectorIndex {
  std::string kb_id;
  std::size_t dimension = 0;
  std::string model_id;
  std::string built_at;  // ISO-8601, informational only
  std::vector<std::pair<std::string, Vector>> items;
};

struct ScoredHit {
  std::string entry_id;
  double score;      // cosine similarity in [-1, 1]
  std::size_t rank;  // 1-based

  bool operator==(const ScoredHit&) const = default;
};

/// Cosine similarity. Vectors are stored as float32; the similarity is
/// accumulated in double so search results are stable and reproducible.
inline double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw Error("cosine: zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace detail {

inline void check_vector(const Vector& v, const std::string& entry_id) {
  double norm = 0.0;
  for (float x : v) {
    if (!std::isfinite(x)) throw Error("non-finite embedding value for entry " + entry_id);
    norm += static_cast<double>(x) * x;
  }
  if (norm == 0.0) throw Error("zero embedding vector for entry " + entry_id);
}

inline std::string now_iso8601() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

}  // namespace detail

/// Embeds entries in input order. Fails on the first entry whose embedding
/// cannot be produced or whose dimension drifts from the first one.
inline VectorIndex build_index(const std::vector<KBEntry>& entries, TextEmbedder& embedder,
                               const std::string& kb_id, const std::string& model_id) {
  VectorIndex index;
  index.kb_id = kb_id;
  index.model_id = model_id;
  index.built_at = detail::now_iso8601();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const KBEntry& e = entries[i];
    if (!seen.insert(e.id).second) throw Error("duplicate entry id \"" + e.id + "\"");
    if (e.id.find('\n') != std::string::npos) {
      throw Error("entry id contains a newline: \"" + e.id + "\"");
    }
    Vector v;
    try {
      v = embedder.embed(model_id, e.text);
    } catch (const std::exception& ex) {
      throw Error("embedding failed at entry " + std::to_string(i) + " (" + e.id +
                  "): " + ex.what());
    }
    if (index.items.empty()) {
      index.dimension = v.size();
    } else if (v.size() != index.dimension) {
      throw Error("dimension drift at entry " + std::to_string(i) + " (" + e.id + "): got " +
                  std::to_string(v.size()) + ", expected " + std::to_string(index.dimension));
    }
    detail::check_vector(v, e.id);
    index.items.emplace_back(e.id, std::move(v));
  }
  return index;
}

/// Top-k cosine retrieval: exactly the k highest scores, sorted descending,
/// ties broken by ascending entry id. k beyond the item count clamps.
inline std::vector<ScoredHit> search(const VectorIndex& index, const Vector& query,
                                     std::size_t k) {
  if (index.items.empty() || k == 0) return {};
  if (query.size() != index.dimension) {
    throw Error("search: query dimension " + std::to_string(query.size()) +
                " does not match index dimension " + std::to_string(index.dimension));
  }
  std::vector<ScoredHit> hits;
  hits.reserve(index.items.size());
  for (const auto& [id, vec] : index.items) {
    hits.push_back(ScoredHit{id, cosine(vec, query), 0});
  }
  std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry_id < b.entry_id;
  });
  if (hits.size() > k) hits.resize(k);
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
  return hits;
}

// Persistence layout: meta.json + vectors.bin (little-endian float32,
// row-major, items sorted by entry id) + ids.txt (same order). Round-trip
// must be bit-exact.

inline void save_index(const VectorIndex& index, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  std::vector<std::size_t> order(index.items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return index.items[a].first < index.items[b].first;
  });

  nlohmann::ordered_json meta;
  meta["kb_id"] = index.kb_id;
  meta["dimension"] = index.dimension;
  meta["model_id"] = index.model_id;
  meta["built_at"] = index.built_at;
  meta["item_count"] = index.items.size();
  {
    std::ofstream out(dir / "meta.json");
    if (!out) throw Error("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream ids(dir / "ids.txt");
    std::ofstream bin(dir / "vectors.bin", std::ios::binary);
    if (!ids || !bin) throw Error("cannot write index files under " + dir.string());
    for (std::size_t i : order) {
      const auto& [id, vec] = index.items[i];
      ids << id << "\n";
      for (float x : vec) {
        std::uint32_t bits;
        std::memcpy(&bits, &x, sizeof(bits));
        const unsigned char bytes[4] = {
            static_cast<unsigned char>(bits & 0xFF),
            static_cast<unsigned char>((bits >> 8) & 0xFF),
            static_cast<unsigned char>((bits >> 16) & 0xFF),
            static_cast<unsigned char>((bits >> 24) & 0xFF)};
        bin.write(reinterpret_cast<const char*>(bytes), 4);
      }
    }
  }
}

inline VectorIndex load_index(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw ParseError("cannot open index metadata " + (dir / "meta.json").string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("index metadata " + dir.string() + ": " + e.what());
  }
  VectorIndex index;
  index.kb_id = meta.at("kb_id").get<std::string>();
  index.dimension = meta.at("dimension").get<std::size_t>();
  index.model_id = meta.at("model_id").get<std::string>();
  index.built_at = meta.value("built_at", "");
  const std::size_t count = meta.at("item_count").get<std::size_t>();

  std::ifstream ids(dir / "ids.txt");
  std::ifstream bin(dir / "vectors.bin", std::ios::binary);
  if (!ids || !bin) throw ParseError("missing index files under " + dir.string());

  index.items.reserve(count);
  std::string id;
  while (std::getline(ids, id)) {
    Vector v(index.dimension);
    for (std::size_t d = 0; d < index.dimension; ++d) {
      unsigned char bytes[4];
      if (!bin.read(reinterpret_cast<char*>(bytes), 4)) {
        throw ParseError("truncated vectors.bin under " + dir.string());
      }
      const std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                                 (static_cast<std::uint32_t>(bytes[1]) << 8) |
                                 (static_cast<std::uint32_t>(bytes[2]) << 16) |
                                 (static_cast<std::uint32_t>(bytes[3]) << 24);
      float x;
      std::memcpy(&x, &bits, sizeof(x));
      v[d] = x;
    }
    index.items.emplace_back(id, std::move(v));
  }
  if (index.items.size() != count) {
    throw ParseError("index item count mismatch under " + dir.string() + ": meta says " +
                     std::to_string(count) + ", ids.txt has " +
                     std::to_string(index.items.size()));
  }
  return index;
}

inline bool index_exists(const std::filesystem::path& dir) {
  return std::filesystem::is_regular_file(dir / "meta.json");
}

}  // namespace culrag

#endif  // CULRAG_VECTOR_STORE_HPP
