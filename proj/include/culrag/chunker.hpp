#ifndef CULRAG_CHUNKER_HPP
#define CULRAG_CHUNKER_HPP

#include <string>
#include <string_view>
#include <vector>

#include "culrag/errors.hpp"
#include "culrag/unicode.hpp"

namespace culrag {

/// Character-based splitter settings. Sizes are in Unicode scalar values,
/// not bytes.
struct ChunkingConfig {
  std::size_t chunk_size = 500;
  std::size_t overlap = 100;

  void validate() const {
    if (chunk_size == 0) throw ConfigError("chunk_size must be positive");
    if (overlap >= chunk_size) throw ConfigError("overlap must be smaller than chunk_size");
  }

  bool operator==(const ChunkingConfig&) const = default;
};

struct Chunk {
  std::string text;
  std::size_t start_offset;  // in Unicode scalar values

  bool operator==(const Chunk&) const = default;
};

/// Splits text into overlapping windows at stride (chunk_size - overlap).
/// Every window except possibly the last has exactly chunk_size characters;
/// the chunk that reaches the end of the text is the final one.
inline std::vector<Chunk> chunk_text(std::string_view text, const ChunkingConfig& config) {
  config.validate();
  std::vector<Chunk> chunks;
  if (text.empty()) return chunks;

  const std::u32string cps = uni::to_utf32(text);
  const std::size_t stride = config.chunk_size - config.overlap;
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(start + config.chunk_size, cps.size());
    chunks.push_back(Chunk{uni::to_utf8(std::u32string_view(cps).substr(start, end - start)), start});
    if (end == cps.size()) break;
  }
  return chunks;
}

}  // namespace culrag

#endif  // CULRAG_CHUNKER_HPP
