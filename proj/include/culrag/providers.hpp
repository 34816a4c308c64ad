#ifndef CULRAG_PROVIDERS_HPP
#define CULRAG_PROVIDERS_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "culrag/errors.hpp"

namespace culrag {

using Vector = std::vector<float>;

struct GenerationRequest {
  std::string model_id;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 256;
  std::vector<std::string> stop = {"\n\n"};
};

struct GenerationResult {
  std::string text;
  std::string model_id;
  std::int64_t latency_ms = 0;
};

/// Text-generation provider contract. Downstream modules depend on this
/// interface only; the HTTP client lives in model_client.hpp.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual GenerationResult generate(const GenerationRequest& request) = 0;
};

/// Embedding provider contract. Implementations must reject empty text and
/// keep the dimension constant per model id.
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual Vector embed(const std::string& model_id, const std::string& text) = 0;
};

/// Wraps a plain function as a generator; handy in tests and fixtures.
class FunctionGenerator : public TextGenerator {
 public:
  using Fn = std::function<std::string(const GenerationRequest&)>;

  explicit FunctionGenerator(Fn fn) : fn_(std::move(fn)) {}

  GenerationResult generate(const GenerationRequest& request) override {
    const auto t0 = std::chrono::steady_clock::now();
    ++calls_;
    GenerationResult r;
    r.text = fn_(request);
    r.model_id = request.model_id;
    r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    return r;
  }

  int calls() const { return calls_; }

 private:
  Fn fn_;
  int calls_ = 0;
};

class FunctionEmbedder : public TextEmbedder {
 public:
  using Fn = std::function<Vector(const std::string&)>;

  explicit FunctionEmbedder(Fn fn) : fn_(std::move(fn)) {}

  Vector embed(const std::string& /*model_id*/, const std::string& text) override {
    if (text.empty()) throw std::invalid_argument("embed_text: text is empty");
    ++calls_;
    return fn_(text);
  }

  int calls() const { return calls_; }

 private:
  Fn fn_;
  int calls_ = 0;
};

/// Deterministic offline embedder: byte-trigram feature hashing (FNV-1a).
/// Texts sharing substrings land near each other, which is all the mock
/// pipeline needs.
class HashingEmbedder : public TextEmbedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}

  Vector embed(const std::string& /*model_id*/, const std::string& text) override {
    if (text.empty()) throw std::invalid_argument("embed_text: text is empty");
    Vector v(dimension_, 0.0f);
    if (text.size() < 3) {
      v[fnv1a(text.data(), text.size()) % dimension_] += 1.0f;
      return v;
    }
    for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
      v[fnv1a(text.data() + i, 3) % dimension_] += 1.0f;
    }
    return v;
  }

  std::size_t dimension() const { return dimension_; }

 private:
  static std::uint64_t fnv1a(const char* data, std::size_t n) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(data[i]);
      h *= 1099511628211ull;
    }
    return h;
  }

  std::size_t dimension_;
};

}  // namespace culrag

#endif  // CULRAG_PROVIDERS_HPP
