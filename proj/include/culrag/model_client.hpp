#ifndef CULRAG_MODEL_CLIENT_HPP
#define CULRAG_MODEL_CLIENT_HPP

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "culrag/errors.hpp"
#include "culrag/providers.hpp"

namespace culrag {

struct ModelClientOptions {
  int timeout_ms = 120000;   // local serving of large models is slow on CPU
  int retries = 3;           // transient transport failures only
  int backoff_base_ms = 250; // doubles per attempt
};

/// HTTP client for a local model-serving endpoint: POST /api/generate and
/// POST /api/embeddings. This is the only place generation/embedding I/O
/// happens; everything downstream sees the provider interfaces.
///
/// Error taxonomy: HTTP 404 means the model is unknown to the server and is
/// a ConfigError (never retried); other non-2xx and connection failures are
/// TransportError after the retry budget; deadline overruns raise
/// TimeoutError carrying the elapsed time.
class ModelClient : public TextGenerator, public TextEmbedder {
 public:
  explicit ModelClient(std::string endpoint, ModelClientOptions options = {})
      : endpoint_(std::move(endpoint)), options_(options) {}

  GenerationResult generate(const GenerationRequest& request) override {
    if (request.prompt.empty()) throw std::invalid_argument("generate: prompt is empty");
    nlohmann::json body;
    body["model"] = request.model_id;
    body["prompt"] = request.prompt;
    body["stream"] = false;
    body["options"]["temperature"] = request.temperature;
    body["options"]["num_predict"] = request.max_tokens;
    body["options"]["stop"] = request.stop;

    const auto t0 = std::chrono::steady_clock::now();
    const nlohmann::json reply = post_json("/api/generate", body, request.model_id);
    GenerationResult result;
    if (!reply.contains("response") || !reply.at("response").is_string()) {
      throw TransportError("generate: endpoint reply has no \"response\" field");
    }
    result.text = reply.at("response").get<std::string>();
    result.model_id = request.model_id;
    result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    return result;
  }

  Vector embed(const std::string& model_id, const std::string& text) override {
    if (text.empty()) throw std::invalid_argument("embed_text: text is empty");
    nlohmann::json body;
    body["model"] = model_id;
    body["prompt"] = text;
    const nlohmann::json reply = post_json("/api/embeddings", body, model_id);
    if (!reply.contains("embedding") || !reply.at("embedding").is_array()) {
      throw TransportError("embed_text: endpoint reply has no \"embedding\" field");
    }
    Vector v;
    v.reserve(reply.at("embedding").size());
    for (const auto& x : reply.at("embedding")) v.push_back(x.get<float>());

    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = dimensions_.emplace(model_id, v.size());
    if (!inserted && it->second != v.size()) {
      throw Error("embedding dimension drift for model " + model_id + ": got " +
                  std::to_string(v.size()) + ", expected " + std::to_string(it->second));
    }
    return v;
  }

  const std::string& endpoint() const { return endpoint_; }

  /// Retries spent across the client's lifetime; observable for tests and
  /// run statistics.
  int total_retries() const { return total_retries_.load(); }

 private:
  nlohmann::json post_json(const std::string& path, const nlohmann::json& body,
                           const std::string& model_id) {
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      if (attempt > 0) {
        ++total_retries_;
        std::this_thread::sleep_for(
            std::chrono::milliseconds(options_.backoff_base_ms << (attempt - 1)));
      }
      httplib::Client client(endpoint_);
      client.set_connection_timeout(std::chrono::milliseconds(options_.timeout_ms));
      client.set_read_timeout(std::chrono::milliseconds(options_.timeout_ms));
      client.set_write_timeout(std::chrono::milliseconds(options_.timeout_ms));

      const auto t0 = std::chrono::steady_clock::now();
      auto res = client.Post(path, payload, "application/json");
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
      if (!res) {
        if (elapsed >= options_.timeout_ms) {
          throw TimeoutError("model endpoint " + endpoint_ + path + " timed out after " +
                                 std::to_string(elapsed) + " ms",
                             elapsed);
        }
        last_error = "transport failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 404) {
        // The server does not know the model: configuration, not transport.
        throw ConfigError("model \"" + model_id + "\" not found at " + endpoint_ +
                          (res->body.empty() ? "" : ": " + res->body));
      }
      if (res->status >= 200 && res->status < 300) {
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
          throw TransportError("endpoint returned invalid JSON: " + std::string(e.what()));
        }
      }
      last_error = "HTTP " + std::to_string(res->status) +
                   (res->body.empty() ? "" : ": " + res->body);
    }
    throw TransportError("model endpoint " + endpoint_ + path + " failed after " +
                         std::to_string(options_.retries + 1) + " attempts (" + last_error + ")");
  }

  std::string endpoint_;
  ModelClientOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::size_t> dimensions_;
  std::atomic<int> total_retries_{0};
};

}  // namespace culrag

#endif  // CULRAG_MODEL_CLIENT_HPP
