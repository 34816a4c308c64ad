#ifndef CULRAG_MOCK_MODEL_HPP
#define CULRAG_MOCK_MODEL_HPP

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "culrag/prompts.hpp"
#include "culrag/providers.hpp"
#include "culrag/question.hpp"

namespace culrag {

/// Pulls the question text back out of a rendered prompt. Returns empty when
/// the prompt carries no question line.
inline std::string prompt_question_text(const std::string& prompt) {
  std::size_t pos = 0;
  while (pos < prompt.size()) {
    std::size_t nl = prompt.find('\n', pos);
    if (nl == std::string::npos) nl = prompt.size();
    const std::string_view line(prompt.data() + pos, nl - pos);
    if (line.rfind("Question: ", 0) == 0) {
      return std::string(line.substr(10));
    }
    pos = nl + 1;
  }
  return "";
}

/// Pulls the evidence items out of a rendered prompt's Context block.
/// Preamble bullet lines are outside any Context block and are ignored.
inline std::vector<std::string> prompt_context_items(const std::string& prompt) {
  std::vector<std::string> items;
  bool in_context = false;
  std::size_t pos = 0;
  while (pos < prompt.size()) {
    std::size_t nl = prompt.find('\n', pos);
    if (nl == std::string::npos) nl = prompt.size();
    const std::string_view line(prompt.data() + pos, nl - pos);
    if (line == "Context:") {
      in_context = true;
    } else if (in_context && line.rfind("- ", 0) == 0) {
      items.emplace_back(line.substr(2));
    } else if (line.empty()) {
      in_context = false;
    }
    pos = nl + 1;
  }
  return items;
}

/// Deterministic generator for offline runs, selected by the endpoint
/// scheme `mock:<dataset path>`. It answers a question with its reference
/// answer exactly when some evidence item in the prompt contains that
/// reference (for MCQ: contains the gold option's text), and abstains
/// otherwise. That turns end-to-end accuracy into a direct measurement of
/// retrieval quality, which is what the offline tests pin down.
class OracleGenerator : public TextGenerator {
 public:
  explicit OracleGenerator(std::vector<Question> questions) {
    for (auto& q : questions) {
      by_text_.emplace(q.text, std::move(q));
    }
  }

  static OracleGenerator from_file(const std::filesystem::path& dataset) {
    return OracleGenerator(load_questions(dataset, std::nullopt));
  }

  GenerationResult generate(const GenerationRequest& request) override {
    calls_.fetch_add(1);
    GenerationResult result;
    result.model_id = request.model_id;
    result.latency_ms = 0;
    result.text = std::string(kNoAnswerToken);

    const auto it = by_text_.find(prompt_question_text(request.prompt));
    if (it == by_text_.end()) return result;
    const Question& q = it->second;
    const auto evidence = prompt_context_items(request.prompt);

    if (q.track == Track::MCQ) {
      if (!q.gold_label) return result;
      std::string gold_text;
      for (const auto& o : q.options) {
        if (o.label == *q.gold_label) gold_text = o.text;
      }
      if (gold_text.empty()) return result;
      for (const auto& e : evidence) {
        if (e.find(gold_text) != std::string::npos) {
          result.text = *q.gold_label;
          return result;
        }
      }
      return result;
    }

    for (const auto& r : q.references) {
      for (const auto& e : evidence) {
        if (e.find(r) != std::string::npos) {
          result.text = r;
          return result;
        }
      }
    }
    return result;
  }

  int calls() const { return calls_.load(); }

 private:
  std::map<std::string, Question> by_text_;
  std::atomic<int> calls_{0};
};

}  // namespace culrag

#endif  // CULRAG_MOCK_MODEL_HPP
