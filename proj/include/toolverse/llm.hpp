#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "toolverse/http.hpp"
#include "toolverse/util.hpp"

namespace toolverse {

enum class Role { kSystem, kUser, kAssistant, kTool };
std::string_view role_name(Role role) noexcept;

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;
};

struct Sampling {
  double temperature = 0.0;
  int max_tokens = 2048;
  std::vector<std::string> stop_sequences;
};

struct ChatRequest {
  std::string system_prompt;
  std::vector<ChatMessage> messages;
  Sampling sampling;

  // Flat transcript: "[system]\n...\n[user]\n..." Used for length checks and
  // by tests that inspect prompts.
  [[nodiscard]] std::string render() const;
};

struct TokenUsage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
};

// Chat-completion service. chat() validates the request, enforces the
// in-flight cap, applies stop sequences and accumulates usage; subclasses
// implement complete().
class ChatService {
 public:
  explicit ChatService(std::ptrdiff_t max_in_flight = 8) : slots_(max_in_flight) {}
  virtual ~ChatService() = default;
  ChatService(const ChatService&) = delete;
  ChatService& operator=(const ChatService&) = delete;

  std::string chat(const ChatRequest& request);

  [[nodiscard]] virtual std::string model_id() const = 0;
  [[nodiscard]] TokenUsage usage() const { return {prompt_tokens_.load(), completion_tokens_.load()}; }
  [[nodiscard]] std::uint64_t call_count() const { return calls_.load(); }

 protected:
  struct Completion {
    std::string text;
    std::optional<TokenUsage> usage;
  };
  virtual Completion complete(const ChatRequest& request) = 0;

 private:
  std::counting_semaphore<1024> slots_;
  std::atomic<std::uint64_t> prompt_tokens_{0};
  std::atomic<std::uint64_t> completion_tokens_{0};
  std::atomic<std::uint64_t> calls_{0};
};

inline std::string chat(ChatService& service, const ChatRequest& request) { return service.chat(request); }

// Cuts `text` before the earliest occurrence of any stop sequence.
std::string apply_stop_sequences(std::string text, const std::vector<std::string>& stops);

// Replies from a FIFO queue. Each entry is either a string reply or an
// object {"error": "transport"|"overflow"} that is raised instead.
// Every request is recorded for later inspection.
class ScriptedChat final : public ChatService {
 public:
  explicit ScriptedChat(std::vector<Json> replies, std::string model = "scripted");
  static ScriptedChat from_strings(const std::vector<std::string>& replies);
  // File format: JSON array of replies consumed FIFO.
  static std::vector<Json> load_script(const std::filesystem::path& path);

  // Prompts longer than this many characters raise kContextOverflow.
  void set_max_prompt_chars(std::size_t limit) { max_prompt_chars_ = limit; }

  [[nodiscard]] std::string model_id() const override { return model_; }
  [[nodiscard]] std::vector<ChatRequest> requests() const;
  [[nodiscard]] std::size_t remaining() const;

 protected:
  Completion complete(const ChatRequest& request) override;

 private:
  mutable std::mutex mu_;
  std::deque<Json> replies_;
  std::vector<ChatRequest> requests_;
  std::string model_;
  std::size_t max_prompt_chars_ = 0;
};

// Computes each reply from the request.
class CallbackChat final : public ChatService {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;
  explicit CallbackChat(Handler handler, std::string model = "callback")
      : handler_(std::move(handler)), model_(std::move(model)) {}
  [[nodiscard]] std::string model_id() const override { return model_; }

 protected:
  Completion complete(const ChatRequest& request) override { return {handler_(request), std::nullopt}; }

 private:
  Handler handler_;
  std::string model_;
};

struct ServiceEndpoint {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key;   // from the environment only
  int timeout_ms = 120000;
  std::ptrdiff_t max_in_flight = 8;
};

// OpenAI-style JSON chat completion: POST {base}/chat/completions.
class HttpChatService final : public ChatService {
 public:
  HttpChatService(ServiceEndpoint endpoint, HttpTransport& transport, RetryPolicy retry = {},
                  Sleeper sleep = real_sleeper());
  [[nodiscard]] std::string model_id() const override { return endpoint_.model; }

  // The JSON body sent for a request (exposed for wire-format tests).
  [[nodiscard]] Json request_body(const ChatRequest& request) const;

 protected:
  Completion complete(const ChatRequest& request) override;

 private:
  ServiceEndpoint endpoint_;
  HttpTransport& transport_;
  RetryPolicy retry_;
  Sleeper sleep_;
};

struct EmbeddingVector {
  std::vector<float> values;

  [[nodiscard]] std::size_t dimension() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

// Embedding service. embed() checks the batch contract: non-empty input, one
// finite vector per text, and a dimension that never changes across calls.
class EmbeddingService {
 public:
  virtual ~EmbeddingService() = default;

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

  [[nodiscard]] virtual std::string model_id() const = 0;
  // Identifies the exact text->vector function: model id plus a hash of any
  // instruction prefix applied to inputs.
  [[nodiscard]] virtual std::string fingerprint() const;

 protected:
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;

 private:
  std::mutex mu_;
  std::size_t dimension_ = 0;
};

inline std::vector<EmbeddingVector> embed(EmbeddingService& service, const std::vector<std::string>& texts) {
  return service.embed(texts);
}

// Deterministic signed feature hashing over word unigrams and bigrams.
class HashEmbedder final : public EmbeddingService {
 public:
  explicit HashEmbedder(std::size_t dimension = 256, std::string model = "hash-embedder-v1")
      : dimension_(dimension), model_(std::move(model)) {}
  [[nodiscard]] std::string model_id() const override { return model_ + "/" + std::to_string(dimension_); }

 protected:
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  std::size_t dimension_;
  std::string model_;
};

// Returns caller-supplied vectors by exact text; for tests.
class TableEmbedder final : public EmbeddingService {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<float>> table, std::string model = "table")
      : table_(std::move(table)), model_(std::move(model)) {}
  [[nodiscard]] std::string model_id() const override { return model_; }

 protected:
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  std::map<std::string, std::vector<float>> table_;
  std::string model_;
};

// OpenAI-style embeddings: POST {base}/embeddings.
class HttpEmbeddingService final : public EmbeddingService {
 public:
  HttpEmbeddingService(ServiceEndpoint endpoint, HttpTransport& transport, RetryPolicy retry = {},
                       Sleeper sleep = real_sleeper());
  [[nodiscard]] std::string model_id() const override { return endpoint_.model; }

 protected:
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  ServiceEndpoint endpoint_;
  HttpTransport& transport_;
  RetryPolicy retry_;
  Sleeper sleep_;
};

}  // namespace toolverse
