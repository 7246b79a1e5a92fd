#include "toolverse/llm.hpp"

#include <algorithm>
#include <cmath>

#include "toolverse/error.hpp"

namespace toolverse {

std::string_view role_name(Role role) noexcept {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
    case Role::kTool: return "tool";
  }
  return "user";
}

std::string ChatRequest::render() const {
  std::string out;
  if (!system_prompt.empty()) out += "[system]\n" + system_prompt + "\n";
  for (const auto& m : messages) {
    out += "[" + std::string(role_name(m.role)) + "]\n" + m.content + "\n";
  }
  return out;
}

std::string apply_stop_sequences(std::string text, const std::vector<std::string>& stops) {
  auto cut = std::string::npos;
  for (const auto& s : stops) {
    if (s.empty()) continue;
    cut = std::min(cut, text.find(s));
  }
  if (cut != std::string::npos) text.resize(cut);
  return text;
}

namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

std::string ChatService::chat(const ChatRequest& request) {
  for (const auto& s : request.sampling.stop_sequences) {
    if (s.empty()) throw Error(ErrorCode::kInvalidArgument, "stop sequences must be non-empty");
  }
  SlotGuard guard(slots_);
  ++calls_;
  auto completion = complete(request);
  if (completion.usage) {
    prompt_tokens_ += completion.usage->prompt_tokens;
    completion_tokens_ += completion.usage->completion_tokens;
  }
  return apply_stop_sequences(std::move(completion.text), request.sampling.stop_sequences);
}

ScriptedChat::ScriptedChat(std::vector<Json> replies, std::string model)
    : replies_(replies.begin(), replies.end()), model_(std::move(model)) {}

ScriptedChat ScriptedChat::from_strings(const std::vector<std::string>& replies) {
  std::vector<Json> items(replies.begin(), replies.end());
  return ScriptedChat(std::move(items));
}

std::vector<Json> ScriptedChat::load_script(const std::filesystem::path& path) {
  auto doc = Json::parse(read_file(path));
  if (!doc.is_array()) throw Error(ErrorCode::kParse, path.string() + ": script must be a JSON array");
  return std::vector<Json>(doc.begin(), doc.end());
}

std::vector<ChatRequest> ScriptedChat::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::size_t ScriptedChat::remaining() const {
  std::lock_guard lock(mu_);
  return replies_.size();
}

ChatService::Completion ScriptedChat::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  requests_.push_back(request);
  if (max_prompt_chars_ > 0 && request.render().size() > max_prompt_chars_) {
    throw Error(ErrorCode::kContextOverflow, "prompt exceeds the context window");
  }
  if (replies_.empty()) throw TransportError("scripted reply queue exhausted");
  Json reply = std::move(replies_.front());
  replies_.pop_front();
  if (reply.is_string()) return {reply.get<std::string>(), std::nullopt};
  if (reply.is_object() && reply.contains("error")) {
    auto kind = reply.at("error").get<std::string>();
    if (kind == "overflow") throw Error(ErrorCode::kContextOverflow, "scripted context overflow");
    throw TransportError("scripted transport failure");
  }
  return {reply.dump(), std::nullopt};
}

HttpChatService::HttpChatService(ServiceEndpoint endpoint, HttpTransport& transport, RetryPolicy retry,
                                 Sleeper sleep)
    : ChatService(endpoint.max_in_flight),
      endpoint_(std::move(endpoint)),
      transport_(transport),
      retry_(retry),
      sleep_(std::move(sleep)) {}

Json HttpChatService::request_body(const ChatRequest& request) const {
  Json messages = Json::array();
  if (!request.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(role_name(m.role))}, {"content", m.content}});
  }
  Json body = Json::object();
  body["model"] = endpoint_.model;
  body["messages"] = std::move(messages);
  body["temperature"] = request.sampling.temperature;
  body["max_tokens"] = request.sampling.max_tokens;
  if (!request.sampling.stop_sequences.empty()) body["stop"] = request.sampling.stop_sequences;
  return body;
}

namespace {

HttpRequest json_post(const ServiceEndpoint& endpoint, const std::string& path, const Json& body) {
  HttpRequest req;
  req.method = "POST";
  auto base = endpoint.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  req.url = base + path;
  req.body = body.dump();
  req.content_type = "application/json";
  req.timeout_ms = endpoint.timeout_ms;
  if (!endpoint.api_key.empty()) req.headers["Authorization"] = "Bearer " + endpoint.api_key;
  return req;
}

bool looks_like_overflow(const std::string& body) {
  auto lower = to_lower(body);
  return contains(lower, "context_length_exceeded") || contains(lower, "maximum context length") ||
         contains(lower, "context window");
}

}  // namespace

ChatService::Completion HttpChatService::complete(const ChatRequest& request) {
  if (endpoint_.base_url.empty()) throw Error(ErrorCode::kPrecondition, "chat service base URL is not configured");
  auto response = send_with_retry(transport_, json_post(endpoint_, "/chat/completions", request_body(request)),
                                  retry_, sleep_);
  if (response.status == 400 || response.status == 413) {
    if (looks_like_overflow(response.body)) throw Error(ErrorCode::kContextOverflow, "prompt exceeds the context window");
  }
  if (response.status < 200 || response.status >= 300) {
    throw TransportError("chat service returned HTTP " + std::to_string(response.status), response.status);
  }
  Json doc;
  try {
    doc = Json::parse(response.body);
  } catch (const Json::parse_error& e) {
    throw TransportError(std::string("chat service returned malformed JSON: ") + e.what());
  }
  Completion out;
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    out.text = content.is_string() ? content.get<std::string>() : "";
  } catch (const Json::exception&) {
    throw TransportError("chat service response lacks choices[0].message.content");
  }
  if (doc.contains("usage") && doc["usage"].is_object()) {
    TokenUsage u;
    u.prompt_tokens = doc["usage"].value("prompt_tokens", 0ULL);
    u.completion_tokens = doc["usage"].value("completion_tokens", 0ULL);
    out.usage = u;
  }
  return out;
}

std::string EmbeddingService::fingerprint() const { return model_id() + ":" + hash_hex("raw-text"); }

std::vector<EmbeddingVector> EmbeddingService::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error(ErrorCode::kPrecondition, "embed requires at least one text");
  auto vectors = embed_batch(texts);
  if (vectors.size() != texts.size()) {
    throw Error(ErrorCode::kInternal, "embedding service returned " + std::to_string(vectors.size()) +
                                          " vectors for " + std::to_string(texts.size()) + " texts");
  }
  const auto dim = vectors.front().dimension();
  for (const auto& v : vectors) {
    if (v.dimension() == 0 || v.dimension() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "embedding dimensions differ within one batch");
    }
    for (float x : v.values) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, "embedding contains a non-finite value");
    }
  }
  std::lock_guard lock(mu_);
  if (dimension_ == 0) {
    dimension_ = dim;
  } else if (dimension_ != dim) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding dimension drifted from " + std::to_string(dimension_) +
                                                   " to " + std::to_string(dim));
  }
  return vectors;
}

std::vector<EmbeddingVector> HashEmbedder::embed_batch(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    EmbeddingVector v;
    v.values.assign(dimension_, 0.0f);
    auto tokens = word_tokens(text);
    auto add = [&](std::string_view feature) {
      auto h = fnv1a64(feature);
      auto idx = static_cast<std::size_t>(h % dimension_);
      v.values[idx] += (h >> 63) ? -1.0f : 1.0f;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      add(tokens[i]);
      if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1]);
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> TableEmbedder::embed_batch(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  for (const auto& t : texts) {
    auto it = table_.find(t);
    if (it == table_.end()) throw Error(ErrorCode::kInvalidArgument, "no embedding for text: " + t);
    out.push_back({it->second});
  }
  return out;
}

HttpEmbeddingService::HttpEmbeddingService(ServiceEndpoint endpoint, HttpTransport& transport, RetryPolicy retry,
                                           Sleeper sleep)
    : endpoint_(std::move(endpoint)), transport_(transport), retry_(retry), sleep_(std::move(sleep)) {}

std::vector<EmbeddingVector> HttpEmbeddingService::embed_batch(const std::vector<std::string>& texts) {
  if (endpoint_.base_url.empty()) throw Error(ErrorCode::kPrecondition, "embedding service base URL is not configured");
  Json body = Json::object();
  body["model"] = endpoint_.model;
  body["input"] = texts;
  auto response = send_with_retry(transport_, json_post(endpoint_, "/embeddings", body), retry_, sleep_);
  if (response.status < 200 || response.status >= 300) {
    throw TransportError("embedding service returned HTTP " + std::to_string(response.status), response.status);
  }
  std::vector<EmbeddingVector> out(texts.size());
  try {
    auto doc = Json::parse(response.body);
    const auto& data = doc.at("data");
    if (data.size() != texts.size()) throw TransportError("embedding response has the wrong number of vectors");
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto idx = data[i].value("index", i);
      if (idx >= out.size()) throw TransportError("embedding response index out of range");
      out[idx].values = data[i].at("embedding").get<std::vector<float>>();
    }
  } catch (const Json::exception& e) {
    throw TransportError(std::string("malformed embedding response: ") + e.what());
  }
  return out;
}

}  // namespace toolverse
