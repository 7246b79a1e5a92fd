#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace toolverse {

struct HttpRequest {
  std::string method = "GET";
  std::string url;
  std::map<std::string, std::string> headers;
  std::string body;
  std::string content_type;
  int timeout_ms = 30000;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Throws TransportError when no HTTP response was obtained. Any HTTP status,
// including 4xx/5xx, is returned as a response.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

// cpp-httplib backed transport. Supports http:// and https:// URLs.
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& request) override;
};

// Answers every request through a callback; used for tests and replay.
class CallbackTransport final : public HttpTransport {
 public:
  using Handler = std::function<HttpResponse(const HttpRequest&)>;
  explicit CallbackTransport(Handler handler) : handler_(std::move(handler)) {}
  HttpResponse send(const HttpRequest& request) override { return handler_(request); }

 private:
  Handler handler_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

bool is_retriable_status(int status) noexcept;

// Sends with exponential backoff; retries transport failures, 5xx and 429.
// Throws TransportError once attempts are exhausted.
HttpResponse send_with_retry(HttpTransport& transport, const HttpRequest& request,
                             const RetryPolicy& policy, const Sleeper& sleep);

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path_and_query;
};
ParsedUrl parse_url(const std::string& url);

}  // namespace toolverse
