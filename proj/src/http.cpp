#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "toolverse/http.hpp"

#include <thread>

#include "toolverse/error.hpp"

namespace toolverse {

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "URL without scheme: " + url);
  out.scheme = url.substr(0, scheme_end);
  if (out.scheme != "http" && out.scheme != "https") {
    throw Error(ErrorCode::kInvalidArgument, "unsupported URL scheme: " + out.scheme);
  }
  auto rest = url.substr(scheme_end + 3);
  auto slash = rest.find_first_of("/?");
  auto authority = rest.substr(0, slash);
  out.path_and_query = slash == std::string::npos ? "/" : rest.substr(slash);
  if (!out.path_and_query.empty() && out.path_and_query[0] == '?') out.path_and_query = "/" + out.path_and_query;
  auto colon = authority.rfind(':');
  if (colon != std::string::npos) {
    out.host = authority.substr(0, colon);
    out.port = std::stoi(authority.substr(colon + 1));
  } else {
    out.host = authority;
    out.port = out.scheme == "https" ? 443 : 80;
  }
  if (out.host.empty()) throw Error(ErrorCode::kInvalidArgument, "URL without host: " + url);
  return out;
}

HttpResponse HttplibTransport::send(const HttpRequest& request) {
  auto url = parse_url(request.url);
  const auto timeout = std::chrono::milliseconds(request.timeout_ms);
  httplib::Headers headers(request.headers.begin(), request.headers.end());

  auto run = [&](auto& client) -> HttpResponse {
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                  0);
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(), 0);
    httplib::Result res;
    if (request.method == "POST") {
      res = client.Post(url.path_and_query, headers, request.body,
                        request.content_type.empty() ? "application/json" : request.content_type);
    } else {
      res = client.Get(url.path_and_query, headers);
    }
    if (!res) {
      throw TransportError("request to " + url.host + " failed: " + httplib::to_string(res.error()));
    }
    return HttpResponse{res->status, res->body};
  };

  if (url.scheme == "https") {
    httplib::SSLClient client(url.host, url.port);
    return run(client);
  }
  httplib::Client client(url.host, url.port);
  return run(client);
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

bool is_retriable_status(int status) noexcept { return status == 429 || (status >= 500 && status < 600); }

HttpResponse send_with_retry(HttpTransport& transport, const HttpRequest& request,
                             const RetryPolicy& policy, const Sleeper& sleep) {
  auto backoff = policy.initial_backoff;
  std::string last_error;
  int last_status = 0;
  for (int attempt = 1; attempt <= policy.attempts; ++attempt) {
    try {
      auto response = transport.send(request);
      if (!is_retriable_status(response.status)) return response;
      last_status = response.status;
      last_error = "HTTP " + std::to_string(response.status);
    } catch (const TransportError& e) {
      last_error = e.what();
      last_status = e.http_status();
    }
    if (attempt < policy.attempts) {
      if (sleep) sleep(backoff);
      backoff *= 2;
    }
  }
  throw TransportError("giving up after " + std::to_string(policy.attempts) + " attempts: " + last_error,
                       last_status);
}

}  // namespace toolverse
