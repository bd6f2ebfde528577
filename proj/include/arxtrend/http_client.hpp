#pragma once

#include <chrono>
#include <string>
#include <utility>

#include <httplib.h>

#include "arxtrend/http.hpp"

namespace arxtrend::http {

// Splits "scheme://host[:port]/path?query" into ("scheme://host[:port]", "/path?query").
inline std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UserError("URL without scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// Live transport backed by cpp-httplib. A fresh client per request keeps
/// it safe for concurrent use.
class HttplibTransport final : public Transport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(30)) : timeout_(timeout) {}

  Response get(const std::string& url, const Headers& headers) override {
    auto [origin, target] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    httplib::Headers h(headers.begin(), headers.end());
    auto res = client.Get(target, h);
    if (!res) throw TransportError("GET " + url + ": " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace arxtrend::http
