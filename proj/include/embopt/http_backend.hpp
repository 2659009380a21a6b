#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "embopt/backend.hpp"

namespace embopt {

struct HttpBackendConfig {
  std::string endpoint;             // "http://host:port"
  double timeout_seconds = 120.0;
  int max_attempts = 3;
  double initial_backoff_seconds = 0.2;  // doubles after each failed attempt
};

/// Client for the generate-and-score service over HTTP/1.1 + JSON.
///
/// Transport failures and 5xx answers are retried with exponential backoff up to
/// max_attempts; each request carries an X-Request-Id header that stays fixed
/// across retries. 4xx answers and malformed bodies raise ProtocolError at once.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  HealthResponse health() override;
  EmbeddingVector encode_prompt(const std::string& prompt) override;
  ScoreResponse generate_and_score(const GenerationRequest& request) override;

  const HttpBackendConfig& config() const noexcept { return config_; }

 private:
  std::string call(const std::string& method, const std::string& path, const std::string& body);

  HttpBackendConfig config_;
  std::string host_;
  int port_ = 80;
  std::string request_prefix_;
  std::atomic<unsigned long long> request_counter_{0};
};

/// HTTP server exposing a MockBackend on /health, /encode and /generate_and_score.
class MockServer {
 public:
  explicit MockServer(std::shared_ptr<Backend> backend);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Bind and serve on a background thread. port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  /// Bind and serve on the calling thread until stop() is called.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace embopt
