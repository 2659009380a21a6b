#include "embopt/http_backend.hpp"

#include <httplib.h>

#include <chrono>
#include <random>
#include <thread>

#include "embopt/error.hpp"
#include "embopt/protocol.hpp"

namespace embopt {

namespace {

void parse_endpoint(const std::string& endpoint, std::string& host, int& port) {
  std::string rest = endpoint;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) == 0) {
    rest = rest.substr(scheme.size());
  } else if (rest.find("://") != std::string::npos) {
    throw ValidationError("http backend: only http:// endpoints are supported");
  }
  while (!rest.empty() && rest.back() == '/') rest.pop_back();
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos) {
    host = rest;
    port = 80;
  } else {
    host = rest.substr(0, colon);
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("http backend: bad port in endpoint '" + endpoint + "'");
    }
  }
  if (host.empty() || port <= 0 || port > 65535) throw ValidationError("http backend: bad endpoint '" + endpoint + "'");
}

protocol::json parse_body(const std::string& body) {
  try {
    return protocol::json::parse(body);
  } catch (const protocol::json::exception& e) {
    throw ProtocolError(std::string("protocol: malformed JSON: ") + e.what());
  }
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  parse_endpoint(config_.endpoint, host_, port_);
  if (config_.max_attempts < 1) throw ValidationError("http backend: max_attempts must be >= 1");
  std::random_device rd;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%08x%08x", rd(), rd());
  request_prefix_ = buf;
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::call(const std::string& method, const std::string& path, const std::string& body) {
  const auto request_id = request_prefix_ + "-" + std::to_string(request_counter_.fetch_add(1));
  httplib::Headers headers{{"X-Request-Id", request_id}};
  double backoff = config_.initial_backoff_seconds;
  std::string last_error;

  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client client(host_, port_);
    const auto secs = static_cast<time_t>(config_.timeout_seconds);
    const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    auto res = method == "GET" ? client.Get(path, headers) : client.Post(path, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) return res->body;
    if (res && res->status >= 400 && res->status < 500) {
      throw ProtocolError("backend rejected " + path + " with status " + std::to_string(res->status) + ": " +
                          res->body);
    }
    last_error = res ? "status " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
  }
  throw TransportError("backend " + path + " failed after " + std::to_string(config_.max_attempts) +
                           " attempts: " + last_error,
                       config_.max_attempts);
}

HealthResponse HttpBackend::health() { return protocol::decode_health(parse_body(call("GET", "/health", ""))); }

EmbeddingVector HttpBackend::encode_prompt(const std::string& prompt) {
  if (prompt.empty()) throw ValidationError("encode_prompt: empty prompt");
  const auto body = protocol::encode_encode_request(prompt).dump();
  return protocol::decode_encode_response(parse_body(call("POST", "/encode", body)));
}

ScoreResponse HttpBackend::generate_and_score(const GenerationRequest& request) {
  request.validate();
  const auto body = protocol::encode_generate_request(request).dump();
  return protocol::decode_score_response(parse_body(call("POST", "/generate_and_score", body)));
}

struct MockServer::Impl {
  std::shared_ptr<Backend> backend;
  httplib::Server server;
  std::thread thread;
};

namespace {

void reply_json(httplib::Response& res, const protocol::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Handler>
void guarded(httplib::Response& res, Handler&& handler) {
  try {
    handler();
  } catch (const ProtocolError& e) {
    reply_json(res, protocol::encode_error(e.what()), 400);
  } catch (const ValidationError& e) {
    reply_json(res, protocol::encode_error(e.what()), 400);
  } catch (const std::exception& e) {
    reply_json(res, protocol::encode_error(e.what()), 500);
  }
}

}  // namespace

MockServer::MockServer(std::shared_ptr<Backend> backend) : impl_(std::make_unique<Impl>()) {
  impl_->backend = std::move(backend);
  auto& srv = impl_->server;
  Backend& be = *impl_->backend;

  srv.Get("/health", [&be](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { reply_json(res, protocol::encode_health(be.health())); });
  });
  srv.Post("/encode", [&be](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto prompt = protocol::decode_encode_request(parse_body(req.body));
      reply_json(res, protocol::encode_encode_response(be.encode_prompt(prompt)));
    });
  });
  srv.Post("/generate_and_score", [&be](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto request = protocol::decode_generate_request(parse_body(req.body));
      reply_json(res, protocol::encode_score_response(be.generate_and_score(request)));
    });
  });
}

MockServer::~MockServer() { stop(); }

int MockServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw TransportError("mock server: cannot bind " + host + ":" + std::to_string(port), 1);
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void MockServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw TransportError("mock server: cannot listen on " + host + ":" + std::to_string(port), 1);
  }
}

void MockServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace embopt
