// Eigen (via service.hpp) must come before httplib: <resolv.h> defines a
// `_res` macro that collides with Eigen parameter names.
#include "medsim/service.hpp"

#include <chrono>
#include <mutex>
#include <ostream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "medsim/error.hpp"

namespace medsim {

struct HttpServer::Impl {
  FaqService& service;
  std::ostream* log;
  std::mutex log_mutex;
  httplib::Server server;

  Impl(FaqService& s, std::ostream* l) : service(s), log(l) {}

  void write_log(const httplib::Request& req, int status, double elapsed_ms) {
    if (!log) return;
    nlohmann::ordered_json line;
    line["ts"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count();
    line["method"] = req.method;
    line["path"] = req.path;
    line["status"] = status;
    line["elapsed_ms"] = elapsed_ms;
    line["bytes_in"] = req.body.size();
    std::lock_guard lock(log_mutex);
    *log << line.dump() << '\n';
    log->flush();
  }

  template <typename Handler>
  httplib::Server::Handler wrap(Handler handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      const auto start = std::chrono::steady_clock::now();
      HttpResponse out = handler(req);
      res.status = out.status;
      res.set_content(out.body, "application/json");
      write_log(req, out.status,
                std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count());
    };
  }
};

HttpServer::HttpServer(FaqService& service, std::ostream* log)
    : impl_(std::make_unique<Impl>(service, log)) {
  auto& s = impl_->server;
  s.Post("/v1/match", impl_->wrap([this](const httplib::Request& req) {
    return impl_->service.handle_match(req.body);
  }));
  s.Post("/v1/faqs", impl_->wrap([this](const httplib::Request& req) {
    return impl_->service.handle_ingest(req.body);
  }));
  s.Get("/v1/healthz", impl_->wrap([this](const httplib::Request&) {
    return impl_->service.handle_health();
  }));
  s.set_payload_max_length(64 * 1024 * 1024);
  s.set_tcp_nodelay(true);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                        : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw RuntimeFailure("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace medsim
