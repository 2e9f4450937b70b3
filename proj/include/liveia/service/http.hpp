#pragma once

#include <atomic>
#include <chrono>
#include <string>

#include <httplib.h>

#include "liveia/service/service.hpp"

namespace liveia::service {

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 8787;
};

/// "host:port", ":port" or "port".
inline ListenAddress parse_listen(const std::string& spec) {
  ListenAddress a;
  const auto colon = spec.rfind(':');
  std::string port = spec;
  if (colon != std::string::npos) {
    if (colon > 0) a.host = spec.substr(0, colon);
    port = spec.substr(colon + 1);
  }
  std::size_t used = 0;
  try {
    a.port = std::stoi(port, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != port.size() || a.port < 0 || a.port > 65535) {
    throw Error(ErrorCode::invalid_argument, "bad listen address " + spec);
  }
  return a;
}

/// Resume point for an event stream: Last-Event-ID wins over ?since=.
inline std::size_t stream_start(const Request& req) {
  auto read = [](const std::string& v) -> std::size_t {
    std::size_t used = 0;
    unsigned long long n = 0;
    try {
      n = std::stoull(v, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) throw Error(ErrorCode::invalid_argument, "bad event id " + v);
    return static_cast<std::size_t>(n);
  };
  if (const auto it = req.headers.find("Last-Event-ID"); it != req.headers.end()) return read(it->second);
  if (const auto it = req.query.find("since"); it != req.query.end()) return read(it->second);
  return 0;
}

class HttpServer {
 public:
  explicit HttpServer(Service& service) : service_(service) {
    auto handler = [this](const httplib::Request& hreq, httplib::Response& hres) { dispatch(hreq, hres); };
    server_.Get(".*", handler);
    server_.Post(".*", handler);
    server_.Delete(".*", handler);
  }

  ~HttpServer() { stop(); }

  /// Bind and serve on the calling thread. Port 0 picks a free port.
  bool listen(const ListenAddress& addr) {
    if (addr.port == 0) {
      port_ = server_.bind_to_any_port(addr.host);
      if (port_ <= 0) return false;
    } else {
      if (!server_.bind_to_port(addr.host, addr.port)) return false;
      port_ = addr.port;
    }
    return server_.listen_after_bind();
  }

  /// Bind only; `serve()` then blocks until `stop()`.
  bool bind(const ListenAddress& addr) {
    port_ = addr.port == 0 ? server_.bind_to_any_port(addr.host)
                           : (server_.bind_to_port(addr.host, addr.port) ? addr.port : -1);
    return port_ > 0;
  }
  bool serve() { return server_.listen_after_bind(); }

  void stop() {
    if (stopping_.exchange(true)) return;
    service_.shutdown();
    server_.stop();
  }

  int port() const { return port_; }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  Service& service_;
  httplib::Server server_;
  std::atomic<bool> stopping_{false};
  int port_ = -1;

  static Request translate(const httplib::Request& h) {
    Request r;
    r.method = h.method;
    r.path = h.path;
    for (const auto& [k, v] : h.params) r.query[k] = v;
    for (const auto& [k, v] : h.headers) r.headers[k] = v;
    r.body = h.body;
    return r;
  }

  static void emit(const Response& r, httplib::Response& h) {
    h.status = r.status;
    for (const auto& [k, v] : r.headers) h.set_header(k, v);
    if (!r.body.empty() || r.status != 204) h.set_content(r.body, r.content_type);
  }

  static bool is_event_path(const std::string& path) {
    const std::string suffix = "/events";
    return path.rfind("/scenarios/", 0) == 0 && path.size() > suffix.size() + 11 &&
           path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0 &&
           path.find('/', 11) == path.size() - suffix.size();
  }

  void dispatch(const httplib::Request& hreq, httplib::Response& hres) {
    const Request req = translate(hreq);
    if (req.method == "GET" && is_event_path(req.path)) {
      stream(req, hres);
      return;
    }
    emit(service_.handle(req), hres);
  }

  void stream(const Request& req, httplib::Response& hres) {
    const std::string id = req.path.substr(11, req.path.size() - 11 - 7);
    std::shared_ptr<Subscription> sub;
    try {
      sub = service_.subscribe(id, stream_start(req));
    } catch (const Error& e) {
      emit(error_response(e), hres);
      return;
    }
    hres.set_header("Cache-Control", "no-cache");
    hres.set_chunked_content_provider("text/event-stream", [this, sub, id](std::size_t, httplib::DataSink& sink) {
      int idle = 0;
      for (;;) {
        if (!sink.is_writable()) return false;
        auto e = sub->next(std::chrono::milliseconds(200));
        if (!e && stopping_) e = closed_event(id, "shutdown");
        if (!e) {
          // A comment frame every few seconds lets a dropped client be noticed.
          static const std::string ping = ": ping\n\n";
          if (++idle % 25 == 0 && !sink.write(ping.data(), ping.size())) return false;
          continue;
        }
        const std::string frame = e->frame();
        if (!sink.write(frame.data(), frame.size())) return false;
        if (e->name == "closed") {
          sink.done();
          return true;
        }
      }
    });
  }
};

}  // namespace liveia::service
