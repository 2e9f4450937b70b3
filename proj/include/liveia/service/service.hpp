#pragma once

// Transport-independent core of the session service. The HTTP layer in
// http.hpp only translates requests and streams events.

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "liveia/core/error.hpp"
#include "liveia/render/render.hpp"
#include "liveia/render/trace_document.hpp"
#include "liveia/scenario/document.hpp"
#include "liveia/scenario/mutation_json.hpp"
#include "liveia/scenario/store.hpp"
#include "liveia/semantics/deception.hpp"
#include "liveia/semantics/reflection.hpp"

namespace liveia::service {

using json = nlohmann::ordered_json;

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

inline constexpr const char* kDocumentType = "text/x-liveia; charset=utf-8";
inline constexpr const char* kPixmapType = "image/x-portable-pixmap";

inline int http_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::io_error: return 500;
    default: return 422;
  }
}

inline Response json_response(int status, const json& j) { return {status, "application/json", j.dump() + "\n", {}}; }

inline Response error_response(const Error& e) {
  json j{{"error", e.label()}, {"message", e.what()}};
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) j["invariant"] = v->invariant();
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    j["invariant"] = p->invariant();
    j["line"] = p->line();
    j["column"] = p->column();
  }
  return json_response(http_status(e.code()), j);
}

inline Response bad_request(const std::string& message) {
  return json_response(400, {{"error", "bad-request"}, {"message", message}});
}

// -- event stream ---------------------------------------------------------------

/// One server-sent event frame.
struct Event {
  std::size_t revision = 0;
  std::string name;  // "revision" or "closed"
  std::string data;

  std::string frame() const {
    std::string out;
    if (name == "revision") out += "id: " + std::to_string(revision) + "\n";
    out += "event: " + name + "\n";
    out += "data: " + data + "\n\n";
    return out;
  }
};

inline Event revision_event(const std::string& scenario_id, std::size_t revision, const scenario::Mutation& m) {
  const json j{{"scenario", scenario_id},
               {"revision", revision},
               {"op", scenario::mutation_name(m)},
               {"mutation", scenario::to_json(m)}};
  return {revision, "revision", j.dump()};
}

inline Event closed_event(const std::string& scenario_id, const std::string& reason) {
  return {0, "closed", json{{"scenario", scenario_id}, {"reason", reason}}.dump()};
}

/// A subscriber's queue. Revisions already delivered are dropped, so replay
/// and live delivery can overlap safely.
class Subscription {
 public:
  explicit Subscription(std::size_t after) : last_(after) {}

  void push(const Event& e) {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (e.name == "revision") {
      if (e.revision <= last_) return;
      last_ = e.revision;
    } else {
      closed_ = true;
    }
    queue_.push_back(e);
    cv_.notify_all();
  }

  /// Wait up to `timeout` for the next event.
  std::optional<Event> next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty(); });
    if (queue_.empty()) return std::nullopt;
    Event e = queue_.front();
    queue_.pop_front();
    return e;
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_ && queue_.empty();
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> queue_;
  std::size_t last_;
  bool closed_ = false;
};

class EventHub {
 public:
  std::shared_ptr<Subscription> subscribe(const std::string& id, std::size_t after) {
    auto sub = std::make_shared<Subscription>(after);
    std::lock_guard lock(mu_);
    subs_[id].push_back(sub);
    return sub;
  }

  void publish(const std::string& id, const Event& e) {
    std::lock_guard lock(mu_);
    auto it = subs_.find(id);
    if (it == subs_.end()) return;
    auto& list = it->second;
    for (auto s = list.begin(); s != list.end();) {
      if (auto sub = s->lock()) {
        sub->push(e);
        ++s;
      } else {
        s = list.erase(s);
      }
    }
    if (e.name == "closed") subs_.erase(it);
  }

  void close_all(const std::string& reason) {
    std::lock_guard lock(mu_);
    for (auto& [id, list] : subs_) {
      for (auto& w : list) {
        if (auto sub = w.lock()) sub->push(closed_event(id, reason));
      }
    }
    subs_.clear();
  }

  std::size_t subscriber_count(const std::string& id) {
    std::lock_guard lock(mu_);
    const auto it = subs_.find(id);
    if (it == subs_.end()) return 0;
    std::size_t n = 0;
    for (const auto& w : it->second) n += w.expired() ? 0 : 1;
    return n;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<std::weak_ptr<Subscription>>> subs_;
};

// -- sessions -------------------------------------------------------------------

/// A client session bound to one open scenario; idle sessions expire.
class SessionRegistry {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit SessionRegistry(std::chrono::seconds idle_timeout, Clock clock = [] { return std::chrono::steady_clock::now(); })
      : idle_(idle_timeout), clock_(std::move(clock)) {}

  std::string open(const std::string& scenario_id) {
    std::lock_guard lock(mu_);
    std::string id;
    do id = scenario::random_id();
    while (sessions_.count(id));
    sessions_[id] = {scenario_id, clock_()};
    return id;
  }

  /// Scenario of a live session, refreshing its idle timer.
  std::optional<std::string> touch(const std::string& id) {
    std::lock_guard lock(mu_);
    expire_locked();
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    it->second.last_seen = clock_();
    return it->second.scenario;
  }

  bool close(const std::string& id) {
    std::lock_guard lock(mu_);
    return sessions_.erase(id) > 0;
  }

  std::size_t expire() {
    std::lock_guard lock(mu_);
    return expire_locked();
  }

  std::size_t size() {
    std::lock_guard lock(mu_);
    expire_locked();
    return sessions_.size();
  }

  std::chrono::seconds idle_timeout() const { return idle_; }

 private:
  struct Entry {
    std::string scenario;
    std::chrono::steady_clock::time_point last_seen;
  };
  std::mutex mu_;
  std::chrono::seconds idle_;
  Clock clock_;
  std::map<std::string, Entry> sessions_;

  std::size_t expire_locked() {
    const auto now = clock_();
    std::size_t n = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (now - it->second.last_seen >= idle_) {
        it = sessions_.erase(it);
        ++n;
      } else {
        ++it;
      }
    }
    return n;
  }
};

// -- service --------------------------------------------------------------------

struct ServiceOptions {
  std::chrono::seconds idle_timeout{30 * 60};
  int default_render_size = 256;
  int shadow_grid = render::kDocumentShadowGrid;
  unsigned render_threads = 0;
};

class Service {
 public:
  explicit Service(scenario::ScenarioStore& store, ServiceOptions opt = {},
                   SessionRegistry::Clock clock = [] { return std::chrono::steady_clock::now(); })
      : store_(store), opt_(opt), sessions_(opt.idle_timeout, std::move(clock)) {}

  scenario::ScenarioStore& store() { return store_; }
  EventHub& events() { return hub_; }
  SessionRegistry& sessions() { return sessions_; }

  Response handle(const Request& req) {
    try {
      return route(req);
    } catch (const json::exception& e) {
      return bad_request(std::string("malformed JSON: ") + e.what());
    } catch (const Error& e) {
      return error_response(e);
    }
  }

  /// Subscribe to a scenario's revisions after `after`, replaying any that
  /// are already in its log.
  std::shared_ptr<Subscription> subscribe(const std::string& id, std::size_t after) {
    // Holding the write lock keeps replay and live delivery in order.
    std::lock_guard w(write_lock(id));
    const scenario::Scenario s = store_.require(id);
    auto sub = hub_.subscribe(id, after);
    for (std::size_t r = after + 1; r <= s.revision(); ++r) {
      sub->push(revision_event(id, r, s.lineage.mutations[r - 1]));
    }
    return sub;
  }

  void shutdown() { hub_.close_all("shutdown"); }

 private:
  scenario::ScenarioStore& store_;
  ServiceOptions opt_;
  EventHub hub_;
  SessionRegistry sessions_;
  std::mutex write_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> write_locks_;

  std::mutex& write_lock(const std::string& id) {
    std::lock_guard g(write_mu_);
    auto& m = write_locks_[id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size()) {
      while (i < path.size() && path[i] == '/') ++i;
      const std::size_t j = path.find('/', i);
      const std::string part = path.substr(i, j == std::string::npos ? std::string::npos : j - i);
      if (!part.empty()) out.push_back(part);
      if (j == std::string::npos) break;
      i = j;
    }
    return out;
  }

  static json body_json(const Request& req) {
    if (req.body.empty()) return json::object();
    return json::parse(req.body);
  }

  static int query_int(const Request& req, const std::string& key, int fallback) {
    const auto it = req.query.find(key);
    if (it == req.query.end()) return fallback;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(it->second, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != it->second.size()) {
      throw Error(ErrorCode::invalid_argument, "query parameter " + key + " must be an integer");
    }
    return v;
  }

  Response route(const Request& req) {
    sessions_.expire();
    const auto parts = split(req.path);
    const std::string& m = req.method;
    if (parts.size() == 1 && parts[0] == "health" && m == "GET") return json_response(200, {{"status", "ok"}});
    if (!parts.empty() && parts[0] == "sessions") return route_sessions(req, parts);
    if (parts.empty() || parts[0] != "scenarios") return json_response(404, {{"error", "not-found"}, {"message", "no route " + req.path}});
    if (parts.size() == 1) {
      if (m == "GET") return list();
      if (m == "POST") return create(req);
    } else if (parts.size() == 2) {
      if (m == "GET") return fetch(parts[1]);
      if (m == "DELETE") return remove(parts[1]);
    } else if (parts.size() == 3) {
      const std::string& id = parts[1];
      const std::string& action = parts[2];
      if (action == "mutations" && m == "POST") return mutate(id, req);
      if (action == "branch" && m == "POST") return branch(id, req);
      if (action == "trace" && m == "GET") return trace(id);
      if (action == "render" && m == "GET") return render(id, req);
      if (action == "metrics" && m == "GET") return metrics(id, req);
      if (action == "reflect" && m == "POST") return reflect(id, req);
      if (action == "deceive" && m == "POST") return deceive(id, req);
      if (action == "events" && m == "GET") {
        return bad_request("the event stream is served by the HTTP transport");
      }
    }
    return json_response(405, {{"error", "method-not-allowed"}, {"message", m + " " + req.path}});
  }

  Response route_sessions(const Request& req, const std::vector<std::string>& parts) {
    if (parts.size() == 1 && req.method == "POST") {
      const json body = body_json(req);
      const std::string id = body.at("scenario").get<std::string>();
      store_.require(id);
      const std::string sid = sessions_.open(id);
      return json_response(201, {{"session", sid}, {"scenario", id}});
    }
    if (parts.size() == 2 && req.method == "GET") {
      const auto scenario_id = sessions_.touch(parts[1]);
      if (!scenario_id) throw Error(ErrorCode::not_found, "no session " + parts[1]);
      return json_response(200, {{"session", parts[1]}, {"scenario", *scenario_id}});
    }
    if (parts.size() == 2 && req.method == "DELETE") {
      if (!sessions_.close(parts[1])) throw Error(ErrorCode::not_found, "no session " + parts[1]);
      return {204, "application/json", "", {}};
    }
    return json_response(405, {{"error", "method-not-allowed"}, {"message", req.method + " " + req.path}});
  }

  static json summary(const scenario::Scenario& s) {
    return {{"id", s.id},
            {"parent_id", s.lineage.parent_id ? json(*s.lineage.parent_id) : json(nullptr)},
            {"name", s.name},
            {"revision", s.revision()}};
  }

  Response list() {
    json arr = json::array();
    for (const auto& e : store_.list()) {
      if (auto s = store_.get(e.id)) arr.push_back(summary(*s));
    }
    return json_response(200, {{"scenarios", arr}});
  }

  Response fetch(const std::string& id) {
    const auto s = store_.require(id);
    Response r{200, kDocumentType, scenario::serialize_scenario(s), {}};
    r.headers["X-Liveia-Revision"] = std::to_string(s.revision());
    return r;
  }

  Response create(const Request& req) {
    const scenario::Scenario s = store_.create(scenario::parse_scenario(req.body));
    return json_response(201, summary(s));
  }

  Response remove(const std::string& id) {
    std::lock_guard w(write_lock(id));
    store_.remove(id);
    hub_.publish(id, closed_event(id, "deleted"));
    return {204, "application/json", "", {}};
  }

  Response mutate(const std::string& id, const Request& req) {
    const json body = body_json(req);
    if (!body.is_object() || !body.contains("base_revision") || !body["base_revision"].is_number_unsigned()) {
      return bad_request("body needs a non-negative integer base_revision");
    }
    if (!body.contains("mutation")) return bad_request("body needs a mutation");
    const std::size_t base = body["base_revision"].get<std::size_t>();
    const scenario::Mutation m = scenario::mutation_from_json(body["mutation"]);

    std::lock_guard w(write_lock(id));
    const scenario::Scenario current = store_.require(id);
    if (base != current.revision()) {
      return json_response(409, {{"error", "conflict"},
                                 {"message", "base revision " + std::to_string(base) + " is stale"},
                                 {"current_revision", current.revision()}});
    }
    const scenario::Scenario next = store_.update(id, [&](const scenario::Scenario& s) {
      return scenario::apply_mutation(s, m);
    });
    hub_.publish(id, revision_event(id, next.revision(), next.lineage.mutations.back()));
    return json_response(200, summary(next));
  }

  Response branch(const std::string& id, const Request& req) {
    const json body = body_json(req);
    const std::string name = body.contains("name") ? body["name"].get<std::string>() : std::string{};
    const scenario::Scenario child = store_.branch(id, name);
    return json_response(201, summary(child));
  }

  Response trace(const std::string& id) {
    const auto s = store_.require(id);
    return {200, "application/json", render::write_trace_document(render::export_trace(s)), {}};
  }

  Response render(const std::string& id, const Request& req) {
    const auto s = store_.require(id);
    const int w = query_int(req, "w", opt_.default_render_size);
    const int h = query_int(req, "h", w);
    render::RenderOptions ro;
    ro.threads = opt_.render_threads;
    return {200, kPixmapType, render::to_ppm(render::render_image(s, w, h, ro)), {}};
  }

  Response metrics(const std::string& id, const Request& req) {
    const auto s = store_.require(id);
    const int grid = query_int(req, "grid", opt_.shadow_grid);
    json arr = json::array();
    for (const auto& p : s.psyches) arr.push_back(render::detail::metrics_json(render::psyche_metrics(p, grid)));
    return json_response(200, {{"scenario", s.id}, {"revision", s.revision()}, {"psyches", arr}});
  }

  /// The thought to work with: an authored emission by index, or an inline
  /// thought object.
  static semantics::Thought request_thought(const scenario::Scenario& s, const json& body) {
    if (body.contains("emission")) {
      const auto i = body["emission"].get<std::size_t>();
      if (i >= s.emissions.size()) throw Error(ErrorCode::not_found, "no emission " + std::to_string(i));
      return s.emissions[i].thought;
    }
    if (!body.contains("thought")) throw ValidationError("schema", "body needs an emission index or a thought");
    json beam = body["thought"];
    beam["from"] = json::array({0, 0, 0});
    if (!beam.contains("direction")) beam["direction"] = json::array({0, 0, 1});
    return scenario::quantize(scenario::detail::json_emission(beam).thought);
  }

  static const semantics::PsycheSphere& request_psyche(const scenario::Scenario& s, const json& body) {
    const std::string name = body.at("psyche").get<std::string>();
    const auto* p = scenario::find_psyche(s, name);
    if (!p) throw Error(ErrorCode::not_found, "no psyche " + name);
    return *p;
  }

  Response reflect(const std::string& id, const Request& req) {
    const auto s = store_.require(id);
    const json body = body_json(req);
    const auto& p = request_psyche(s, body);
    const auto thought = request_thought(s, body);
    const double threshold = body.contains("threshold") ? body["threshold"].get<double>() : optics::kPi / 36;
    const optics::Vec3 dir = body.contains("direction")
                                 ? optics::normalized(scenario::detail::json_vec(body["direction"], "direction"))
                                 : optics::Vec3{0, 0, 1};
    const auto r = semantics::reflect_on(p, thought, threshold, dir);
    json leak = json::array();
    for (const auto& l : r.leakage) {
      leak.push_back({{"position", render::detail::vec(l.position)},
                      {"direction", render::detail::vec(l.direction)},
                      {"intensity", l.intensity}});
    }
    return json_response(200, {{"psyche", p.name()},
                               {"iterations", r.iterations},
                               {"articulable", r.articulable},
                               {"final_divergence", r.final_divergence},
                               {"divergences", r.divergences},
                               {"leakage", leak}});
  }

  Response deceive(const std::string& id, const Request& req) {
    const auto s = store_.require(id);
    const json body = body_json(req);
    const auto& p = request_psyche(s, body);
    const auto thought = request_thought(s, body);
    const std::string audience = body.contains("audience") ? body["audience"].get<std::string>() : "other";
    if (audience != "self" && audience != "other") throw ValidationError("schema", "audience must be self or other");
    const auto r = semantics::deception_route(
        p, thought, audience == "self" ? semantics::Audience::self : semantics::Audience::other);
    return json_response(200, {{"psyche", p.name()},
                               {"audience", audience},
                               {"fracture", r.report.fracture_label},
                               {"fracture_index", r.report.fracture_index},
                               {"mode", r.report.mode},
                               {"incident_angle", r.report.incident_angle},
                               {"bend_angle", r.report.bend_angle},
                               {"degenerate", r.report.degenerate},
                               {"position", render::detail::vec(r.report.position)},
                               {"beam", render::detail::beam_json(r.beam)}});
  }
};

}  // namespace liveia::service
