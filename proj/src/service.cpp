// Copyright 2026 The STING Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sting/service.hpp"

#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>

#include "httplib.h"

namespace sting {

namespace fs = std::filesystem;

namespace {

template <typename F>
auto run_on(Runtime& runtime, F&& fn) -> decltype(fn()) {
  using R = decltype(fn());
  auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
  auto fut = task->get_future();
  runtime.post([task] { (*task)(); });
  return fut.get();
}

Json agent_json(const AgentEntry& a) {
  return Json{{"device_id", a.device_id},
              {"data_address", a.data_address},
              {"lifecycle", to_string(a.lifecycle)},
              {"last_seen_ns", a.last_seen_ns},
              {"reachable", a.reachable}};
}

bool valid_scenario_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') return false;
  return true;
}

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, Json{{"error", message}});
}

std::string sse_frame(const std::string& kind, const Json& data) {
  return "event: " + kind + "\ndata: " + data.dump() + "\n\n";
}

struct LiveStream {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::pair<std::string, Json>> queue;
  bool done = false;
  std::optional<SubscriptionId> sub;

  void push(std::string kind, Json data) {
    std::lock_guard lock(mu);
    if (kind == "run_finished") done = true;
    queue.emplace_back(std::move(kind), std::move(data));
    cv.notify_all();
  }
};

}  // namespace

class ControllerService::Http {
 public:
  explicit Http(ControllerService& svc) : svc_(svc) { routes(); }

  httplib::Server server;

 private:
  fs::path scenario_dir() const { return fs::path(svc_.options_.store_root) / "scenarios"; }

  template <typename F>
  void guarded(httplib::Response& res, F&& fn) {
    try {
      fn();
    } catch (const RunBusy& e) {
      fail(res, 409, e.what());
    } catch (const NotFound& e) {
      fail(res, 404, e.what());
    } catch (const Json::exception& e) {
      fail(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
      fail(res, 400, e.what());
    } catch (const std::exception& e) {
      fail(res, 500, e.what());
    }
  }

  Scenario load_stored(const std::string& id) const {
    if (!valid_scenario_id(id)) throw NotFound("no scenario " + id);
    const auto path = scenario_dir() / (id + ".json");
    std::ifstream in(path);
    if (!in) throw NotFound("no scenario " + id);
    return parse_as<Scenario>(Json::parse(in), "scenario");
  }

  void routes() {
    server.Get("/agents", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        auto agents = svc_.call([](Controller& c) { return c.agents(); });
        Json out = Json::array();
        for (const auto& a : agents) out.push_back(agent_json(a));
        reply(res, 200, out);
      });
    });

    server.Get("/scenarios", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        std::vector<std::string> ids;
        if (fs::exists(scenario_dir()))
          for (const auto& e : fs::directory_iterator(scenario_dir()))
            if (e.path().extension() == ".json") ids.push_back(e.path().stem().string());
        std::sort(ids.begin(), ids.end());
        Json out = Json::array();
        for (const auto& id : ids) out.push_back(Json{{"scenario_id", id}});
        reply(res, 200, out);
      });
    });

    server.Get(R"(/scenarios/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, Json(load_stored(req.matches[1]))); });
    });

    server.Post("/scenarios", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto scenario = parse_as<Scenario>(Json::parse(req.body), "scenario");
        validate(scenario);
        if (!valid_scenario_id(scenario.scenario_id))
          throw SchemaError("scenario_id must be 1-128 characters of [A-Za-z0-9._-]");
        fs::create_directories(scenario_dir());
        write_file_atomic(scenario_dir() / (scenario.scenario_id + ".json"), Json(scenario).dump(2));
        reply(res, 201, Json{{"scenario_id", scenario.scenario_id}});
      });
    });

    server.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        Json out = Json::array();
        for (const auto& e : svc_.store_->list())
          out.push_back(Json{{"run_id", e.run_id}, {"created_at_ns", e.created_at_ns}, {"status", e.status}});
        if (auto active = svc_.call([](Controller& c) { return c.active_run_id(); }))
          out.push_back(Json{{"run_id", *active}, {"status", "active"}});
        reply(res, 200, out);
      });
    });

    server.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = Json::parse(req.body);
        Scenario scenario;
        if (body.contains("scenario"))
          scenario = parse_as<Scenario>(body.at("scenario"), "scenario");
        else if (body.contains("scenario_id"))
          scenario = load_stored(body.at("scenario_id").get<std::string>());
        else
          throw SchemaError("body needs \"scenario\" or \"scenario_id\"");
        if (scenario.transport.kind != svc_.options_.data_plane)
          throw ScenarioRejected("scenario transport '" + scenario.transport.kind + "' but this controller runs a '" +
                                 svc_.options_.data_plane + "' data plane");
        auto run_id = svc_.call([&](Controller& c) { return c.start_run(scenario); });
        reply(res, 201, Json{{"run_id", run_id}});
      });
    });

    server.Get(R"(/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        auto record = svc_.call([&](Controller& c) { return c.find_run(id); });
        if (!record) throw NotFound("no run " + id);
        reply(res, 200, Json(*record));
      });
    });

    server.Post(R"(/runs/([^/]+)/abort)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        svc_.call([&](Controller& c) { c.abort_run(id); });
        reply(res, 202, Json{{"run_id", id}, {"aborted", true}});
      });
    });

    server.Post(R"(/runs/([^/]+)/annotate)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto body = Json::parse(req.body);
        const int exec = body.at("execution").get<int>();
        const double seconds = body.at("completion_time_s").get<double>();
        auto record = svc_.call([&](Controller& c) { return c.annotate_completion(id, exec, seconds); });
        reply(res, 200, Json(record));
      });
    });

    server.Get(R"(/runs/([^/]+)/live)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { live(req.matches[1], res); });
    });
  }

  void live(const std::string& run_id, httplib::Response& res) {
    auto stream = std::make_shared<LiveStream>();
    auto& broker = svc_.broker_;
    const bool found = svc_.call([&](Controller& c) {
      auto record = c.find_run(run_id);
      if (!record) return false;
      for (const auto& ev : record->events) stream->push(ev.kind, Json(ev));
      if (c.active_run_id() == run_id) {
        stream->sub = broker.subscribe(topics::events(run_id), [stream](const std::string&, const Json& payload) {
          stream->push(payload.value("kind", std::string("event")), payload);
        });
      } else {
        std::lock_guard lock(stream->mu);
        stream->done = true;
      }
      return true;
    });
    if (!found) throw NotFound("no run " + run_id);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [stream](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(stream->mu);
          stream->cv.wait_for(lock, std::chrono::seconds(1), [&] { return !stream->queue.empty() || stream->done; });
          if (stream->queue.empty() && !stream->done) {
            lock.unlock();
            const std::string ping = ": keepalive\n\n";
            return sink.write(ping.data(), ping.size());
          }
          std::string out;
          while (!stream->queue.empty()) {
            out += sse_frame(stream->queue.front().first, stream->queue.front().second);
            stream->queue.pop_front();
          }
          const bool finished = stream->done;
          lock.unlock();
          if (!out.empty() && !sink.write(out.data(), out.size())) return false;
          if (finished) sink.done();
          return true;
        },
        [stream, &broker](bool) {
          if (stream->sub) broker.unsubscribe(*stream->sub);
        });
  }

  ControllerService& svc_;
};

ControllerService::ControllerService(ServiceOptions options) : options_(std::move(options)), broker_(runtime_) {}

ControllerService::~ControllerService() { stop(); }

void ControllerService::start() {
  if (options_.data_plane != "udp" && options_.data_plane != "emulated")
    throw std::invalid_argument("data plane must be 'udp' or 'emulated'");
  store_ = std::make_unique<RunStore>(options_.store_root);
  broker_server_ = std::make_unique<BrokerServer>(broker_, options_.bus);
  run_on(runtime_, [&] {
    if (options_.data_plane == "udp") {
      data_ = std::make_unique<net::UdpTransport>(runtime_, options_.data);
    } else {
      network_ = std::make_unique<EmulatedNetwork>(runtime_, options_.channel);
      data_ = network_->endpoint("controller");
    }
    controller_ = std::make_unique<Controller>(runtime_, broker_, *data_, store_.get(), options_.controller);
    controller_->start();
    for (const auto& id : options_.emulated_devices) {
      if (!network_) throw std::invalid_argument("emulated devices need the emulated data plane");
      auto transport = network_->endpoint(id);
      AgentOptions ao;
      ao.device_id = id;
      ao.heartbeat_interval_ns = options_.controller.heartbeat_interval_ns;
      auto agent = std::make_unique<Agent>(runtime_, broker_, *transport, ao);
      agent->start();
      agent_transports_.push_back(std::move(transport));
      agents_.push_back(std::move(agent));
    }
  });

  http_ = std::make_unique<Http>(*this);
  if (options_.http.port == 0) {
    http_port_ = static_cast<std::uint16_t>(http_->server.bind_to_any_port(options_.http.host));
  } else if (http_->server.bind_to_port(options_.http.host, options_.http.port)) {
    http_port_ = options_.http.port;
  }
  if (http_port_ == 0) throw TransportFailure("cannot bind HTTP listener on " + options_.http.host);
  std::thread([this] { http_->server.listen_after_bind(); }).detach();
  http_->server.wait_until_ready();
}

void ControllerService::wait() {
  while (http_ && http_->server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

void ControllerService::stop() {
  if (http_) http_->server.stop();
  if (broker_server_) broker_server_->stop();
  if (controller_) {
    run_on(runtime_, [&] {
      for (auto& a : agents_) a->stop();
      controller_->stop();
    });
  }
  runtime_.stop();
  agents_.clear();
  agent_transports_.clear();
  controller_.reset();
  data_.reset();
  http_.reset();
}

std::uint16_t ControllerService::bus_port() const { return broker_server_ ? broker_server_->port() : 0; }

std::string ControllerService::data_address() const { return data_ ? data_->local_address() : std::string{}; }

Json http_json(const std::string& method, const std::string& base_url, const std::string& path,
               const std::optional<Json>& body) {
  httplib::Client cli(base_url);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(30);
  httplib::Result res;
  const std::string payload = body ? body->dump() : std::string("{}");
  if (method == "GET")
    res = cli.Get(path);
  else if (method == "POST")
    res = cli.Post(path, payload, "application/json");
  else
    throw std::invalid_argument("unsupported method " + method);
  if (!res) throw HttpError(0, "cannot reach " + base_url + ": " + httplib::to_string(res.error()));
  Json j = res->body.empty() ? Json() : Json::parse(res->body, nullptr, false);
  if (res->status >= 400) {
    std::string msg = j.is_object() && j.contains("error") ? j["error"].get<std::string>() : res->body;
    throw HttpError(res->status, msg);
  }
  if (j.is_discarded()) throw HttpError(res->status, "response is not JSON");
  return j;
}

void http_event_stream(const std::string& base_url, const std::string& path,
                       const std::function<bool(const std::string&, const Json&)>& on_event) {
  httplib::Client cli(base_url);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(3600);
  std::string buffer, kind, data;
  auto res = cli.Get(path, [&](const char* bytes, std::size_t n) {
    buffer.append(bytes, n);
    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) {
        if (!data.empty()) {
          auto j = Json::parse(data, nullptr, false);
          if (!on_event(kind.empty() ? "message" : kind, j)) return false;
        }
        kind.clear();
        data.clear();
      } else if (line.rfind("event: ", 0) == 0) {
        kind = line.substr(7);
      } else if (line.rfind("data: ", 0) == 0) {
        data += line.substr(6);
      }
    }
    return true;
  });
  if (!res && res.error() != httplib::Error::Canceled)
    throw HttpError(0, "event stream failed: " + httplib::to_string(res.error()));
  if (res && res->status >= 400) throw HttpError(res->status, "event stream refused");
}

}  // namespace sting
