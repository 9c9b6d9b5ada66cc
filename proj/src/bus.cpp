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

#include "sting/bus.hpp"

#include <iostream>

namespace sting {
namespace {

std::vector<std::string> split_levels(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto slash = s.find('/', start);
    out.push_back(s.substr(start, slash - start));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return out;
}

}  // namespace

bool topic_matches(const std::string& filter, const std::string& topic) {
  const auto f = split_levels(filter);
  const auto t = split_levels(topic);
  std::size_t i = 0;
  for (; i < f.size(); ++i) {
    if (f[i] == "#") return i + 1 == f.size();
    if (i >= t.size()) return false;
    if (f[i] != "+" && f[i] != t[i]) return false;
  }
  return i == t.size();
}

void Broker::publish(const std::string& topic, const Json& payload) {
  std::vector<Sub> targets;
  {
    std::lock_guard lock(mu_);
    for (const auto& b : blocked_)
      if (topic_matches(b, topic)) return;
    for (const auto& [id, sub] : subs_)
      if (topic_matches(sub.filter, topic)) targets.push_back(sub);
  }
  ++published_;
  for (auto& sub : targets) {
    if (sub.direct) {
      (*sub.handler)(topic, payload);
    } else {
      runtime_.post([h = sub.handler, topic, payload] { (*h)(topic, payload); });
    }
  }
}

SubscriptionId Broker::subscribe(const std::string& filter, Handler handler) {
  std::lock_guard lock(mu_);
  const auto id = next_id_++;
  subs_[id] = {filter, std::make_shared<Handler>(std::move(handler)), false};
  return id;
}

SubscriptionId Broker::subscribe_direct(const std::string& filter, Handler handler) {
  std::lock_guard lock(mu_);
  const auto id = next_id_++;
  subs_[id] = {filter, std::make_shared<Handler>(std::move(handler)), true};
  return id;
}

void Broker::unsubscribe(SubscriptionId id) {
  std::lock_guard lock(mu_);
  subs_.erase(id);
}

void Broker::block(const std::string& filter) {
  std::lock_guard lock(mu_);
  blocked_.push_back(filter);
}

void Broker::unblock(const std::string& filter) {
  std::lock_guard lock(mu_);
  std::erase(blocked_, filter);
}

struct BrokerServer::Connection {
  explicit Connection(net::TcpStream s) : stream(std::move(s)) {}
  net::TcpStream stream;
  std::mutex write_mu;
  std::vector<SubscriptionId> subs;
  std::atomic<bool> alive{true};

  void send(const Json& frame) {
    if (!alive) return;
    std::lock_guard lock(write_mu);
    try {
      net::write_frame(stream, frame.dump());
    } catch (const std::exception&) {
      alive = false;
    }
  }
};

BrokerServer::BrokerServer(Broker& broker, const net::HostPort& listen)
    : broker_(broker), listener_(listen), acceptor_([this] { accept_loop(); }) {}

BrokerServer::~BrokerServer() { stop(); }

void BrokerServer::stop() {
  if (stopping_.exchange(true)) return;
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mu_);
    for (auto& c : connections_) {
      c->alive = false;
      c->stream.shutdown();
      for (auto id : c->subs) broker_.unsubscribe(id);
    }
    threads.swap(threads_);
  }
  for (auto& t : threads)
    if (t.joinable()) t.join();
}

void BrokerServer::accept_loop() {
  while (!stopping_) {
    auto stream = listener_.accept();
    if (!stream) break;
    auto conn = std::make_shared<Connection>(std::move(*stream));
    std::lock_guard lock(mu_);
    if (stopping_) break;
    connections_.push_back(conn);
    threads_.emplace_back([this, conn] { serve(conn); });
  }
}

void BrokerServer::serve(std::shared_ptr<Connection> conn) {
  try {
    while (conn->alive) {
      auto frame = net::read_frame(conn->stream);
      if (!frame) break;
      const auto msg = Json::parse(*frame, nullptr, false);
      if (msg.is_discarded() || !msg.is_object()) continue;
      const auto op = msg.value("op", "");
      if (op == "sub") {
        std::weak_ptr<Connection> weak = conn;
        const std::string filter = msg.value("filter", "#");
        const auto id = broker_.subscribe_direct(filter, [weak, filter](const std::string& t, const Json& p) {
          if (auto c = weak.lock()) c->send({{"op", "msg"}, {"filter", filter}, {"topic", t}, {"payload", p}});
        });
        std::lock_guard lock(mu_);
        conn->subs.push_back(id);
      } else if (op == "pub") {
        broker_.publish(msg.value("topic", ""), msg.value("payload", Json::object()));
      }
    }
  } catch (const std::exception& e) {
    if (!stopping_) std::cerr << "broker connection closed: " << e.what() << "\n";
  }
  conn->alive = false;
  std::lock_guard lock(mu_);
  for (auto id : conn->subs) broker_.unsubscribe(id);
  conn->subs.clear();
}

RemoteBus::RemoteBus(Runtime& runtime, const net::HostPort& server)
    : runtime_(runtime), stream_(net::TcpStream::connect(server)), reader_([this] { read_loop(); }) {}

RemoteBus::~RemoteBus() {
  connected_ = false;
  stream_.shutdown();
  if (reader_.joinable()) reader_.join();
}

void RemoteBus::send(const Json& frame) {
  std::lock_guard lock(write_mu_);
  try {
    net::write_frame(stream_, frame.dump());
  } catch (const std::exception&) {
    connected_ = false;
    throw;
  }
}

void RemoteBus::publish(const std::string& topic, const Json& payload) {
  send({{"op", "pub"}, {"topic", topic}, {"payload", payload}});
}

SubscriptionId RemoteBus::subscribe(const std::string& filter, Handler handler) {
  SubscriptionId id;
  bool first = true;
  {
    std::lock_guard lock(mu_);
    for (const auto& [other, sub] : subs_)
      if (sub.first == filter) first = false;
    id = next_id_++;
    subs_[id] = {filter, std::make_shared<Handler>(std::move(handler))};
  }
  // The server forwards once per distinct filter; frames carry the filter.
  if (first) send({{"op", "sub"}, {"filter", filter}});
  return id;
}

void RemoteBus::unsubscribe(SubscriptionId id) {
  std::lock_guard lock(mu_);
  subs_.erase(id);
}

void RemoteBus::read_loop() {
  try {
    while (connected_) {
      auto frame = net::read_frame(stream_);
      if (!frame) break;
      const auto msg = Json::parse(*frame, nullptr, false);
      if (msg.is_discarded() || msg.value("op", "") != "msg") continue;
      const std::string filter = msg.value("filter", "");
      const std::string topic = msg.value("topic", "");
      const Json payload = msg.value("payload", Json::object());
      std::lock_guard lock(mu_);
      for (const auto& [id, sub] : subs_)
        if (sub.first == filter)
          runtime_.post([h = sub.second, topic, payload] { (*h)(topic, payload); });
    }
  } catch (const std::exception&) {
  }
  connected_ = false;
}

}  // namespace sting
