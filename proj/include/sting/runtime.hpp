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

#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <unordered_set>
#include <vector>

namespace sting {

using TimerId = std::uint64_t;

/// Event loop that owns time. Agents, the controller, and the emulated
/// channel are written against this so the same code runs in virtual time
/// (tests, emulated scenarios) and on the wall clock (field use).
class Runtime {
 public:
  using Task = std::function<void()>;

  virtual ~Runtime() = default;

  /// Nanoseconds since the Unix epoch (virtual or real).
  [[nodiscard]] virtual std::int64_t now_ns() const = 0;
  virtual TimerId schedule_at(std::int64_t t_ns, Task task) = 0;
  virtual void post(Task task) = 0;
  virtual void cancel(TimerId id) = 0;

  TimerId schedule_after(std::int64_t delay_ns, Task task) { return schedule_at(now_ns() + delay_ns, std::move(task)); }
};

/// Discrete-event runtime. Events at equal times run in scheduling order.
/// Single-threaded: call everything from the thread that drives it.
class VirtualRuntime final : public Runtime {
 public:
  explicit VirtualRuntime(std::int64_t start_ns = 0) : now_(start_ns) {}

  [[nodiscard]] std::int64_t now_ns() const override { return now_; }
  TimerId schedule_at(std::int64_t t_ns, Task task) override;
  void post(Task task) override { schedule_at(now_, std::move(task)); }
  void cancel(TimerId id) override { cancelled_.insert(id); }

  /// Runs one event; false when the queue is empty.
  bool step();
  /// Runs all events with time <= t_ns, then sets the clock to t_ns.
  void run_until(std::int64_t t_ns);
  /// Runs until pred() holds or the queue drains; returns pred().
  bool run_while_not(const std::function<bool()>& pred, std::int64_t deadline_ns);
  [[nodiscard]] std::size_t pending() const { return heap_.size(); }
  [[nodiscard]] std::uint64_t executed() const { return executed_; }

 private:
  struct Event {
    std::int64_t t;
    std::uint64_t order;
    TimerId id;
    Task task;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.t != b.t ? a.t > b.t : a.order > b.order;
    }
  };

  std::int64_t now_;
  std::uint64_t next_order_ = 0;
  TimerId next_id_ = 1;
  std::uint64_t executed_ = 0;
  std::vector<Event> heap_;
  std::unordered_set<TimerId> cancelled_;
};

/// Wall-clock runtime with one loop thread. schedule_at/post/cancel are
/// thread-safe; tasks run on the loop thread.
class RealtimeRuntime final : public Runtime {
 public:
  RealtimeRuntime();
  ~RealtimeRuntime() override;
  RealtimeRuntime(const RealtimeRuntime&) = delete;
  RealtimeRuntime& operator=(const RealtimeRuntime&) = delete;

  [[nodiscard]] std::int64_t now_ns() const override;
  TimerId schedule_at(std::int64_t t_ns, Task task) override;
  void post(Task task) override;
  void cancel(TimerId id) override;

  void stop();
  [[nodiscard]] bool on_loop_thread() const { return std::this_thread::get_id() == thread_.get_id(); }
  /// Worst observed lateness of a timer against its due time.
  [[nodiscard]] std::int64_t max_lateness_ns() const;

 private:
  struct Event {
    std::int64_t t;
    std::uint64_t order;
    TimerId id;
    Task task;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.t != b.t ? a.t > b.t : a.order > b.order;
    }
  };
  void loop();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Event> heap_;
  std::unordered_set<TimerId> cancelled_;
  std::uint64_t next_order_ = 0;
  TimerId next_id_ = 1;
  bool stopping_ = false;
  std::int64_t max_lateness_ = 0;
  std::thread thread_;
};

}  // namespace sting
