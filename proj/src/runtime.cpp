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

#include "sting/runtime.hpp"

#include <algorithm>
#include <chrono>

namespace sting {

TimerId VirtualRuntime::schedule_at(std::int64_t t_ns, Task task) {
  const TimerId id = next_id_++;
  heap_.push_back({std::max(t_ns, now_), next_order_++, id, std::move(task)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return id;
}

bool VirtualRuntime::step() {
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    if (!cancelled_.empty() && cancelled_.erase(ev.id)) continue;
    now_ = ev.t;
    ++executed_;
    ev.task();
    return true;
  }
  return false;
}

void VirtualRuntime::run_until(std::int64_t t_ns) {
  while (!heap_.empty() && heap_.front().t <= t_ns) step();
  now_ = std::max(now_, t_ns);
}

bool VirtualRuntime::run_while_not(const std::function<bool()>& pred, std::int64_t deadline_ns) {
  while (!pred()) {
    if (heap_.empty() || heap_.front().t > deadline_ns) return pred();
    step();
  }
  return true;
}

namespace {
std::int64_t wall_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}
}  // namespace

RealtimeRuntime::RealtimeRuntime() : thread_([this] { loop(); }) {}

RealtimeRuntime::~RealtimeRuntime() { stop(); }

std::int64_t RealtimeRuntime::now_ns() const { return wall_ns(); }

TimerId RealtimeRuntime::schedule_at(std::int64_t t_ns, Task task) {
  std::lock_guard lock(mu_);
  const TimerId id = next_id_++;
  heap_.push_back({t_ns, next_order_++, id, std::move(task)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  cv_.notify_one();
  return id;
}

void RealtimeRuntime::post(Task task) { schedule_at(0, std::move(task)); }

void RealtimeRuntime::cancel(TimerId id) {
  std::lock_guard lock(mu_);
  cancelled_.insert(id);
}

void RealtimeRuntime::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    cv_.notify_all();
  }
  if (thread_.joinable() && !on_loop_thread()) thread_.join();
}

std::int64_t RealtimeRuntime::max_lateness_ns() const {
  std::lock_guard lock(mu_);
  return max_lateness_;
}

void RealtimeRuntime::loop() {
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (heap_.empty()) {
      cv_.wait(lock);
      continue;
    }
    const std::int64_t due = heap_.front().t;
    const std::int64_t now = wall_ns();
    if (due > now) {
      cv_.wait_for(lock, std::chrono::nanoseconds(due - now));
      continue;
    }
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    if (cancelled_.erase(ev.id)) continue;
    if (ev.t > 0) max_lateness_ = std::max(max_lateness_, now - ev.t);
    lock.unlock();
    ev.task();
    lock.lock();
  }
}

}  // namespace sting
