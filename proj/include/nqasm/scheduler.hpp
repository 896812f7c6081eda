// Copyright 2026 The nqasm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Deterministic discrete-event loop. Events run in (time, node, insertion)
// order; the whole simulation of one run is single threaded.

#ifndef NQASM_SCHEDULER_HPP_
#define NQASM_SCHEDULER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

namespace nqasm {

class Scheduler {
 public:
  using Time = double;
  using Action = std::function<void()>;

  // `time` earlier than now() is clamped to now().
  void at(Time time, int node, Action action);
  void after(Time delay, int node, Action action) { at(now_ + delay, node, std::move(action)); }

  // Runs the next event; false when there is none (or the deadline is hit).
  bool step();
  void run();

  Time now() const { return now_; }
  bool idle() const { return queue_.empty(); }
  std::uint64_t events_run() const { return events_run_; }

  // Off by default. Events later than the deadline are left queued.
  void set_deadline(std::optional<Time> deadline) { deadline_ = deadline; }
  bool deadline_hit() const;

  // Called after every event, for instrumentation.
  void set_observer(Action observer) { observer_ = std::move(observer); }

 private:
  struct Event {
    Time time;
    int node;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.node != b.node) return a.node > b.node;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  Time now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t events_run_ = 0;
  std::optional<Time> deadline_;
  Action observer_;
};

}  // namespace nqasm

#endif  // NQASM_SCHEDULER_HPP_
