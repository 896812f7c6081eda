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


#include "nqasm/scheduler.hpp"

#include <algorithm>

namespace nqasm {

void Scheduler::at(Time time, int node, Action action) {
  queue_.push(Event{std::max(time, now_), node, next_seq_++, std::move(action)});
}

bool Scheduler::deadline_hit() const {
  return deadline_ && !queue_.empty() && queue_.top().time > *deadline_;
}

bool Scheduler::step() {
  if (queue_.empty() || deadline_hit()) return false;
  // Copy out before pop: the action may schedule more events.
  Event e = queue_.top();
  queue_.pop();
  now_ = e.time;
  ++events_run_;
  e.action();
  if (observer_) observer_();
  return true;
}

void Scheduler::run() {
  while (step()) {
  }
}

}  // namespace nqasm
