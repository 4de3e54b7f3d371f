// Copyright 2026 The docie Authors. All Rights Reserved.
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

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "docie/protocol.hpp"
#include "docie/scorers.hpp"

namespace docie {

// Reduce-on-plateau learning-rate schedule with a stopping floor: the rate is
// halved after `patience` epochs without a strict validation-f1 improvement,
// and training stops once it falls below `floor`.
struct ScheduleConfig {
  double initial_lr = 2e-5;
  std::size_t patience = 10;
  double floor = 1e-7;
  std::size_t max_epochs = 1000;
};

struct ScheduleState {
  double lr = 2e-5;
  std::size_t epochs_since_improvement = 0;
  double best_val_f1 = 0.0;  // an f1 of 0 is not an improvement
  std::size_t halvings = 0;
  std::size_t epoch = 0;
  bool stopped = false;

  static ScheduleState initial(double lr) {
    ScheduleState s;
    s.lr = lr;
    return s;
  }

  friend bool operator==(const ScheduleState&, const ScheduleState&) = default;
};

inline ScheduleState schedule_step(ScheduleState state, double val_f1, std::size_t patience = 10,
                                   double floor = 1e-7) {
  if (state.stopped) throw std::logic_error("schedule_step called after the schedule stopped");
  if (patience == 0) throw std::invalid_argument("patience must be >= 1");
  ++state.epoch;
  if (val_f1 > state.best_val_f1) {
    state.best_val_f1 = val_f1;
    state.epochs_since_improvement = 0;
  } else {
    ++state.epochs_since_improvement;
  }
  if (state.epochs_since_improvement >= patience) {
    state.lr /= 2.0;
    state.epochs_since_improvement = 0;
    ++state.halvings;
  }
  if (state.lr < floor) state.stopped = true;
  return state;
}

struct ScheduleTraceEntry {
  std::size_t epoch = 0;
  double lr = 0.0;      // rate the epoch trained with
  double val_f1 = 0.0;
  double next_lr = 0.0;
  bool stopped = false;
};

struct ScheduleRun {
  std::vector<ScheduleTraceEntry> trace;
  ScheduleState final_state;
};

// Drives a scorer's training loop over the control channel: one `schedule`
// message per epoch, answered by an `epoch_result`; a final stopped message
// is acknowledged with `ack`.
inline ScheduleRun drive_schedule(Scorer& scorer, const ScheduleConfig& cfg,
                                  const protocol::json& options = protocol::json::object(),
                                  const std::string& id_prefix = "schedule") {
  ScheduleRun run;
  ScheduleState state = ScheduleState::initial(cfg.initial_lr);
  while (!state.stopped && state.epoch < cfg.max_epochs) {
    protocol::ScheduleMessage msg{id_prefix + "/" + std::to_string(state.epoch + 1), state.epoch + 1, state.lr,
                                  state.halvings, false, options};
    const auto result = protocol::parse_epoch_result(scorer.control(protocol::serialize(msg)));
    if (result.request_id != msg.request_id) throw protocol::SchemaError("epoch_result id mismatch");
    const double used = state.lr;
    state = schedule_step(state, result.val_f1, cfg.patience, cfg.floor);
    run.trace.push_back({state.epoch, used, result.val_f1, state.lr, state.stopped});
  }
  protocol::ScheduleMessage done{id_prefix + "/done", state.epoch, state.lr, state.halvings, true, options};
  const auto reply = protocol::detail::parse_line(scorer.control(protocol::serialize(done)));
  const auto kind = reply.at("kind").get<std::string>();
  if (kind == "error") throw protocol::RemoteError("scorer error: " + reply.value("message", std::string()));
  if (kind != "ack") throw protocol::SchemaError("expected ack after final schedule message, got '" + kind + "'");
  run.final_state = state;
  return run;
}

}  // namespace docie
