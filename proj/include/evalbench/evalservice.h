// Copyright 2026 The evalbench Authors.
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

// Annotation session service. Sessions follow their plans strictly in order;
// every acknowledged response is on disk (append-only JSON lines, fdatasync)
// before the call returns, and the log is replayed on startup.

#ifndef EVALBENCH_EVALSERVICE_H_
#define EVALBENCH_EVALSERVICE_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "evalbench/common.h"
#include "evalbench/stimuli.h"

namespace evalbench {

struct AnnotationRecord {
  std::string record_id;
  Task task = Task::kRanking;
  std::string subject_id;
  std::string session_id;
  std::size_t item_index = 0;
  std::vector<std::string> stimulus_ids;  // in plan order
  // Ranking: ranks[k] is the rank (1 = most natural) given to the text shown
  // at position k. Classification: label is yes, no or ct.
  std::vector<int> ranks;
  std::string label;
  std::vector<int> display_order;  // ranking only
  std::string received_at;         // UTC, ISO 8601

  bool operator==(const AnnotationRecord &) const = default;
};

nlohmann::json record_to_json(const AnnotationRecord &r);
AnnotationRecord record_from_json(const nlohmann::json &j);

struct SessionDescriptor {
  std::string session_id;
  std::string subject_id;
  Task task = Task::kRanking;
  std::size_t n_items = 0;
  std::size_t next = 0;

  nlohmann::json to_json() const;
};

// Deterministic: hex of fnv1a64("<task>:<subject>").
std::string session_id_for(Task task, const std::string &subject_id);

using Clock = std::function<std::chrono::system_clock::time_point()>;

class EvalService {
 public:
  // Replays `log_path` if it exists. A torn final line (a crash mid-append)
  // is dropped and the file truncated to the last complete record; any other
  // inconsistency is a FormatError.
  EvalService(StimulusSet set, std::vector<SessionPlan> plans, std::string log_path,
              Clock clock = std::chrono::system_clock::now);
  ~EvalService();

  EvalService(const EvalService &) = delete;
  EvalService &operator=(const EvalService &) = delete;

  // Idempotent; raises UnknownSubject, or PlanExhausted once every item of
  // the plan has been answered.
  SessionDescriptor create_session(const std::string &subject_id, Task task);

  // {"done":false,"item_index","n_items","task","texts":[...]} or
  // {"done":true,"n_items"}. Never carries system labels or stimulus ids.
  nlohmann::json next_item(const std::string &session_id) const;

  // Ranking responses are a JSON array permuting [1,2,3]; classification
  // responses are one of "yes", "no", "ct".
  AnnotationRecord submit_response(const std::string &session_id, std::size_t item_index,
                                   const nlohmann::json &response);

  // Records sorted by (session_id, item_index), each joined with the blinding
  // map: "systems" (per displayed position), "condition", "prompt_id". One
  // JSON object per line, keys sorted.
  std::string export_responses(std::optional<Task> task = std::nullopt) const;

  std::size_t record_count() const;
  std::size_t cursor(const std::string &session_id) const;

  const StimulusSet &stimuli() const { return set_; }

 private:
  struct Session {
    SessionPlan plan;
    std::string session_id;
    mutable std::mutex mu;
    std::size_t cursor = 0;
    std::vector<AnnotationRecord> records;
  };

  Session &session(const std::string &session_id) const;
  void replay();
  void append_log(const AnnotationRecord &r);
  std::string now_iso() const;

  StimulusSet set_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;  // fixed after construction
  std::map<std::pair<std::string, Task>, Session *> by_subject_;
  std::string log_path_;
  Clock clock_;
  std::mutex log_mu_;
  int log_fd_ = -1;
};

// Response-shape validation shared with the HTTP layer and the replay path.
void check_response(Task task, const nlohmann::json &response);

}  // namespace evalbench

#endif  // EVALBENCH_EVALSERVICE_H_
