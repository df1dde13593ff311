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

#include "evalbench/evalservice.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <filesystem>

#include <fmt/format.h>

#include "evalbench/common.h"

namespace evalbench {

namespace {

constexpr const char *kModule = "evalservice";

using json = nlohmann::json;

[[noreturn]] void io_fail(const std::string &what, const std::string &path) {
  throw Error(ErrorCode::kIoError, kModule,
              fmt::format("{} {}: {}", what, path, std::strerror(errno)));
}

void write_all(int fd, std::string_view data, const std::string &path) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("write", path);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

void check_response(Task task, const json &response) {
  if (task == Task::kRanking) {
    bool ok = response.is_array() && response.size() == 3;
    if (ok) {
      std::vector<int> ranks;
      for (const auto &v : response) {
        if (!v.is_number_integer()) {
          ok = false;
          break;
        }
        ranks.push_back(v.get<int>());
      }
      std::sort(ranks.begin(), ranks.end());
      ok = ok && ranks == std::vector<int>{1, 2, 3};
    }
    if (!ok) {
      throw Error(ErrorCode::kMalformedResponse, kModule,
                  fmt::format("ranking response must permute [1,2,3], got {}", response.dump()));
    }
  } else {
    if (!response.is_string() || (response != "yes" && response != "no" && response != "ct")) {
      throw Error(ErrorCode::kMalformedResponse, kModule,
                  fmt::format("classification response must be yes, no or ct, got {}",
                              response.dump()));
    }
  }
}

json record_to_json(const AnnotationRecord &r) {
  json j = {{"record_id", r.record_id},
            {"task", task_name(r.task)},
            {"subject_id", r.subject_id},
            {"session_id", r.session_id},
            {"item_index", r.item_index},
            {"stimulus_ids", r.stimulus_ids},
            {"received_at", r.received_at}};
  if (r.task == Task::kRanking) {
    j["response"] = r.ranks;
    j["display_order"] = r.display_order;
  } else {
    j["response"] = r.label;
  }
  return j;
}

AnnotationRecord record_from_json(const json &j) {
  AnnotationRecord r;
  try {
    r.record_id = j.at("record_id").get<std::string>();
    r.task = parse_task(j.at("task").get<std::string>());
    r.subject_id = j.at("subject_id").get<std::string>();
    r.session_id = j.at("session_id").get<std::string>();
    r.item_index = j.at("item_index").get<std::size_t>();
    r.stimulus_ids = j.at("stimulus_ids").get<std::vector<std::string>>();
    r.received_at = j.at("received_at").get<std::string>();
    check_response(r.task, j.at("response"));
    if (r.task == Task::kRanking) {
      r.ranks = j.at("response").get<std::vector<int>>();
      r.display_order = j.at("display_order").get<std::vector<int>>();
    } else {
      r.label = j.at("response").get<std::string>();
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, kModule, fmt::format("bad record: {}", e.what()));
  }
  return r;
}

json SessionDescriptor::to_json() const {
  return {{"session_id", session_id},
          {"subject_id", subject_id},
          {"task", task_name(task)},
          {"n_items", n_items},
          {"next", next}};
}

std::string session_id_for(Task task, const std::string &subject_id) {
  return fmt::format("{:016x}", fnv1a64(fmt::format("{}:{}", task_name(task), subject_id)));
}

EvalService::EvalService(StimulusSet set, std::vector<SessionPlan> plans, std::string log_path,
                         Clock clock)
    : set_(std::move(set)), log_path_(std::move(log_path)), clock_(std::move(clock)) {
  for (auto &plan : plans) {
    for (const auto &item : plan.items) {
      for (const auto &id : item.stimulus_ids) set_.at(id);  // every id must resolve
    }
    auto s = std::make_unique<Session>();
    s->session_id = session_id_for(plan.task, plan.subject_id);
    s->plan = std::move(plan);
    const auto key = std::make_pair(s->plan.subject_id, s->plan.task);
    if (by_subject_.count(key) || sessions_.count(s->session_id)) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  fmt::format("two {} plans for subject {}", task_name(key.second), key.first));
    }
    by_subject_[key] = s.get();
    sessions_[s->session_id] = std::move(s);
  }
  replay();
  log_fd_ = ::open(log_path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (log_fd_ < 0) io_fail("open", log_path_);
}

EvalService::~EvalService() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

void EvalService::replay() {
  if (!std::filesystem::exists(log_path_)) return;
  const std::string data = read_file(log_path_, kModule);
  std::size_t good = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    ++line_no;
    const std::string_view line(data.data() + pos, nl - pos);
    pos = nl + 1;
    if (trim(line).empty()) {
      good = pos;
      continue;
    }
    AnnotationRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("{}:{}: {}", log_path_, line_no, e.what()), line_no);
    } catch (const Error &e) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("{}:{}: {}", log_path_, line_no, e.what()), line_no);
    }
    auto it = sessions_.find(r.session_id);
    if (it == sessions_.end()) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("{}:{}: unknown session {}", log_path_, line_no, r.session_id),
                  line_no);
    }
    Session &s = *it->second;
    const bool consistent = r.task == s.plan.task && r.subject_id == s.plan.subject_id &&
                            r.item_index == s.cursor && s.cursor < s.plan.items.size() &&
                            r.stimulus_ids == s.plan.items[s.cursor].stimulus_ids &&
                            (r.task != Task::kRanking ||
                             r.display_order == s.plan.items[s.cursor].display_order);
    if (!consistent) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("{}:{}: record {} does not follow its plan", log_path_, line_no,
                              r.record_id),
                  line_no);
    }
    s.records.push_back(std::move(r));
    ++s.cursor;
    good = pos;
  }
  if (good < data.size()) {
    if (::truncate(log_path_.c_str(), static_cast<off_t>(good)) != 0) {
      io_fail("truncate", log_path_);
    }
  }
}

EvalService::Session &EvalService::session(const std::string &session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kUnknownSession, kModule,
                fmt::format("unknown session '{}'", session_id));
  }
  return *it->second;
}

SessionDescriptor EvalService::create_session(const std::string &subject_id, Task task) {
  auto it = by_subject_.find({subject_id, task});
  if (it == by_subject_.end()) {
    throw Error(ErrorCode::kUnknownSubject, kModule,
                fmt::format("no {} plan for subject '{}'", task_name(task), subject_id));
  }
  Session &s = *it->second;
  std::lock_guard lock(s.mu);
  SessionDescriptor d{s.session_id, subject_id, task, s.plan.items.size(), s.cursor};
  if (s.cursor >= s.plan.items.size()) {
    throw Error(ErrorCode::kPlanExhausted, kModule,
                fmt::format("session {} is complete ({} items)", s.session_id, d.n_items));
  }
  return d;
}

json EvalService::next_item(const std::string &session_id) const {
  Session &s = session(session_id);
  std::lock_guard lock(s.mu);
  const std::size_t n = s.plan.items.size();
  if (s.cursor >= n) return {{"done", true}, {"n_items", n}};
  const PlanItem &item = s.plan.items[s.cursor];
  json texts = json::array();
  for (int k : item.display_order) {
    texts.push_back(join(set_.at(item.stimulus_ids.at(static_cast<std::size_t>(k))).text, " "));
  }
  return {{"done", false},
          {"item_index", s.cursor},
          {"n_items", n},
          {"task", task_name(s.plan.task)},
          {"texts", texts}};
}

AnnotationRecord EvalService::submit_response(const std::string &session_id,
                                              std::size_t item_index, const json &response) {
  Session &s = session(session_id);
  std::lock_guard lock(s.mu);
  if (item_index < s.cursor) {
    throw Error(ErrorCode::kDuplicateSubmission, kModule,
                fmt::format("item {} of session {} is already answered", item_index, session_id));
  }
  if (item_index != s.cursor || item_index >= s.plan.items.size()) {
    throw Error(ErrorCode::kOutOfOrder, kModule,
                fmt::format("item {} submitted but session {} expects {}", item_index,
                            session_id, s.cursor));
  }
  check_response(s.plan.task, response);
  const PlanItem &item = s.plan.items[item_index];
  AnnotationRecord r;
  r.record_id = fmt::format("{}-{:05}", session_id, item_index);
  r.task = s.plan.task;
  r.subject_id = s.plan.subject_id;
  r.session_id = session_id;
  r.item_index = item_index;
  r.stimulus_ids = item.stimulus_ids;
  if (r.task == Task::kRanking) {
    r.ranks = response.get<std::vector<int>>();
    r.display_order = item.display_order;
  } else {
    r.label = response.get<std::string>();
  }
  r.received_at = now_iso();
  append_log(r);
  s.records.push_back(r);
  ++s.cursor;
  return r;
}

void EvalService::append_log(const AnnotationRecord &r) {
  const std::string line = record_to_json(r).dump() + "\n";
  std::lock_guard lock(log_mu_);
  write_all(log_fd_, line, log_path_);
  if (::fdatasync(log_fd_) != 0) io_fail("fdatasync", log_path_);
}

std::string EvalService::now_iso() const {
  const auto tp = clock_();
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  return fmt::format("{}.{:03}Z", buf, ms % 1000);
}

std::string EvalService::export_responses(std::optional<Task> task) const {
  std::string out;
  for (const auto &[id, s] : sessions_) {  // map order = session_id order
    if (task && s->plan.task != *task) continue;
    std::vector<AnnotationRecord> records;
    {
      std::lock_guard lock(s->mu);
      records = s->records;
    }
    for (const auto &r : records) {
      json j = record_to_json(r);
      json systems = json::array();
      if (r.task == Task::kRanking) {
        for (int k : r.display_order) {
          systems.push_back(
              system_name(set_.at(r.stimulus_ids.at(static_cast<std::size_t>(k))).system));
        }
      } else {
        systems.push_back(system_name(set_.at(r.stimulus_ids.at(0)).system));
      }
      const Stimulus &first = set_.at(r.stimulus_ids.at(0));
      j["systems"] = systems;
      j["condition"] = first.condition.name();
      j["prompt_id"] = first.prompt_id;
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::size_t EvalService::record_count() const {
  std::size_t n = 0;
  for (const auto &[id, s] : sessions_) {
    std::lock_guard lock(s->mu);
    n += s->records.size();
  }
  return n;
}

std::size_t EvalService::cursor(const std::string &session_id) const {
  Session &s = session(session_id);
  std::lock_guard lock(s.mu);
  return s.cursor;
}

}  // namespace evalbench
