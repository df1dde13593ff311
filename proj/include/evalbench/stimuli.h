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

// Human-evaluation material: prompt selection, the 3 systems x 4 length
// conditions stimulus grid, and between-subject session plans for the
// ranking and classification tasks.

#ifndef EVALBENCH_STIMULI_H_
#define EVALBENCH_STIMULI_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "evalbench/corpusio.h"

namespace evalbench {

enum class System { kGold, kModel, kBaseline };
inline constexpr std::array<System, 3> kSystems = {System::kGold, System::kModel,
                                                   System::kBaseline};
std::string_view system_name(System s);
System parse_system(std::string_view name);

struct Condition {
  int prompt_len = 5;
  int completion_len = 5;

  int total() const { return prompt_len + completion_len; }
  std::string name() const;  // "5+10"
  bool operator==(const Condition &) const = default;
  auto operator<=>(const Condition &) const = default;
};
inline constexpr std::array<Condition, 4> kConditions = {
    Condition{5, 5}, Condition{5, 10}, Condition{10, 5}, Condition{10, 10}};
Condition parse_condition(std::string_view name);
std::size_t condition_index(const Condition &c);

// The 12 design cells, indexed system * 4 + condition.
inline constexpr std::size_t kCellCount = kSystems.size() * kConditions.size();

enum class Task { kRanking, kClassification };
std::string_view task_name(Task t);
Task parse_task(std::string_view name);

inline constexpr std::size_t kMinGoldTokens = 20;
inline constexpr std::size_t kMinCompletionTokens = 10;

struct PromptPair {
  std::string prompt_id;
  std::vector<std::string> gold;  // the full source sentence
  std::vector<std::string> p5;
  std::vector<std::string> p10;

  const std::vector<std::string> &prompt(int len) const { return len == 5 ? p5 : p10; }
};

struct Stimulus {
  std::string stimulus_id;
  std::string prompt_id;
  System system = System::kGold;
  Condition condition;
  std::vector<std::string> text;  // prompt ++ completion
};

struct StimulusSet {
  std::vector<PromptPair> prompts;
  std::vector<Stimulus> stimuli;

  const Stimulus &at(const std::string &stimulus_id) const;
  const Stimulus &find(const std::string &prompt_id, System s, Condition c) const;
  // stimulus_id -> system; the only route from served texts back to systems.
  std::map<std::string, System> blinding() const;

  void reindex();

 private:
  std::map<std::string, std::size_t> by_id_;
  std::map<std::tuple<std::string, System, Condition>, std::size_t> by_cell_;
};

// (prompt_id, prompt_len, system) -> completion tokens.
using CompletionKey = std::tuple<std::string, int, System>;
using CompletionMap = std::map<CompletionKey, std::vector<std::string>>;

// Uniform sample without replacement among sentences of >= 20 tokens.
std::vector<PromptPair> select_prompts(const Corpus &corpus, std::size_t n, uint64_t seed);

// Needs a >= 10 token completion per (prompt, prompt length, model|baseline);
// the 5-token cut is the prefix of the 10-token cut of the same completion.
StimulusSet build_stimulus_set(const std::vector<PromptPair> &prompts,
                               const CompletionMap &completions);

// Checks counts, one stimulus per cell, and every prefix invariant. Returns
// a description of the first violation, or nullopt.
std::optional<std::string> validate_stimulus_set(const StimulusSet &set);

struct PlanItem {
  std::string prompt_id;
  // Ranking: the three variants sorted by id; displayed position k shows
  // stimulus_ids[display_order[k]]. Classification: one id, order {0}.
  std::vector<std::string> stimulus_ids;
  std::vector<int> display_order;

  bool operator==(const PlanItem &) const = default;
};

struct SessionPlan {
  Task task = Task::kRanking;
  std::string subject_id;
  std::optional<Condition> condition;  // ranking only
  std::vector<PlanItem> items;
  uint64_t rng_seed = 0;

  bool operator==(const SessionPlan &) const = default;
};

// Subjects are split evenly over the four conditions; |subjects| must be a
// positive multiple of 4.
std::vector<SessionPlan> assign_ranking(const StimulusSet &set,
                                        const std::vector<std::string> &subjects, uint64_t seed);

enum class AssignMode { kBalanced, kRandom };

// Balanced mode: each block of 12 subjects is a Latin square, cell for prompt
// i and in-block subject s = sigma[(pi[i] + s) mod 12] with seeded random
// relabelings sigma (cells) and pi (prompts). Random mode draws a cell per
// (subject, prompt). |subjects| must be a positive multiple of 12.
std::vector<SessionPlan> assign_classification(const StimulusSet &set,
                                               const std::vector<std::string> &subjects,
                                               uint64_t seed,
                                               AssignMode mode = AssignMode::kBalanced);

// Completions JSON lines: {"prompt_id","prompt_len","system","tokens":[...]}.
CompletionMap parse_completions_jsonl(std::string_view text);
std::string completions_to_jsonl(const CompletionMap &completions);

nlohmann::json prompts_to_json(const std::vector<PromptPair> &prompts);
std::vector<PromptPair> prompts_from_json(const nlohmann::json &j);

// Stimuli are written without system labels; the "blinding" object maps ids
// to systems.
nlohmann::json stimulus_set_to_json(const StimulusSet &set);
StimulusSet stimulus_set_from_json(const nlohmann::json &j);

nlohmann::json plans_to_json(const std::vector<SessionPlan> &plans);
std::vector<SessionPlan> plans_from_json(const nlohmann::json &j);

}  // namespace evalbench

#endif  // EVALBENCH_STIMULI_H_
