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

#include "evalbench/stimuli.h"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "evalbench/common.h"

namespace evalbench {

namespace {

constexpr const char *kModule = "stimuli";

using json = nlohmann::json;

std::vector<std::string> prefix(const std::vector<std::string> &v, std::size_t n) {
  return std::vector<std::string>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
}

bool is_prefix(const std::vector<std::string> &p, const std::vector<std::string> &v) {
  return p.size() <= v.size() && std::equal(p.begin(), p.end(), v.begin());
}

// Opaque, deterministic id: nothing in it hints at the system.
std::string stimulus_id_for(const std::string &prompt_id, System s, Condition c) {
  const std::string key =
      fmt::format("{}\x1f{}\x1f{}", prompt_id, system_name(s), c.name());
  return fmt::format("s{:012x}", fnv1a64(key) & 0xFFFFFFFFFFFFULL);
}

void check_subjects(const std::vector<std::string> &subjects, std::size_t group, Task task) {
  if (subjects.empty() || subjects.size() % group != 0) {
    throw Error(ErrorCode::kBadSubjectCount, kModule,
                fmt::format("{} needs a positive multiple of {} subjects, got {}",
                            task_name(task), group, subjects.size()));
  }
  std::set<std::string> seen;
  for (const auto &s : subjects) {
    if (s.empty() || !seen.insert(s).second) {
      throw Error(ErrorCode::kBadSubjectCount, kModule,
                  fmt::format("subject ids must be unique and non-empty ('{}')", s));
    }
  }
}

}  // namespace

std::string_view system_name(System s) {
  switch (s) {
    case System::kGold: return "gold";
    case System::kModel: return "model";
    case System::kBaseline: return "baseline";
  }
  return "";
}

System parse_system(std::string_view name) {
  for (System s : kSystems) {
    if (system_name(s) == name) return s;
  }
  throw Error(ErrorCode::kFormatError, kModule, fmt::format("unknown system '{}'", name));
}

std::string Condition::name() const { return fmt::format("{}+{}", prompt_len, completion_len); }

Condition parse_condition(std::string_view name) {
  for (const Condition &c : kConditions) {
    if (c.name() == name) return c;
  }
  throw Error(ErrorCode::kFormatError, kModule, fmt::format("unknown condition '{}'", name));
}

std::size_t condition_index(const Condition &c) {
  for (std::size_t i = 0; i < kConditions.size(); ++i) {
    if (kConditions[i] == c) return i;
  }
  throw Error(ErrorCode::kInvalidArgument, kModule, fmt::format("bad condition {}", c.name()));
}

std::string_view task_name(Task t) {
  return t == Task::kRanking ? "ranking" : "classification";
}

Task parse_task(std::string_view name) {
  if (name == "ranking") return Task::kRanking;
  if (name == "classification") return Task::kClassification;
  throw Error(ErrorCode::kInvalidArgument, kModule,
              fmt::format("unknown task '{}' (expected ranking|classification)", name));
}

void StimulusSet::reindex() {
  by_id_.clear();
  by_cell_.clear();
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    const Stimulus &s = stimuli[i];
    if (!by_id_.emplace(s.stimulus_id, i).second) {
      throw Error(ErrorCode::kFormatError, kModule,
                  fmt::format("duplicate stimulus id {}", s.stimulus_id));
    }
    by_cell_[{s.prompt_id, s.system, s.condition}] = i;
  }
}

const Stimulus &StimulusSet::at(const std::string &stimulus_id) const {
  auto it = by_id_.find(stimulus_id);
  if (it == by_id_.end()) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("unknown stimulus id {}", stimulus_id));
  }
  return stimuli[it->second];
}

const Stimulus &StimulusSet::find(const std::string &prompt_id, System s, Condition c) const {
  auto it = by_cell_.find({prompt_id, s, c});
  if (it == by_cell_.end()) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("no stimulus for ({}, {}, {})", prompt_id, system_name(s), c.name()));
  }
  return stimuli[it->second];
}

std::map<std::string, System> StimulusSet::blinding() const {
  std::map<std::string, System> out;
  for (const auto &s : stimuli) out.emplace(s.stimulus_id, s.system);
  return out;
}

std::vector<PromptPair> select_prompts(const Corpus &corpus, std::size_t n, uint64_t seed) {
  std::vector<const Sentence *> eligible;
  for (const Sentence *s : corpus.sentences()) {
    if (s->size() >= kMinGoldTokens) eligible.push_back(s);
  }
  if (eligible.size() < n) {
    throw Error(ErrorCode::kNotEnoughEligible, kModule,
                fmt::format("need {} sentences of >= {} tokens, found {}", n, kMinGoldTokens,
                            eligible.size()));
  }
  // Partial Fisher-Yates from the front.
  Rng rng(seed);
  std::vector<std::size_t> idx(eligible.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<PromptPair> out;
  const std::size_t width = std::max<std::size_t>(4, fmt::format("{}", n).size());
  for (std::size_t i = 0; i < n; ++i) {
    PromptPair p;
    p.prompt_id = fmt::format("p{:0{}}", i + 1, width);
    p.gold = eligible[idx[i]]->forms();
    p.p5 = prefix(p.gold, 5);
    p.p10 = prefix(p.gold, 10);
    out.push_back(std::move(p));
  }
  return out;
}

StimulusSet build_stimulus_set(const std::vector<PromptPair> &prompts,
                               const CompletionMap &completions) {
  StimulusSet set;
  set.prompts = prompts;
  std::set<std::string> prompt_ids;
  for (const PromptPair &p : prompts) {
    if (!prompt_ids.insert(p.prompt_id).second) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  fmt::format("duplicate prompt id {}", p.prompt_id));
    }
    if (p.gold.size() < kMinGoldTokens || !is_prefix(p.p5, p.p10) || !is_prefix(p.p10, p.gold) ||
        p.p5.size() != 5 || p.p10.size() != 10) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  fmt::format("prompt {} violates the 5/10/gold prefix layout", p.prompt_id));
    }
    for (System sys : kSystems) {
      for (const Condition &c : kConditions) {
        Stimulus st;
        st.prompt_id = p.prompt_id;
        st.system = sys;
        st.condition = c;
        st.stimulus_id = stimulus_id_for(p.prompt_id, sys, c);
        if (sys == System::kGold) {
          st.text = prefix(p.gold, static_cast<std::size_t>(c.total()));
        } else {
          auto it = completions.find({p.prompt_id, c.prompt_len, sys});
          if (it == completions.end()) {
            throw Error(ErrorCode::kMissingCompletion, kModule,
                        fmt::format("no {} completion for prompt {} at prompt length {}",
                                    system_name(sys), p.prompt_id, c.prompt_len));
          }
          if (it->second.size() < kMinCompletionTokens) {
            throw Error(ErrorCode::kCompletionTooShort, kModule,
                        fmt::format("{} completion for prompt {} at prompt length {} has {} "
                                    "tokens, need {}",
                                    system_name(sys), p.prompt_id, c.prompt_len,
                                    it->second.size(), kMinCompletionTokens));
          }
          st.text = p.prompt(c.prompt_len);
          st.text.insert(st.text.end(), it->second.begin(),
                         it->second.begin() + c.completion_len);
        }
        set.stimuli.push_back(std::move(st));
      }
    }
  }
  set.reindex();
  return set;
}

std::optional<std::string> validate_stimulus_set(const StimulusSet &set) {
  if (set.stimuli.size() != set.prompts.size() * kCellCount) {
    return fmt::format("{} stimuli for {} prompts", set.stimuli.size(), set.prompts.size());
  }
  std::set<std::tuple<std::string, System, Condition>> cells;
  std::map<std::string, const PromptPair *> prompts;
  for (const auto &p : set.prompts) prompts[p.prompt_id] = &p;
  for (const Stimulus &s : set.stimuli) {
    if (!cells.insert({s.prompt_id, s.system, s.condition}).second) {
      return fmt::format("cell ({}, {}, {}) appears twice", s.prompt_id, system_name(s.system),
                         s.condition.name());
    }
    auto it = prompts.find(s.prompt_id);
    if (it == prompts.end()) return fmt::format("stimulus {} has unknown prompt", s.stimulus_id);
    const PromptPair &p = *it->second;
    if (!is_prefix(p.p5, p.p10) || !is_prefix(p.p10, p.gold)) {
      return fmt::format("prompt {} prefixes broken", p.prompt_id);
    }
    if (s.text.size() != static_cast<std::size_t>(s.condition.total())) {
      return fmt::format("stimulus {} has {} tokens for {}", s.stimulus_id, s.text.size(),
                         s.condition.name());
    }
    if (!is_prefix(p.prompt(s.condition.prompt_len), s.text)) {
      return fmt::format("stimulus {} does not start with its prompt", s.stimulus_id);
    }
    if (s.system == System::kGold && !is_prefix(s.text, p.gold)) {
      return fmt::format("gold stimulus {} differs from the source sentence", s.stimulus_id);
    }
  }
  // Both cuts of a system's output come from the same completion.
  for (const auto &p : set.prompts) {
    for (System sys : {System::kModel, System::kBaseline}) {
      for (int plen : {5, 10}) {
        const Stimulus &s5 = set.find(p.prompt_id, sys, Condition{plen, 5});
        const Stimulus &s10 = set.find(p.prompt_id, sys, Condition{plen, 10});
        if (!is_prefix(s5.text, s10.text)) {
          return fmt::format("{} {}+5 is not a prefix of {}+10 for prompt {}", system_name(sys),
                             plen, plen, p.prompt_id);
        }
      }
    }
  }
  return std::nullopt;
}

std::vector<SessionPlan> assign_ranking(const StimulusSet &set,
                                        const std::vector<std::string> &subjects, uint64_t seed) {
  check_subjects(subjects, kConditions.size(), Task::kRanking);
  Rng rng(derive_seed(seed, "ranking/groups"));
  std::vector<std::size_t> order(subjects.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::size_t> group(subjects.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    group[order[pos]] = pos % kConditions.size();
  }

  std::vector<SessionPlan> plans;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    SessionPlan plan;
    plan.task = Task::kRanking;
    plan.subject_id = subjects[i];
    plan.condition = kConditions[group[i]];
    plan.rng_seed = derive_seed(seed, "ranking/subject/" + subjects[i]);
    Rng subject_rng(plan.rng_seed);
    std::vector<std::size_t> prompt_order(set.prompts.size());
    std::iota(prompt_order.begin(), prompt_order.end(), 0);
    subject_rng.shuffle(prompt_order);
    for (std::size_t pi : prompt_order) {
      const std::string &pid = set.prompts[pi].prompt_id;
      PlanItem item;
      item.prompt_id = pid;
      for (System sys : kSystems) {
        item.stimulus_ids.push_back(set.find(pid, sys, *plan.condition).stimulus_id);
      }
      std::sort(item.stimulus_ids.begin(), item.stimulus_ids.end());
      item.display_order = {0, 1, 2};
      subject_rng.shuffle(item.display_order);
      plan.items.push_back(std::move(item));
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<SessionPlan> assign_classification(const StimulusSet &set,
                                               const std::vector<std::string> &subjects,
                                               uint64_t seed, AssignMode mode) {
  check_subjects(subjects, kCellCount, Task::kClassification);
  const std::size_t n_prompts = set.prompts.size();
  auto cell_stimulus = [&](std::size_t prompt, std::size_t cell) -> const Stimulus & {
    return set.find(set.prompts[prompt].prompt_id, kSystems[cell / kConditions.size()],
                    kConditions[cell % kConditions.size()]);
  };

  std::vector<SessionPlan> plans;
  for (std::size_t block = 0; block * kCellCount < subjects.size(); ++block) {
    Rng block_rng(derive_seed(seed, fmt::format("classification/block/{}", block)));
    std::vector<std::size_t> sigma(kCellCount);
    std::iota(sigma.begin(), sigma.end(), 0);
    block_rng.shuffle(sigma);
    std::vector<std::size_t> pi(n_prompts);
    std::iota(pi.begin(), pi.end(), 0);
    block_rng.shuffle(pi);

    for (std::size_t s = 0; s < kCellCount; ++s) {
      SessionPlan plan;
      plan.task = Task::kClassification;
      plan.subject_id = subjects[block * kCellCount + s];
      plan.rng_seed = derive_seed(seed, "classification/subject/" + plan.subject_id);
      Rng subject_rng(plan.rng_seed);
      std::vector<std::size_t> cell_of(n_prompts);
      for (std::size_t i = 0; i < n_prompts; ++i) {
        cell_of[i] = mode == AssignMode::kBalanced
                         ? sigma[(pi[i] + s) % kCellCount]
                         : static_cast<std::size_t>(subject_rng.uniform(kCellCount));
      }
      std::vector<std::size_t> prompt_order(n_prompts);
      std::iota(prompt_order.begin(), prompt_order.end(), 0);
      subject_rng.shuffle(prompt_order);
      for (std::size_t i : prompt_order) {
        PlanItem item;
        item.prompt_id = set.prompts[i].prompt_id;
        item.stimulus_ids = {cell_stimulus(i, cell_of[i]).stimulus_id};
        item.display_order = {0};
        plan.items.push_back(std::move(item));
      }
      plans.push_back(std::move(plan));
    }
  }
  return plans;
}

CompletionMap parse_completions_jsonl(std::string_view text) {
  CompletionMap out;
  std::size_t line_no = 0;
  for (const std::string &line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      const int plen = j.at("prompt_len").get<int>();
      if (plen != 5 && plen != 10) {
        throw Error(ErrorCode::kFormatError, kModule,
                    fmt::format("line {}: prompt_len must be 5 or 10", line_no), line_no);
      }
      const System sys = parse_system(j.at("system").get<std::string>());
      if (sys == System::kGold) {
        throw Error(ErrorCode::kFormatError, kModule,
                    fmt::format("line {}: gold completions come from the source sentence",
                                line_no),
                    line_no);
      }
      CompletionKey key{j.at("prompt_id").get<std::string>(), plen, sys};
      if (out.count(key)) {
        throw Error(ErrorCode::kFormatError, kModule,
                    fmt::format("line {}: duplicate completion", line_no), line_no);
      }
      out[key] = j.at("tokens").get<std::vector<std::string>>();
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kFormatError, kModule, fmt::format("line {}: {}", line_no, e.what()),
                  line_no);
    }
  }
  return out;
}

std::string completions_to_jsonl(const CompletionMap &completions) {
  std::string out;
  for (const auto &[key, tokens] : completions) {
    const auto &[pid, plen, sys] = key;
    out += json{{"prompt_id", pid},
                {"prompt_len", plen},
                {"system", system_name(sys)},
                {"tokens", tokens}}
               .dump() +
           "\n";
  }
  return out;
}

json prompts_to_json(const std::vector<PromptPair> &prompts) {
  json arr = json::array();
  for (const auto &p : prompts) {
    arr.push_back({{"prompt_id", p.prompt_id}, {"gold", p.gold}, {"p5", p.p5}, {"p10", p.p10}});
  }
  return arr;
}

std::vector<PromptPair> prompts_from_json(const json &j) {
  std::vector<PromptPair> out;
  try {
    for (const auto &e : j) {
      PromptPair p;
      p.prompt_id = e.at("prompt_id").get<std::string>();
      p.gold = e.at("gold").get<std::vector<std::string>>();
      p.p5 = e.at("p5").get<std::vector<std::string>>();
      p.p10 = e.at("p10").get<std::vector<std::string>>();
      if (!is_prefix(p.p5, p.p10) || !is_prefix(p.p10, p.gold)) {
        throw Error(ErrorCode::kFormatError, kModule,
                    fmt::format("prompt {} prefixes are inconsistent", p.prompt_id));
      }
      out.push_back(std::move(p));
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, kModule, e.what());
  }
  return out;
}

json stimulus_set_to_json(const StimulusSet &set) {
  json stimuli = json::array();
  json blinding = json::object();
  for (const auto &s : set.stimuli) {
    stimuli.push_back({{"stimulus_id", s.stimulus_id},
                       {"prompt_id", s.prompt_id},
                       {"condition", s.condition.name()},
                       {"text", s.text}});
    blinding[s.stimulus_id] = system_name(s.system);
  }
  return {{"prompts", prompts_to_json(set.prompts)}, {"stimuli", stimuli}, {"blinding", blinding}};
}

StimulusSet stimulus_set_from_json(const json &j) {
  StimulusSet set;
  try {
    set.prompts = prompts_from_json(j.at("prompts"));
    const json &blinding = j.at("blinding");
    for (const auto &e : j.at("stimuli")) {
      Stimulus s;
      s.stimulus_id = e.at("stimulus_id").get<std::string>();
      s.prompt_id = e.at("prompt_id").get<std::string>();
      s.condition = parse_condition(e.at("condition").get<std::string>());
      s.text = e.at("text").get<std::vector<std::string>>();
      s.system = parse_system(blinding.at(s.stimulus_id).get<std::string>());
      set.stimuli.push_back(std::move(s));
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, kModule, e.what());
  }
  set.reindex();
  if (auto bad = validate_stimulus_set(set)) {
    throw Error(ErrorCode::kFormatError, kModule, *bad);
  }
  return set;
}

json plans_to_json(const std::vector<SessionPlan> &plans) {
  json arr = json::array();
  for (const auto &p : plans) {
    json items = json::array();
    for (const auto &it : p.items) {
      items.push_back({{"prompt_id", it.prompt_id},
                       {"stimulus_ids", it.stimulus_ids},
                       {"display_order", it.display_order}});
    }
    json plan = {{"task", task_name(p.task)},
                 {"subject_id", p.subject_id},
                 {"rng_seed", p.rng_seed},
                 {"items", items}};
    if (p.condition) plan["condition"] = p.condition->name();
    arr.push_back(std::move(plan));
  }
  return arr;
}

std::vector<SessionPlan> plans_from_json(const json &j) {
  std::vector<SessionPlan> out;
  try {
    for (const auto &e : j) {
      SessionPlan p;
      p.task = parse_task(e.at("task").get<std::string>());
      p.subject_id = e.at("subject_id").get<std::string>();
      p.rng_seed = e.at("rng_seed").get<uint64_t>();
      if (e.contains("condition")) p.condition = parse_condition(e["condition"].get<std::string>());
      for (const auto &ij : e.at("items")) {
        PlanItem it;
        it.prompt_id = ij.at("prompt_id").get<std::string>();
        it.stimulus_ids = ij.at("stimulus_ids").get<std::vector<std::string>>();
        it.display_order = ij.at("display_order").get<std::vector<int>>();
        const std::size_t want = p.task == Task::kRanking ? 3 : 1;
        std::vector<int> sorted = it.display_order;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> iota_v(want);
        std::iota(iota_v.begin(), iota_v.end(), 0);
        if (it.stimulus_ids.size() != want || sorted != iota_v) {
          throw Error(ErrorCode::kFormatError, kModule,
                      fmt::format("plan for {} has a malformed item", p.subject_id));
        }
        p.items.push_back(std::move(it));
      }
      out.push_back(std::move(p));
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, kModule, e.what());
  }
  return out;
}

}  // namespace evalbench
