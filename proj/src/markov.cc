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

#include "evalbench/markov.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"

namespace evalbench {

namespace {

constexpr const char *kModule = "markov";
constexpr const char *kFormatName = "evalbench-markov";

using json = nlohmann::json;

[[noreturn]] void format_error(std::size_t line, const std::string &what) {
  throw Error(ErrorCode::kFormatError, kModule, fmt::format("line {}: {}", line, what), line);
}

}  // namespace

MarkovModel::Id MarkovModel::intern(const std::string &form) {
  auto [it, inserted] = ids_.try_emplace(form, static_cast<Id>(forms_.size()));
  if (inserted) forms_.push_back(form);
  return it->second;
}

MarkovModel::Id MarkovModel::lookup(std::string_view form) const {
  auto it = ids_.find(std::string(form));
  return it == ids_.end() ? kUnknown : it->second;
}

std::string MarkovModel::key_of(std::span<const Id> state) {
  std::string key(state.size() * sizeof(Id), '\0');
  std::memcpy(key.data(), state.data(), key.size());
  return key;
}

const MarkovModel::Row *MarkovModel::find_row(std::span<const Id> state) const {
  for (Id id : state) {
    if (id == kUnknown) return nullptr;
  }
  auto it = table_.find(key_of(state));
  return it == table_.end() ? nullptr : &it->second;
}

std::string_view MarkovModel::sort_key(Id id) const {
  return id == kEnd ? std::string_view() : std::string_view(forms_[id]);
}

MarkovSymbol MarkovModel::symbol(Id id) const {
  if (id == kBegin || id == kEnd) return std::nullopt;
  return forms_[id];
}

void MarkovModel::finalize(std::unordered_map<std::string, std::unordered_map<Id, uint64_t>> raw) {
  table_.clear();
  table_.reserve(raw.size());
  for (auto &[key, counts] : raw) {
    Row row;
    row.next.assign(counts.begin(), counts.end());
    std::sort(row.next.begin(), row.next.end(), [this](const auto &a, const auto &b) {
      if (a.second != b.second) return a.second > b.second;
      return sort_key(a.first) < sort_key(b.first);
    });
    for (const auto &[_, c] : row.next) row.total += c;
    table_.emplace(key, std::move(row));
  }
}

MarkovModel MarkovModel::train(std::span<const std::vector<std::string>> sentences,
                               int state_size, unsigned threads) {
  if (state_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("state size must be >= 1, got {}", state_size));
  }
  if (sentences.empty()) {
    throw Error(ErrorCode::kEmptyInput, kModule, "no training sentences");
  }
  MarkovModel m;
  m.state_size_ = state_size;
  m.forms_.assign(kFirstForm, std::string());

  // Interning is serial so ids do not depend on the thread count.
  std::vector<std::vector<Id>> encoded;
  encoded.reserve(sentences.size());
  for (const auto &s : sentences) {
    std::vector<Id> ids(static_cast<std::size_t>(state_size), kBegin);
    for (const auto &form : s) {
      if (form.empty()) {
        throw Error(ErrorCode::kInvalidArgument, kModule, "empty token form in training data");
      }
      ids.push_back(m.intern(form));
    }
    ids.push_back(kEnd);
    encoded.push_back(std::move(ids));
  }

  using Raw = std::unordered_map<std::string, std::unordered_map<Id, uint64_t>>;
  auto count_range = [&](std::size_t begin, std::size_t end, Raw &raw) {
    const std::size_t k = static_cast<std::size_t>(state_size);
    for (std::size_t i = begin; i < end; ++i) {
      const auto &seq = encoded[i];
      for (std::size_t pos = k; pos < seq.size(); ++pos) {
        std::span<const Id> state(seq.data() + pos - k, k);
        ++raw[key_of(state)][seq[pos]];
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(encoded.size())));
  std::vector<Raw> shards(threads);
  if (threads == 1) {
    count_range(0, encoded.size(), shards[0]);
  } else {
    const std::size_t chunk = (encoded.size() + threads - 1) / threads;
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t begin = std::min(encoded.size(), w * chunk);
      const std::size_t end = std::min(encoded.size(), begin + chunk);
      workers.emplace_back([&, begin, end, w] { count_range(begin, end, shards[w]); });
    }
    for (auto &w : workers) w.join();
  }
  Raw merged = std::move(shards[0]);
  for (unsigned w = 1; w < threads; ++w) {
    for (auto &[key, counts] : shards[w]) {
      auto &dst = merged[key];
      for (auto &[id, c] : counts) dst[id] += c;
    }
  }
  m.finalize(std::move(merged));
  return m;
}

MarkovModel MarkovModel::train(std::span<const Sentence> sentences, int state_size,
                               unsigned threads) {
  std::vector<std::vector<std::string>> forms;
  forms.reserve(sentences.size());
  for (const auto &s : sentences) forms.push_back(s.forms());
  return train(std::span<const std::vector<std::string>>(forms), state_size, threads);
}

std::optional<std::vector<std::pair<MarkovSymbol, uint64_t>>> MarkovModel::next_counts(
    const MarkovState &state) const {
  if (state.size() != static_cast<std::size_t>(state_size_)) return std::nullopt;
  std::vector<Id> ids;
  for (const auto &sym : state) ids.push_back(sym ? lookup(*sym) : kBegin);
  const Row *row = find_row(ids);
  if (!row) return std::nullopt;
  std::vector<std::pair<MarkovSymbol, uint64_t>> out;
  for (const auto &[id, c] : row->next) out.emplace_back(symbol(id), c);
  return out;
}

std::vector<MarkovState> MarkovModel::states() const {
  std::vector<MarkovState> out;
  out.reserve(table_.size());
  for (const auto &[key, _] : table_) {
    std::vector<Id> ids(key.size() / sizeof(Id));
    std::memcpy(ids.data(), key.data(), key.size());
    MarkovState st;
    for (Id id : ids) st.push_back(symbol(id));
    out.push_back(std::move(st));
  }
  std::sort(out.begin(), out.end());
  return out;
}

MarkovModel::Id MarkovModel::sample(const Row &row, Rng &rng) const {
  const uint64_t t = rng.uniform(row.total);
  uint64_t cumulative = 0;
  for (const auto &[id, c] : row.next) {
    cumulative += c;
    if (t < cumulative) return id;
  }
  return row.next.back().first;
}

void MarkovModel::walk(std::vector<Id> state, std::size_t limit, uint64_t seed,
                       std::vector<std::string> &out, bool &ended) const {
  Rng rng(seed);
  ended = false;
  while (out.size() < limit) {
    const Row *row = find_row(state);
    if (!row) {
      // Unreachable for trained tables: every emitted form has a successor.
      ended = true;
      return;
    }
    const Id next = sample(*row, rng);
    if (next == kEnd) {
      ended = true;
      return;
    }
    out.push_back(forms_[next]);
    state.erase(state.begin());
    state.push_back(next);
  }
}

std::vector<std::string> MarkovModel::generate(std::size_t max_tokens, uint64_t seed) const {
  std::vector<std::string> out;
  bool ended = false;
  walk(std::vector<Id>(static_cast<std::size_t>(state_size_), kBegin), max_tokens, seed, out,
       ended);
  return out;
}

Continuation MarkovModel::continue_from(std::span<const std::string> prompt,
                                        std::size_t n_tokens, uint64_t seed) const {
  const std::size_t k = static_cast<std::size_t>(state_size_);
  if (prompt.size() < k) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("prompt has {} tokens, state size is {}", prompt.size(), k));
  }
  std::vector<Id> state;
  for (std::size_t i = prompt.size() - k; i < prompt.size(); ++i) {
    state.push_back(lookup(prompt[i]));
  }
  if (!find_row(state)) {
    throw Error(ErrorCode::kUnseenState, kModule,
                fmt::format("state ({}) never occurred in training",
                            join(std::vector<std::string>(prompt.end() - k, prompt.end()), ", ")));
  }
  Continuation c;
  bool ended = false;
  walk(std::move(state), n_tokens, seed, c.tokens, ended);
  c.ended_early = ended && c.tokens.size() < n_tokens;
  return c;
}

double MarkovModel::score(std::span<const std::string> tokens, double alpha) const {
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                fmt::format("alpha must be > 0, got {}", alpha));
  }
  const double outcomes = static_cast<double>(vocab_size() + 1);
  std::vector<Id> state(static_cast<std::size_t>(state_size_), kBegin);
  ExactSum total;
  auto step = [&](Id next) {
    const Row *row = find_row(state);
    double p;
    if (!row) {
      p = 1.0 / outcomes;
    } else {
      uint64_t count = 0;
      for (const auto &[id, c] : row->next) {
        if (id == next) {
          count = c;
          break;
        }
      }
      p = (static_cast<double>(count) + alpha) /
          (static_cast<double>(row->total) + alpha * outcomes);
    }
    total.add(std::log(p));
    state.erase(state.begin());
    state.push_back(next);
  };
  for (const auto &t : tokens) step(lookup(t));
  step(kEnd);
  return total.value();
}

std::string MarkovModel::to_jsonl() const {
  std::string out =
      json{{"format", kFormatName}, {"version", 1}, {"state_size", state_size_}}.dump() + "\n";
  for (const auto &st : states()) {
    json state = json::array();
    for (const auto &sym : st) state.push_back(sym ? json(*sym) : json());
    json next = json::array();
    const auto counts = next_counts(st);
    for (const auto &[sym, c] : *counts) {
      next.push_back(json::array({sym ? json(*sym) : json(), c}));
    }
    out += json{{"state", state}, {"next", next}}.dump() + "\n";
  }
  return out;
}

MarkovModel MarkovModel::from_jsonl(std::string_view text) {
  MarkovModel m;
  m.forms_.assign(kFirstForm, std::string());
  std::unordered_map<std::string, std::unordered_map<Id, uint64_t>> raw;
  std::vector<std::vector<std::pair<Id, uint64_t>>> declared;
  std::vector<std::string> declared_keys;
  std::set<std::string> emitted;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> state_forms;
  std::size_t line_no = 0;
  bool have_header = false;
  for (const std::string &line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &e) {
      format_error(line_no, e.what());
    }
    if (!have_header) {
      if (j.value("format", "") != kFormatName || !j.contains("state_size")) {
        format_error(line_no, "missing evalbench-markov header");
      }
      m.state_size_ = j["state_size"].get<int>();
      if (m.state_size_ < 1) format_error(line_no, "state_size must be >= 1");
      have_header = true;
      continue;
    }
    try {
      const json &state = j.at("state");
      const json &next = j.at("next");
      if (!state.is_array() || state.size() != static_cast<std::size_t>(m.state_size_)) {
        format_error(line_no, "state has wrong length");
      }
      std::vector<Id> ids;
      std::vector<std::string> forms;
      bool seen_form = false;
      for (const auto &sym : state) {
        if (sym.is_null()) {
          if (seen_form) format_error(line_no, "BEGIN after a form in state");
          ids.push_back(kBegin);
        } else {
          const std::string form = sym.get<std::string>();
          if (form.empty()) format_error(line_no, "empty form");
          seen_form = true;
          ids.push_back(m.intern(form));
          forms.push_back(form);
        }
      }
      const std::string key = key_of(ids);
      if (raw.count(key)) format_error(line_no, "duplicate state");
      if (!next.is_array() || next.empty()) format_error(line_no, "state without successors");
      auto &counts = raw[key];
      std::vector<std::pair<Id, uint64_t>> order;
      for (const auto &entry : next) {
        if (!entry.is_array() || entry.size() != 2) format_error(line_no, "bad next entry");
        Id id = kEnd;
        if (!entry[0].is_null()) {
          const std::string form = entry[0].get<std::string>();
          if (form.empty()) format_error(line_no, "empty form");
          id = m.intern(form);
          emitted.insert(form);
        }
        const auto c = entry[1].get<int64_t>();
        if (c < 1) format_error(line_no, "count must be >= 1");
        if (counts.count(id)) format_error(line_no, "duplicate next symbol");
        counts[id] = static_cast<uint64_t>(c);
        order.emplace_back(id, static_cast<uint64_t>(c));
      }
      declared.push_back(std::move(order));
      declared_keys.push_back(key);
      state_forms.emplace_back(line_no, std::move(forms));
    } catch (const json::exception &e) {
      format_error(line_no, e.what());
    }
  }
  if (!have_header) format_error(line_no, "empty model file");
  for (const auto &[line, forms] : state_forms) {
    for (const auto &f : forms) {
      if (!emitted.count(f)) format_error(line, fmt::format("state form '{}' not in vocabulary", f));
    }
  }
  m.finalize(std::move(raw));
  for (std::size_t i = 0; i < declared.size(); ++i) {
    if (m.table_.at(declared_keys[i]).next != declared[i]) {
      format_error(0, "next symbols not in (count desc, form asc) order");
    }
  }
  return m;
}

}  // namespace evalbench
