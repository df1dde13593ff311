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

// Independent profiling oracle for tests.

#ifndef EVALBENCH_TESTS_PROFILING_ORACLE_H_
#define EVALBENCH_TESTS_PROFILING_ORACLE_H_

#include <algorithm>
#include <map>
#include <optional>
#include <string>

#include "evalbench/corpusio.h"

namespace testkit {

// Brute force over every ordered token pair; shares no code with the
// implementation.
struct ProfileOracle {
  std::optional<double> cpt, tpc, ll_avg, ll_max_norm;
  std::optional<int> ll_max;
  int tps = 0;
  std::map<std::string, double> pos;
};

inline std::size_t count_scalars(const std::string &s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

inline ProfileOracle profile_oracle(const evalbench::Sentence &s) {
  ProfileOracle o;
  const std::size_t n = s.tokens.size();
  o.tps = static_cast<int>(n);
  std::size_t chars = 0, words = 0;
  for (const auto &t : s.tokens) {
    if (t.upos == "PUNCT") continue;
    chars += count_scalars(t.form);
    ++words;
  }
  if (words) o.cpt = static_cast<double>(chars) / static_cast<double>(words);
  for (const auto &t : s.tokens) {
    std::size_t same = 0;
    for (const auto &u : s.tokens) same += u.upos == t.upos;
    o.pos[t.upos] = static_cast<double>(same) / static_cast<double>(n);
  }
  std::size_t sum = 0, links = 0;
  int best = -1;
  std::size_t clauses = 0;
  for (std::size_t h = 0; h < n; ++h) {
    bool heads_cop = false;
    for (std::size_t d = 0; d < n; ++d) {
      if (d == h || s.tokens[d].head != static_cast<int>(h) + 1) continue;
      if (s.tokens[d].deprel == "cop") heads_cop = true;
      if (s.tokens[d].deprel == "punct") continue;
      const int len = h > d ? static_cast<int>(h - d) : static_cast<int>(d - h);
      sum += static_cast<std::size_t>(len);
      ++links;
      best = std::max(best, len);
    }
    const auto &t = s.tokens[h];
    const bool verbal = t.upos == "VERB" && t.deprel != "aux" && t.deprel != "aux:pass" &&
                        t.deprel != "cop";
    clauses += verbal || heads_cop;
  }
  if (clauses) o.tpc = static_cast<double>(n) / static_cast<double>(clauses);
  if (links) {
    o.ll_max = best;
    o.ll_avg = static_cast<double>(sum) / static_cast<double>(links);
    o.ll_max_norm = static_cast<double>(best) / static_cast<double>(n);
  }
  return o;
}

}  // namespace testkit

#endif  // EVALBENCH_TESTS_PROFILING_ORACLE_H_
