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

#include <cmath>

#include "doctest.h"
#include "evalbench/markov.h"
#include "testkit.h"

using namespace evalbench;

namespace {

using Sentences = std::vector<std::vector<std::string>>;
using Table = std::map<MarkovState, std::map<MarkovSymbol, uint64_t>>;

Sentences words(const std::vector<std::string> &lines) {
  Sentences out;
  for (const auto &l : lines) {
    std::vector<std::string> toks;
    for (const auto &t : split(l, ' ')) {
      if (!t.empty()) toks.push_back(t);
    }
    out.push_back(toks);
  }
  return out;
}

// Independent transition count over padded sequences.
Table brute_force(const Sentences &sentences, int k) {
  Table t;
  for (const auto &s : sentences) {
    std::vector<MarkovSymbol> seq(static_cast<std::size_t>(k), std::nullopt);
    for (const auto &w : s) seq.push_back(w);
    seq.push_back(std::nullopt);
    for (std::size_t i = static_cast<std::size_t>(k); i < seq.size(); ++i) {
      MarkovState state(seq.begin() + static_cast<std::ptrdiff_t>(i) - k, seq.begin() + static_cast<std::ptrdiff_t>(i));
      ++t[state][seq[i]];
    }
  }
  return t;
}

std::map<MarkovSymbol, uint64_t> as_map(const std::vector<std::pair<MarkovSymbol, uint64_t>> &v) {
  return {v.begin(), v.end()};
}

MarkovState st(std::initializer_list<MarkovSymbol> xs) { return MarkovState(xs); }

// Replays a generated sequence against the table: every step must have a
// positive count.
bool replays(const MarkovModel &m, const std::vector<std::string> &seq, MarkovState state,
             bool require_end) {
  for (const auto &w : seq) {
    auto next = m.next_counts(state);
    if (!next) return false;
    const auto counts = as_map(*next);
    auto it = counts.find(w);
    if (it == counts.end() || it->second == 0) return false;
    state.erase(state.begin());
    state.push_back(w);
  }
  if (!require_end) return true;
  auto next = m.next_counts(state);
  return next && as_map(*next).count(std::nullopt) > 0;
}

}  // namespace

TEST_CASE("two-sentence transition table") {
  const auto m = MarkovModel::train(words({"a b c", "a b d"}), 2);
  CHECK(as_map(*m.next_counts(st({"a", "b"}))) ==
        std::map<MarkovSymbol, uint64_t>{{"c", 1}, {"d", 1}});
  CHECK(as_map(*m.next_counts(st({std::nullopt, std::nullopt}))) ==
        std::map<MarkovSymbol, uint64_t>{{"a", 2}});
  CHECK(as_map(*m.next_counts(st({"b", "c"}))) ==
        std::map<MarkovSymbol, uint64_t>{{std::nullopt, 1}});
  CHECK(m.vocab_size() == 4);
}

TEST_CASE("single token sentence pads the state") {
  const auto m = MarkovModel::train(words({"a"}), 2);
  CHECK(as_map(*m.next_counts(st({std::nullopt, std::nullopt}))) ==
        std::map<MarkovSymbol, uint64_t>{{"a", 1}});
  CHECK(as_map(*m.next_counts(st({std::nullopt, "a"}))) ==
        std::map<MarkovSymbol, uint64_t>{{std::nullopt, 1}});
  CHECK(m.state_count() == 2);
}

TEST_CASE("training preconditions") {
  CHECK_THROWS_AS(MarkovModel::train(words({"a"}), 0), Error);
  CHECK_THROWS_AS(MarkovModel::train(Sentences{}, 2), Error);
}

TEST_CASE("transition probabilities equal brute-force count ratios exactly") {
  Rng rng(77);
  Sentences corpus;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::string> s;
    const std::size_t len = 1 + rng.uniform(8);
    for (std::size_t j = 0; j < len; ++j) s.push_back(std::string(1, static_cast<char>('a' + rng.uniform(5))));
    corpus.push_back(s);
  }
  for (int k : {1, 2, 3}) {
    const auto m = MarkovModel::train(corpus, k);
    const Table oracle = brute_force(corpus, k);
    CHECK(m.state_count() == oracle.size());
    uint64_t conserved = 0;
    for (const auto &[state, next] : oracle) {
      auto got = m.next_counts(state);
      REQUIRE(got.has_value());
      uint64_t total = 0, oracle_total = 0;
      for (const auto &[sym, c] : *got) total += c;
      for (const auto &[sym, c] : next) oracle_total += c;
      REQUIRE(as_map(*got) == next);
      for (const auto &[sym, c] : next) {
        CHECK(static_cast<double>(as_map(*got).at(sym)) / static_cast<double>(total) ==
              static_cast<double>(c) / static_cast<double>(oracle_total));
      }
      conserved += total;
    }
    uint64_t expect = 0;
    for (const auto &s : corpus) expect += s.size() + 1;
    CHECK(conserved == expect);
  }
}

TEST_CASE("sharded training equals serial training") {
  Rng rng(4);
  const auto sentences = words(split(testkit::synthetic_text(rng, 300, 1, 20, 50), '\n'));
  const auto serial = MarkovModel::train(sentences, 2, 1);
  for (unsigned t : {2u, 5u}) CHECK(MarkovModel::train(sentences, 2, t).to_jsonl() == serial.to_jsonl());
}

TEST_CASE("next counts come in sampling order") {
  const auto m = MarkovModel::train(words({"x b", "x a", "x a", "x"}), 1);
  const auto next = *m.next_counts(st({"x"}));
  REQUIRE(next.size() == 3);
  CHECK(next[0] == std::pair<MarkovSymbol, uint64_t>{"a", 2});
  CHECK(next[1] == std::pair<MarkovSymbol, uint64_t>{std::nullopt, 1});  // END sorts as ""
  CHECK(next[2] == std::pair<MarkovSymbol, uint64_t>{"b", 1});
}

TEST_CASE("deterministic chain and truncation") {
  const auto m = MarkovModel::train(words({"a b c"}), 2);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(m.generate(100, seed) == std::vector<std::string>{"a", "b", "c"});
  }
  CHECK(m.generate(2, 1) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("generation frequencies follow the counts") {
  const auto m = MarkovModel::train(words({"a b c", "a b d"}), 2);
  int c = 0;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    const auto out = m.generate(10, static_cast<uint64_t>(seed));
    REQUIRE(out.size() == 3);
    REQUIRE(replays(m, out, st({std::nullopt, std::nullopt}), true));
    c += out[2] == "c";
  }
  CHECK(std::fabs(c / static_cast<double>(n) - 0.5) <= 0.02);
  CHECK(m.generate(10, 99) == m.generate(10, 99));
}

TEST_CASE("generated sequences replay as positive-count walks") {
  Rng rng(12);
  const auto sentences = words(split(testkit::synthetic_text(rng, 200, 1, 15, 30), '\n'));
  const auto m = MarkovModel::train(sentences, 2);
  for (uint64_t seed = 0; seed < 500; ++seed) {
    const auto out = m.generate(40, seed);
    REQUIRE(replays(m, out, st({std::nullopt, std::nullopt}), out.size() < 40));
  }
}

TEST_CASE("continuation") {
  const auto m = MarkovModel::train(words({"a b c", "a b d"}), 2);
  const std::vector<std::string> prompt = {"x", "a", "b"};
  const auto c = m.continue_from(prompt, 1, 5);
  REQUIRE(c.tokens.size() == 1);
  CHECK((c.tokens[0] == "c" || c.tokens[0] == "d"));
  CHECK_FALSE(c.ended_early);
  const auto longer = m.continue_from(prompt, 5, 5);
  CHECK(longer.tokens.size() == 1);
  CHECK(longer.ended_early);

  const std::vector<std::string> unseen = {"q", "q"};
  try {
    m.continue_from(unseen, 3, 1);
    FAIL("expected UnseenState");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kUnseenState);
  }
  const std::vector<std::string> short_prompt = {"a"};
  CHECK_THROWS_AS(m.continue_from(short_prompt, 3, 1), Error);
}

TEST_CASE("continuations replay from the prompt state") {
  Rng rng(31);
  const auto sentences = words(split(testkit::synthetic_text(rng, 100, 10, 25, 20), '\n'));
  const auto m = MarkovModel::train(sentences, 2);
  for (std::size_t i = 0; i < sentences.size(); i += 7) {
    const std::vector<std::string> prompt(sentences[i].begin(), sentences[i].begin() + 5);
    const auto c = m.continue_from(prompt, 10, i);
    CHECK(replays(m, c.tokens, st({prompt[3], prompt[4]}), c.ended_early));
    CHECK((c.ended_early || c.tokens.size() == 10));
  }
}

TEST_CASE("scoring") {
  const auto m = MarkovModel::train(words({"a b c", "a b d"}), 2);
  const std::vector<std::string> abc = {"a", "b", "c"};
  CHECK(m.score(abc, 1e-12) == doctest::Approx(std::log(0.5)).epsilon(1e-9));

  // V = 4 (a b c d); (count + alpha) / (total + alpha * 5) per step.
  const double alpha = 0.1;
  const double expect = std::log((2 + alpha) / (2 + 5 * alpha)) +
                        std::log((2 + alpha) / (2 + 5 * alpha)) +
                        std::log((1 + alpha) / (2 + 5 * alpha)) +
                        std::log((1 + alpha) / (1 + 5 * alpha));
  CHECK(m.score(abc, alpha) == doctest::Approx(expect).epsilon(1e-12));

  const std::vector<std::string> unseen = {"z", "z", "z"};
  // (BEGIN,BEGIN) is seen, so the first step is smoothed; later states are unseen.
  const double first = std::log(alpha / (2 + 5 * alpha));
  CHECK(m.score(unseen, alpha) == doctest::Approx(first + 3 * std::log(1.0 / 5)).epsilon(1e-12));

  CHECK_THROWS_AS(m.score(abc, 0.0), Error);
  const std::vector<std::string> abd = {"a", "b", "d"};
  CHECK(m.score(abd, alpha) == m.score(abc, alpha));
  const std::vector<std::string> abz = {"a", "b", "zz"};
  CHECK(m.score(abz, alpha) < m.score(abc, alpha));
}

TEST_CASE("JSONL persistence round trip and validation") {
  Rng rng(8);
  const auto sentences = words(split(testkit::synthetic_text(rng, 50, 1, 10, 15), '\n'));
  const auto m = MarkovModel::train(sentences, 2);
  const std::string text = m.to_jsonl();
  const auto back = MarkovModel::from_jsonl(text);
  CHECK(back.to_jsonl() == text);
  for (uint64_t seed = 0; seed < 50; ++seed) CHECK(back.generate(30, seed) == m.generate(30, seed));

  const auto two = MarkovModel::train(words({"a b c", "a b d"}), 2);
  const std::string good = two.to_jsonl();
  CHECK(good.rfind("{\"format\":\"evalbench-markov\",\"state_size\":2,\"version\":1}\n", 0) == 0);
  auto corrupt = [&](const std::string &from, const std::string &to) {
    std::string s = good;
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
  };
  CHECK_THROWS_AS(MarkovModel::from_jsonl(corrupt("[\"c\",1]", "[\"c\",0]")), Error);
  CHECK_THROWS_AS(MarkovModel::from_jsonl(corrupt("\"state_size\":2", "\"state_size\":3")), Error);
  CHECK_THROWS_AS(MarkovModel::from_jsonl(corrupt("evalbench-markov", "other")), Error);
  CHECK_THROWS_AS(MarkovModel::from_jsonl(""), Error);
}
