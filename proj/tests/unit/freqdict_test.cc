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

#include "doctest.h"
#include "evalbench/freqdict.h"
#include "testkit.h"

using namespace evalbench;

namespace {

Corpus corpus_of(const std::vector<std::string> &lines) {
  Document doc;
  for (const auto &l : lines) {
    for (auto &s : tokenize_plain(l)) doc.sentences.push_back(std::move(s));
  }
  Corpus c;
  c.add(doc);
  return c;
}

FreqDict dict_of_sizes(std::size_t types) {
  std::unordered_map<std::string, uint64_t> counts;
  for (std::size_t i = 0; i < types; ++i) counts[fmt::format("t{:04}", i)] = types - i;
  return FreqDict(counts);
}

}  // namespace

TEST_CASE("counts and totals") {
  const FreqDict d = build_freq_dict(corpus_of({"a b a"}));
  CHECK(d.count("a") == 2);
  CHECK(d.count("b") == 1);
  CHECK(d.count("z") == 0);
  CHECK(d.total() == 3);
  CHECK(d.types() == 2);
}

TEST_CASE("lowercase folds case") {
  FreqDictOptions opts;
  opts.lowercase = true;
  const FreqDict d = build_freq_dict(corpus_of({"La la"}), opts);
  CHECK(d.count("la") == 2);
  CHECK(d.types() == 1);
  CHECK(build_freq_dict(corpus_of({"La la"})).types() == 2);
}

TEST_CASE("punctuation can be excluded") {
  FreqDictOptions opts;
  opts.include_punct = false;
  const FreqDict d = build_freq_dict(corpus_of({"a , b ."}), opts);
  CHECK(d.total() == 2);
  CHECK(build_freq_dict(corpus_of({"a , b ."})).total() == 4);
}

TEST_CASE("documents are additive") {
  const FreqDict a = build_freq_dict(corpus_of({"x y z x"}));
  const FreqDict b = build_freq_dict(corpus_of({"y q"}));
  const FreqDict both = build_freq_dict(corpus_of({"x y z x", "y q"}));
  for (const auto &[form, c] : both.ranked()) CHECK(c == a.count(form) + b.count(form));
  CHECK(both.total() == a.total() + b.total());
}

TEST_CASE("empty corpus") {
  CHECK_THROWS_AS(build_freq_dict(Corpus{}), Error);
}

TEST_CASE("ranking ties break by form") {
  const FreqDict d = build_freq_dict(corpus_of({"b a c b a"}));
  REQUIRE(d.ranked().size() == 3);
  CHECK(d.ranked()[0].first == "a");
  CHECK(d.ranked()[1].first == "b");
  CHECK(d.ranked()[2].first == "c");
}

TEST_CASE("top set size is the ceiling of the permille share of types") {
  const FreqDict d = dict_of_sizes(1000);
  CHECK(d.top_set_size(5) == 5);
  CHECK(d.top_set(5).size() == 5);
  CHECK(dict_of_sizes(999).top_set_size(5) == 5);
  CHECK(dict_of_sizes(1001).top_set_size(5) == 6);
  CHECK(dict_of_sizes(3).top_set_size(1) == 1);
  CHECK(d.top_set_size(1000) == 1000);
  CHECK_THROWS_AS(d.top_set_size(0), Error);
  CHECK_THROWS_AS(d.top_set_size(1001), Error);
}

TEST_CASE("hit rate examples") {
  const FreqDict d = dict_of_sizes(1000);
  const std::vector<std::string> same(10, "t0000");
  CHECK(top_hit_rate(same, d, 5) == 1.0);
  const std::vector<std::string> four = {"t0001", "t0500", "unknown", "t0999"};
  CHECK(top_hit_rate(four, d, 5) == 0.25);
  CHECK_THROWS_AS(top_hit_rate(std::vector<std::string>{}, d, 5), Error);
}

TEST_CASE("mass mode covers the requested share of tokens") {
  std::unordered_map<std::string, uint64_t> counts = {{"a", 50}, {"b", 30}, {"c", 20}};
  const FreqDict d(counts);
  CHECK(d.top_set_size(500, TopSetMode::kMass) == 1);
  CHECK(d.top_set_size(501, TopSetMode::kMass) == 2);
  CHECK(d.top_set_size(800, TopSetMode::kMass) == 2);
  CHECK(d.top_set_size(1000, TopSetMode::kMass) == 3);
}

TEST_CASE("property: hit rate is monotone and 1000 gives the in-vocabulary share") {
  Rng rng(314);
  for (int c = 0; c < 200; ++c) {
    std::unordered_map<std::string, uint64_t> counts;
    const std::size_t types = 1 + rng.uniform(300);
    for (std::size_t i = 0; i < types; ++i) {
      counts[fmt::format("f{}", rng.uniform(400))] += 1 + rng.uniform(20);
    }
    const FreqDict d(counts);
    std::vector<std::string> text;
    const std::size_t len = 1 + rng.uniform(200);
    std::size_t in_vocab = 0;
    for (std::size_t i = 0; i < len; ++i) {
      text.push_back(fmt::format("f{}", rng.uniform(500)));
      in_vocab += d.count(text.back()) > 0;
    }
    for (TopSetMode mode : {TopSetMode::kTypes, TopSetMode::kMass}) {
      double prev = -1;
      for (int p = 1; p <= 1000; p += 1 + static_cast<int>(rng.uniform(40))) {
        const double h = top_hit_rate(text, d, p, mode);
        REQUIRE(h >= prev);
        REQUIRE(h >= 0.0);
        REQUIRE(h <= 1.0);
        prev = h;
      }
      REQUIRE(top_hit_rate(text, d, 1000, mode) ==
              static_cast<double>(in_vocab) / static_cast<double>(len));
    }
  }
}

TEST_CASE("TSV round trip and validation") {
  const FreqDict d = build_freq_dict(corpus_of({"il gatto e il cane e il topo"}));
  const FreqDict back = FreqDict::from_tsv(d.to_tsv());
  CHECK(back == d);
  CHECK(back.total() == d.total());
  CHECK(d.to_tsv().rfind("il\t3\n", 0) == 0);
  CHECK_THROWS_AS(FreqDict::from_tsv("a\t1\nb\t2\n"), Error);  // not sorted
  CHECK_THROWS_AS(FreqDict::from_tsv("a\t0\n"), Error);
  CHECK_THROWS_AS(FreqDict::from_tsv("a\t1\t2\n"), Error);
  CHECK_THROWS_AS(FreqDict::from_tsv("a\t2\na\t1\n"), Error);
}

TEST_CASE("parallel build matches serial and top sets are stable") {
  Rng rng(5);
  const std::string text = testkit::synthetic_text(rng, 400, 5, 30, 300);
  Document doc;
  doc.sentences = tokenize_plain(text);
  Corpus c;
  c.add(doc);
  FreqDictOptions opts;
  const FreqDict serial = build_freq_dict(c, opts);
  opts.threads = 4;
  const FreqDict parallel = build_freq_dict(c, opts);
  CHECK(serial == parallel);
  CHECK(serial.top_set(50) == parallel.top_set(50));
}
