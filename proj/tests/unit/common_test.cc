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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "evalbench/common.h"

using namespace evalbench;

namespace {

// Straight transcription of the public-domain xoshiro256** reference.
struct RefXoshiro {
  uint64_t s[4];
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t next() {
    const uint64_t result = rotl(s[1] * 5, 7) * 9;
    const uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

}  // namespace

TEST_CASE("splitmix64 known outputs") {
  uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
  CHECK(splitmix64(state) == 0x06c45d188009454fULL);
}

TEST_CASE("fnv1a64 known outputs") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("Rng matches the reference generator seeded by splitmix64") {
  for (uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
    RefXoshiro ref;
    uint64_t st = seed;
    for (auto &w : ref.s) w = splitmix64(st);
    Rng rng(seed);
    for (int i = 0; i < 1000; ++i) REQUIRE(rng.next_u64() == ref.next());
  }
}

TEST_CASE("derive_seed separates stages and is stable") {
  CHECK(derive_seed(7, "prompts") == derive_seed(7, "prompts"));
  CHECK(derive_seed(7, "prompts") != derive_seed(7, "assign"));
  CHECK(derive_seed(7, "prompts") != derive_seed(8, "prompts"));
  uint64_t st = 7 ^ fnv1a64("prompts");
  CHECK(derive_seed(7, "prompts") == splitmix64(st));
}

TEST_CASE("uniform stays in range and covers it") {
  Rng rng(3);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const uint64_t x = rng.uniform(7);
    REQUIRE(x < 7);
    ++hist[x];
  }
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  CHECK(rng.uniform(1) == 0);
  CHECK_THROWS_AS(rng.uniform(0), Error);
}

TEST_CASE("uniform_real is in [0,1)") {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform_real();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
}

TEST_CASE("shuffle is a permutation and deterministic") {
  std::vector<int> a(50);
  std::iota(a.begin(), a.end(), 0);
  std::vector<int> b(a);
  Rng r1(11), r2(11);
  r1.shuffle(a);
  r2.shuffle(b);
  CHECK(a == b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);
}

TEST_CASE("ExactSum is exact and order independent") {
  ExactSum s;
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 1.0);

  std::vector<double> xs;
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    xs.push_back((rng.uniform_real() - 0.5) * std::pow(10.0, static_cast<int>(rng.uniform(30)) - 15));
  }
  ExactSum fwd, rev, a, b;
  for (double x : xs) fwd.add(x);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) rev.add(*it);
  for (std::size_t i = 0; i < xs.size(); ++i) (i % 2 ? a : b).add(xs[i]);
  a.merge(b);
  CHECK(fwd.value() == rev.value());
  CHECK(fwd.value() == a.value());

  ExactSum tenth;
  for (int i = 0; i < 10; ++i) tenth.add(0.1);
  CHECK(tenth.value() == 1.0);
}

TEST_CASE("ExactSum tracks non-finite inputs") {
  ExactSum s;
  s.add(1.0);
  CHECK(s.finite());
  s.add(INFINITY);
  CHECK_FALSE(s.finite());
  CHECK(std::isinf(s.value()));
}

TEST_CASE("utf8 helpers") {
  CHECK(utf8_length("gatto") == 5);
  CHECK(utf8_length("è") == 1);
  CHECK(utf8_length("perché") == 6);
  CHECK(utf8_chars("aè").size() == 2);
  CHECK(lowercase_latin("ÀÉÌ La") == "àéì la");
  CHECK(lowercase_latin("×") == "×");
}

TEST_CASE("string helpers") {
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(trim("  x y \n") == "x y");
  CHECK(join({"a", "b"}, " ") == "a b");
}

TEST_CASE("round_half_away") {
  CHECK(round_half_away(2.5, 0) == 3.0);
  CHECK(round_half_away(-2.5, 0) == -3.0);
  CHECK(round_half_away(0.25, 1) == doctest::Approx(0.3));
}

TEST_CASE("Error carries a module-qualified code") {
  Error e(ErrorCode::kMalformedLine, "corpusio", "bad", 3);
  CHECK(e.qualified_code() == "corpusio.MalformedLine");
  CHECK(e.line() == 3);
}
