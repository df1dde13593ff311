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

// Shared plumbing: the error type, the reproducible RNG, exact floating-point
// summation and a few UTF-8 / file helpers used by every module.

#ifndef EVALBENCH_COMMON_H_
#define EVALBENCH_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evalbench {

enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  kFormatError,
  kEmptyInput,
  // corpusio
  kMalformedLine,
  kInvalidTree,
  // markov
  kUnseenState,
  // perplexity
  kNonFiniteLogProb,
  kInvalidLogProb,
  // stimuli
  kNotEnoughEligible,
  kMissingCompletion,
  kCompletionTooShort,
  kBadSubjectCount,
  // evalservice
  kUnknownSubject,
  kUnknownSession,
  kPlanExhausted,
  kOutOfOrder,
  kMalformedResponse,
  kDuplicateSubmission,
  kUnauthorized,
  // results
  kMixedTask,
};

std::string_view error_code_name(ErrorCode code);

// Every module reports failures through this exception. `module` is the short
// module name ("corpusio", "markov", ...) used for the CLI's prefixed codes;
// `line` is a 1-based input line when one applies, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string &message,
        std::size_t line = 0);

  ErrorCode code() const { return code_; }
  const std::string &module() const { return module_; }
  std::size_t line() const { return line_; }

  // "corpusio.MalformedLine"
  std::string qualified_code() const;

 private:
  ErrorCode code_;
  std::string module_;
  std::size_t line_;
};

// SplitMix64 step. Used to expand seeds; bit-exact definition:
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31)
uint64_t splitmix64(uint64_t &state);

// 64-bit FNV-1a over the bytes of `s`.
uint64_t fnv1a64(std::string_view s);

// Per-stage seed: splitmix64 applied once to (seed XOR fnv1a64(stage)).
uint64_t derive_seed(uint64_t seed, std::string_view stage);

// xoshiro256** seeded by four splitmix64 draws from `seed`. The algorithm is
// fixed so seeded outputs are reproducible across platforms and builds.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform integer in [0, bound) by rejection: draws x until
  // x < 2^64 - (2^64 mod bound), returns x mod bound. bound must be > 0.
  uint64_t uniform(uint64_t bound);

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform_real();

  // Fisher-Yates from the back: for i = n-1 .. 1, swap(v[i], v[uniform(i+1)]).
  template <typename T>
  void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t s_[4];
};

// Exactly rounded floating-point sum (Shewchuk partials, as in Python's
// math.fsum). The result is independent of insertion order, and merging two
// accumulators is exact, so sharded and serial sums agree bit for bit.
class ExactSum {
 public:
  void add(double x);
  void merge(const ExactSum &other);
  double value() const;
  bool finite() const { return !has_special_; }

 private:
  std::vector<double> partials_;
  // inf/nan inputs bypass the partials and are summed here.
  double special_ = 0.0;
  bool has_special_ = false;
};

// Number of Unicode scalar values in a UTF-8 string. Invalid lead bytes count
// as one character each.
std::size_t utf8_length(std::string_view s);

// Splits UTF-8 into code point substrings.
std::vector<std::string_view> utf8_chars(std::string_view s);

// Lowercases ASCII and Latin-1 uppercase letters (U+00C0..U+00DE except
// U+00D7); other code points are copied unchanged.
std::string lowercase_latin(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);
std::string join(const std::vector<std::string> &parts, std::string_view sep);

// Whole-file read / write. Failures raise kIoError under `module`.
std::string read_file(const std::string &path, const std::string &module);
void write_file(const std::string &path, std::string_view content,
                const std::string &module);

// Round half away from zero at `decimals` places.
double round_half_away(double x, int decimals);

}  // namespace evalbench

#endif  // EVALBENCH_COMMON_H_
