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

#include "evalbench/common.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace evalbench {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kInvalidTree: return "InvalidTree";
    case ErrorCode::kUnseenState: return "UnseenState";
    case ErrorCode::kNonFiniteLogProb: return "NonFiniteLogProb";
    case ErrorCode::kInvalidLogProb: return "InvalidLogProb";
    case ErrorCode::kNotEnoughEligible: return "NotEnoughEligible";
    case ErrorCode::kMissingCompletion: return "MissingCompletion";
    case ErrorCode::kCompletionTooShort: return "CompletionTooShort";
    case ErrorCode::kBadSubjectCount: return "BadSubjectCount";
    case ErrorCode::kUnknownSubject: return "UnknownSubject";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kPlanExhausted: return "PlanExhausted";
    case ErrorCode::kOutOfOrder: return "OutOfOrder";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kDuplicateSubmission: return "DuplicateSubmission";
    case ErrorCode::kUnauthorized: return "Unauthorized";
    case ErrorCode::kMixedTask: return "MixedTask";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string &message,
             std::size_t line)
    : std::runtime_error(message),
      code_(code),
      module_(std::move(module)),
      line_(line) {}

std::string Error::qualified_code() const {
  return fmt::format("{}.{}", module_, error_code_name(code_));
}

uint64_t splitmix64(uint64_t &state) {
  state += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t derive_seed(uint64_t seed, std::string_view stage) {
  uint64_t state = seed ^ fnv1a64(stage);
  return splitmix64(state);
}

namespace {

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(uint64_t seed) {
  uint64_t state = seed;
  for (auto &word : s_) word = splitmix64(state);
}

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

uint64_t Rng::uniform(uint64_t bound) {
  if (bound == 0) {
    throw Error(ErrorCode::kInvalidArgument, "common", "uniform bound is 0");
  }
  // (2^64 - bound) % bound == 2^64 mod bound
  const uint64_t excess = (0 - bound) % bound;
  const uint64_t limit = 0 - excess;  // 2^64 - excess, wraps to 0 when excess 0
  while (true) {
    uint64_t x = next_u64();
    if (excess == 0 || x < limit) return x % bound;
  }
}

double Rng::uniform_real() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

void ExactSum::add(double x) {
  if (!std::isfinite(x)) {
    special_ += x;
    has_special_ = true;
    return;
  }
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

void ExactSum::merge(const ExactSum &other) {
  for (double p : other.partials_) add(p);
  if (other.has_special_) {
    special_ += other.special_;
    has_special_ = true;
  }
}

double ExactSum::value() const {
  if (has_special_) return special_;
  std::size_t n = partials_.size();
  if (n == 0) return 0.0;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  // Half-way case: make the final rounding agree with the exact sum.
  if (n > 0 && ((lo < 0 && partials_[n - 1] < 0) ||
                (lo > 0 && partials_[n - 1] > 0))) {
    const double y = lo * 2;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

namespace {

std::size_t utf8_seq_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size();) {
    i += std::min(utf8_seq_len(static_cast<unsigned char>(s[i])), s.size() - i);
    ++n;
  }
  return n;
}

std::vector<std::string_view> utf8_chars(std::string_view s) {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t len =
        std::min(utf8_seq_len(static_cast<unsigned char>(s[i])), s.size() - i);
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::string lowercase_latin(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned char c = out[i];
    if (c >= 'A' && c <= 'Z') {
      out[i] = static_cast<char>(c + 32);
    } else if (c == 0xC3 && i + 1 < out.size()) {
      // U+00C0..U+00DE are encoded as C3 80..C3 9E; U+00D7 is C3 97.
      unsigned char t = out[i + 1];
      if (t >= 0x80 && t <= 0x9E && t != 0x97) out[i + 1] = static_cast<char>(t + 0x20);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const char *ws = " \t\r\n";
  std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string> &parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string read_file(const std::string &path, const std::string &module) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, module, fmt::format("{}: cannot open for reading", path));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::kIoError, module, fmt::format("{}: read failed", path));
  }
  return ss.str();
}

void write_file(const std::string &path, std::string_view content,
                const std::string &module) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, module, fmt::format("{}: cannot open for writing", path));
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw Error(ErrorCode::kIoError, module, fmt::format("{}: write failed", path));
  }
}

double round_half_away(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale;
}

}  // namespace evalbench
