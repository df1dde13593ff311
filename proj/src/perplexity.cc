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

#include "evalbench/perplexity.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "json.hpp"

namespace evalbench {

namespace {

constexpr const char *kModule = "perplexity";

DomainPerplexity make_row(std::string domain, double neg_sum, uint64_t n) {
  DomainPerplexity row;
  row.domain = std::move(domain);
  row.token_count = n;
  row.mean_neg_logprob = neg_sum / static_cast<double>(n);
  row.perplexity = std::exp(row.mean_neg_logprob);
  return row;
}

void check_consistent(const DomainPerplexity &row) {
  const double expect = std::exp(row.mean_neg_logprob);
  if (std::fabs(row.perplexity - expect) > 1e-9 * std::max(1.0, expect) ||
      (row.mean_neg_logprob >= 0 && row.perplexity < 1.0)) {
    throw Error(ErrorCode::kFormatError, kModule,
                fmt::format("inconsistent row '{}': perplexity {} vs exp(mean) {}", row.domain,
                            row.perplexity, expect));
  }
}

double log_base_factor(const std::string &base) {
  if (base == "e") return 1.0;
  if (base == "2") return std::log(2.0);
  if (base == "10") return std::log(10.0);
  throw Error(ErrorCode::kFormatError, kModule,
              fmt::format("unsupported log_base '{}' (expected e, 2 or 10)", base));
}

}  // namespace

std::string default_domain_of(const std::string &doc_id) {
  const std::size_t slash = doc_id.find('/');
  if (slash == std::string::npos || slash == 0) return "default";
  return doc_id.substr(0, slash);
}

void PerplexityAccumulator::add(const std::string &domain, double logprob,
                                uint64_t record_index) {
  if (!std::isfinite(logprob)) {
    throw Error(ErrorCode::kNonFiniteLogProb, kModule,
                fmt::format("record {}: non-finite logprob", record_index));
  }
  if (logprob > 0.0) {
    throw Error(ErrorCode::kInvalidLogProb, kModule,
                fmt::format("record {}: logprob {} is positive", record_index, logprob));
  }
  Cell &cell = cells_[domain];
  cell.neg_sum.add(-logprob);
  ++cell.n;
  ++records_;
}

void PerplexityAccumulator::add_block(const std::string &domain, double logprob_sum,
                                      uint64_t tokens) {
  if (!std::isfinite(logprob_sum)) {
    throw Error(ErrorCode::kNonFiniteLogProb, kModule, "non-finite log-probability sum");
  }
  Cell &cell = cells_[domain];
  cell.neg_sum.add(-logprob_sum);
  cell.n += tokens;
  records_ += tokens;
}

void PerplexityAccumulator::merge(const PerplexityAccumulator &other) {
  for (const auto &[domain, cell] : other.cells_) {
    Cell &dst = cells_[domain];
    dst.neg_sum.merge(cell.neg_sum);
    dst.n += cell.n;
  }
  records_ += other.records_;
}

PerplexityReport PerplexityAccumulator::report(const std::vector<std::string> &order,
                                               const std::string &unit) const {
  if (records_ == 0) {
    throw Error(ErrorCode::kEmptyInput, kModule, "no log-probability records");
  }
  PerplexityReport r;
  r.unit = unit;
  std::vector<std::string> names;
  for (const auto &d : order) {
    if (cells_.count(d) && std::find(names.begin(), names.end(), d) == names.end()) {
      names.push_back(d);
    }
  }
  for (const auto &[d, _] : cells_) {
    if (std::find(names.begin(), names.end(), d) == names.end()) names.push_back(d);
  }
  ExactSum pooled;
  uint64_t pooled_n = 0;
  for (const auto &d : names) {
    const Cell &cell = cells_.at(d);
    if (cell.n == 0) continue;
    r.domains.push_back(make_row(d, cell.neg_sum.value(), cell.n));
    pooled.merge(cell.neg_sum);
    pooled_n += cell.n;
  }
  r.overall = make_row("overall", pooled.value(), pooled_n);
  return r;
}

PerplexityReport perplexity_from_logprobs(std::span<const LogProbRecord> records,
                                          const DomainOf &domain_of,
                                          const std::vector<std::string> &order,
                                          const std::string &unit) {
  PerplexityAccumulator acc;
  for (std::size_t i = 0; i < records.size(); ++i) {
    acc.add(domain_of(records[i].doc_id), records[i].logprob, i);
  }
  return acc.report(order, unit);
}

PerplexityReport perplexity_from_jsonl(std::istream &in, const DomainOf &domain_of,
                                       const std::vector<std::string> &order) {
  using json = nlohmann::json;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  double factor = 1.0;
  std::string unit = "word";
  PerplexityAccumulator acc;
  uint64_t index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kFormatError, kModule, fmt::format("line {}: {}", line_no, e.what()),
                  line_no);
    }
    try {
      if (!have_header) {
        if (!j.contains("log_base")) {
          throw Error(ErrorCode::kFormatError, kModule,
                      fmt::format("line {}: expected header with log_base", line_no), line_no);
        }
        factor = log_base_factor(j.at("log_base").get<std::string>());
        unit = j.value("unit", "word");
        if (unit != "word" && unit != "subword") {
          throw Error(ErrorCode::kFormatError, kModule,
                      fmt::format("line {}: unit must be word or subword", line_no), line_no);
        }
        have_header = true;
        continue;
      }
      const json &lp = j.at("logprob");
      // JSON has no inf/nan literals; null stands in for a non-finite value.
      const double value = lp.is_null() ? NAN : lp.get<double>() * factor;
      acc.add(domain_of(j.at("doc_id").get<std::string>()), value, index++);
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kFormatError, kModule, fmt::format("line {}: {}", line_no, e.what()),
                  line_no);
    }
  }
  if (!have_header) {
    throw Error(ErrorCode::kEmptyInput, kModule, "missing header line");
  }
  return acc.report(order, unit);
}

PerplexityReport perplexity_of_markov(const MarkovModel &model, const Corpus &corpus,
                                      double alpha, const std::vector<std::string> &order) {
  PerplexityAccumulator acc;
  for (const auto &doc : corpus.documents()) {
    auto it = doc.meta.find("domain");
    const std::string domain = it == doc.meta.end() ? "default" : it->second;
    for (const auto &s : doc.sentences) {
      const auto forms = s.forms();
      acc.add_block(domain, model.score(forms, alpha), forms.size() + 1);
    }
  }
  return acc.report(order, "word");
}

std::string render_perplexity_csv(const PerplexityReport &report) {
  std::string out = "domain,unit,tokens,mean_neg_logprob,perplexity\n";
  auto emit = [&](const DomainPerplexity &row) {
    check_consistent(row);
    out += fmt::format("{},{},{},{},{}\n", row.domain, report.unit, row.token_count,
                       row.mean_neg_logprob, row.perplexity);
  };
  for (const auto &row : report.domains) emit(row);
  emit(report.overall);
  return out;
}

std::string render_perplexity_text(const PerplexityReport &report) {
  std::size_t width = 7;
  for (const auto &row : report.domains) width = std::max(width, row.domain.size());
  std::string out = fmt::format("{:<{}}  {:>12}  {:>12}\n", "domain", width, "perplexity",
                                fmt::format("{}s", report.unit));
  auto emit = [&](const DomainPerplexity &row) {
    check_consistent(row);
    out += fmt::format("{:<{}}  {:>12.4f}  {:>12}\n", row.domain, width, row.perplexity,
                       row.token_count);
  };
  for (const auto &row : report.domains) emit(row);
  out += std::string(width + 28, '-') + "\n";
  emit(report.overall);
  return out;
}

}  // namespace evalbench
