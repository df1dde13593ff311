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

// Ranking and classification percentage tables from exported annotations.

#ifndef EVALBENCH_RESULTS_H_
#define EVALBENCH_RESULTS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "evalbench/stimuli.h"

namespace evalbench {

// One exported annotation with systems already resolved.
struct ResultRecord {
  Task task = Task::kRanking;
  Condition condition;
  std::vector<System> systems;  // per displayed position
  std::vector<int> ranks;       // ranking: rank of displayed position k
  std::string label;            // classification: yes | no | ct
};

// Reads evalservice export lines.
std::vector<ResultRecord> parse_export_jsonl(std::string_view text);

// Category names: "1st","2nd","3rd" or "yes","no","ct".
std::array<std::string_view, 3> category_names(Task task);

class ResultTable {
 public:
  // Rows 0..3 are the conditions, row 4 pools them.
  static constexpr std::size_t kOverall = kConditions.size();
  using Counts = std::array<uint64_t, 3>;

  explicit ResultTable(Task task) : task_(task) {}

  Task task() const { return task_; }
  const Counts &counts(System s, std::size_t row) const;
  uint64_t n(System s, std::size_t row) const;
  // 100 * count / n, rounded half away from zero; nullopt when n == 0.
  std::optional<double> percent(System s, std::size_t row, std::size_t category,
                                int decimals = 1) const;

  void add(const ResultRecord &r);
  void merge(const ResultTable &other);  // MixedTask on task mismatch

  // Row sums (and, for ranking, rank-position sums across systems within a
  // condition) must be 100 +- 0.5 at one-decimal precision. Returns the
  // first violation.
  std::optional<std::string> check_sums() const;

  bool operator==(const ResultTable &) const = default;

 private:
  Task task_;
  std::array<std::array<Counts, kConditions.size() + 1>, kSystems.size()> counts_{};
};

using RankingTable = ResultTable;
using ClassificationTable = ResultTable;

// Both raise MixedTask when a record of the other task is present and
// EmptyInput on no records.
RankingTable aggregate_ranking(std::span<const ResultRecord> records);
ClassificationTable aggregate_classification(std::span<const ResultRecord> records);

enum class ReportFormat { kCsv, kJson, kText };
ReportFormat parse_report_format(std::string_view name);

// Renders one table; every rendering re-runs check_sums and raises
// FormatError on a violation. Empty cells show "—" with n = 0.
std::string render_report(const ResultTable &table, ReportFormat format, int decimals = 1);

// Per-system distributions over the pooled conditions, as CSV:
// task,system,category,count,percent.
std::string render_distribution_csv(const ResultTable &table, int decimals = 1);

nlohmann::json table_to_json(const ResultTable &table, int decimals = 1);

}  // namespace evalbench

#endif  // EVALBENCH_RESULTS_H_
