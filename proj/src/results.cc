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

#include "evalbench/results.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "evalbench/common.h"

namespace evalbench {

namespace {

constexpr const char *kModule = "results";
constexpr const char *kEmptyCell = "—";

using json = nlohmann::json;

// 100 * count / n at `decimals` places, half away from zero, in integers.
double exact_percent(uint64_t count, uint64_t n, int decimals) {
  uint64_t scale = 100;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const unsigned __int128 num = static_cast<unsigned __int128>(count) * scale;
  uint64_t q = static_cast<uint64_t>(num / n);
  const uint64_t r = static_cast<uint64_t>(num % n);
  if (2 * static_cast<unsigned __int128>(r) >= n) ++q;
  return static_cast<double>(q) / static_cast<double>(scale / 100);
}

std::string row_name(std::size_t row) {
  return row == ResultTable::kOverall ? "all" : kConditions[row].name();
}

std::string format_pct(std::optional<double> p, int decimals) {
  return p ? fmt::format("{:.{}f}", *p, decimals) : kEmptyCell;
}

ResultTable aggregate(std::span<const ResultRecord> records, Task task) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyInput, kModule,
                fmt::format("no {} records to aggregate", task_name(task)));
  }
  ResultTable t(task);
  for (const auto &r : records) t.add(r);
  if (auto bad = t.check_sums()) throw Error(ErrorCode::kFormatError, kModule, *bad);
  return t;
}

}  // namespace

std::array<std::string_view, 3> category_names(Task task) {
  if (task == Task::kRanking) return {"1st", "2nd", "3rd"};
  return {"yes", "no", "ct"};
}

std::vector<ResultRecord> parse_export_jsonl(std::string_view text) {
  std::vector<ResultRecord> out;
  std::size_t line_no = 0;
  for (const std::string &line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      ResultRecord r;
      r.task = parse_task(j.at("task").get<std::string>());
      r.condition = parse_condition(j.at("condition").get<std::string>());
      for (const auto &s : j.at("systems")) r.systems.push_back(parse_system(s.get<std::string>()));
      const json &resp = j.at("response");
      if (r.task == Task::kRanking) {
        r.ranks = resp.get<std::vector<int>>();
        std::vector<int> sorted = r.ranks;
        std::sort(sorted.begin(), sorted.end());
        std::vector<System> systems = r.systems;
        std::sort(systems.begin(), systems.end());
        if (sorted != std::vector<int>{1, 2, 3} ||
            systems != std::vector<System>(kSystems.begin(), kSystems.end())) {
          throw Error(ErrorCode::kFormatError, kModule,
                      fmt::format("line {}: ranking record must rank the three systems",
                                  line_no),
                      line_no);
        }
      } else {
        r.label = resp.get<std::string>();
        if (r.systems.size() != 1 || (r.label != "yes" && r.label != "no" && r.label != "ct")) {
          throw Error(ErrorCode::kFormatError, kModule,
                      fmt::format("line {}: classification record needs one system and a "
                                  "yes/no/ct label",
                                  line_no),
                      line_no);
        }
      }
      out.push_back(std::move(r));
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kFormatError, kModule, fmt::format("line {}: {}", line_no, e.what()),
                  line_no);
    }
  }
  return out;
}

const ResultTable::Counts &ResultTable::counts(System s, std::size_t row) const {
  return counts_.at(static_cast<std::size_t>(s)).at(row);
}

uint64_t ResultTable::n(System s, std::size_t row) const {
  const Counts &c = counts(s, row);
  return c[0] + c[1] + c[2];
}

std::optional<double> ResultTable::percent(System s, std::size_t row, std::size_t category,
                                           int decimals) const {
  const uint64_t total = n(s, row);
  if (total == 0) return std::nullopt;
  return exact_percent(counts(s, row).at(category), total, decimals);
}

void ResultTable::add(const ResultRecord &r) {
  if (r.task != task_) {
    throw Error(ErrorCode::kMixedTask, kModule,
                fmt::format("{} record in a {} table", task_name(r.task), task_name(task_)));
  }
  const std::size_t row = condition_index(r.condition);
  auto bump = [&](System s, std::size_t cat) {
    auto &sys = counts_[static_cast<std::size_t>(s)];
    ++sys[row][cat];
    ++sys[kOverall][cat];
  };
  if (task_ == Task::kRanking) {
    if (r.ranks.size() != r.systems.size()) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "ranks and systems differ in length");
    }
    for (std::size_t k = 0; k < r.ranks.size(); ++k) {
      if (r.ranks[k] < 1 || r.ranks[k] > 3) {
        throw Error(ErrorCode::kInvalidArgument, kModule, fmt::format("bad rank {}", r.ranks[k]));
      }
      bump(r.systems[k], static_cast<std::size_t>(r.ranks[k] - 1));
    }
  } else {
    const auto names = category_names(task_);
    const auto it = std::find(names.begin(), names.end(), r.label);
    if (it == names.end() || r.systems.size() != 1) {
      throw Error(ErrorCode::kInvalidArgument, kModule, fmt::format("bad label '{}'", r.label));
    }
    bump(r.systems[0], static_cast<std::size_t>(it - names.begin()));
  }
}

void ResultTable::merge(const ResultTable &other) {
  if (other.task_ != task_) {
    throw Error(ErrorCode::kMixedTask, kModule, "cannot merge ranking and classification tables");
  }
  for (std::size_t s = 0; s < counts_.size(); ++s) {
    for (std::size_t row = 0; row < counts_[s].size(); ++row) {
      for (std::size_t c = 0; c < 3; ++c) counts_[s][row][c] += other.counts_[s][row][c];
    }
  }
}

std::optional<std::string> ResultTable::check_sums() const {
  for (System s : kSystems) {
    for (std::size_t row = 0; row <= kOverall; ++row) {
      if (n(s, row) == 0) continue;
      double sum = 0;
      for (std::size_t c = 0; c < 3; ++c) sum += *percent(s, row, c, 1);
      if (std::fabs(sum - 100.0) > 0.5 + 1e-9) {
        return fmt::format("{} {} row sums to {}", system_name(s), row_name(row), sum);
      }
    }
  }
  if (task_ == Task::kRanking) {
    for (std::size_t row = 0; row <= kOverall; ++row) {
      for (std::size_t c = 0; c < 3; ++c) {
        double sum = 0;
        bool any = false;
        for (System s : kSystems) {
          if (auto p = percent(s, row, c, 1)) {
            sum += *p;
            any = true;
          }
        }
        if (any && std::fabs(sum - 100.0) > 0.5 + 1e-9) {
          return fmt::format("rank {} of {} sums to {} across systems", c + 1, row_name(row),
                             sum);
        }
      }
    }
  }
  return std::nullopt;
}

RankingTable aggregate_ranking(std::span<const ResultRecord> records) {
  return aggregate(records, Task::kRanking);
}

ClassificationTable aggregate_classification(std::span<const ResultRecord> records) {
  return aggregate(records, Task::kClassification);
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  if (name == "text") return ReportFormat::kText;
  throw Error(ErrorCode::kInvalidArgument, kModule,
              fmt::format("unknown format '{}' (csv|json|text)", name));
}

json table_to_json(const ResultTable &table, int decimals) {
  const auto names = category_names(table.task());
  json rows = json::array();
  for (System s : kSystems) {
    for (std::size_t row = 0; row <= ResultTable::kOverall; ++row) {
      json counts = json::object();
      json pct = json::object();
      for (std::size_t c = 0; c < 3; ++c) {
        counts[std::string(names[c])] = table.counts(s, row)[c];
        const auto p = table.percent(s, row, c, decimals);
        pct[std::string(names[c])] = p ? json(*p) : json(nullptr);
      }
      rows.push_back({{"system", system_name(s)},
                      {"condition", row_name(row)},
                      {"n", table.n(s, row)},
                      {"counts", counts},
                      {"percent", pct}});
    }
  }
  return {{"task", task_name(table.task())}, {"decimals", decimals}, {"rows", rows}};
}

std::string render_report(const ResultTable &table, ReportFormat format, int decimals) {
  if (auto bad = table.check_sums()) throw Error(ErrorCode::kFormatError, kModule, *bad);
  const auto names = category_names(table.task());
  std::string out;
  switch (format) {
    case ReportFormat::kJson:
      return table_to_json(table, decimals).dump(2) + "\n";
    case ReportFormat::kCsv:
      out = fmt::format("task,system,condition,n,{0}_pct,{1}_pct,{2}_pct,{0}_n,{1}_n,{2}_n\n",
                        names[0], names[1], names[2]);
      for (System s : kSystems) {
        for (std::size_t row = 0; row <= ResultTable::kOverall; ++row) {
          const auto &c = table.counts(s, row);
          out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", task_name(table.task()),
                             system_name(s), row_name(row), table.n(s, row),
                             format_pct(table.percent(s, row, 0, decimals), decimals),
                             format_pct(table.percent(s, row, 1, decimals), decimals),
                             format_pct(table.percent(s, row, 2, decimals), decimals), c[0], c[1],
                             c[2]);
        }
      }
      return out;
    case ReportFormat::kText: {
      const int w = std::max(6, 5 + decimals);
      out = fmt::format("{} (percent)\n", task_name(table.task()));
      out += fmt::format("{:<9} {:<6} {:>{}} {:>{}} {:>{}} {:>7}\n", "system", "cond", names[0],
                         w, names[1], w, names[2], w, "n");
      for (System s : kSystems) {
        for (std::size_t row = 0; row <= ResultTable::kOverall; ++row) {
          std::string cells;
          for (std::size_t c = 0; c < 3; ++c) {
            const std::string v = format_pct(table.percent(s, row, c, decimals), decimals);
            // "—" is one column wide but three bytes long.
            const int pad = w - static_cast<int>(utf8_length(v));
            cells += std::string(static_cast<std::size_t>(std::max(0, pad)) + 1, ' ') + v;
          }
          out += fmt::format("{:<9} {:<6}{} {:>7}\n", system_name(s), row_name(row), cells,
                             table.n(s, row));
        }
      }
      return out;
    }
  }
  return out;
}

std::string render_distribution_csv(const ResultTable &table, int decimals) {
  if (auto bad = table.check_sums()) throw Error(ErrorCode::kFormatError, kModule, *bad);
  const auto names = category_names(table.task());
  std::string out = "task,system,category,count,percent\n";
  for (System s : kSystems) {
    for (std::size_t c = 0; c < 3; ++c) {
      out += fmt::format("{},{},{},{},{}\n", task_name(table.task()), system_name(s), names[c],
                         table.counts(s, ResultTable::kOverall)[c],
                         format_pct(table.percent(s, ResultTable::kOverall, c, decimals),
                                    decimals));
    }
  }
  return out;
}

}  // namespace evalbench
