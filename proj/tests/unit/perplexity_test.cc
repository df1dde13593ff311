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
#include <sstream>

#include "doctest.h"
#include "evalbench/perplexity.h"
#include "testkit.h"

using namespace evalbench;

namespace {

bool rel_close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

std::vector<LogProbRecord> uniform(std::size_t v, std::size_t n, const std::string &domain) {
  std::vector<LogProbRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({domain + "/doc", "t", -std::log(static_cast<double>(v))});
  }
  return out;
}

ErrorCode code_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("uniform log-probabilities give perplexity V") {
  for (std::size_t v : {2u, 8u, 1000u}) {
    const auto recs = uniform(v, 1001, "web");
    const auto r = perplexity_from_logprobs(recs);
    CHECK(rel_close(r.overall.perplexity, static_cast<double>(v), 1e-9));
    CHECK(r.overall.token_count == 1001);
  }
}

TEST_CASE("hand case") {
  const std::vector<LogProbRecord> recs = {{"d", "a", std::log(0.5)}, {"d", "b", std::log(0.125)}};
  CHECK(rel_close(perplexity_from_logprobs(recs).overall.perplexity, 4.0, 1e-12));
}

TEST_CASE("zero log-probabilities give perplexity 1") {
  const std::vector<LogProbRecord> recs(10, {"d", "a", 0.0});
  CHECK(perplexity_from_logprobs(recs).overall.perplexity == 1.0);
}

TEST_CASE("per-domain rows and pooled overall") {
  std::vector<LogProbRecord> recs = uniform(2, 100, "wiki");
  for (auto &r : uniform(8, 300, "news")) recs.push_back(r);
  const auto rep = perplexity_from_logprobs(recs, default_domain_of, {"wiki"});
  REQUIRE(rep.domains.size() == 2);
  CHECK(rep.domains[0].domain == "wiki");
  CHECK(rep.domains[1].domain == "news");
  CHECK(rel_close(rep.domains[0].perplexity, 2.0, 1e-12));
  CHECK(rel_close(rep.domains[1].perplexity, 8.0, 1e-12));
  // Pooled: exp((100 ln2 + 300 ln8) / 400) = 2^(1000/400).
  CHECK(rel_close(rep.overall.perplexity, std::pow(2.0, 2.5), 1e-12));
  CHECK(rep.overall.token_count == 400);
}

TEST_CASE("shard merge equals single pass") {
  Rng rng(10);
  std::vector<LogProbRecord> recs;
  const char *domains[] = {"a", "b", "c"};
  for (int i = 0; i < 5000; ++i) {
    recs.push_back({fmt::format("{}/x", domains[rng.uniform(3)]), "t",
                    -rng.uniform_real() * 12.0});
  }
  const auto single = perplexity_from_logprobs(recs);
  for (std::size_t shards : {2u, 3u, 7u}) {
    std::vector<PerplexityAccumulator> parts(shards);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      parts[(i * 31) % shards].add(default_domain_of(recs[i].doc_id), recs[i].logprob, i);
    }
    PerplexityAccumulator merged;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) merged.merge(*it);
    const auto rep = merged.report();
    REQUIRE(rep.domains.size() == single.domains.size());
    for (std::size_t d = 0; d < rep.domains.size(); ++d) {
      CHECK(rep.domains[d].perplexity == single.domains[d].perplexity);
      CHECK(rep.domains[d].token_count == single.domains[d].token_count);
    }
    CHECK(rep.overall.perplexity == single.overall.perplexity);
  }
}

TEST_CASE("invalid inputs") {
  CHECK(code_of([] { perplexity_from_logprobs({}); }) == ErrorCode::kEmptyInput);
  const std::vector<LogProbRecord> inf = {{"d", "a", -INFINITY}};
  CHECK(code_of([&] { perplexity_from_logprobs(inf); }) == ErrorCode::kNonFiniteLogProb);
  const std::vector<LogProbRecord> nan = {{"d", "a", NAN}};
  CHECK(code_of([&] { perplexity_from_logprobs(nan); }) == ErrorCode::kNonFiniteLogProb);
  const std::vector<LogProbRecord> pos = {{"d", "a", 0.5}};
  CHECK(code_of([&] { perplexity_from_logprobs(pos); }) == ErrorCode::kInvalidLogProb);
}

TEST_CASE("JSONL input with log bases") {
  std::istringstream e(read_file(std::string(EVALBENCH_TEST_DATA) + "/uniform_V8.jsonl", "test"));
  const auto r = perplexity_from_jsonl(e);
  CHECK(rel_close(r.overall.perplexity, 8.0, 1e-12));
  CHECK(r.domains.size() == 1);
  CHECK(r.domains[0].domain == "news");

  std::istringstream two(
      "{\"log_base\":\"2\",\"unit\":\"subword\"}\n"
      "{\"doc_id\":\"x\",\"token\":\"a\",\"logprob\":-3}\n"
      "{\"doc_id\":\"x\",\"token\":\"b\",\"logprob\":-3}\n");
  const auto r2 = perplexity_from_jsonl(two);
  CHECK(rel_close(r2.overall.perplexity, 8.0, 1e-12));
  CHECK(r2.unit == "subword");
  CHECK(r2.domains[0].domain == "default");

  std::istringstream ten("{\"log_base\":\"10\"}\n{\"doc_id\":\"x\",\"token\":\"a\",\"logprob\":-2}\n");
  CHECK(rel_close(perplexity_from_jsonl(ten).overall.perplexity, 100.0, 1e-12));

  std::istringstream null_lp("{\"log_base\":\"e\"}\n{\"doc_id\":\"x\",\"token\":\"a\",\"logprob\":null}\n");
  CHECK(code_of([&] { perplexity_from_jsonl(null_lp); }) == ErrorCode::kNonFiniteLogProb);
  std::istringstream no_header("{\"doc_id\":\"x\",\"token\":\"a\",\"logprob\":-1}\n");
  CHECK(code_of([&] { perplexity_from_jsonl(no_header); }) == ErrorCode::kFormatError);
  std::istringstream bad_base("{\"log_base\":\"3\"}\n");
  CHECK(code_of([&] { perplexity_from_jsonl(bad_base); }) == ErrorCode::kFormatError);
}

TEST_CASE("Markov perplexity counts the END step") {
  const std::vector<std::vector<std::string>> train = {{"a", "b", "c"}, {"a", "b", "d"}};
  const auto m = MarkovModel::train(train, 2);
  Document doc;
  doc.sentences = tokenize_plain("a b c");
  doc.meta["domain"] = "toy";
  Corpus c;
  c.add(doc);
  const auto rep = perplexity_of_markov(m, c, 0.1);
  REQUIRE(rep.domains.size() == 1);
  CHECK(rep.domains[0].domain == "toy");
  CHECK(rep.overall.token_count == 4);
  const std::vector<std::string> abc = {"a", "b", "c"};
  CHECK(rel_close(rep.overall.perplexity, std::exp(-m.score(abc, 0.1) / 4), 1e-12));
}

TEST_CASE("renderings") {
  const std::vector<LogProbRecord> recs = {{"d", "a", std::log(0.5)}, {"d", "b", std::log(0.125)}};
  const auto rep = perplexity_from_logprobs(recs);
  const std::string csv = render_perplexity_csv(rep);
  CHECK(csv.rfind("domain,unit,tokens,mean_neg_logprob,perplexity\n", 0) == 0);
  CHECK(csv.find("overall,word,2,") != std::string::npos);
  const std::string text = render_perplexity_text(rep);
  CHECK(text.find("4.0000") != std::string::npos);

  PerplexityReport broken = rep;
  broken.overall.perplexity = 5.0;
  CHECK_THROWS_AS(render_perplexity_csv(broken), Error);
}
