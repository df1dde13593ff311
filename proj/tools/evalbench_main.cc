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

// evalbench command-line tool. Exit status: 0 ok, 1 usage error, 2 data
// error. Results go to stdout (or --out), diagnostics to stderr.
//
// Every stochastic stage seeds itself with derive_seed(--seed, "<command>"),
// so stages can be rerun independently.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "evalbench/common.h"
#include "evalbench/corpusio.h"
#include "evalbench/evalservice.h"
#include "evalbench/freqdict.h"
#include "evalbench/http_server.h"
#include "evalbench/markov.h"
#include "evalbench/perplexity.h"
#include "evalbench/profiling.h"
#include "evalbench/results.h"
#include "evalbench/stimuli.h"

namespace evalbench {
namespace {

using json = nlohmann::json;

constexpr const char *kModule = "cli";

void emit(const std::string &out_path, std::string_view content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    write_file(out_path, content, kModule);
  }
}

void log_header(const std::string &command, uint64_t seed) {
  std::cerr << fmt::format("# evalbench {} seed={} stage_seed={}\n", command, seed,
                           derive_seed(seed, command));
}

CorpusFormat resolve_format(const std::string &path, const std::string &format) {
  if (format != "auto") return parse_corpus_format(format);
  const auto ext = std::filesystem::path(path).extension().string();
  if (std::filesystem::is_directory(path) || ext == ".conllu" || ext == ".conll") {
    return CorpusFormat::kConllu;
  }
  return CorpusFormat::kPlain;
}

json load_json(const std::string &path) {
  const std::string text = read_file(path, kModule);
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, kModule, fmt::format("{}: {}", path, e.what()));
  }
}

CorpusProfile profile_of(const std::string &path, const std::string &format, unsigned threads) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (format == "auto" && ext == ".json") {
    CorpusProfile p;
    from_json(load_json(path), p);
    return p;
  }
  const Corpus corpus = read_corpus(path, resolve_format(path, format));
  const auto profiles = profile_corpus(corpus, threads);
  return aggregate_profiles(profiles);
}

std::vector<std::string> sentence_forms(const Corpus &corpus, const FreqDictOptions &opts) {
  std::vector<std::string> out;
  std::string form;
  for (const Sentence *s : corpus.sentences()) {
    for (const Token &t : s->tokens) {
      if (dictionary_form(t, opts, form)) out.push_back(form);
    }
  }
  return out;
}

std::vector<std::vector<std::string>> all_forms(const Corpus &corpus) {
  std::vector<std::vector<std::string>> out;
  for (const Sentence *s : corpus.sentences()) out.push_back(s->forms());
  return out;
}

std::vector<std::string> read_subjects(const std::string &path, int count) {
  std::vector<std::string> out;
  if (!path.empty()) {
    for (const auto &line : split(read_file(path, kModule), '\n')) {
      const auto t = trim(line);
      if (!t.empty()) out.emplace_back(t);
    }
  } else {
    for (int i = 1; i <= count; ++i) out.push_back(fmt::format("subj{:03}", i));
  }
  return out;
}

// Blocks SIGINT/SIGTERM in every thread and stops the server from a waiter
// thread, so shutdown never runs inside a signal handler.
void serve_until_signal(HttpServer &server) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.serve();
  ::kill(::getpid(), SIGTERM);  // release the waiter if serve() returned on its own
  waiter.join();
}

int run(int argc, char **argv) {
  CLI::App app{"evalbench: corpus profiling, language-model evaluation and human-judgment "
               "study tooling"};
  app.set_config("--config", "", "key = value file; subcommand keys go under [subcommand]");
  app.require_subcommand(1);
  app.fallthrough();

  uint64_t seed = 0;
  app.add_option("--seed", seed, "top-level seed; each stage derives its own")
      ->capture_default_str();

  std::string in, out, format = "auto";
  unsigned threads = 1;

  // profile
  auto *profile = app.add_subcommand("profile", "linguistic profile of a corpus (JSON)");
  profile->add_option("--in", in, "corpus file or directory")->required();
  profile->add_option("--format", format, "conllu | plain | auto")->capture_default_str();
  profile->add_option("--out", out, "output file (default stdout)");
  profile->add_option("--threads", threads)->capture_default_str();

  // compare
  std::string in_b, label_a = "original", label_b = "generated", report_format = "text";
  int decimals = 3;
  auto *compare = app.add_subcommand("compare", "compare two profiles side by side");
  compare->add_option("--a", in, "corpus or profile JSON")->required();
  compare->add_option("--b", in_b, "corpus or profile JSON")->required();
  compare->add_option("--label-a", label_a)->capture_default_str();
  compare->add_option("--label-b", label_b)->capture_default_str();
  compare->add_option("--format", format, "input corpus format")->capture_default_str();
  compare->add_option("--report", report_format, "text | csv")->capture_default_str();
  compare->add_option("--decimals", decimals)->capture_default_str();
  compare->add_option("--out", out);
  compare->add_option("--threads", threads)->capture_default_str();

  // freqdict
  FreqDictOptions dict_opts;
  bool no_punct = false;
  auto *freqdict = app.add_subcommand("freqdict", "reference frequency dictionary (TSV)");
  freqdict->add_option("--in", in)->required();
  freqdict->add_option("--format", format)->capture_default_str();
  freqdict->add_flag("--lowercase", dict_opts.lowercase);
  freqdict->add_flag("--no-punct", no_punct, "drop PUNCT tokens");
  freqdict->add_option("--out", out);
  freqdict->add_option("--threads", threads)->capture_default_str();

  // hitrate
  std::string dict_path, mode = "types";
  std::vector<int> permilles;
  auto *hitrate = app.add_subcommand("hitrate", "share of tokens in the top-permille set");
  hitrate->add_option("--dict", dict_path)->required();
  hitrate->add_option("--in", in, "text corpus")->required();
  hitrate->add_option("--format", format)->capture_default_str();
  hitrate->add_option("--permille", permilles, "one or more values in 1..1000 (default 5)");
  hitrate->add_option("--mode", mode, "types | mass")->capture_default_str();
  hitrate->add_flag("--lowercase", dict_opts.lowercase);
  hitrate->add_flag("--no-punct", no_punct);
  hitrate->add_option("--out", out);

  // markov-train
  int state_size = 2;
  auto *mtrain = app.add_subcommand("markov-train", "train a word Markov chain (JSONL)");
  mtrain->add_option("--in", in)->required();
  mtrain->add_option("--format", format)->capture_default_str();
  mtrain->add_option("--state-size", state_size)->capture_default_str();
  mtrain->add_option("--out", out);
  mtrain->add_option("--threads", threads)->capture_default_str();

  // markov-generate
  std::string model_path;
  std::size_t n = 10, max_tokens = 50;
  auto *mgen = app.add_subcommand("markov-generate", "sample sentences, one per line");
  mgen->add_option("--model", model_path)->required();
  mgen->add_option("--n", n)->capture_default_str();
  mgen->add_option("--max-tokens", max_tokens)->capture_default_str();
  mgen->add_option("--out", out);

  // markov-continue
  std::string prompts_path, system = "baseline";
  std::size_t n_tokens = kMinCompletionTokens;
  int max_attempts = 100;
  auto *mcont = app.add_subcommand("markov-continue",
                                   "continue every prompt at lengths 5 and 10 (completions JSONL)");
  mcont->add_option("--model", model_path)->required();
  mcont->add_option("--prompts", prompts_path)->required();
  mcont->add_option("--n-tokens", n_tokens)->capture_default_str();
  mcont->add_option("--max-attempts", max_attempts, "resamples when a walk ends early")
      ->capture_default_str();
  mcont->add_option("--system", system, "label written on the records")->capture_default_str();
  mcont->add_option("--out", out);

  // ppl-logprobs
  std::vector<std::string> domains;
  std::string ppl_format = "text";
  auto *ppl_lp = app.add_subcommand("ppl-logprobs", "perplexity from per-token log-probabilities");
  ppl_lp->add_option("--in", in)->required();
  ppl_lp->add_option("--domains", domains, "row order")->delimiter(',');
  ppl_lp->add_option("--report", ppl_format, "text | csv")->capture_default_str();
  ppl_lp->add_option("--out", out);

  // ppl-markov
  double alpha = kDefaultAlpha;
  auto *ppl_mk = app.add_subcommand("ppl-markov", "perplexity of a corpus under a Markov model");
  ppl_mk->add_option("--model", model_path)->required();
  ppl_mk->add_option("--in", in)->required();
  ppl_mk->add_option("--format", format)->capture_default_str();
  ppl_mk->add_option("--alpha", alpha)->capture_default_str();
  ppl_mk->add_option("--domains", domains)->delimiter(',');
  ppl_mk->add_option("--report", ppl_format, "text | csv")->capture_default_str();
  ppl_mk->add_option("--out", out);

  // prompts
  std::size_t n_prompts = 100;
  auto *prompts = app.add_subcommand("prompts", "sample prompt sentences (JSON)");
  prompts->add_option("--in", in)->required();
  prompts->add_option("--format", format)->capture_default_str();
  prompts->add_option("--n", n_prompts)->capture_default_str();
  prompts->add_option("--out", out);

  // stimuli
  std::vector<std::string> completion_paths;
  auto *stimuli = app.add_subcommand("stimuli", "build the blinded stimulus set (JSON)");
  stimuli->add_option("--prompts", prompts_path)->required();
  stimuli->add_option("--completions", completion_paths, "one or more completions JSONL")
      ->required();
  stimuli->add_option("--out", out);

  // assign
  std::string stimuli_path, task_str, subject_file, assign_mode = "balanced";
  int n_subjects = 12;
  auto *assign = app.add_subcommand("assign", "session plans for one task (JSON)");
  assign->add_option("--stimuli", stimuli_path)->required();
  assign->add_option("--task", task_str, "ranking | classification")->required();
  assign->add_option("--subjects", n_subjects, "generated ids subj001..")->capture_default_str();
  assign->add_option("--subject-file", subject_file, "one subject id per line");
  assign->add_option("--mode", assign_mode, "balanced | random (classification)")
      ->capture_default_str();
  assign->add_option("--out", out);

  // serve
  std::vector<std::string> plan_paths;
  std::string log_path, port_file;
  ServerOptions server_opts;
  auto *serve = app.add_subcommand("serve", "annotation HTTP service");
  serve->add_option("--stimuli", stimuli_path)->required();
  serve->add_option("--plans", plan_paths, "one or more plan files")->required();
  serve->add_option("--log", log_path, "append-only response log")->required();
  serve->add_option("--host", server_opts.host)->capture_default_str();
  serve->add_option("--port", server_opts.port, "0 picks a free port")->capture_default_str();
  serve->add_option("--port-file", port_file, "write the bound port here");
  serve->add_option("--ui-dir", server_opts.ui_dir, "static UI bundle served at /");
  serve->add_option("--threads", server_opts.threads)->capture_default_str();

  // aggregate
  std::string dist_out;
  int pct_decimals = 1;
  auto *aggregate = app.add_subcommand("aggregate", "percentage tables from an export");
  aggregate->add_option("--in", in, "export JSONL")->required();
  aggregate->add_option("--task", task_str, "ranking | classification (filters the input)");
  aggregate->add_option("--report", report_format, "csv | json | text")->capture_default_str();
  aggregate->add_option("--decimals", pct_decimals)->capture_default_str();
  aggregate->add_option("--out", out);
  aggregate->add_option("--distribution-out", dist_out, "per-system distributions CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "hitrate" || command == "freqdict") dict_opts.include_punct = !no_punct;

  if (*profile) {
    const Corpus corpus = read_corpus(in, resolve_format(in, format));
    const auto profiles = profile_corpus(corpus, threads);
    json j;
    to_json(j, aggregate_profiles(profiles));
    emit(out, j.dump(2) + "\n");
  } else if (*compare) {
    const auto report = compare_profiles(profile_of(in, format, threads),
                                         profile_of(in_b, format, threads), label_a, label_b);
    if (report_format == "csv") {
      emit(out, render_comparison_csv(report));
    } else if (report_format == "text") {
      emit(out, render_comparison_text(report, decimals));
    } else {
      throw CLI::ValidationError("--report", "expected text or csv");
    }
  } else if (*freqdict) {
    dict_opts.threads = threads;
    emit(out, build_freq_dict(read_corpus(in, resolve_format(in, format)), dict_opts).to_tsv());
  } else if (*hitrate) {
    if (permilles.empty()) permilles = {5};
    const TopSetMode m = mode == "mass" ? TopSetMode::kMass : TopSetMode::kTypes;
    if (mode != "mass" && mode != "types") throw CLI::ValidationError("--mode", "types or mass");
    const FreqDict dict = FreqDict::from_tsv(read_file(dict_path, kModule));
    const auto tokens = sentence_forms(read_corpus(in, resolve_format(in, format)), dict_opts);
    std::string text = "permille,mode,top_set_size,tokens,hit_rate\n";
    for (int p : permilles) {
      text += fmt::format("{},{},{},{},{}\n", p, mode, dict.top_set_size(p, m), tokens.size(),
                          top_hit_rate(tokens, dict, p, m));
    }
    emit(out, text);
  } else if (*mtrain) {
    const auto sentences = all_forms(read_corpus(in, resolve_format(in, format)));
    emit(out, MarkovModel::train(sentences, state_size, threads).to_jsonl());
  } else if (*mgen) {
    log_header(command, seed);
    const auto model = MarkovModel::from_jsonl(read_file(model_path, kModule));
    const uint64_t stage = derive_seed(seed, command);
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
      text += join(model.generate(max_tokens, derive_seed(stage, fmt::format("sentence/{}", i))),
                   " ") +
              "\n";
    }
    emit(out, text);
  } else if (*mcont) {
    log_header(command, seed);
    const System sys = parse_system(system);
    const auto model = MarkovModel::from_jsonl(read_file(model_path, kModule));
    const auto prompt_list = prompts_from_json(load_json(prompts_path));
    const uint64_t stage = derive_seed(seed, command);
    CompletionMap completions;
    std::size_t retried = 0;
    for (const auto &p : prompt_list) {
      for (int plen : {5, 10}) {
        const uint64_t base = derive_seed(stage, fmt::format("{}/{}", p.prompt_id, plen));
        Continuation c;
        int attempt = 0;
        for (; attempt < max_attempts; ++attempt) {
          const uint64_t s =
              attempt == 0 ? base : derive_seed(base, fmt::format("attempt/{}", attempt));
          c = model.continue_from(p.prompt(plen), n_tokens, s);
          if (!c.ended_early) break;
        }
        if (c.ended_early) {
          throw Error(ErrorCode::kCompletionTooShort, kModule,
                      fmt::format("prompt {} (length {}): every walk ended before {} tokens "
                                  "in {} attempts",
                                  p.prompt_id, plen, n_tokens, max_attempts));
        }
        retried += attempt > 0;
        completions[{p.prompt_id, plen, sys}] = c.tokens;
      }
    }
    if (retried) std::cerr << fmt::format("# {} continuations needed resampling\n", retried);
    emit(out, completions_to_jsonl(completions));
  } else if (*ppl_lp) {
    std::istringstream stream(read_file(in, kModule));
    const auto report = perplexity_from_jsonl(stream, default_domain_of, domains);
    emit(out, ppl_format == "csv" ? render_perplexity_csv(report) : render_perplexity_text(report));
  } else if (*ppl_mk) {
    const auto model = MarkovModel::from_jsonl(read_file(model_path, kModule));
    const auto report =
        perplexity_of_markov(model, read_corpus(in, resolve_format(in, format)), alpha, domains);
    emit(out, ppl_format == "csv" ? render_perplexity_csv(report) : render_perplexity_text(report));
  } else if (*prompts) {
    log_header(command, seed);
    const auto selected = select_prompts(read_corpus(in, resolve_format(in, format)), n_prompts,
                                         derive_seed(seed, command));
    emit(out, prompts_to_json(selected).dump(2) + "\n");
  } else if (*stimuli) {
    const auto prompt_list = prompts_from_json(load_json(prompts_path));
    CompletionMap completions;
    for (const auto &path : completion_paths) {
      for (auto &[k, v] : parse_completions_jsonl(read_file(path, kModule))) {
        if (!completions.emplace(k, std::move(v)).second) {
          throw Error(ErrorCode::kFormatError, kModule,
                      fmt::format("{}: completion for {} given twice", path, std::get<0>(k)));
        }
      }
    }
    emit(out, stimulus_set_to_json(build_stimulus_set(prompt_list, completions)).dump(2) + "\n");
  } else if (*assign) {
    log_header(command, seed);
    const Task task = parse_task(task_str);
    const StimulusSet set = stimulus_set_from_json(load_json(stimuli_path));
    const auto subjects = read_subjects(subject_file, n_subjects);
    const uint64_t stage = derive_seed(seed, command);
    std::vector<SessionPlan> plans;
    if (task == Task::kRanking) {
      plans = assign_ranking(set, subjects, stage);
    } else {
      if (assign_mode != "balanced" && assign_mode != "random") {
        throw CLI::ValidationError("--mode", "balanced or random");
      }
      plans = assign_classification(
          set, subjects, stage, assign_mode == "random" ? AssignMode::kRandom : AssignMode::kBalanced);
    }
    emit(out, plans_to_json(plans).dump(2) + "\n");
  } else if (*serve) {
    StimulusSet set = stimulus_set_from_json(load_json(stimuli_path));
    std::vector<SessionPlan> plans;
    for (const auto &path : plan_paths) {
      auto more = plans_from_json(load_json(path));
      plans.insert(plans.end(), std::make_move_iterator(more.begin()),
                   std::make_move_iterator(more.end()));
    }
    if (const char *token = std::getenv("EVAL_ADMIN_TOKEN")) server_opts.admin_token = token;
    if (server_opts.admin_token.empty()) {
      std::cerr << "warning: EVAL_ADMIN_TOKEN is not set; export is disabled\n";
    }
    EvalService service(std::move(set), std::move(plans), log_path);
    HttpServer server(service, server_opts);
    const int port = server.bind();
    if (!port_file.empty()) {
      write_file(port_file + ".tmp", fmt::format("{}\n", port), kModule);
      std::filesystem::rename(port_file + ".tmp", port_file);
    }
    std::cerr << fmt::format("listening on http://{}:{} ({} records replayed)\n",
                             server_opts.host, port, service.record_count());
    serve_until_signal(server);
  } else if (*aggregate) {
    auto records = parse_export_jsonl(read_file(in, kModule));
    std::optional<Task> task;
    if (!task_str.empty()) {
      task = parse_task(task_str);
      std::erase_if(records, [&](const ResultRecord &r) { return r.task != *task; });
    } else if (!records.empty()) {
      task = records.front().task;
    }
    const ResultTable table = task == Task::kClassification ? aggregate_classification(records)
                                                            : aggregate_ranking(records);
    emit(out, render_report(table, parse_report_format(report_format), pct_decimals));
    if (!dist_out.empty()) emit(dist_out, render_distribution_csv(table, pct_decimals));
  }
  return 0;
}

}  // namespace
}  // namespace evalbench

int main(int argc, char **argv) {
  try {
    return evalbench::run(argc, argv);
  } catch (const CLI::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const evalbench::Error &e) {
    std::cerr << "error: " << e.qualified_code() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
