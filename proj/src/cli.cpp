/* Copyright 2026 The VST Runtime Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "vst/cli.h"

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "vst/attention_mask.h"
#include "vst/config.h"
#include "vst/jsonl.h"
#include "vst/kg_synthesis.h"
#include "vst/latency_sim.h"
#include "vst/orchestrator.h"
#include "vst/rl_objective.h"
#include "vst/sft_packer.h"

namespace vst {

using nlohmann::json;

namespace {

constexpr const char* kUsage =
    "usage: vst <command> [options]\n"
    "commands:\n"
    "  run               play a frame trace against a query schedule\n"
    "  chat              answer questions from stdin while a trace plays\n"
    "  simulate-latency  compare amortized thinking with post-query CoT\n"
    "  mask              print a streaming attention mask\n"
    "  pack              slice SFT sequences into training segments\n"
    "  synthesize        build evidence-chain QA data from scene clips\n"
    "  rl-check          evaluate the clipped group objective on rollouts\n"
    "run `vst <command> --help` for the flags of each command\n";

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  return out;
}

void print_answers(std::ostream& out,
                   const std::vector<std::optional<AnswerRecord>>& answers) {
  for (std::size_t i = 0; i < answers.size(); ++i) {
    json line{{"query_index", i}};
    if (answers[i]) {
      to_json(line["answer"], *answers[i]);
    } else {
      line["answer"] = nullptr;
    }
    out << line.dump() << '\n';
  }
}

struct RunArgs {
  std::string config;
  std::string frames;
  std::string queries;
  std::string answers;
  std::vector<std::string> sets;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const auto config = load_run_config(a.config, a.sets);
  const auto frames = read_records<FrameRecord>(a.frames);
  const auto queries = read_records<QueryEvent>(a.queries);
  auto backend = make_backend(config.backend);
  try {
    auto result = run_session(config.session, frames, queries, *backend,
                              config.realtime);
    write_transcript(out, result.transcript);
    if (!a.answers.empty()) {
      auto file = open_output(a.answers);
      print_answers(file, result.answers);
    }
  } catch (const SessionAborted& e) {
    write_transcript(out, e.transcript());
    err << "session aborted: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

struct ChatArgs {
  std::string config;
  std::string frames;
  double interval_s = 10.0;
  std::string transcript;
  std::vector<std::string> sets;
};

// "[@12.5] question" pins the query instant; otherwise queries are spaced by
// the interval. In real-time mode the stdin arrival instant is used.
int cmd_chat(const ChatArgs& a, std::istream& in, std::ostream& out,
             std::ostream& err) {
  const auto config = load_run_config(a.config, a.sets);
  std::vector<FrameRecord> frames;
  if (!a.frames.empty()) frames = read_records<FrameRecord>(a.frames);
  auto backend = make_backend(config.backend);
  VirtualDriver driver(config.session, *backend);
  driver.add_frames(frames);
  const Millis interval = from_seconds(a.interval_s);
  const auto wall_start = std::chrono::steady_clock::now();
  const bool realtime = config.session.mode == ClockMode::kRealTime;

  Millis last_query{0};
  std::size_t failures_seen = 0;
  std::string line;
  int index = 0;
  while (std::getline(in, line)) {
    std::string question = kg::normalize_name(line);
    if (question.empty()) continue;
    Millis at = last_query + interval;
    if (realtime) {
      const auto wall = std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - wall_start);
      at = Millis(static_cast<std::int64_t>(wall.count() * config.realtime.speed));
    }
    if (question.rfind("[@", 0) == 0) {
      const auto close = question.find(']');
      if (close == std::string::npos) {
        err << "chat: malformed time prefix: " << question << '\n';
        continue;
      }
      try {
        at = from_seconds(parse_double("time", question.substr(2, close - 2)));
      } catch (const Error& e) {
        err << "chat: " << e.what() << '\n';
        continue;
      }
      question = kg::normalize_name(question.substr(close + 1));
    }
    at = std::max(at, driver.clock());
    last_query = at;

    try {
      driver.run_until(at);
      driver.schedule_query(QueryEvent{at, question, std::nullopt});
      driver.run_until_answered();
    } catch (const ValidationError& e) {
      err << "chat: " << e.what() << '\n';
      continue;
    }
    const auto& answer = driver.answers().at(static_cast<std::size_t>(index));
    if (answer) {
      const auto report = measure_latency(driver.session().transcript(), index);
      json record{{"query_index", index},
                  {"query_time_s", to_seconds(at)},
                  {"question", question},
                  {"answer", answer->text},
                  {"boxed", answer->boxed_answer ? json(*answer->boxed_answer)
                                                 : json(nullptr)},
                  {"qa_latency_s", to_seconds(report.qa_latency)}};
      out << record.dump() << '\n' << std::flush;
    }
    for (; failures_seen < driver.failures().size(); ++failures_seen) {
      err << "chat: answer failed: " << driver.failures()[failures_seen].second
          << '\n';
    }
    ++index;
  }
  if (!a.transcript.empty()) {
    auto file = open_output(a.transcript);
    write_transcript(file, driver.session().transcript());
  }
  return kExitOk;
}

int cmd_simulate(const std::string& profile_path, std::ostream& out) {
  const auto profile = profile_path.empty() ? calibrated_profile()
                                            : load_latency_profile(profile_path);
  const auto vst = simulate_vst(profile);
  const auto cot = simulate_postquery_cot(profile);
  out << format_latency_table(vst, cot);
  return kExitOk;
}

int cmd_mask(const std::string& types, std::int64_t L, std::ostream& out) {
  const auto seq = TokenTypeSequence::parse(types);
  out << dump_mask(build_streaming_mask(seq, L), L);
  return kExitOk;
}

int cmd_pack(const std::string& input, std::int64_t max_tokens, double factor,
             std::ostream& out) {
  const auto estimator = word_count_estimator(factor);
  const auto lines = read_jsonl_file(input);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    SftSequence seq;
    try {
      seq = sequence_from_json(lines[i]);
    } catch (const json::exception& e) {
      throw ParseError(input + ": record " + std::to_string(i + 1) + ": " +
                       e.what());
    }
    for (const auto& segment : segment_sequence(seq, max_tokens, estimator)) {
      auto record = segment_record(segment);
      record["sequence_index"] = i;
      out << record.dump() << '\n';
    }
  }
  return kExitOk;
}

struct SynthArgs {
  std::string scenes;
  std::string extractions;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t window = 3;
  std::size_t chains = 20;
  std::size_t min_hops = 3;
  std::size_t max_hops = 8;
};

int cmd_synthesize(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  const auto scenes = kg::load_scenes(a.scenes);
  std::map<int, json> extractions;
  if (!a.extractions.empty()) extractions = kg::load_extraction_trace(a.extractions);
  kg::PipelineOptions options;
  options.window_size = a.window;
  options.chains.count = a.chains;
  options.chains.min_hops = a.min_hops;
  options.chains.max_hops = a.max_hops;
  options.chains.seed = a.seed;
  kg::MockKgBackend backend;
  const auto result = kg::run_pipeline(scenes, extractions, backend, options);
  kg::write_pipeline_outputs(a.out_dir, result);
  for (const auto& w : result.warnings) err << "synthesize: " << w << '\n';
  out << json{{"nodes", result.graph.nodes.size()},
              {"edges", result.graph.edges.size()},
              {"chains", result.chains.chains.size()},
              {"accepted", result.accepted.size()},
              {"rejected", result.rejected.size()},
              {"quarantined", result.quarantined.size()}}
             .dump()
      << '\n';
  return kExitOk;
}

struct RlArgs {
  std::string rollouts;
  double eps_low = rl::kDefaultEpsLow;
  double eps_high = rl::kDefaultEpsHigh;
  std::optional<double> beta;
};

int cmd_rl_check(const RlArgs& a, std::ostream& out) {
  rl::RolloutGroup group;
  const auto lines = read_jsonl_file(a.rollouts);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      group.trajectories.push_back(rl::trajectory_from_json(lines[i]));
    } catch (const json::exception& e) {
      throw ParseError(a.rollouts + ": record " + std::to_string(i + 1) + ": " +
                       e.what());
    }
  }
  group.eps_low = a.eps_low;
  group.eps_high = a.eps_high;
  const bool has_logps = std::any_of(
      group.trajectories.begin(), group.trajectories.end(),
      [](const rl::Trajectory& t) { return !t.logp_current.empty(); });
  // Without log-probs the KL term cannot be formed; default it off.
  group.beta = a.beta.value_or(has_logps ? rl::kDefaultKlBeta : 0.0);

  std::vector<double> rewards;
  for (const auto& t : group.trajectories) rewards.push_back(t.reward);
  const auto advantages = rl::group_advantages(rewards);
  const double value = rl::objective(group);
  out << json{{"advantages", advantages}, {"objective", value}}.dump() << '\n';
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in,
             std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << kUsage;
    return kExitValidation;
  }

  static const std::set<std::string> kCommands{
      "run", "chat", "simulate-latency", "mask", "pack", "synthesize",
      "rl-check"};
  if (args[0].empty() || (args[0][0] != '-' && !kCommands.count(args[0]))) {
    err << "unknown command: " << args[0] << '\n' << kUsage;
    return kExitValidation;
  }

  CLI::App app{"VST streaming video reasoning runtime", "vst"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Play a frame trace against queries");
  run->add_option("--config", run_args.config, "key = value config file")
      ->required();
  run->add_option("--frames", run_args.frames, "frame trace (JSONL)")
      ->required();
  run->add_option("--queries", run_args.queries, "query schedule (JSONL)")
      ->required();
  run->add_option("--answers", run_args.answers, "write answers (JSONL) here");
  run->add_option("--set", run_args.sets, "override a config key: key=value");

  ChatArgs chat_args;
  auto* chat = app.add_subcommand("chat", "Answer stdin questions as a trace plays");
  chat->add_option("--config", chat_args.config, "key = value config file")
      ->required();
  chat->add_option("--frames", chat_args.frames, "frame trace (JSONL)");
  chat->add_option("--interval", chat_args.interval_s,
                   "seconds between unpinned questions (virtual clock)")
      ->check(CLI::PositiveNumber);
  chat->add_option("--transcript", chat_args.transcript,
                   "write the session transcript (JSONL) here on exit");
  chat->add_option("--set", chat_args.sets, "override a config key: key=value");

  std::string profile;
  auto* simulate =
      app.add_subcommand("simulate-latency", "Compare VST with post-query CoT");
  simulate->add_option("--profile", profile,
                       "latency profile (key = value); calibrated if omitted");

  std::string types;
  std::int64_t mask_l = 0;
  auto* mask = app.add_subcommand("mask", "Print a streaming attention mask");
  mask->add_option("--types", types, "token types, e.g. VVTV")->required();
  mask->add_option("--L", mask_l, "visual window length")->required();

  std::string pack_input;
  std::int64_t max_tokens = 0;
  double word_factor = kDefaultWordTokenFactor;
  auto* pack = app.add_subcommand("pack", "Slice SFT sequences into segments");
  pack->add_option("--input", pack_input, "sequences (JSONL)")->required();
  pack->add_option("--max-tokens", max_tokens, "token budget per segment")
      ->required();
  pack->add_option("--word-factor", word_factor,
                   "estimated tokens per whitespace word");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synthesize", "Build evidence-chain QA data");
  synth->add_option("--scenes", synth_args.scenes, "scene clips (JSONL)")
      ->required();
  synth->add_option("--extractions", synth_args.extractions,
                    "recorded extraction events per clip (JSONL)");
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth->add_option("--seed", synth_args.seed, "chain sampling seed");
  synth->add_option("--window", synth_args.window, "entity bank window W");
  synth->add_option("--chains", synth_args.chains, "chains to sample");
  synth->add_option("--min-hops", synth_args.min_hops, "minimum chain length");
  synth->add_option("--max-hops", synth_args.max_hops, "maximum chain length");

  RlArgs rl_args;
  double beta = 0.0;
  auto* rl_check = app.add_subcommand("rl-check", "Evaluate the group objective");
  rl_check->add_option("--rollouts", rl_args.rollouts, "trajectories (JSONL)")
      ->required();
  rl_check->add_option("--eps-low", rl_args.eps_low, "lower clip bound");
  rl_check->add_option("--eps-high", rl_args.eps_high, "upper clip bound");
  auto* beta_opt = rl_check->add_option(
      "--beta", beta, "KL weight (default 0.001, or 0 without log-probs)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    if (app.get_subcommands().empty()) err << kUsage;
    return kExitValidation;
  }
  if (*beta_opt) rl_args.beta = beta;

  try {
    if (*run) return cmd_run(run_args, out, err);
    if (*chat) return cmd_chat(chat_args, in, out, err);
    if (*simulate) return cmd_simulate(profile, out);
    if (*mask) return cmd_mask(types, mask_l, out);
    if (*pack) return cmd_pack(pack_input, max_tokens, word_factor, out);
    if (*synth) return cmd_synthesize(synth_args, out, err);
    if (*rl_check) return cmd_rl_check(rl_args, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const RuntimeFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << kUsage;
  return kExitValidation;
}

}  // namespace vst
