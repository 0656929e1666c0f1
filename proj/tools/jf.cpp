// jf: command-line driver for the journalist pipeline and the live server.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/pipeline/config.hpp"
#include "jf/pipeline/stages.hpp"

namespace {

using nlohmann::json;
namespace pl = jf::pipeline;

struct Overrides {
  std::string config;
  std::string workdir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  std::string log_level = "info";

  std::string input;
  std::optional<std::size_t> samples;
  std::string system;
  std::optional<std::size_t> documents;
  std::optional<int> rounds;
  std::string transcripts;
  std::string name;
  std::string summaries;
  std::string interactions;
  std::string host;
  std::optional<int> port;
  std::string data_dir;
  std::string static_dir;
};

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

pl::PipelineConfig build_config(const Overrides& o) {
  auto cfg = o.config.empty() ? pl::default_config() : pl::load_config(o.config);
  if (o.config.empty()) cfg.serve.data_dir = cfg.workdir / "sessions";
  if (!o.workdir.empty()) {
    const bool default_data = cfg.serve.data_dir == cfg.workdir / "sessions";
    cfg.workdir = o.workdir;
    if (default_data) cfg.serve.data_dir = cfg.workdir / "sessions";
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.parallelism) cfg.parallelism = *o.parallelism;
  if (!o.input.empty()) cfg.corpus_input = o.input;
  if (o.samples) cfg.preference_samples = *o.samples;
  if (o.documents) cfg.simulate_documents = *o.documents;
  if (o.rounds) cfg.rounds = *o.rounds;
  if (!o.summaries.empty()) cfg.summaries = o.summaries;
  if (!o.interactions.empty()) cfg.interactions = o.interactions;
  if (!o.host.empty()) cfg.serve.host = o.host;
  if (o.port) cfg.serve.port = *o.port;
  if (!o.data_dir.empty()) cfg.serve.data_dir = o.data_dir;
  if (!o.static_dir.empty()) cfg.serve.static_dir = o.static_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("jf");
  spdlog::set_default_logger(logger);

  CLI::App app{"Journalist pipeline: corpus to datasets, simulation, metrics and live sessions"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("-c,--config", o.config, "TOML configuration file");
  app.add_option("-w,--workdir", o.workdir, "Directory for stage inputs and outputs");
  app.add_option("--seed", o.seed, "Seed for splits and sampling");
  app.add_option("-j,--parallelism", o.parallelism, "Concurrent model requests")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off");

  auto* ingest = app.add_subcommand("ingest", "Validate, split and store a JSONL corpus");
  ingest->add_option("-i,--input", o.input, "Corpus JSONL file");
  app.add_subcommand("score", "Judge every press release on the three rubrics");
  app.add_subcommand("filter", "Keep documents whose scores pass the quality thresholds");
  app.add_subcommand("synthesize", "Generate conversations for filtered documents");
  app.add_subcommand("distill-sft", "Export one SFT example per journalist turn");
  auto* prefs = app.add_subcommand("gen-prefs", "Build DPO preference pairs from sampled answers");
  prefs->add_option("-n,--samples", o.samples, "Researcher answers to sample")
      ->check(CLI::PositiveNumber);
  auto* simulate = app.add_subcommand("simulate", "Simulate conversations for configured systems");
  simulate->add_option("-s,--system", o.system, "Only this system");
  simulate->add_option("-n,--documents", o.documents, "Documents to sample")
      ->check(CLI::PositiveNumber);
  simulate->add_option("-r,--rounds", o.rounds, "Question/answer rounds")->check(CLI::PositiveNumber);
  auto* evaluate = app.add_subcommand("evaluate", "Score simulated or live transcripts");
  evaluate->add_option("-s,--system", o.system, "Only this system");
  auto* transcripts_opt =
      evaluate->add_option("-t,--transcripts", o.transcripts, "Evaluate this transcript file instead");
  evaluate->add_option("--name", o.name, "Report label for --transcripts")->needs(transcripts_opt);
  evaluate->add_option("--summaries", o.summaries, "Lay summaries JSONL for ROUGE overlap");
  evaluate->add_option("--interactions", o.interactions,
                       "Transcripts the summaries refer to (e.g. exported sessions)");
  app.add_subcommand("report", "Collect evaluation reports into one table");
  auto* serve = app.add_subcommand("serve", "Serve live practice sessions over HTTP");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("-p,--port", o.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--data-dir", o.data_dir, "Session storage directory");
  serve->add_option("--static-dir", o.static_dir, "Directory with the browser client");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return 2;
  }

  spdlog::set_level(spdlog::level::from_str(o.log_level));

  try {
    pl::Runtime rt(build_config(o));
    const auto* sub = app.get_subcommands().front();
    const std::string cmd = sub->get_name();
    const auto system = o.system.empty() ? std::nullopt : std::optional<std::string>(o.system);
    json summary;
    if (cmd == "ingest") {
      summary = pl::run_ingest(rt);
    } else if (cmd == "score") {
      summary = pl::run_score(rt);
    } else if (cmd == "filter") {
      summary = pl::run_filter(rt);
    } else if (cmd == "synthesize") {
      summary = pl::run_synthesize(rt);
    } else if (cmd == "distill-sft") {
      summary = pl::run_distill_sft(rt);
    } else if (cmd == "gen-prefs") {
      summary = pl::run_gen_prefs(rt);
    } else if (cmd == "simulate") {
      summary = pl::run_simulate(rt, system);
    } else if (cmd == "evaluate") {
      std::optional<pl::EvaluateTarget> external;
      if (!o.transcripts.empty()) {
        external = pl::EvaluateTarget{o.name.empty() ? "external" : o.name, o.transcripts};
      }
      summary = pl::run_evaluate(rt, system, external);
    } else if (cmd == "report") {
      summary = pl::run_report(rt);
      std::cout << summary.at("table").get<std::string>();
      return 0;
    } else if (cmd == "serve") {
      pl::run_serve(rt, [&](int port) {
        std::cout << json{{"status", "listening"}, {"host", rt.config().serve.host}, {"port", port}}
                         .dump()
                  << std::endl;
      });
      return 0;
    }
    std::cout << json{{"stage", cmd}, {"summary", summary}}.dump() << std::endl;
    return 0;
  } catch (const jf::Error& e) {
    print_error(std::string(jf::to_string(e.kind())), e.what());
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
  }
  return 1;
}
