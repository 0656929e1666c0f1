#include "jf/pipeline/stages.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "jf/common/error.hpp"
#include "jf/common/jsonl.hpp"
#include "jf/corpus/corpus.hpp"
#include "jf/corpus/tokens.hpp"
#include "jf/judge/judge.hpp"
#include "jf/llm/batch.hpp"
#include "jf/metrics/metrics.hpp"
#include "jf/metrics/rouge.hpp"
#include "jf/serving/http_server.hpp"
#include "jf/serving/registry.hpp"
#include "jf/serving/session.hpp"
#include "jf/simulator/simulator.hpp"
#include "jf/synthesis/preference.hpp"
#include "jf/synthesis/sft.hpp"
#include "jf/synthesis/synthesis.hpp"

namespace jf::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

fs::path Layout::simulations(const std::string& system) const {
  return root / "simulations" / (file_stem(system) + ".jsonl");
}

fs::path Layout::manifest(const std::string& stage) const {
  return root / (stage + ".manifest.json");
}

Runtime::Runtime(PipelineConfig config, std::shared_ptr<llm::Transport> transport)
    : config_(std::move(config)),
      layout_{config_.workdir},
      prompts_(config_.prompts_dir ? PromptLibrary::with_overrides(*config_.prompts_dir)
                                   : PromptLibrary::builtin()),
      gateway_(std::move(transport)) {}

llm::EndpointChatModel Runtime::chat(const std::string& role) {
  return llm::EndpointChatModel(gateway_, config_.endpoint(role));
}

llm::EndpointEmbeddingProvider Runtime::embedder() {
  return llm::EndpointEmbeddingProvider(gateway_, config_.endpoint(roles::kEmbed));
}

namespace {

std::string now_iso() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json base_manifest(const Runtime& rt, const std::string& stage) {
  return {{"stage", stage},
          {"created_at", now_iso()},
          {"seed", rt.config().seed},
          {"parallelism", rt.config().parallelism},
          {"prompt_versions", rt.prompts().versions()}};
}

void write_manifest(const Runtime& rt, const std::string& stage, const json& manifest) {
  fs::create_directories(rt.layout().root);
  jsonl::write_text_atomic(rt.layout().manifest(stage), manifest.dump(2) + "\n");
}

void require_file(const fs::path& p, const std::string& produced_by) {
  if (!fs::exists(p)) {
    throw IoError(p.string() + " does not exist; run '" + produced_by + "' first");
  }
}

corpus::Corpus load_corpus(const Runtime& rt) {
  require_file(rt.layout().corpus_dir() / "manifest.json", "ingest");
  return corpus::Corpus::load(rt.layout().corpus_dir());
}

std::vector<synthesis::Transcript> read_transcripts(const fs::path& path) {
  std::vector<synthesis::Transcript> out;
  jsonl::for_each(path, [&](const json& j, std::size_t line) {
    try {
      out.push_back(synthesis::transcript_from_json(j));
    } catch (const std::exception& e) {
      spdlog::warn("{}:{}: invalid transcript skipped ({})", path.string(), line, e.what());
    }
  });
  return out;
}

// Fails the stage when every job of a non-empty batch failed; the first error
// usually names the misconfigured endpoint.
template <class T>
std::size_t count_failures(const std::vector<llm::BatchResult<T>>& results, const char* what) {
  std::size_t failed = 0;
  const std::string* first = nullptr;
  for (const auto& r : results) {
    if (!r.ok()) {
      ++failed;
      if (first == nullptr) first = &r.error;
    }
  }
  if (!results.empty() && failed == results.size()) {
    throw EndpointUnavailable(std::string("every ") + what + " job failed; first error: " + *first);
  }
  return failed;
}

void progress(std::atomic<std::size_t>& done, std::size_t total, const char* what) {
  const auto n = ++done;
  if (n % 100 == 0 || n == total) spdlog::info("{}: {}/{}", what, n, total);
}

}  // namespace

json run_ingest(Runtime& rt) {
  const auto& cfg = rt.config();
  if (cfg.corpus_input.empty()) throw ConfigurationError("[corpus] input is not set");
  auto result = corpus::ingest(cfg.corpus_input, cfg.ratios, cfg.seed);
  result.corpus.save(rt.layout().corpus_dir(), result.report);
  const auto& r = result.report;
  json summary = {{"accepted", r.accepted},
                  {"malformed", r.malformed},
                  {"duplicates", r.duplicates},
                  {"simulation_only", r.simulation_only},
                  {"explicit_splits", r.explicit_splits},
                  {"train", r.split_counts[0]},
                  {"validation", r.split_counts[1]},
                  {"test", r.split_counts[2]}};
  json manifest = base_manifest(rt, "ingest");
  manifest["input"] = cfg.corpus_input.string();
  manifest["ratios"] = {cfg.ratios.train, cfg.ratios.validation, cfg.ratios.test};
  manifest["counts"] = summary;
  write_manifest(rt, "ingest", manifest);
  return summary;
}

json run_score(Runtime& rt) {
  const auto& cfg = rt.config();
  const auto corpus = load_corpus(rt);
  auto judge_model = rt.chat(roles::kJudge);
  judge::Judge judge(judge_model, rt.prompts());

  std::vector<const corpus::Document*> docs;
  std::size_t simulation_only = 0;
  for (const auto* d : corpus.by_split(cfg.synthesis_split)) {
    if (d->simulation_only()) {
      ++simulation_only;
    } else {
      docs.push_back(d);
    }
  }
  spdlog::info("scoring {} press releases ({} simulation-only skipped)", docs.size(),
               simulation_only);

  std::vector<std::function<judge::QualityRecord()>> jobs;
  for (const auto* d : docs) jobs.push_back([&judge, d] { return judge.score_press_release(*d); });
  std::atomic<std::size_t> done{0};
  auto results = llm::run_batch(jobs, cfg.parallelism,
                                [&](std::size_t) { progress(done, jobs.size(), "score"); });
  const auto failed = count_failures(results, "score");

  jsonl::Writer out(rt.layout().scores());
  std::size_t passed = 0;
  std::size_t unscorable = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok()) {
      spdlog::warn("scoring {} failed: {}", docs[i]->id, results[i].error);
      continue;
    }
    const auto& rec = *results[i].value;
    passed += rec.passed ? 1 : 0;
    unscorable += rec.unscorable ? 1 : 0;
    out.write(judge::to_json(rec));
  }
  out.flush();

  json summary = {{"scored", out.count()},
                  {"passed", passed},
                  {"unscorable", unscorable},
                  {"failed", failed},
                  {"simulation_only", simulation_only}};
  json manifest = base_manifest(rt, "score");
  manifest["judge"] = cfg.endpoint(roles::kJudge).describe();
  manifest["split"] = corpus::to_string(cfg.synthesis_split);
  manifest["counts"] = summary;
  write_manifest(rt, "score", manifest);
  return summary;
}

json run_filter(Runtime& rt) {
  require_file(rt.layout().scores(), "score");
  std::vector<judge::QualityRecord> records;
  std::size_t corrected = 0;
  jsonl::for_each(rt.layout().scores(), [&](const json& j, std::size_t line) {
    try {
      auto rec = judge::quality_record_from_json(j);
      const bool derived = rec.derive_passed();
      if (derived != rec.passed) {
        spdlog::warn("{}: stored passed flag disagrees with its scores; using scores", rec.doc_id);
        rec.passed = derived;
        ++corrected;
      }
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      spdlog::warn("scores line {} invalid: {}", line, e.what());
    }
  });
  const auto ids = judge::filter_corpus(records);
  std::vector<json> lines;
  for (const auto& id : ids) lines.push_back({{"doc_id", id}});
  jsonl::write_all(rt.layout().filtered(), lines);

  json summary = {{"records", records.size()}, {"kept", ids.size()}, {"corrected", corrected}};
  json manifest = base_manifest(rt, "filter");
  manifest["rule"] = "accessibility > 3 and (scientific + societal) / 2 > 2";
  manifest["counts"] = summary;
  write_manifest(rt, "filter", manifest);
  return summary;
}

json run_synthesize(Runtime& rt) {
  const auto& cfg = rt.config();
  const auto corpus = load_corpus(rt);
  require_file(rt.layout().filtered(), "filter");
  std::vector<const corpus::Document*> docs;
  for (const auto& j : jsonl::read_all(rt.layout().filtered())) {
    const auto* d = corpus.find(j.at("doc_id").get<std::string>());
    if (d == nullptr) {
      spdlog::warn("filtered id {} is not in the corpus", j.at("doc_id").dump());
    } else if (d->simulation_only()) {
      spdlog::warn("{} has no press release; not synthesized", d->id);
    } else {
      docs.push_back(d);
    }
  }

  auto oracle = rt.chat(roles::kOracle);
  std::vector<std::function<synthesis::Transcript()>> jobs;
  for (const auto* d : docs) {
    jobs.push_back([&, d] {
      return synthesis::synthesize_conversation(d->id, corpus::truncate(*d, cfg.token_budget),
                                                d->press_release, oracle, rt.prompts(),
                                                cfg.regenerations);
    });
  }
  std::atomic<std::size_t> done{0};
  auto results = llm::run_batch(jobs, cfg.parallelism,
                                [&](std::size_t) { progress(done, jobs.size(), "synthesize"); });
  const auto failed = count_failures(results, "synthesis");

  std::vector<synthesis::Transcript> transcripts;
  json skipped = json::array();
  jsonl::Writer out(rt.layout().transcripts());
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok()) {
      spdlog::warn("synthesis of {} skipped: {}", docs[i]->id, results[i].error);
      skipped.push_back({{"doc_id", docs[i]->id}, {"reason", results[i].error}});
      continue;
    }
    out.write(synthesis::to_json(*results[i].value));
    transcripts.push_back(std::move(*results[i].value));
  }
  out.flush();

  const auto stats = synthesis::summarize(transcripts);
  json summary = {{"documents", docs.size()},
                  {"transcripts", transcripts.size()},
                  {"skipped", failed},
                  {"stats", synthesis::to_json(stats)}};
  json manifest = base_manifest(rt, "synthesize");
  manifest["oracle"] = cfg.endpoint(roles::kOracle).describe();
  manifest["token_budget"] = cfg.token_budget;
  manifest["regenerations"] = cfg.regenerations;
  manifest["skipped"] = skipped;
  manifest["counts"] = summary;
  manifest["training"] = {{"sft", cfg.training.sft_json()}, {"dpo", cfg.training.dpo_json()}};
  write_manifest(rt, "synthesize", manifest);
  return summary;
}

json run_distill_sft(Runtime& rt) {
  const auto& cfg = rt.config();
  const auto corpus = load_corpus(rt);
  require_file(rt.layout().transcripts(), "synthesize");
  auto transcripts = read_transcripts(rt.layout().transcripts());
  std::erase_if(transcripts, [&](const synthesis::Transcript& t) {
    if (corpus.find(t.doc_id) != nullptr) return false;
    spdlog::warn("transcript {} has no corpus document; skipped", t.doc_id);
    return true;
  });

  const auto examples = synthesis::distill_sft(transcripts, [&](const std::string& id) {
    return synthesis::journalist_system_context(corpus::truncate(corpus.at(id), cfg.token_budget),
                                                rt.prompts());
  });
  std::vector<json> lines;
  lines.reserve(examples.size());
  for (const auto& ex : examples) lines.push_back(synthesis::to_sft_record(ex));
  jsonl::write_all(rt.layout().sft(), lines);

  std::size_t journalist_turns = 0;
  for (const auto& t : transcripts) journalist_turns += t.journalist_turn_count();
  json summary = {{"transcripts", transcripts.size()},
                  {"examples", examples.size()},
                  {"journalist_turns", journalist_turns}};
  json manifest = base_manifest(rt, "distill-sft");
  if (auto it = cfg.endpoints.find(roles::kOracle); it != cfg.endpoints.end()) {
    manifest["oracle"] = it->second.describe();
  }
  manifest["token_budget"] = cfg.token_budget;
  manifest["counts"] = summary;
  manifest["training"] = cfg.training.sft_json();
  write_manifest(rt, "distill-sft", manifest);
  return summary;
}

json run_gen_prefs(Runtime& rt) {
  const auto& cfg = rt.config();
  const auto corpus = load_corpus(rt);
  require_file(rt.layout().transcripts(), "synthesize");
  const auto transcripts = read_transcripts(rt.layout().transcripts());
  auto samples = synthesis::sample_answers(transcripts, cfg.preference_samples, cfg.seed);
  std::erase_if(samples, [&](const synthesis::AnswerSample& s) {
    return corpus.find(s.doc_id) == nullptr;
  });

  auto judge_model = rt.chat(roles::kJudge);
  judge::Judge judge(judge_model, rt.prompts());
  auto sft_model = rt.chat(roles::kSft);

  std::vector<std::function<synthesis::PreferenceOutcome()>> jobs;
  for (const auto& s : samples) {
    jobs.push_back([&, s] {
      return synthesis::generate_preference_pair(
          s.doc_id, corpus::truncate(corpus.at(s.doc_id), cfg.token_budget), s.history, judge,
          sft_model, rt.prompts());
    });
  }
  std::atomic<std::size_t> done{0};
  auto results = llm::run_batch(jobs, cfg.parallelism,
                                [&](std::size_t) { progress(done, jobs.size(), "gen-prefs"); });
  const auto failed = count_failures(results, "preference");

  jsonl::Writer pairs(rt.layout().preferences());
  jsonl::Writer log(rt.layout().preference_log());
  std::map<std::string, std::size_t> branches;
  std::map<std::string, std::size_t> skips;
  for (std::size_t i = 0; i < results.size(); ++i) {
    json entry = {{"doc_id", samples[i].doc_id}, {"turn_index", samples[i].turn_index}};
    if (!results[i].ok()) {
      entry["skip_reason"] = "error: " + results[i].error;
      ++skips["error"];
      log.write(entry);
      continue;
    }
    const auto& outcome = *results[i].value;
    entry["assessment"] = judge::to_json(outcome.assessment);
    if (outcome.pair) {
      const auto branch = std::string(synthesis::to_string(outcome.pair->branch));
      entry["branch"] = branch;
      ++branches[branch];
      pairs.write(synthesis::to_dpo_record(*outcome.pair));
    } else {
      entry["skip_reason"] = outcome.skip_reason;
      ++skips[outcome.skip_reason];
    }
    log.write(entry);
  }
  pairs.flush();
  log.flush();

  json summary = {{"sampled", samples.size()},
                  {"pairs", pairs.count()},
                  {"failed", failed},
                  {"branches", branches},
                  {"skipped", skips}};
  json manifest = base_manifest(rt, "gen-prefs");
  manifest["judge"] = cfg.endpoint(roles::kJudge).describe();
  manifest["sft"] = cfg.endpoint(roles::kSft).describe();
  manifest["samples_requested"] = cfg.preference_samples;
  manifest["counts"] = summary;
  manifest["training"] = cfg.training.dpo_json();
  write_manifest(rt, "gen-prefs", manifest);
  return summary;
}

json run_simulate(Runtime& rt, const std::optional<std::string>& system) {
  const auto& cfg = rt.config();
  const auto corpus = load_corpus(rt);
  std::vector<SystemConfig> systems;
  if (system) {
    systems.push_back(cfg.system(*system));
  } else {
    systems = cfg.systems;
  }
  if (systems.empty()) throw ConfigurationError("no [[systems]] configured to simulate");

  const auto docs = simulator::sample_documents(corpus.by_split(cfg.simulate_split),
                                                cfg.simulate_documents, cfg.seed);
  if (docs.empty()) {
    throw CorpusError(std::string("no documents in the ") +
                      std::string(corpus::to_string(cfg.simulate_split)) + " split");
  }
  auto researcher = rt.chat(roles::kResearcher);

  json summary = json::object();
  for (const auto& sys : systems) {
    simulator::SimulationSpec spec;
    spec.system_name = sys.name;
    spec.journalist = sys.endpoint;
    spec.variant = sys.variant;
    spec.researcher = researcher.config();
    spec.rounds = cfg.rounds;
    spec.token_budget = cfg.token_budget;
    spec.seed = cfg.seed;
    spec.validate();
    llm::EndpointChatModel journalist(rt.gateway(), sys.endpoint);
    spdlog::info("simulating {} conversations with system {}", docs.size(), sys.name);
    auto result = simulator::simulate_suite(docs, spec, journalist, researcher, cfg.parallelism,
                                            rt.prompts());
    if (result.transcripts.empty()) {
      throw EndpointUnavailable("every simulation for system " + sys.name + " failed");
    }
    std::vector<json> lines;
    for (const auto& t : result.transcripts) lines.push_back(synthesis::to_json(t));
    const auto path = rt.layout().simulations(sys.name);
    fs::create_directories(path.parent_path());
    jsonl::write_all(path, lines);

    json manifest = base_manifest(rt, "simulate");
    manifest["suite"] = result.manifest;
    manifest["split"] = corpus::to_string(cfg.simulate_split);
    jsonl::write_text_atomic(path.parent_path() / (file_stem(sys.name) + ".manifest.json"),
                             manifest.dump(2) + "\n");
    summary[sys.name] = {{"transcripts", result.transcripts.size()},
                         {"skipped", result.skipped},
                         {"output", path.string()}};
  }
  return summary;
}

namespace {

struct Evaluated {
  metrics::AspectExtractions extractions;
  metrics::ConversationScores scores;
};

json evaluate_target(Runtime& rt, const EvaluateTarget& target, judge::Judge& judge,
                     llm::EmbeddingProvider& embedder,
                     std::map<std::string, synthesis::Transcript>& seen) {
  const auto& cfg = rt.config();
  require_file(target.transcripts, "simulate");
  const auto transcripts = read_transcripts(target.transcripts);
  if (transcripts.empty()) throw ValidationError(target.transcripts.string() + " has no transcripts");
  for (const auto& t : transcripts) seen.emplace(t.doc_id, t);

  std::vector<std::function<Evaluated()>> jobs;
  for (const auto& t : transcripts) {
    jobs.push_back([&, t] {
      Evaluated e;
      e.extractions.societal = judge.extract_questions(t, judge::Aspect::kSocietal);
      e.extractions.scientific = judge.extract_questions(t, judge::Aspect::kScientific);
      e.extractions.accessibility = judge.extract_questions(t, judge::Aspect::kAccessibility);
      e.scores = metrics::score_conversation(t, e.extractions, embedder, cfg.scoring);
      return e;
    });
  }
  std::atomic<std::size_t> done{0};
  auto results = llm::run_batch(jobs, cfg.parallelism, [&](std::size_t) {
    progress(done, jobs.size(), "evaluate");
  });
  const auto failed = count_failures(results, "evaluation");

  const auto dir = rt.layout().evaluation_dir();
  fs::create_directories(dir);
  const auto stem = file_stem(target.name);
  jsonl::Writer scores_out(dir / (stem + ".scores.jsonl"));
  jsonl::Writer extractions_out(dir / (stem + ".extractions.jsonl"));
  std::vector<metrics::ConversationScores> scores;
  std::size_t extraction_failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok()) {
      spdlog::warn("evaluation of {} failed: {}", transcripts[i].doc_id, results[i].error);
      continue;
    }
    const auto& e = *results[i].value;
    for (const auto* x : {&e.extractions.societal, &e.extractions.scientific,
                          &e.extractions.accessibility}) {
      extraction_failures += x->failed ? 1 : 0;
    }
    json ex = metrics::to_json(e.extractions);
    ex["doc_id"] = transcripts[i].doc_id;
    extractions_out.write(ex);
    scores_out.write(metrics::to_json(e.scores));
    scores.push_back(e.scores);
  }
  scores_out.flush();
  extractions_out.flush();

  const auto report = metrics::aggregate(target.name, scores, cfg.averaging);
  jsonl::write_text_atomic(dir / (stem + ".report.json"), metrics::to_json(report).dump(2) + "\n");

  json manifest = base_manifest(rt, "evaluate");
  manifest["system"] = target.name;
  manifest["transcripts"] = target.transcripts.string();
  manifest["judge"] = cfg.endpoint(roles::kJudge).describe();
  manifest["embed"] = cfg.endpoint(roles::kEmbed).describe();
  manifest["match_threshold"] = cfg.scoring.match_threshold;
  manifest["redundancy"] = metrics::to_string(cfg.scoring.redundancy);
  manifest["averaging"] = metrics::to_string(cfg.averaging);
  manifest["counts"] = {{"conversations", transcripts.size()},
                        {"scored", scores.size()},
                        {"failed", failed},
                        {"extraction_failures", extraction_failures}};
  jsonl::write_text_atomic(dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");
  return metrics::to_json(report);
}

json overlap_stats(Runtime& rt, const fs::path& summaries,
                   std::map<std::string, synthesis::Transcript>& interactions) {
  if (rt.config().interactions) {
    for (auto& t : read_transcripts(*rt.config().interactions)) interactions[t.doc_id] = std::move(t);
  }
  std::vector<json> lines;
  std::size_t missing = 0;
  jsonl::for_each(summaries, [&](const json& j, std::size_t line) {
    const auto id = j.value("doc_id", j.value("session_id", std::string{}));
    const auto summary = j.value("summary", std::string{});
    auto it = interactions.find(id);
    if (id.empty() || it == interactions.end()) {
      spdlog::warn("{}:{}: no interaction for summary '{}'", summaries.string(), line, id);
      ++missing;
      return;
    }
    json rec = metrics::to_json(metrics::overlap(summary, it->second));
    rec["doc_id"] = id;
    lines.push_back(std::move(rec));
  });
  const auto path = rt.layout().evaluation_dir() / "overlap.jsonl";
  fs::create_directories(path.parent_path());
  jsonl::write_all(path, lines);
  return {{"pairs", lines.size()}, {"missing", missing}, {"output", path.string()}};
}

}  // namespace

json run_evaluate(Runtime& rt, const std::optional<std::string>& system,
                  const std::optional<EvaluateTarget>& external) {
  const auto& cfg = rt.config();
  std::vector<EvaluateTarget> targets;
  if (external) {
    targets.push_back(*external);
  } else if (system) {
    targets.push_back({cfg.system(*system).name, rt.layout().simulations(*system)});
  } else {
    for (const auto& s : cfg.systems) {
      const auto path = rt.layout().simulations(s.name);
      if (fs::exists(path)) {
        targets.push_back({s.name, path});
      } else {
        spdlog::warn("no simulations for system {}; not evaluated", s.name);
      }
    }
  }
  if (targets.empty()) throw ValidationError("nothing to evaluate; run 'simulate' first");

  auto judge_model = rt.chat(roles::kJudge);
  judge::Judge judge(judge_model, rt.prompts());
  auto embedder = rt.embedder();
  std::map<std::string, synthesis::Transcript> seen;

  json summary = json::object();
  for (const auto& target : targets) {
    summary[target.name] = evaluate_target(rt, target, judge, embedder, seen);
  }
  if (cfg.summaries) summary["overlap"] = overlap_stats(rt, *cfg.summaries, seen);
  return summary;
}

json run_report(Runtime& rt) {
  const auto& cfg = rt.config();
  const auto dir = rt.layout().evaluation_dir();
  if (!fs::exists(dir)) throw IoError(dir.string() + " does not exist; run 'evaluate' first");

  std::map<std::string, metrics::MetricReport> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    const std::string suffix = ".report.json";
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    auto report = metrics::metric_report_from_json(json::parse(jsonl::read_text(entry.path())));
    found.emplace(report.system_name, std::move(report));
  }
  if (found.empty()) throw IoError("no evaluation reports in " + dir.string());

  std::vector<metrics::MetricReport> ordered;
  for (const auto& s : cfg.systems) {
    auto it = found.find(s.name);
    if (it != found.end()) {
      ordered.push_back(it->second);
      found.erase(it);
    }
  }
  for (auto& [_, r] : found) ordered.push_back(std::move(r));

  json reports = json::array();
  for (const auto& r : ordered) reports.push_back(metrics::to_json(r));
  const auto table = metrics::format_table(ordered);
  jsonl::write_text_atomic(rt.layout().report_json(), reports.dump(2) + "\n");
  jsonl::write_text_atomic(rt.layout().report_txt(), table);
  return {{"reports", reports}, {"table", table}};
}

void run_serve(Runtime& rt, const std::function<void(int)>& on_listening) {
  const auto& cfg = rt.config();
  std::vector<serving::SystemEntry> entries;
  for (const auto& s : cfg.systems) {
    s.endpoint.validate();
    entries.push_back({s.name, s.endpoint, s.variant});
  }
  if (entries.empty()) spdlog::warn("no [[systems]] configured; sessions cannot be created");
  serving::SystemRegistry registry(std::move(entries));

  auto& gateway = rt.gateway();
  serving::ModelFactory factory = [&gateway](const serving::SystemEntry& e) {
    return std::make_shared<llm::EndpointChatModel>(gateway, e.endpoint);
  };
  serving::ServiceOptions options;
  options.data_dir = cfg.serve.data_dir;
  options.token_budget = cfg.token_budget;
  options.idle_timeout = std::chrono::milliseconds(
      static_cast<std::int64_t>(cfg.serve.idle_timeout_minutes * 60'000.0));
  serving::SessionService service(registry, factory, options, rt.prompts());
  serving::HttpServer server(service, {cfg.serve.host, cfg.serve.port, cfg.serve.static_dir, "*"});

  // Signals are taken synchronously by a dedicated thread; every other
  // thread (including the server's pool) inherits the blocked mask.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::atomic<bool> stopping{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    if (!stopping.exchange(true)) spdlog::info("signal {} received, shutting down", sig);
    server.stop();
  });

  try {
    const int port = server.bind();
    spdlog::info("serving on http://{}:{} ({} systems, data in {})", cfg.serve.host, port,
                 registry.names().size(), cfg.serve.data_dir.string());
    if (on_listening) on_listening(port);
    server.listen_after_bind();
  } catch (...) {
    stopping = true;
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    throw;
  }
  if (!stopping.exchange(true)) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
}

}  // namespace jf::pipeline
