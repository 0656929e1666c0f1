#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "fakes.hpp"

namespace jf::testing {

/// Three documents: two training papers with press releases and one test
/// paper, enough to exercise every pipeline stage.
inline void write_smoke_corpus(const std::filesystem::path& path) {
  using nlohmann::json;
  const json docs[] = {
      {{"id", "paper-1"},
       {"title", "Masks and aerosols"},
       {"paper_text",
        "We measured the filtration efficiency of cloth masks for particles between 0.3 and 10 "
        "micrometres using an aerosol spectrometer in a sealed chamber."},
       {"press_release", "Cloth masks stop most large particles, a new study finds."},
       {"domain", "physics"},
       {"split", "train"}},
      {{"id", "paper-2"},
       {"title", "Soot on snow"},
       {"paper_text", "Black carbon deposited on Arctic snow lowers albedo and speeds melting."},
       {"press_release", "Soot from ships is darkening Arctic snow, researchers say."},
       {"domain", "climate"},
       {"split", "train"}},
      {{"id", "paper-3"},
       {"title", "Sleep and memory"},
       {"paper_text", "Participants who slept after learning recalled 20 percent more word pairs."},
       {"press_release", "A good night's sleep helps you remember, scientists report."},
       {"domain", "neuroscience"},
       {"split", "test"}},
  };
  std::string out;
  for (const auto& d : docs) out += d.dump() + "\n";
  write_file(path, out);
}

/// Config with every role pointed at `base_url` and two journalist systems.
inline std::string smoke_config(const std::string& base_url, const std::filesystem::path& corpus,
                                const std::filesystem::path& workdir) {
  std::string endpoints;
  for (const char* role : {"judge", "oracle", "sft", "researcher", "embed"}) {
    endpoints += std::string("[endpoints.") + role + "]\nbase_url = \"" + base_url +
                 "\"\nmodel = \"mock-" + role +
                 "\"\nmax_retries = 1\nbackoff_base_ms = 1\ntimeout_s = 10\n\n";
  }
  return "[run]\nworkdir = \"" + workdir.string() +
         "\"\nseed = 7\nparallelism = 2\n\n"
         "[corpus]\ninput = \"" +
         corpus.string() +
         "\"\ntoken_budget = 200\n\n" + endpoints +
         "[preferences]\nsamples = 4\n\n"
         "[simulate]\nrounds = 3\ndocuments = 5\nsplit = \"test\"\n\n"
         "[[systems]]\nname = \"Simple baseline\"\nendpoint = \"sft\"\nvariant = \"simple\"\n\n"
         "[[systems]]\nname = \"Advanced baseline\"\nendpoint = \"sft\"\nvariant = \"advanced\"\n";
}

}  // namespace jf::testing
