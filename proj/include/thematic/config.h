#pragma once

// Pipeline configuration. One YAML file covers every stage; command-line
// flags override the file and the file overrides the built-in defaults.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thematic/corpus.h"
#include "thematic/excerpt.h"
#include "thematic/theme_map.h"
#include "thematic/topic_model.h"
#include "thematic/wheel.h"

namespace thematic {

inline constexpr std::size_t kMaxServedPapers = 10000;

struct ServeConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string bundle_path;
  std::string model_path;
  std::string layout_path;  // optional; the map is computed when empty
  std::string session_path;
  std::vector<std::string> cors_allowlist;
  ExcerptOptions excerpt;  // excerpt.map also drives the full map when no layout is given
  std::size_t top_papers = kDefaultTopPapers;
  std::size_t max_papers = kMaxServedPapers;
};

struct PipelineConfig {
  std::string corpus_source;
  CorpusFormat corpus_format = CorpusFormat::kManifest;
  IngestOptions ingest;
  LdaOptions train;
  MapOptions map;
  ServeConfig serve;
};

/// Reads a YAML config. Relative paths are resolved against the file's
/// directory. Unknown keys are rejected. Throws Error(kInvalidArgument) on
/// invalid values and Error(kIoError) if the file cannot be read.
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies THEMATIC_BIND, THEMATIC_PORT, THEMATIC_BUNDLE, THEMATIC_MODEL,
/// THEMATIC_LAYOUT and THEMATIC_SESSIONS. `getenv` is injectable for tests.
void apply_env_overrides(ServeConfig& serve,
                         const std::function<const char*(const char*)>& getenv = nullptr);

/// Parses "auto" / "largest_gap", a positive integer count, or
/// "height:<h>".
ClusterTarget parse_cluster_target(const std::string& text);

}  // namespace thematic
