#pragma once

// The ingest -> train -> map stages as library calls, shared by the CLI and
// the end-to-end tests.

#include <functional>
#include <string>

#include <json.hpp>

#include "thematic/config.h"

namespace thematic {

/// Receives one JSON object per progress event.
using ProgressSink = std::function<void(const nlohmann::json&)>;

CorpusBundle ingest_stage(const std::string& source, CorpusFormat format, const IngestOptions& options);

TopicModel train_stage(const CorpusBundle& bundle, const LdaOptions& options,
                       const ProgressSink& progress = {});

/// Full thematic map of a trained model, stamped with the model's hash.
ThemeMap map_stage(const TopicModel& model, const CorpusBundle& bundle, const MapOptions& options);

struct ArtifactPaths {
  std::string bundle;
  std::string model;
  std::string layout;
};

/// Runs every stage and writes the three artifacts.
void run_pipeline(const PipelineConfig& config, const ArtifactPaths& out,
                  const ProgressSink& progress = {});

}  // namespace thematic
