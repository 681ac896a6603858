#include "thematic/pipeline.h"

namespace thematic {

namespace {

void emit(const ProgressSink& progress, nlohmann::json event) {
  if (progress) progress(event);
}

}  // namespace

CorpusBundle ingest_stage(const std::string& source, CorpusFormat format, const IngestOptions& options) {
  return ingest(load_corpus(source, format), options);
}

TopicModel train_stage(const CorpusBundle& bundle, const LdaOptions& options, const ProgressSink& progress) {
  const std::size_t every = std::max<std::size_t>(1, options.iterations / 20);
  return train_lda(bundle, options, [&](const SweepStats& s) {
    if (progress && (s.sweep % every == 0 || s.sweep == options.iterations))
      progress({{"event", "progress"},
                {"stage", "train"},
                {"sweep", s.sweep},
                {"of", options.iterations},
                {"log_likelihood", s.log_likelihood}});
  });
}

ThemeMap map_stage(const TopicModel& model, const CorpusBundle& bundle, const MapOptions& options) {
  if (model.vocabulary_hash() != bundle.vocabulary.hash())
    throw Error(ErrorCode::kDataError, "vocabulary_mismatch",
                "model was trained on a different vocabulary than the given corpus bundle");
  return build_theme_map(model, bundle.vocabulary, options, {}, Palette::kOverview, model_hash(model));
}

void run_pipeline(const PipelineConfig& config, const ArtifactPaths& out, const ProgressSink& progress) {
  CorpusBundle bundle = ingest_stage(config.corpus_source, config.corpus_format, config.ingest);
  save_bundle(bundle, out.bundle);
  emit(progress, {{"event", "done"}, {"stage", "ingest"}, {"documents", bundle.documents.size()},
                  {"excluded", bundle.excluded.size()}, {"chunks", bundle.total_chunks()},
                  {"vocabulary", bundle.vocabulary.size()}, {"path", out.bundle}});

  TopicModel model = train_stage(bundle, config.train, progress);
  save_model(model, out.model);
  emit(progress, {{"event", "done"}, {"stage", "train"}, {"topics", model.topic_count()}, {"path", out.model}});

  ThemeMap map = map_stage(model, bundle, config.map);
  save_layout(map, out.layout);
  emit(progress, {{"event", "done"}, {"stage", "map"}, {"clusters", map.tree.cluster_count},
                  {"path", out.layout}});
}

}  // namespace thematic
