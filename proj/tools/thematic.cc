// thematic: ingest -> train -> map -> serve -> export.
//
// Parameters come from built-in defaults, then the --config file, then
// command-line flags. Exit status: 0 ok, 1 usage, 2 data error, 3 internal.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "thematic/api.h"
#include "thematic/config.h"
#include "thematic/error.h"
#include "thematic/pipeline.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace thematic;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct Globals {
  std::string config_path;
  bool json_progress = false;
};

Globals g;
HttpServer* g_server = nullptr;

PipelineConfig base_config() {
  if (g.config_path.empty()) return PipelineConfig{};
  return load_config(g.config_path);
}

void report(const json& event) {
  if (g.json_progress) {
    std::cout << event.dump() << std::endl;
    return;
  }
  const std::string stage = event.value("stage", "");
  if (event.value("event", "") == "progress") {
    std::cerr << stage << ": sweep " << event["sweep"] << "/" << event["of"]
              << "  log p(w,z) = " << event["log_likelihood"].get<double>() << "\n";
  } else if (event.contains("path")) {
    std::cerr << stage << ": wrote " << event["path"].get<std::string>() << "\n";
  }
}

// Copies a flag into `target` only when it was given on the command line.
template <class T>
void override_with(const CLI::Option* opt, const T& value, T& target) {
  if (opt->count() > 0) target = value;
}

// Output directories are created on demand; the session store is not.
const std::string& with_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  return path;
}

std::string require(const std::string& value, const char* what) {
  if (value.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("missing ") + what);
  return value;
}

// Options shared by `ingest` and `run`.
struct IngestFlags {
  std::string source, format;
  std::size_t chunks = 0, min_df = 0;
  double max_df = 0;
  CLI::Option *o_source, *o_format, *o_chunks, *o_min_df, *o_max_df;

  void add(CLI::App* app) {
    o_source = app->add_option("--manifest,--source", source, "Corpus manifest (JSON lines) or directory");
    o_format = app->add_option("--format", format, "manifest | directory")->check(CLI::IsMember({"manifest", "directory"}));
    o_chunks = app->add_option("--chunks", chunks, "Chunks per paper")->check(CLI::PositiveNumber);
    o_min_df = app->add_option("--min-df", min_df, "Minimum document frequency");
    o_max_df = app->add_option("--max-df", max_df, "Maximum document frequency fraction")->check(CLI::Range(0.0, 1.0));
  }
  void apply(PipelineConfig& cfg) const {
    override_with(o_source, source, cfg.corpus_source);
    if (o_format->count()) cfg.corpus_format = parse_corpus_format(format);
    override_with(o_chunks, chunks, cfg.ingest.chunk_count);
    override_with(o_min_df, min_df, cfg.ingest.vocabulary.min_df);
    override_with(o_max_df, max_df, cfg.ingest.vocabulary.max_df_fraction);
  }
};

struct TrainFlags {
  std::size_t topics = 0, iters = 0;
  std::uint64_t seed = 0;
  double alpha = 0, beta = 0;
  CLI::Option *o_topics, *o_iters, *o_seed, *o_alpha, *o_beta;

  void add(CLI::App* app) {
    o_topics = app->add_option("--topics", topics, "Number of themes K");
    o_iters = app->add_option("--iters", iters, "Gibbs sweeps");
    o_seed = app->add_option("--seed", seed, "Sampler seed");
    o_alpha = app->add_option("--alpha", alpha, "Symmetric document-theme prior (default 50/K)");
    o_beta = app->add_option("--beta", beta, "Symmetric theme-word prior");
  }
  void apply(PipelineConfig& cfg) const {
    override_with(o_topics, topics, cfg.train.topics);
    override_with(o_iters, iters, cfg.train.iterations);
    override_with(o_seed, seed, cfg.train.seed);
    if (o_alpha->count()) cfg.train.alpha = alpha;
    override_with(o_beta, beta, cfg.train.beta);
  }
};

struct MapFlags {
  double tau = 0;
  std::string clusters;
  std::size_t top_terms = 0;
  CLI::Option *o_tau, *o_clusters, *o_top_terms;

  void add(CLI::App* app) {
    o_tau = app->add_option("--tau", tau, "Presence threshold for theme co-occurrence");
    o_clusters = app->add_option("--clusters", clusters, "auto | <count> | height:<h>");
    o_top_terms = app->add_option("--top-terms", top_terms, "Top terms stored per theme");
  }
  void apply(PipelineConfig& cfg) const {
    override_with(o_tau, tau, cfg.map.presence_threshold);
    if (o_clusters->count()) cfg.map.clusters = parse_cluster_target(clusters);
    override_with(o_top_terms, top_terms, cfg.map.top_terms);
  }
};

int run_ingest(const IngestFlags& flags, const std::string& out) {
  PipelineConfig cfg = base_config();
  flags.apply(cfg);
  const std::string path = out.empty() ? require(cfg.serve.bundle_path, "--out") : out;
  CorpusBundle bundle = ingest_stage(require(cfg.corpus_source, "--manifest"), cfg.corpus_format, cfg.ingest);
  save_bundle(bundle, with_parent(path));
  report({{"event", "done"}, {"stage", "ingest"}, {"documents", bundle.documents.size()},
          {"excluded", bundle.excluded.size()}, {"chunks", bundle.total_chunks()},
          {"vocabulary", bundle.vocabulary.size()}, {"path", path}});
  for (const auto& ex : bundle.excluded)
    report({{"event", "excluded"}, {"stage", "ingest"}, {"doc_id", ex.doc_id}, {"reason", ex.reason},
            {"tokens", ex.token_count}});
  return kOk;
}

int run_train(const TrainFlags& flags, const std::string& corpus, const std::string& out) {
  PipelineConfig cfg = base_config();
  flags.apply(cfg);
  const std::string in = corpus.empty() ? require(cfg.serve.bundle_path, "--corpus") : corpus;
  const std::string path = out.empty() ? require(cfg.serve.model_path, "--out") : out;
  CorpusBundle bundle = load_bundle(in);
  TopicModel model = train_stage(bundle, cfg.train, report);
  save_model(model, with_parent(path));
  report({{"event", "done"}, {"stage", "train"}, {"topics", model.topic_count()},
          {"model_hash", model_hash(model)}, {"path", path}});
  return kOk;
}

int run_map(const MapFlags& flags, const std::string& model_in, const std::string& corpus,
            const std::string& out) {
  PipelineConfig cfg = base_config();
  flags.apply(cfg);
  const std::string mpath = model_in.empty() ? require(cfg.serve.model_path, "--model") : model_in;
  const std::string bpath = corpus.empty() ? require(cfg.serve.bundle_path, "--corpus") : corpus;
  const std::string path = out.empty() ? require(cfg.serve.layout_path, "--out") : out;
  TopicModel model = load_model(mpath);
  CorpusBundle bundle = load_bundle(bpath);
  ThemeMap map = map_stage(model, bundle, cfg.map);
  save_layout(map, with_parent(path));
  report({{"event", "done"}, {"stage", "map"}, {"clusters", map.tree.cluster_count}, {"path", path}});
  return kOk;
}

int run_all(const IngestFlags& i, const TrainFlags& t, const MapFlags& m, const std::string& out_dir) {
  PipelineConfig cfg = base_config();
  i.apply(cfg);
  t.apply(cfg);
  m.apply(cfg);
  require(cfg.corpus_source, "--manifest");
  ArtifactPaths paths{cfg.serve.bundle_path, cfg.serve.model_path, cfg.serve.layout_path};
  if (!out_dir.empty()) {
    paths = {(fs::path(out_dir) / "corpus.tmcb").string(), (fs::path(out_dir) / "model.tmlm").string(),
             (fs::path(out_dir) / "layout.json").string()};
  }
  require(paths.bundle, "--out-dir or serve.bundle");
  require(paths.model, "--out-dir or serve.model");
  require(paths.layout, "--out-dir or serve.layout");
  with_parent(paths.bundle);
  with_parent(paths.model);
  with_parent(paths.layout);
  run_pipeline(cfg, paths, report);
  return kOk;
}

ServeConfig serve_config(const std::string& sessions) {
  PipelineConfig cfg = base_config();
  apply_env_overrides(cfg.serve);
  if (!sessions.empty()) cfg.serve.session_path = sessions;
  return cfg.serve;
}

int run_serve(const std::string& bind, int port, bool port_given, bool bind_given) {
  ServeConfig sc = serve_config("");
  if (bind_given) sc.bind = bind;
  if (port_given) sc.port = port;
  ExplorerService service(sc);
  HttpServer server(service, sc.cors_allowlist);
  const int bound = server.bind(sc.bind, sc.port);
  report({{"event", "listening"}, {"stage", "serve"}, {"bind", sc.bind}, {"port", bound}});
  if (!g.json_progress) std::cerr << "serving on http://" << sc.bind << ":" << bound << "/v1\n";
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  server.listen();
  g_server = nullptr;
  return kOk;
}

int run_export(const std::string& session, const std::string& out, const std::string& sessions) {
  ExplorerService service(serve_config(sessions));
  const std::string doc = service.session_report(session).dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << doc;
  } else {
    std::ofstream f(out, std::ios::binary);
    f << doc;
    f.close();
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + out);
    report({{"event", "done"}, {"stage", "export"}, {"session", session}, {"path", out}});
  }
  return kOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return kUsage;
    case ErrorCode::kInternal: return kInternal;
    default: return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thematic explorer for a corpus of papers: LDA themes, hexagonal theme map, per-paper wheels."};
  app.require_subcommand(1);
  app.add_option("--config", g.config_path, "YAML config file")->check(CLI::ExistingFile);
  app.add_flag("--json", g.json_progress, "Machine-readable progress, one JSON object per line");

  // Separate flag sets per subcommand; each records its own CLI::Option handles.
  IngestFlags ingest_flags, run_ingest_flags;
  TrainFlags train_flags, run_train_flags;
  MapFlags map_flags, run_map_flags;
  std::string out, corpus, model, out_dir, session, sessions, export_out, bind;
  int port = 0;

  auto* ingest = app.add_subcommand("ingest", "Tokenize, filter and chunk a corpus into a bundle");
  ingest_flags.add(ingest);
  ingest->add_option("--out", out, "Bundle output path");

  auto* train = app.add_subcommand("train", "Fit the theme model on a corpus bundle");
  train->add_option("--corpus", corpus, "Corpus bundle");
  train_flags.add(train);
  train->add_option("--out", out, "Model output path");

  auto* map = app.add_subcommand("map", "Cluster themes and lay them out on the hexagonal map");
  map->add_option("--model", model, "Model artifact");
  map->add_option("--corpus", corpus, "Corpus bundle the model was trained on");
  map_flags.add(map);
  map->add_option("--out", out, "Layout output path");

  auto* run = app.add_subcommand("run", "ingest, train and map in one go");
  run_ingest_flags.add(run);
  run_train_flags.add(run);
  run_map_flags.add(run);
  run->add_option("--out-dir", out_dir, "Directory for corpus.tmcb, model.tmlm and layout.json");

  auto* serve = app.add_subcommand("serve", "Serve the /v1 API");
  auto* o_bind = serve->add_option("--bind", bind, "Listen address");
  auto* o_port = serve->add_option("--port", port, "Listen port (0 picks one)")->check(CLI::Range(0, 65535));

  auto* exp = app.add_subcommand("export", "Write a session report as one JSON document");
  exp->add_option("--session", session, "Session id")->required();
  exp->add_option("--out", export_out, "Output file, - for stdout")->default_val("-");
  exp->add_option("--sessions", sessions, "Session store (overrides serve.sessions)");

  // CLI11 parse errors exit 1 for usage problems; --help exits 0.
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest) return run_ingest(ingest_flags, out);
    if (*train) return run_train(train_flags, corpus, out);
    if (*map) return run_map(map_flags, model, corpus, out);
    if (*run) return run_all(run_ingest_flags, run_train_flags, run_map_flags, out_dir);
    if (*serve) return run_serve(bind, port, o_port->count() > 0, o_bind->count() > 0);
    if (*exp) return run_export(session, export_out, sessions);
  } catch (const Error& e) {
    if (g.json_progress)
      std::cout << json{{"event", "error"}, {"code", error_code_name(e.code())}, {"reason", e.reason()},
                        {"message", e.what()}}.dump()
                << std::endl;
    std::cerr << "thematic: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "thematic: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
