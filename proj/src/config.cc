#include "thematic/config.h"

#include <cstdlib>
#include <set>

#include <yaml-cpp/yaml.h>

namespace thematic {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, "invalid_config", "config key '" + key + "': " + why);
}

void check_keys(const YAML::Node& node, const std::string& section, std::set<std::string> allowed) {
  if (!node) return;
  if (!node.IsMap()) bad(section, "expected a mapping");
  for (const auto& kv : node) {
    auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) bad(section.empty() ? key : section + "." + key, "unknown key");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, const std::string& section, T& out) {
  if (!node || !node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    bad(section + "." + key, "wrong type");
  }
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  return path.is_absolute() ? path.string() : (base / path).lexically_normal().string();
}

}  // namespace

ClusterTarget parse_cluster_target(const std::string& text) {
  if (text == "auto" || text == "largest_gap") return ClusterTarget::largest_gap();
  if (text.rfind("height:", 0) == 0) {
    try {
      return ClusterTarget::cut_height(std::stod(text.substr(7)));
    } catch (const std::exception&) {
      bad("map.clusters", "bad cut height '" + text + "'");
    }
  }
  try {
    std::size_t used = 0;
    long n = std::stol(text, &used);
    if (used == text.size() && n >= 1) return ClusterTarget::clusters(static_cast<std::size_t>(n));
  } catch (const std::exception&) {
  }
  bad("map.clusters", "expected auto, a positive count or height:<h>, got '" + text + "'");
}

PipelineConfig load_config(const fs::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw Error(ErrorCode::kIoError, "cannot read config file: " + path.string());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "invalid_config", path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  PipelineConfig cfg;
  if (!root || root.IsNull()) return cfg;
  check_keys(root, "", {"corpus", "ingest", "train", "map", "serve"});

  const YAML::Node corpus = root["corpus"];
  check_keys(corpus, "corpus", {"source", "format"});
  read(corpus, "source", "corpus", cfg.corpus_source);
  cfg.corpus_source = resolve(base, cfg.corpus_source);
  std::string format = "manifest";
  read(corpus, "format", "corpus", format);
  cfg.corpus_format = parse_corpus_format(format);

  const YAML::Node ingest = root["ingest"];
  check_keys(ingest, "ingest", {"chunks", "min_token_length", "min_df", "max_df_fraction", "extra_stopwords"});
  read(ingest, "chunks", "ingest", cfg.ingest.chunk_count);
  read(ingest, "min_token_length", "ingest", cfg.ingest.tokenizer.min_length);
  read(ingest, "min_df", "ingest", cfg.ingest.vocabulary.min_df);
  read(ingest, "max_df_fraction", "ingest", cfg.ingest.vocabulary.max_df_fraction);
  std::vector<std::string> extra;
  read(ingest, "extra_stopwords", "ingest", extra);
  cfg.ingest.tokenizer.stopwords.insert(cfg.ingest.tokenizer.stopwords.end(), extra.begin(), extra.end());
  std::sort(cfg.ingest.tokenizer.stopwords.begin(), cfg.ingest.tokenizer.stopwords.end());
  cfg.ingest.tokenizer.stopwords.erase(
      std::unique(cfg.ingest.tokenizer.stopwords.begin(), cfg.ingest.tokenizer.stopwords.end()),
      cfg.ingest.tokenizer.stopwords.end());

  const YAML::Node train = root["train"];
  check_keys(train, "train", {"topics", "iterations", "seed", "alpha", "beta"});
  read(train, "topics", "train", cfg.train.topics);
  read(train, "iterations", "train", cfg.train.iterations);
  read(train, "seed", "train", cfg.train.seed);
  read(train, "beta", "train", cfg.train.beta);
  if (train && train["alpha"]) {
    std::string a = train["alpha"].as<std::string>();
    if (a != "auto") {
      double v = 0.0;
      read(train, "alpha", "train", v);
      cfg.train.alpha = v;
    }
  }

  const YAML::Node map = root["map"];
  check_keys(map, "map", {"presence_threshold", "clusters", "top_terms"});
  read(map, "presence_threshold", "map", cfg.map.presence_threshold);
  read(map, "top_terms", "map", cfg.map.top_terms);
  if (map && map["clusters"]) cfg.map.clusters = parse_cluster_target(map["clusters"].as<std::string>());

  const YAML::Node serve = root["serve"];
  check_keys(serve, "serve", {"bind", "port", "bundle", "model", "layout", "sessions", "cors_allowlist",
                              "inclusion_threshold", "max_selection", "top_papers"});
  auto& s = cfg.serve;
  read(serve, "bind", "serve", s.bind);
  read(serve, "port", "serve", s.port);
  read(serve, "bundle", "serve", s.bundle_path);
  read(serve, "model", "serve", s.model_path);
  read(serve, "layout", "serve", s.layout_path);
  read(serve, "sessions", "serve", s.session_path);
  read(serve, "cors_allowlist", "serve", s.cors_allowlist);
  read(serve, "inclusion_threshold", "serve", s.excerpt.inclusion_threshold);
  read(serve, "max_selection", "serve", s.excerpt.max_selection);
  read(serve, "top_papers", "serve", s.top_papers);
  s.bundle_path = resolve(base, s.bundle_path);
  s.model_path = resolve(base, s.model_path);
  s.layout_path = resolve(base, s.layout_path);
  s.session_path = resolve(base, s.session_path);
  s.excerpt.map = cfg.map;

  if (cfg.ingest.chunk_count < 1) bad("ingest.chunks", "must be >= 1");
  if (cfg.train.topics < 2) bad("train.topics", "must be >= 2");
  if (cfg.train.iterations < 1) bad("train.iterations", "must be >= 1");
  if (!(cfg.map.presence_threshold > 0.0 && cfg.map.presence_threshold < 1.0))
    bad("map.presence_threshold", "must be in (0, 1)");
  if (!(s.excerpt.inclusion_threshold > 0.0)) bad("serve.inclusion_threshold", "must be positive");
  if (s.excerpt.max_selection < 1) bad("serve.max_selection", "must be >= 1");
  if (s.port < 0 || s.port > 65535) bad("serve.port", "out of range");
  return cfg;
}

void apply_env_overrides(ServeConfig& serve, const std::function<const char*(const char*)>& getenv) {
  auto get = [&](const char* name) -> const char* {
    return getenv ? getenv(name) : std::getenv(name);
  };
  if (const char* v = get("THEMATIC_BIND")) serve.bind = v;
  if (const char* v = get("THEMATIC_PORT")) {
    try {
      serve.port = std::stoi(v);
    } catch (const std::exception&) {
      bad("THEMATIC_PORT", "not a number");
    }
  }
  if (const char* v = get("THEMATIC_BUNDLE")) serve.bundle_path = v;
  if (const char* v = get("THEMATIC_MODEL")) serve.model_path = v;
  if (const char* v = get("THEMATIC_LAYOUT")) serve.layout_path = v;
  if (const char* v = get("THEMATIC_SESSIONS")) serve.session_path = v;
}

}  // namespace thematic
