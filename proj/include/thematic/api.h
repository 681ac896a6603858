#pragma once

// HTTP API over a loaded corpus bundle, model and thematic map. All routes
// live under /v1. ExplorerService is transport independent; HttpServer binds
// it to cpp-httplib.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thematic/config.h"
#include "thematic/corpus.h"
#include "thematic/excerpt.h"
#include "thematic/session.h"
#include "thematic/theme_map.h"
#include "thematic/topic_model.h"

namespace thematic {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// HTTP status for an error code.
int http_status(ErrorCode code);

class ExplorerService {
 public:
  /// Loads the artifacts named in `config` and checks that they belong
  /// together: the model's vocabulary and corpus hashes must match the
  /// bundle, and a layout artifact must reproduce byte for byte.
  explicit ExplorerService(const ServeConfig& config);
  ExplorerService(CorpusBundle bundle, TopicModel model, const ServeConfig& config,
                  std::optional<std::string> layout_bytes = std::nullopt);

  ApiResponse handle(const ApiRequest& request);

  /// Shareable session document: selection, excerpt map, wheels, strategy.
  nlohmann::json session_report(std::string_view session_id);

  const CorpusBundle& bundle() const { return bundle_; }
  const TopicModel& model() const { return model_; }
  const ThemeMap& theme_map() const { return map_; }
  const std::string& layout_bytes() const { return layout_bytes_; }
  const std::string& model_hash() const { return model_hash_; }
  SessionStore& sessions() { return *sessions_; }

 private:
  struct CachedExcerpt {
    std::string selection_id;
    nlohmann::json excerpt;
    std::vector<nlohmann::json> wheels;  // per selected paper, excerpt colors
  };

  ApiResponse route(const ApiRequest& request);
  bool revealed_for(const ApiRequest& request) const;
  /// The only place paper records are serialized; titles appear iff `reveal`.
  nlohmann::json paper_view(std::size_t doc_index, bool reveal) const;
  nlohmann::json session_payload(const Session& session) const;
  nlohmann::json theme_detail(std::size_t theme_id, bool reveal) const;
  nlohmann::json paper_detail(std::size_t doc_index, bool reveal) const;
  nlohmann::json wheel_payload(std::size_t doc_index, const ApiRequest& request) const;
  std::shared_ptr<const CachedExcerpt> excerpt_for(const Session& session);
  nlohmann::json excerpt_payload(const Session& session);

  ServeConfig config_;
  CorpusBundle bundle_;
  TopicModel model_;
  std::string model_hash_;
  ThemeMap map_;
  std::string layout_bytes_;
  std::vector<std::string> theme_colors_;  // overview color per theme id
  std::unique_ptr<SessionStore> sessions_;
  std::mutex cache_mutex_;
  std::map<std::string, std::shared_ptr<const CachedExcerpt>, std::less<>> excerpt_cache_;
};

class HttpServer {
 public:
  HttpServer(ExplorerService& service, std::vector<std::string> cors_allowlist);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  void listen();
  /// listen() on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace thematic
