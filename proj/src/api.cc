#include "thematic/api.h"

#include <algorithm>
#include <numeric>
#include <thread>

#include <httplib.h>

#include "binary_io.h"
#include "thematic/hash.h"
#include "thematic/wheel.h"

namespace thematic {

using nlohmann::json;

namespace {

constexpr std::size_t kPaperTopThemes = 5;

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    std::size_t j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    parts.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

ApiResponse json_response(int status, const json& body) { return {status, body.dump()}; }

ApiResponse error_response(int status, const std::string& code, const std::string& reason,
                           const std::string& message) {
  return json_response(status, {{"error", {{"code", code}, {"reason", reason}, {"message", message}}}});
}

std::size_t parse_index(const std::string& text, const char* what) {
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text[0] == '-')
    throw Error(ErrorCode::kNotFound, std::string("unknown_") + what,
                std::string("invalid ") + what + " '" + text + "'");
  return v;
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, "malformed_body", std::string("request body: ") + e.what());
  }
}

std::vector<StrategyEntry> strategy_from_json(const json& body) {
  if (!body.is_object() || !body.contains("entries") || !body["entries"].is_array())
    throw Error(ErrorCode::kInvalidArgument, "malformed_body", "expected {\"entries\": [...]}");
  std::vector<StrategyEntry> entries;
  for (const auto& e : body["entries"]) {
    StrategyEntry entry;
    entry.doc_id = e.at("doc_id").get<std::string>();
    entry.rank = e.at("rank").get<std::uint32_t>();
    entry.note = e.value("note", "");
    if (e.contains("targets"))
      for (const auto& t : e["targets"])
        entry.targets.push_back({t.at("first").get<std::uint32_t>(), t.at("last").get<std::uint32_t>()});
    entries.push_back(std::move(entry));
  }
  return entries;
}

ServeConfig checked(const ServeConfig& config) {
  if (config.bundle_path.empty()) throw Error(ErrorCode::kInvalidArgument, "serve: no corpus bundle path");
  if (config.model_path.empty()) throw Error(ErrorCode::kInvalidArgument, "serve: no model path");
  if (config.session_path.empty()) throw Error(ErrorCode::kInvalidArgument, "serve: no session store path");
  return config;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kDataError: return 422;
    case ErrorCode::kIoError:
    case ErrorCode::kInternal: return 500;
  }
  return 500;
}

ExplorerService::ExplorerService(const ServeConfig& config)
    : ExplorerService(load_bundle(checked(config).bundle_path), load_model(config.model_path), config,
                      config.layout_path.empty() ? std::nullopt
                                                 : std::optional(io::read_file(config.layout_path))) {}

ExplorerService::ExplorerService(CorpusBundle bundle, TopicModel model, const ServeConfig& config,
                                 std::optional<std::string> layout_bytes)
    : config_(config), bundle_(std::move(bundle)), model_(std::move(model)) {
  if (bundle_.documents.empty())
    throw Error(ErrorCode::kDataError, "empty_corpus", "corpus bundle has no documents");
  if (bundle_.documents.size() > config_.max_papers)
    throw Error(ErrorCode::kInvalidArgument, "corpus_too_large",
                "corpus has " + std::to_string(bundle_.documents.size()) + " papers; the server limit is " +
                    std::to_string(config_.max_papers));
  if (model_.topic_count() == 0)
    throw Error(ErrorCode::kDataError, "empty_model", "model has no themes");
  if (model_.vocabulary_hash() != bundle_.vocabulary.hash())
    throw Error(ErrorCode::kDataError, "vocabulary_mismatch",
                "model vocabulary hash does not match the corpus bundle");
  if (model_.corpus_hash() != sha256_hex(serialize_bundle(bundle_)))
    throw Error(ErrorCode::kDataError, "corpus_mismatch", "model was trained on a different corpus bundle");
  model_hash_ = thematic::model_hash(model_);

  MapOptions map_options = config_.excerpt.map;
  if (layout_bytes) {
    LayoutHeader header = read_layout_header(*layout_bytes);
    if (header.model_hash != model_hash_)
      throw Error(ErrorCode::kDataError, "layout_mismatch", "layout artifact belongs to a different model");
    map_options = header.options;
  }
  map_ = build_theme_map(model_, bundle_.vocabulary, map_options, {}, Palette::kOverview, model_hash_);
  layout_bytes_ = serialize_layout(map_);
  if (layout_bytes && *layout_bytes != layout_bytes_)
    throw Error(ErrorCode::kDataError, "layout_mismatch",
                "layout artifact does not match the map recomputed from the model");
  theme_colors_ = map_.colors_by_theme(model_.topic_count());

  SessionPolicy policy;
  policy.max_selection = config_.excerpt.max_selection;
  policy.current = {config_.excerpt.inclusion_threshold, map_options.presence_threshold,
                    static_cast<std::uint32_t>(model_.chunks_per_document()),
                    static_cast<std::uint32_t>(model_.topic_count()), model_hash_};
  policy.is_modeled = [this](std::string_view id) { return model_.document_index(id).has_value(); };
  sessions_ = std::make_unique<SessionStore>(config_.session_path, std::move(policy));
}

ApiResponse ExplorerService::handle(const ApiRequest& request) {
  try {
    return route(request);
  } catch (const Error& e) {
    return error_response(http_status(e.code()), error_code_name(e.code()), e.reason(), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "invalid_argument", "malformed_body", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", "internal", e.what());
  }
}

bool ExplorerService::revealed_for(const ApiRequest& request) const {
  auto it = request.query.find("session");
  if (it == request.query.end()) return false;
  return sessions_->get(it->second).titles_revealed;
}

json ExplorerService::paper_view(std::size_t doc_index, bool reveal) const {
  const EncodedDocument& doc = bundle_.documents.at(doc_index);
  json meta = json::object();
  for (const auto& [k, v] : doc.metadata)
    if (reveal || v.find(doc.title) == std::string::npos) meta[k] = v;
  json view = {{"doc_id", doc.doc_id}, {"metadata", std::move(meta)}};
  if (reveal)
    view["title"] = doc.title;
  else
    view["title_hidden"] = true;
  return view;
}

json ExplorerService::session_payload(const Session& session) const {
  json j = session_to_json(session);
  j["read_only"] = sessions_->read_only(session);
  json papers = json::array();
  for (const auto& id : session.selection)
    if (auto d = model_.document_index(id)) papers.push_back(paper_view(*d, session.titles_revealed));
  j["papers"] = std::move(papers);
  return j;
}

json ExplorerService::theme_detail(std::size_t theme_id, bool reveal) const {
  model_.require_theme(theme_id);
  const Theme& words = map_.words[theme_id];
  json terms = json::array();
  for (const auto& tw : words.top_terms) terms.push_back({{"term", tw.term}, {"weight", tw.weight}});
  json papers = json::array();
  for (const auto& rel : rank_papers_for_theme(model_, theme_id, config_.top_papers)) {
    const std::size_t d = model_.require_document(rel.doc_id);
    papers.push_back({{"paper", paper_view(d, reveal)},
                      {"relevance_percent", rel.relevance_percent},
                      {"wheel", wheel_to_json(build_single_theme_wheel(model_, rel.doc_id, theme_id), false)}});
  }
  return {{"theme",
           {{"id", theme_id},
            {"label", words.auto_label},
            {"top_terms", std::move(terms)},
            {"cluster", map_.tree.cluster_of[theme_id]},
            {"color", map_.theme_color(theme_id)},
            {"q", map_.layout.cells[theme_id].q},
            {"r", map_.layout.cells[theme_id].r}}},
          {"papers", std::move(papers)}};
}

json ExplorerService::paper_detail(std::size_t doc_index, bool reveal) const {
  auto weights = model_.paper_weights(doc_index);
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t keep = std::min(kPaperTopThemes, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return weights[a] != weights[b] ? weights[a] > weights[b] : a < b;
                    });
  json themes = json::array();
  for (std::size_t i = 0; i < keep; ++i)
    themes.push_back({{"theme", order[i]}, {"weight", weights[order[i]]}, {"color", theme_colors_[order[i]]}});
  return {{"paper", paper_view(doc_index, reveal)}, {"top_themes", std::move(themes)}};
}

json ExplorerService::wheel_payload(std::size_t doc_index, const ApiRequest& request) const {
  const std::string& doc_id = model_.doc_ids()[doc_index];
  std::string variant = "multi";
  if (auto it = request.query.find("variant"); it != request.query.end()) variant = it->second;
  if (variant == "multi") return wheel_to_json(build_multi_theme_wheel(model_, doc_id, theme_colors_), true);
  if (variant == "single") {
    auto it = request.query.find("theme");
    if (it == request.query.end())
      throw Error(ErrorCode::kInvalidArgument, "missing_theme", "single-theme wheel needs ?theme=<id>");
    return wheel_to_json(build_single_theme_wheel(model_, doc_id, parse_index(it->second, "theme")), false);
  }
  throw Error(ErrorCode::kInvalidArgument, "invalid_variant", "variant must be multi or single");
}

std::shared_ptr<const ExplorerService::CachedExcerpt> ExplorerService::excerpt_for(const Session& session) {
  if (session.selection.empty())
    throw Error(ErrorCode::kConflict, "empty_selection", "session has no selected papers");
  const std::string sel_id = selection_id(session.selection);
  {
    std::lock_guard lock(cache_mutex_);
    auto it = excerpt_cache_.find(session.session_id);
    if (it != excerpt_cache_.end() && it->second->selection_id == sel_id) return it->second;
  }
  ExcerptOptions options = config_.excerpt;
  options.map.presence_threshold = map_.options.presence_threshold;
  ExcerptMap excerpt = excerpt_for_selection(model_, bundle_.vocabulary, session.selection, options, model_hash_);
  auto cached = std::make_shared<CachedExcerpt>();
  cached->selection_id = excerpt.selection_id;
  cached->excerpt = excerpt_map_to_json(excerpt);
  const auto colors = excerpt.map.colors_by_theme(model_.topic_count());
  for (const auto& id : session.selection)
    cached->wheels.push_back(wheel_to_json(build_multi_theme_wheel(model_, id, colors), true));
  std::lock_guard lock(cache_mutex_);
  excerpt_cache_[session.session_id] = cached;
  return cached;
}

json ExplorerService::excerpt_payload(const Session& session) {
  auto cached = excerpt_for(session);
  json papers = json::array();
  for (std::size_t i = 0; i < session.selection.size(); ++i) {
    const std::size_t d = model_.require_document(session.selection[i]);
    papers.push_back({{"paper", paper_view(d, session.titles_revealed)}, {"wheel", cached->wheels[i]}});
  }
  return {{"session_id", session.session_id}, {"excerpt", cached->excerpt}, {"papers", std::move(papers)}};
}

json ExplorerService::session_report(std::string_view session_id) {
  const Session session = sessions_->get(session_id);
  json report = {{"format", "thematic.session_report"}, {"version", 1}, {"model_hash", model_hash_},
                 {"session", session_payload(session)}};
  if (session.selection.empty()) {
    report["excerpt"] = nullptr;
    report["papers"] = json::array();
  } else {
    json payload = excerpt_payload(session);
    report["excerpt"] = std::move(payload["excerpt"]);
    report["papers"] = std::move(payload["papers"]);
  }
  std::vector<StrategyEntry> strategy = session.strategy;
  std::sort(strategy.begin(), strategy.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  json plan = json::array();
  for (const auto& e : strategy) {
    json targets = json::array();
    for (const auto& t : e.targets) targets.push_back({{"first", t.first}, {"last", t.last}});
    plan.push_back({{"rank", e.rank},
                    {"paper", paper_view(model_.require_document(e.doc_id), session.titles_revealed)},
                    {"note", e.note},
                    {"targets", std::move(targets)}});
  }
  report["reading_strategy"] = std::move(plan);
  return report;
}

ApiResponse ExplorerService::route(const ApiRequest& req) {
  const auto parts = split_path(req.path);
  const std::string& m = req.method;
  auto no_route = [&] {
    return error_response(404, "not_found", "no_route", "no route for " + m + " " + req.path);
  };
  if (parts.empty() || parts[0] != "v1") return no_route();
  const std::size_t n = parts.size();

  if (n >= 2 && parts[1] == "themes") {
    if (m != "GET") return error_response(405, "invalid_argument", "method_not_allowed", m + " not allowed");
    if (n == 2) return {200, layout_bytes_};
    if (n == 3) return json_response(200, theme_detail(parse_index(parts[2], "theme"), revealed_for(req)));
    return no_route();
  }

  if (n >= 3 && parts[1] == "papers") {
    if (m != "GET") return error_response(405, "invalid_argument", "method_not_allowed", m + " not allowed");
    const std::size_t d = model_.require_document(parts[2]);
    if (n == 3) return json_response(200, paper_detail(d, revealed_for(req)));
    if (n == 4 && parts[3] == "wheel") return json_response(200, wheel_payload(d, req));
    return no_route();
  }

  if (n >= 2 && parts[1] == "sessions") {
    if (n == 2) {
      if (m != "POST") return error_response(405, "invalid_argument", "method_not_allowed", m + " not allowed");
      return json_response(201, session_payload(sessions_->create()));
    }
    const std::string& id = parts[2];
    if (n == 3 && m == "GET") return json_response(200, session_payload(sessions_->get(id)));
    if (n == 4) {
      const std::string& action = parts[3];
      if (action == "selection" && m == "PUT") {
        json body = parse_body(req.body);
        if (!body.is_object() || !body.contains("doc_ids") || !body["doc_ids"].is_array())
          throw Error(ErrorCode::kInvalidArgument, "malformed_body", "expected {\"doc_ids\": [...]}");
        auto ids = body["doc_ids"].get<std::vector<std::string>>();
        return json_response(200, session_payload(sessions_->update_selection(id, std::move(ids))));
      }
      if (action == "strategy" && m == "PUT")
        return json_response(200, session_payload(sessions_->save_strategy(id, strategy_from_json(parse_body(req.body)))));
      if (action == "reveal" && m == "POST") return json_response(200, session_payload(sessions_->reveal_titles(id)));
      if (action == "excerpt-map" && m == "GET") return json_response(200, excerpt_payload(sessions_->get(id)));
      if (action == "export" && m == "GET") return json_response(200, session_report(id));
    }
    return no_route();
  }
  return no_route();
}

struct HttpServer::Impl {
  ExplorerService& service;
  std::vector<std::string> cors;
  httplib::Server server;
  std::thread thread;

  Impl(ExplorerService& s, std::vector<std::string> c) : service(s), cors(std::move(c)) {}

  void dispatch(const httplib::Request& hreq, httplib::Response& hres) {
    const std::string origin = hreq.get_header_value("Origin");
    if (!origin.empty() && std::find(cors.begin(), cors.end(), origin) != cors.end()) {
      hres.set_header("Access-Control-Allow-Origin", origin);
      hres.set_header("Vary", "Origin");
      hres.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
      hres.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
    if (hreq.method == "OPTIONS") {
      hres.status = 204;
      return;
    }
    ApiRequest req;
    req.method = hreq.method;
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.query[k] = v;
    req.body = hreq.body;
    ApiResponse res = service.handle(req);
    hres.status = res.status;
    hres.set_content(res.body, "application/json");
  }
};

HttpServer::HttpServer(ExplorerService& service, std::vector<std::string> cors_allowlist)
    : impl_(std::make_unique<Impl>(service, std::move(cors_allowlist))) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->dispatch(req, res); };
  const char* pattern = R"(/v1(/.*)?)";
  impl_->server.Get(pattern, handler);
  impl_->server.Post(pattern, handler);
  impl_->server.Put(pattern, handler);
  impl_->server.Options(pattern, handler);
  impl_->server.Delete(pattern, handler);
  impl_->server.Patch(pattern, handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : impl_->server.bind_to_port(host, port) ? port : -1;
  if (bound < 0)
    throw Error(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace thematic
