#include "thematic/session.h"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <random>
#include <set>

#include "binary_io.h"
#include "thematic/error.h"

namespace thematic {

using nlohmann::json;

namespace {

constexpr const char* kStoreFormat = "thematic.sessions";
constexpr int kStoreVersion = 1;

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string random_id() {
  static std::mutex mu;
  static std::mt19937_64 gen(std::random_device{}());
  std::lock_guard lock(mu);
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t v = gen();
  std::string id(16, '0');
  for (auto& c : id) {
    c = kHex[v & 0xF];
    v >>= 4;
  }
  return id;
}

}  // namespace

json session_to_json(const Session& s) {
  json strategy = json::array();
  for (const auto& e : s.strategy) {
    json targets = json::array();
    for (const auto& t : e.targets) targets.push_back({{"first", t.first}, {"last", t.last}});
    strategy.push_back({{"doc_id", e.doc_id}, {"rank", e.rank}, {"note", e.note}, {"targets", targets}});
  }
  return {{"session_id", s.session_id},
          {"created_ms", s.created_ms},
          {"updated_ms", s.updated_ms},
          {"selection", s.selection},
          {"strategy", strategy},
          {"titles_revealed", s.titles_revealed},
          {"config",
           {{"inclusion_threshold", s.config.inclusion_threshold},
            {"presence_threshold", s.config.presence_threshold},
            {"chunk_count", s.config.chunk_count},
            {"topic_count", s.config.topic_count},
            {"model_hash", s.config.model_hash}}}};
}

Session session_from_json(const json& j) {
  try {
    Session s;
    s.session_id = j.at("session_id").get<std::string>();
    s.created_ms = j.at("created_ms").get<std::int64_t>();
    s.updated_ms = j.at("updated_ms").get<std::int64_t>();
    s.selection = j.at("selection").get<std::vector<std::string>>();
    for (const auto& e : j.at("strategy")) {
      StrategyEntry entry;
      entry.doc_id = e.at("doc_id").get<std::string>();
      entry.rank = e.at("rank").get<std::uint32_t>();
      entry.note = e.at("note").get<std::string>();
      for (const auto& t : e.at("targets"))
        entry.targets.push_back({t.at("first").get<std::uint32_t>(), t.at("last").get<std::uint32_t>()});
      s.strategy.push_back(std::move(entry));
    }
    s.titles_revealed = j.at("titles_revealed").get<bool>();
    const auto& c = j.at("config");
    s.config.inclusion_threshold = c.at("inclusion_threshold").get<double>();
    s.config.presence_threshold = c.at("presence_threshold").get<double>();
    s.config.chunk_count = c.at("chunk_count").get<std::uint32_t>();
    s.config.topic_count = c.at("topic_count").get<std::uint32_t>();
    s.config.model_hash = c.at("model_hash").get<std::string>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kDataError, "malformed_session", std::string("session record: ") + e.what());
  }
}

std::string serialize_sessions(const std::vector<Session>& sessions) {
  json list = json::array();
  for (const auto& s : sessions) list.push_back(session_to_json(s));
  json doc = {{"format", kStoreFormat}, {"version", kStoreVersion}, {"sessions", std::move(list)}};
  return doc.dump(2) + "\n";
}

std::vector<Session> deserialize_sessions(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kDataError, "corrupt_session_store", std::string("session store: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kStoreFormat || doc.value("version", 0) != kStoreVersion)
    throw Error(ErrorCode::kDataError, "corrupt_session_store", "not a version 1 session store");
  std::vector<Session> out;
  for (const auto& s : doc.at("sessions")) out.push_back(session_from_json(s));
  return out;
}

SessionStore::SessionStore(std::filesystem::path path, SessionPolicy policy)
    : path_(std::move(path)), policy_(std::move(policy)) {
  std::error_code ec;
  if (std::filesystem::exists(path_, ec)) {
    for (auto& s : deserialize_sessions(io::read_file(path_.string()))) {
      std::string id = s.session_id;
      sessions_.emplace(std::move(id), std::move(s));
    }
  }
}

Session SessionStore::create() {
  std::unique_lock lock(mutex_);
  Session s;
  do {
    s.session_id = random_id();
  } while (sessions_.count(s.session_id));
  s.created_ms = s.updated_ms = now_ms();
  s.config = policy_.current;
  sessions_.emplace(s.session_id, s);
  try {
    persist();
  } catch (...) {
    sessions_.erase(s.session_id);
    throw;
  }
  return s;
}

std::optional<Session> SessionStore::find(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

Session SessionStore::get(std::string_view id) const {
  if (auto s = find(id)) return *s;
  throw Error(ErrorCode::kNotFound, "unknown_session", "unknown session '" + std::string(id) + "'");
}

std::vector<Session> SessionStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<Session> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

bool SessionStore::read_only(const Session& session) const {
  return session.config.model_hash != policy_.current.model_hash;
}

Session& SessionStore::writable(std::string_view id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end())
    throw Error(ErrorCode::kNotFound, "unknown_session", "unknown session '" + std::string(id) + "'");
  if (read_only(it->second))
    throw Error(ErrorCode::kConflict, "session_read_only",
                "session '" + std::string(id) + "' was created for a different model and is read-only");
  return it->second;
}

void SessionStore::validate_selection(const std::vector<std::string>& doc_ids) const {
  if (doc_ids.size() > policy_.max_selection)
    throw Error(ErrorCode::kInvalidArgument, "selection_too_large",
                "selection of " + std::to_string(doc_ids.size()) + " papers exceeds the maximum of " +
                    std::to_string(policy_.max_selection));
  std::set<std::string_view> seen;
  for (const auto& id : doc_ids) {
    if (!seen.insert(id).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate_doc_id", "doc_id '" + id + "' selected twice");
    if (policy_.is_modeled && !policy_.is_modeled(id))
      throw Error(ErrorCode::kNotFound, "unknown_doc_id", "unknown doc_id '" + id + "'");
  }
}

void SessionStore::validate_strategy(const Session& session,
                                     const std::vector<StrategyEntry>& entries) const {
  std::set<std::string_view> docs;
  std::vector<bool> rank_seen(entries.size() + 1, false);
  for (const auto& e : entries) {
    if (std::find(session.selection.begin(), session.selection.end(), e.doc_id) == session.selection.end())
      throw Error(ErrorCode::kInvalidArgument, "not_selected",
                  "strategy references '" + e.doc_id + "', which is not in the selection");
    if (!docs.insert(e.doc_id).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate_doc_id",
                  "strategy lists '" + e.doc_id + "' more than once");
    if (e.rank < 1 || e.rank > entries.size() || rank_seen[e.rank])
      throw Error(ErrorCode::kInvalidArgument, "invalid_rank",
                  "strategy ranks must be a permutation of 1.." + std::to_string(entries.size()));
    rank_seen[e.rank] = true;
    for (const auto& t : e.targets)
      if (t.first > t.last || t.last >= session.config.chunk_count)
        throw Error(ErrorCode::kInvalidArgument, "invalid_range",
                    "chunk range [" + std::to_string(t.first) + ", " + std::to_string(t.last) +
                        "] is not within [0, " + std::to_string(session.config.chunk_count) + ")");
  }
}

Session SessionStore::update_selection(std::string_view id, std::vector<std::string> doc_ids) {
  std::unique_lock lock(mutex_);
  Session& stored = writable(id);
  validate_selection(doc_ids);
  Session next = stored;
  next.selection = std::move(doc_ids);
  std::erase_if(next.strategy, [&](const StrategyEntry& e) {
    return std::find(next.selection.begin(), next.selection.end(), e.doc_id) == next.selection.end();
  });
  std::vector<StrategyEntry*> by_rank;
  for (auto& e : next.strategy) by_rank.push_back(&e);
  std::sort(by_rank.begin(), by_rank.end(), [](auto* a, auto* b) { return a->rank < b->rank; });
  for (std::size_t i = 0; i < by_rank.size(); ++i) by_rank[i]->rank = static_cast<std::uint32_t>(i + 1);
  next.updated_ms = std::max(now_ms(), stored.updated_ms);

  Session previous = std::exchange(stored, next);
  try {
    persist();
  } catch (...) {
    stored = std::move(previous);
    throw;
  }
  return stored;
}

Session SessionStore::save_strategy(std::string_view id, std::vector<StrategyEntry> entries) {
  std::unique_lock lock(mutex_);
  Session& stored = writable(id);
  validate_strategy(stored, entries);
  Session next = stored;
  next.strategy = std::move(entries);
  next.updated_ms = std::max(now_ms(), stored.updated_ms);
  Session previous = std::exchange(stored, next);
  try {
    persist();
  } catch (...) {
    stored = std::move(previous);
    throw;
  }
  return stored;
}

Session SessionStore::reveal_titles(std::string_view id) {
  std::unique_lock lock(mutex_);
  Session& stored = writable(id);
  if (stored.titles_revealed) return stored;
  Session previous = stored;
  stored.titles_revealed = true;
  stored.updated_ms = std::max(now_ms(), previous.updated_ms);
  try {
    persist();
  } catch (...) {
    stored = std::move(previous);
    throw;
  }
  return stored;
}

void SessionStore::insert(const Session& session) {
  std::unique_lock lock(mutex_);
  if (session.session_id.empty())
    throw Error(ErrorCode::kInvalidArgument, "session id is empty");
  if (sessions_.count(session.session_id))
    throw Error(ErrorCode::kConflict, "duplicate_session", "session '" + session.session_id + "' exists");
  validate_selection(session.selection);
  validate_strategy(session, session.strategy);
  sessions_.emplace(session.session_id, session);
  try {
    persist();
  } catch (...) {
    sessions_.erase(session.session_id);
    throw;
  }
}

void SessionStore::persist() const {
  std::vector<Session> all;
  all.reserve(sessions_.size());
  for (const auto& [id, s] : sessions_) all.push_back(s);
  io::write_file_atomic(path_.string(), serialize_sessions(all));
}

}  // namespace thematic
