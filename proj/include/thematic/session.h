#pragma once

// Persistent user sessions: selection, reading strategy and title reveal.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace thematic {

/// Inclusive chunk index range marked "to read" on a paper's wheel.
struct ChunkRange {
  std::uint32_t first = 0;
  std::uint32_t last = 0;
  bool operator==(const ChunkRange&) const = default;
};

struct StrategyEntry {
  std::string doc_id;
  std::uint32_t rank = 0;  // 1-based reading position
  std::string note;
  std::vector<ChunkRange> targets;
  bool operator==(const StrategyEntry&) const = default;
};

/// Parameters the session was created under.
struct ConfigSnapshot {
  double inclusion_threshold = 0.0;
  double presence_threshold = 0.0;
  std::uint32_t chunk_count = 0;
  std::uint32_t topic_count = 0;
  std::string model_hash;
  bool operator==(const ConfigSnapshot&) const = default;
};

struct Session {
  std::string session_id;
  std::int64_t created_ms = 0;
  std::int64_t updated_ms = 0;
  std::vector<std::string> selection;  // in the order chosen
  std::vector<StrategyEntry> strategy;
  bool titles_revealed = false;
  ConfigSnapshot config;
  bool operator==(const Session&) const = default;
};

nlohmann::json session_to_json(const Session& session);
Session session_from_json(const nlohmann::json& j);

struct SessionPolicy {
  std::size_t max_selection = 6;
  ConfigSnapshot current;  // snapshot given to new sessions; its model_hash is the loaded model
  std::function<bool(std::string_view)> is_modeled;  // doc_id check for selections
};

/// Single-file store. Every accepted mutation rewrites the file through a
/// temporary and rename; rejected mutations leave memory and disk untouched.
/// Writers are serialized store-wide, readers run concurrently.
class SessionStore {
 public:
  /// Loads `path` if it exists.
  SessionStore(std::filesystem::path path, SessionPolicy policy);

  Session create();
  std::optional<Session> find(std::string_view id) const;
  /// Throws Error(kNotFound, "unknown_session").
  Session get(std::string_view id) const;
  std::vector<Session> list() const;

  /// Replaces the selection. Strategy entries for papers no longer selected
  /// are dropped and the remaining ranks renumbered in order.
  Session update_selection(std::string_view id, std::vector<std::string> doc_ids);
  Session save_strategy(std::string_view id, std::vector<StrategyEntry> entries);
  /// One-way; repeated calls are no-ops.
  Session reveal_titles(std::string_view id);

  /// Inserts a complete session (import and tests); validated like updates.
  void insert(const Session& session);

  bool read_only(const Session& session) const;
  const SessionPolicy& policy() const { return policy_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  Session& writable(std::string_view id);
  void validate_selection(const std::vector<std::string>& doc_ids) const;
  void validate_strategy(const Session& session, const std::vector<StrategyEntry>& entries) const;
  void persist() const;

  std::filesystem::path path_;
  SessionPolicy policy_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Session, std::less<>> sessions_;
};

std::string serialize_sessions(const std::vector<Session>& sessions);
std::vector<Session> deserialize_sessions(std::string_view bytes);

}  // namespace thematic
