#pragma once

// Excerpt maps: the themes relevant to a selected paper set, re-clustered and
// re-laid-out as a smaller map with its own palette.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "thematic/theme_map.h"
#include "thematic/topic_model.h"

namespace thematic {

inline constexpr double kDefaultInclusionThreshold = 0.05;
inline constexpr std::size_t kDefaultMaxSelection = 6;

struct ExcerptOptions {
  double inclusion_threshold = kDefaultInclusionThreshold;  // theta_min
  std::size_t max_selection = kDefaultMaxSelection;
  MapOptions map;  // similarity / clustering parameters for the re-clustering
};

struct Witness {
  std::string doc_id;
  double weight = 0.0;
};

struct RelevantTheme {
  ThemeId theme_id = 0;
  std::vector<Witness> witnesses;  // selected papers with weight >= threshold, selection order
};

/// Themes whose paper-level weight reaches the inclusion threshold in at
/// least one selected paper, ascending by theme id. Throws on an empty or
/// oversized selection, duplicate or unknown doc ids, or a non-positive
/// threshold.
std::vector<RelevantTheme> extract_relevant_themes(const TopicModel& model,
                                                   std::span<const std::string> selection,
                                                   const ExcerptOptions& options);

struct ExcerptMap {
  std::string selection_id;  // hash of the ordered selection
  std::vector<std::string> selection;
  std::vector<RelevantTheme> relevant;  // parallel to map.themes
  ThemeMap map;
};

/// Similarity is restricted to the subset but measured over the whole corpus.
ExcerptMap build_excerpt_map(const TopicModel& model, const Vocabulary& vocab,
                             std::span<const std::string> selection,
                             std::vector<RelevantTheme> relevant, const ExcerptOptions& options,
                             std::string model_hash = {});

/// extract_relevant_themes followed by build_excerpt_map.
ExcerptMap excerpt_for_selection(const TopicModel& model, const Vocabulary& vocab,
                                 std::span<const std::string> selection,
                                 const ExcerptOptions& options, std::string model_hash = {});

std::string selection_id(std::span<const std::string> selection);

/// Theme-map payload plus selection and provenance blocks.
nlohmann::json excerpt_map_to_json(const ExcerptMap& excerpt);

}  // namespace thematic
