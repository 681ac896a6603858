#pragma once

// Theme similarity from co-occurrence in papers, average-linkage clustering
// and the clustered hex layout of the thematic map.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "thematic/hex.h"
#include "thematic/matrix.h"
#include "thematic/palette.h"
#include "thematic/topic_model.h"

namespace thematic {

inline constexpr double kDefaultPresenceThreshold = 0.05;

struct ThemeSimilarity {
  Matrix values;                    // symmetric, unit diagonal, entries in [0, 1]
  double presence_threshold = 0.0;  // tau
  std::vector<std::size_t> empty;   // local indices of themes present in no paper
};

/// Jaccard similarity between the sets of papers in which each theme has
/// weight >= tau. `paper_weights` is papers x themes; `themes` selects the
/// columns to compare (all columns when empty). Indices in the result are
/// positions in `themes`.
ThemeSimilarity theme_cooccurrence(const Matrix& paper_weights, double tau,
                                   std::span<const ThemeId> themes = {});

enum class Linkage { kAverage };

struct ClusterTarget {
  enum class Kind { kCount, kCutHeight, kLargestGap };
  Kind kind = Kind::kLargestGap;
  std::size_t count = 0;  // kCount
  double height = 0.0;    // kCutHeight, on the 1 - similarity scale

  static ClusterTarget clusters(std::size_t n) { return {Kind::kCount, n, 0.0}; }
  static ClusterTarget cut_height(double h) { return {Kind::kCutHeight, 0, h}; }
  static ClusterTarget largest_gap() { return {}; }
};

/// One agglomeration step. Node ids: leaves are 0..n-1, the i-th merge
/// creates node n + i. `left` is the side holding the smaller leaf id.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double similarity = 0.0;  // average linkage at merge time
  double height = 0.0;      // 1 - similarity, made non-decreasing
  std::size_t size = 0;
};

struct ClusterTree {
  std::size_t leaf_count = 0;
  std::vector<Merge> merges;            // always leaf_count - 1 entries
  std::size_t merges_applied = 0;       // merges below the cut
  std::vector<std::size_t> cluster_of;  // per leaf; clusters numbered by smallest leaf
  std::size_t cluster_count = 0;

  std::vector<std::vector<std::size_t>> members() const;
};

/// Merges the pair with the highest average similarity; ties go to the
/// lexicographically smallest (min leaf of one side, min leaf of the other).
/// The dendrogram is built completely and then cut according to `target`.
/// Largest-gap cut: after merge i where height[i] - height[i-1] is maximal
/// (i in 1..n-2, later cut on ties); a single cluster when n <= 2.
ClusterTree agglomerative_cluster(const Matrix& similarity, Linkage linkage,
                                  const ClusterTarget& target);

struct HexLayout {
  std::vector<hex::Axial> cells;  // per leaf
  struct Centroid {
    double q = 0.0;
    double r = 0.0;
  };
  std::vector<Centroid> centroids;  // per cluster
  std::vector<hex::Axial> seats;    // per cluster: spiral center
};

/// Clusters are visited in dendrogram leaf order. The first sits at the
/// origin; each later one is anchored to the already placed cluster it is
/// most similar to and seated at the nearest free position (hex distance
/// from the anchor's seat, then from the origin) where its whole spiral
/// fits. Inside a cluster, the medoid takes the spiral center and the other
/// members follow by decreasing similarity to it.
HexLayout hex_layout(const ClusterTree& tree, const Matrix& similarity);

/// Per-cluster colors, in cluster id order.
std::vector<std::string> assign_colors(const ClusterTree& tree, Palette palette = Palette::kOverview);

struct MapOptions {
  double presence_threshold = kDefaultPresenceThreshold;
  ClusterTarget clusters = ClusterTarget::largest_gap();
  std::size_t top_terms = 10;
};

/// A laid-out map over a set of themes (all themes, or an excerpt).
struct ThemeMap {
  std::string model_hash;
  MapOptions options;
  Palette palette = Palette::kOverview;
  std::vector<ThemeId> themes;  // global ids; local index = position
  ThemeSimilarity similarity;
  ClusterTree tree;
  HexLayout layout;
  std::vector<std::string> cluster_colors;
  std::vector<Theme> words;  // per local index

  const std::string& theme_color(std::size_t local) const {
    return cluster_colors[tree.cluster_of[local]];
  }
  /// Color per global theme id (size K); themes not on this map get kOffMapColor.
  std::vector<std::string> colors_by_theme(std::size_t topic_count) const;
};

/// Similarity is always computed over every paper of the model; `themes`
/// restricts which themes are compared and laid out (all when empty).
ThemeMap build_theme_map(const TopicModel& model, const Vocabulary& vocab, const MapOptions& options,
                         std::span<const ThemeId> themes = {}, Palette palette = Palette::kOverview,
                         std::string model_hash = {});

nlohmann::json cluster_target_to_json(const ClusterTarget& target);
ClusterTarget cluster_target_from_json(const nlohmann::json& j);

nlohmann::json theme_map_to_json(const ThemeMap& map);
/// Layout artifact bytes: pretty-printed JSON with a trailing newline.
std::string serialize_layout(const ThemeMap& map);
void save_layout(const ThemeMap& map, const std::string& path);

/// Options and model hash recorded in a layout artifact.
struct LayoutHeader {
  std::string model_hash;
  MapOptions options;
};
LayoutHeader read_layout_header(std::string_view bytes);

}  // namespace thematic
