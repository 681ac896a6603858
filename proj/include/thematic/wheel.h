#pragma once

// Per-paper theme wheels and per-theme paper rankings.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thematic/topic_model.h"

namespace thematic {

/// Segments below this multiple of the chunk's smoothing floor are drawn empty.
inline constexpr double kTraceFloorFactor = 1.5;
inline constexpr std::size_t kDefaultTopPapers = 10;

struct WheelSegment {
  std::uint32_t chunk = 0;
  ThemeId dominant_theme = 0;
  double dominant_weight = 0.0;
  std::span<const double> theta;  // the chunk's full theta row (view into the model)
  std::string color;              // multi-theme: cluster color of the dominant theme
  double intensity = 0.0;         // single-theme: the theme's weight in the chunk
  bool trace = false;             // single-theme: intensity below the trace floor
};

struct ThemeWheel {
  enum class Variant { kMulti, kSingle };
  std::string doc_id;
  Variant variant = Variant::kMulti;
  std::optional<ThemeId> theme;        // single-theme only
  std::vector<WheelSegment> segments;  // chunk order, clockwise from twelve o'clock
  bool trace_only = false;             // single-theme: every segment is trace
};

/// `theme_colors` is indexed by global theme id and must cover every theme.
/// The dominant theme is the row argmax, lower theme id on ties.
ThemeWheel build_multi_theme_wheel(const TopicModel& model, std::string_view doc_id,
                                   std::span<const std::string> theme_colors);

ThemeWheel build_single_theme_wheel(const TopicModel& model, std::string_view doc_id,
                                    std::size_t theme_id);

struct PaperRelevance {
  std::string doc_id;
  ThemeId theme_id = 0;
  double relevance_percent = 0.0;  // paper-level theme weight x 100
};

/// Papers with non-zero weight for the theme, by relevance descending and
/// doc_id ascending, truncated to n.
std::vector<PaperRelevance> rank_papers_for_theme(const TopicModel& model, std::size_t theme_id,
                                                  std::size_t n = kDefaultTopPapers);

/// Wheel payload. `include_theta` adds each segment's full theta row.
nlohmann::json wheel_to_json(const ThemeWheel& wheel, bool include_theta);

}  // namespace thematic
