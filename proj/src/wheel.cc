#include "thematic/wheel.h"

#include <algorithm>

namespace thematic {

ThemeWheel build_multi_theme_wheel(const TopicModel& model, std::string_view doc_id,
                                   std::span<const std::string> theme_colors) {
  const std::size_t d = model.require_document(doc_id);
  if (theme_colors.size() < model.topic_count())
    throw Error(ErrorCode::kInvalidArgument, "theme colors do not cover every theme");
  ThemeWheel wheel;
  wheel.doc_id = std::string(doc_id);
  wheel.variant = ThemeWheel::Variant::kMulti;
  for (std::size_t c = 0; c < model.chunks_per_document(); ++c) {
    auto row = model.chunk_theta(d, c);
    // max_element returns the first maximum, i.e. the lowest theme id.
    auto it = std::max_element(row.begin(), row.end());
    WheelSegment seg;
    seg.chunk = static_cast<std::uint32_t>(c);
    seg.dominant_theme = static_cast<ThemeId>(it - row.begin());
    seg.dominant_weight = *it;
    seg.theta = row;
    seg.color = theme_colors[seg.dominant_theme];
    seg.intensity = seg.dominant_weight;
    wheel.segments.push_back(std::move(seg));
  }
  return wheel;
}

ThemeWheel build_single_theme_wheel(const TopicModel& model, std::string_view doc_id,
                                    std::size_t theme_id) {
  const std::size_t d = model.require_document(doc_id);
  model.require_theme(theme_id);
  ThemeWheel wheel;
  wheel.doc_id = std::string(doc_id);
  wheel.variant = ThemeWheel::Variant::kSingle;
  wheel.theme = static_cast<ThemeId>(theme_id);
  wheel.trace_only = true;
  for (std::size_t c = 0; c < model.chunks_per_document(); ++c) {
    auto row = model.chunk_theta(d, c);
    auto it = std::max_element(row.begin(), row.end());
    WheelSegment seg;
    seg.chunk = static_cast<std::uint32_t>(c);
    seg.dominant_theme = static_cast<ThemeId>(it - row.begin());
    seg.dominant_weight = *it;
    seg.theta = row;
    seg.intensity = row[theme_id];
    seg.trace = seg.intensity < kTraceFloorFactor * model.smoothing_floor(model.chunk_row(d, c));
    wheel.trace_only = wheel.trace_only && seg.trace;
    wheel.segments.push_back(std::move(seg));
  }
  return wheel;
}

std::vector<PaperRelevance> rank_papers_for_theme(const TopicModel& model, std::size_t theme_id,
                                                  std::size_t n) {
  model.require_theme(theme_id);
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "paper count must be >= 1");
  std::vector<PaperRelevance> all;
  for (std::size_t d = 0; d < model.document_count(); ++d) {
    const double w = model.paper_weights(d)[theme_id];
    if (w > 0.0)
      all.push_back({model.doc_ids()[d], static_cast<ThemeId>(theme_id), std::min(100.0, w * 100.0)});
  }
  auto better = [](const PaperRelevance& a, const PaperRelevance& b) {
    if (a.relevance_percent != b.relevance_percent) return a.relevance_percent > b.relevance_percent;
    return a.doc_id < b.doc_id;
  };
  const std::size_t keep = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  all.resize(keep);
  return all;
}

nlohmann::json wheel_to_json(const ThemeWheel& wheel, bool include_theta) {
  using nlohmann::json;
  const bool single = wheel.variant == ThemeWheel::Variant::kSingle;
  json segments = json::array();
  for (const auto& seg : wheel.segments) {
    json s = {{"chunk", seg.chunk},
              {"theme", seg.dominant_theme},
              {"weight", seg.dominant_weight}};
    if (single) {
      s["intensity"] = seg.intensity;
      s["trace"] = seg.trace;
    } else {
      s["color"] = seg.color;
    }
    if (include_theta) s["theta"] = std::vector<double>(seg.theta.begin(), seg.theta.end());
    segments.push_back(std::move(s));
  }
  json out = {{"doc_id", wheel.doc_id},
              {"variant", single ? "single" : "multi"},
              {"orientation", "clockwise_from_top"},
              {"segments", std::move(segments)}};
  if (single) {
    out["theme"] = *wheel.theme;
    out["trace_only"] = wheel.trace_only;
  }
  return out;
}

}  // namespace thematic
