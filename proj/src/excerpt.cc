#include "thematic/excerpt.h"

#include <set>

#include "thematic/hash.h"

namespace thematic {

std::vector<RelevantTheme> extract_relevant_themes(const TopicModel& model,
                                                   std::span<const std::string> selection,
                                                   const ExcerptOptions& options) {
  if (selection.empty())
    throw Error(ErrorCode::kInvalidArgument, "empty_selection", "selection is empty");
  if (selection.size() > options.max_selection)
    throw Error(ErrorCode::kInvalidArgument, "selection_too_large",
                "selection of " + std::to_string(selection.size()) + " papers exceeds the maximum of " +
                    std::to_string(options.max_selection));
  if (!(options.inclusion_threshold > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "inclusion threshold must be positive");

  std::vector<std::size_t> docs;
  std::set<std::string_view> seen;
  for (const auto& id : selection) {
    if (!seen.insert(id).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate_doc_id", "doc_id '" + id + "' selected twice");
    docs.push_back(model.require_document(id));
  }

  std::vector<RelevantTheme> out;
  for (std::size_t t = 0; t < model.topic_count(); ++t) {
    RelevantTheme rt;
    rt.theme_id = static_cast<ThemeId>(t);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const double w = model.paper_weights(docs[i])[t];
      if (w >= options.inclusion_threshold) rt.witnesses.push_back({selection[i], w});
    }
    if (!rt.witnesses.empty()) out.push_back(std::move(rt));
  }
  return out;
}

std::string selection_id(std::span<const std::string> selection) {
  std::string joined;
  for (const auto& id : selection) {
    joined += id;
    joined.push_back('\n');
  }
  return sha256_hex(joined).substr(0, 16);
}

ExcerptMap build_excerpt_map(const TopicModel& model, const Vocabulary& vocab,
                             std::span<const std::string> selection,
                             std::vector<RelevantTheme> relevant, const ExcerptOptions& options,
                             std::string model_hash) {
  if (relevant.empty())
    throw Error(ErrorCode::kInvalidArgument, "empty_subset", "no theme passes the inclusion threshold");
  ExcerptMap out;
  out.selection.assign(selection.begin(), selection.end());
  out.selection_id = selection_id(selection);
  std::vector<ThemeId> ids;
  for (const auto& rt : relevant) ids.push_back(rt.theme_id);
  out.relevant = std::move(relevant);
  out.map = build_theme_map(model, vocab, options.map, ids, Palette::kExcerpt, std::move(model_hash));
  return out;
}

ExcerptMap excerpt_for_selection(const TopicModel& model, const Vocabulary& vocab,
                                 std::span<const std::string> selection,
                                 const ExcerptOptions& options, std::string model_hash) {
  auto relevant = extract_relevant_themes(model, selection, options);
  return build_excerpt_map(model, vocab, selection, std::move(relevant), options, std::move(model_hash));
}

nlohmann::json excerpt_map_to_json(const ExcerptMap& excerpt) {
  using nlohmann::json;
  json j = theme_map_to_json(excerpt.map);
  j["format"] = "thematic.excerpt";
  j["selection_id"] = excerpt.selection_id;
  j["selection"] = excerpt.selection;
  j["off_map_color"] = kOffMapColor;
  for (std::size_t i = 0; i < excerpt.relevant.size(); ++i) {
    json prov = json::array();
    for (const auto& w : excerpt.relevant[i].witnesses)
      prov.push_back({{"doc_id", w.doc_id}, {"weight", w.weight}});
    j["themes"][i]["provenance"] = std::move(prov);
  }
  return j;
}

}  // namespace thematic
