#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace thematic {

enum class Palette {
  kOverview,  // full thematic map and its wheels
  kExcerpt,   // excerpt maps, deliberately disjoint from the overview palette
};

/// Neutral color for wheel segments whose dominant theme is not on the map
/// being shown (excerpt wheels).
inline constexpr const char* kOffMapColor = "#BBBBBB";

/// Number of base colors before the palette starts cycling.
std::size_t palette_base_size(Palette palette);

/// `count` colors as "#RRGGBB". The first palette_base_size() entries are
/// the colorblind-safe base colors; later entries cycle the base with
/// alternating lighter and darker variants (8 variants per base color, so
/// entries stay distinct up to 9 * base size; beyond that they repeat).
std::vector<std::string> palette_colors(Palette palette, std::size_t count);

}  // namespace thematic
