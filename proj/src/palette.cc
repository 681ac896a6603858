#include "thematic/palette.h"

#include <array>
#include <cmath>
#include <cstdio>
#include <string_view>

namespace thematic {

namespace {

// Okabe-Ito (without black) followed by Paul Tol's "muted" scheme.
constexpr std::array<std::string_view, 16> kOverviewBase = {
    "#E69F00", "#56B4E9", "#009E73", "#F0E442", "#0072B2", "#D55E00", "#CC79A7", "#CC6677",
    "#332288", "#DDCC77", "#117733", "#88CCEE", "#882255", "#44AA99", "#999933", "#AA4499"};

// Paul Tol's "vibrant" and "light" schemes, greys removed.
constexpr std::array<std::string_view, 14> kExcerptBase = {
    "#EE7733", "#0077BB", "#33BBEE", "#EE3377", "#CC3311", "#009988", "#77AADD",
    "#EE8866", "#EEDD88", "#FFAABB", "#99DDFF", "#44BB99", "#BBCC33", "#AAAA00"};

// Mix amount toward white (positive) or black (negative) per cycle.
constexpr std::array<double, 9> kVariants = {0.0, 0.30, -0.30, 0.55, -0.50, 0.75, -0.65, 0.88, -0.78};

int channel(std::string_view hex, std::size_t pos) {
  auto digit = [](char c) { return c <= '9' ? c - '0' : (c & ~0x20) - 'A' + 10; };
  return digit(hex[pos]) * 16 + digit(hex[pos + 1]);
}

std::string mix(std::string_view base, double amount) {
  char buf[8];
  int rgb[3];
  for (int i = 0; i < 3; ++i) {
    double c = channel(base, 1 + 2 * static_cast<std::size_t>(i));
    c = amount >= 0 ? c + (255.0 - c) * amount : c * (1.0 + amount);
    rgb[i] = static_cast<int>(std::lround(c));
  }
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

std::size_t palette_base_size(Palette palette) {
  return palette == Palette::kOverview ? kOverviewBase.size() : kExcerptBase.size();
}

std::vector<std::string> palette_colors(Palette palette, std::size_t count) {
  const std::size_t base = palette_base_size(palette);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string_view color = palette == Palette::kOverview ? kOverviewBase[i % base] : kExcerptBase[i % base];
    const double amount = kVariants[(i / base) % kVariants.size()];
    out.push_back(amount == 0.0 ? std::string(color) : mix(color, amount));
  }
  return out;
}

}  // namespace thematic
