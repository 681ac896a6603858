#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <vector>

namespace thematic::hex {

/// Axial hex coordinate (pointy-top); the implicit cube coordinate is
/// (q, r, -q - r).
struct Axial {
  int q = 0;
  int r = 0;

  friend Axial operator+(Axial a, Axial b) { return {a.q + b.q, a.r + b.r}; }
  friend Axial operator-(Axial a, Axial b) { return {a.q - b.q, a.r - b.r}; }
  friend Axial operator*(Axial a, int k) { return {a.q * k, a.r * k}; }
  auto operator<=>(const Axial&) const = default;
};

/// Unit steps in ring-walk order.
inline constexpr std::array<Axial, 6> kDirections = {
    Axial{1, 0}, Axial{1, -1}, Axial{0, -1}, Axial{-1, 0}, Axial{-1, 1}, Axial{0, 1}};

int distance(Axial a, Axial b);
std::array<Axial, 6> neighbors(Axial a);
bool adjacent(Axial a, Axial b);

/// The 6 * radius cells at exactly `radius` from `center` (just `center`
/// for radius 0), starting at center + radius * (-1, 1) and walking the six
/// sides in kDirections order.
std::vector<Axial> ring(Axial center, int radius);

/// First `count` cells of the spiral around `center`: the center, then ring
/// 1, ring 2, ... in ring order. Every prefix is a connected set.
std::vector<Axial> spiral(Axial center, std::size_t count);

}  // namespace thematic::hex
