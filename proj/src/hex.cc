#include "thematic/hex.h"

#include <cstdlib>

namespace thematic::hex {

int distance(Axial a, Axial b) {
  const Axial d = a - b;
  return (std::abs(d.q) + std::abs(d.r) + std::abs(d.q + d.r)) / 2;
}

std::array<Axial, 6> neighbors(Axial a) {
  std::array<Axial, 6> out{};
  for (std::size_t i = 0; i < 6; ++i) out[i] = a + kDirections[i];
  return out;
}

bool adjacent(Axial a, Axial b) { return distance(a, b) == 1; }

std::vector<Axial> ring(Axial center, int radius) {
  if (radius <= 0) return {center};
  std::vector<Axial> out;
  out.reserve(static_cast<std::size_t>(6 * radius));
  Axial cell = center + kDirections[4] * radius;
  for (const Axial& dir : kDirections) {
    for (int step = 0; step < radius; ++step) {
      out.push_back(cell);
      cell = cell + dir;
    }
  }
  return out;
}

std::vector<Axial> spiral(Axial center, std::size_t count) {
  std::vector<Axial> out;
  out.reserve(count);
  for (int radius = 0; out.size() < count; ++radius) {
    for (const Axial& cell : ring(center, radius)) {
      if (out.size() == count) break;
      out.push_back(cell);
    }
  }
  return out;
}

}  // namespace thematic::hex
