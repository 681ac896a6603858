#include "thematic/theme_map.h"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "binary_io.h"

namespace thematic {

using nlohmann::json;

namespace {

constexpr const char* kLayoutFormat = "thematic.layout";
constexpr int kLayoutVersion = 1;

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

std::size_t merges_for_target(const std::vector<Merge>& merges, std::size_t n,
                              const ClusterTarget& target) {
  switch (target.kind) {
    case ClusterTarget::Kind::kCount:
      if (target.count < 1 || target.count > n)
        throw Error(ErrorCode::kInvalidArgument,
                    "cluster count " + std::to_string(target.count) + " outside [1, " +
                        std::to_string(n) + "]");
      return n - target.count;
    case ClusterTarget::Kind::kCutHeight: {
      std::size_t m = 0;
      while (m < merges.size() && merges[m].height <= target.height) ++m;
      return m;
    }
    case ClusterTarget::Kind::kLargestGap: {
      if (n <= 2) return merges.size();
      std::size_t best = 1;
      double best_gap = -1.0;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double gap = merges[i].height - merges[i - 1].height;
        if (gap >= best_gap) {
          best_gap = gap;
          best = i;
        }
      }
      return best;
    }
  }
  return merges.size();
}

// Leaves of the dendrogram in depth-first order, left subtree first.
std::vector<std::size_t> leaf_order(const ClusterTree& tree) {
  const std::size_t n = tree.leaf_count;
  if (n == 0) return {};
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack = {n == 1 ? 0 : 2 * n - 2};
  while (!stack.empty()) {
    std::size_t node = stack.back();
    stack.pop_back();
    if (node < n) {
      out.push_back(node);
    } else {
      const Merge& m = tree.merges[node - n];
      stack.push_back(m.right);
      stack.push_back(m.left);
    }
  }
  return out;
}

double mean_similarity(const Matrix& s, const std::vector<std::size_t>& a,
                       const std::vector<std::size_t>& b) {
  double sum = 0.0;
  for (auto i : a)
    for (auto j : b) sum += s(i, j);
  return sum / static_cast<double>(a.size() * b.size());
}

}  // namespace

ThemeSimilarity theme_cooccurrence(const Matrix& paper_weights, double tau,
                                   std::span<const ThemeId> themes) {
  if (!(tau > 0.0 && tau < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "presence threshold must be in (0, 1)");
  std::vector<ThemeId> cols(themes.begin(), themes.end());
  if (cols.empty()) {
    cols.resize(paper_weights.cols());
    std::iota(cols.begin(), cols.end(), ThemeId{0});
  }
  for (auto c : cols)
    if (c >= paper_weights.cols())
      throw Error(ErrorCode::kNotFound, "unknown_theme", "theme " + std::to_string(c) + " out of range");

  const std::size_t k = cols.size();
  const std::size_t papers = paper_weights.rows();
  // present[t] lists papers (ascending) where theme t passes the threshold.
  std::vector<std::vector<std::size_t>> present(k);
  for (std::size_t p = 0; p < papers; ++p)
    for (std::size_t t = 0; t < k; ++t)
      if (paper_weights(p, cols[t]) >= tau) present[t].push_back(p);

  ThemeSimilarity out;
  out.presence_threshold = tau;
  out.values = Matrix(k, k);
  for (std::size_t t = 0; t < k; ++t) {
    out.values(t, t) = 1.0;
    if (present[t].empty()) out.empty.push_back(t);
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      if (present[a].empty() || present[b].empty()) continue;
      std::size_t inter = 0, i = 0, j = 0;
      while (i < present[a].size() && j < present[b].size()) {
        if (present[a][i] == present[b][j]) {
          ++inter, ++i, ++j;
        } else if (present[a][i] < present[b][j]) {
          ++i;
        } else {
          ++j;
        }
      }
      const std::size_t uni = present[a].size() + present[b].size() - inter;
      out.values(a, b) = out.values(b, a) = static_cast<double>(inter) / static_cast<double>(uni);
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> ClusterTree::members() const {
  std::vector<std::vector<std::size_t>> out(cluster_count);
  for (std::size_t leaf = 0; leaf < cluster_of.size(); ++leaf) out[cluster_of[leaf]].push_back(leaf);
  return out;
}

ClusterTree agglomerative_cluster(const Matrix& similarity, Linkage, const ClusterTarget& target) {
  const std::size_t n = similarity.rows();
  if (n == 0 || similarity.cols() != n)
    throw Error(ErrorCode::kInvalidArgument, "similarity matrix must be square and non-empty");

  // Active clusters live in slots; a merge keeps the left slot and retires
  // the right one. `sum` holds total pairwise similarity between slots.
  Matrix sum = similarity;
  std::vector<std::size_t> node(n), size(n, 1), min_leaf(n);
  std::iota(node.begin(), node.end(), 0);
  std::iota(min_leaf.begin(), min_leaf.end(), 0);
  std::vector<bool> active(n, true);

  ClusterTree tree;
  tree.leaf_count = n;
  double last_height = 0.0;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t best_a = 0, best_b = 0;
    double best = -std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_key{n, n};
    for (std::size_t a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!active[b]) continue;
        const double avg = sum(a, b) / static_cast<double>(size[a] * size[b]);
        std::pair<std::size_t, std::size_t> key{std::min(min_leaf[a], min_leaf[b]), std::max(min_leaf[a], min_leaf[b])};
        if (avg > best || (avg == best && key < best_key)) {
          best = avg;
          best_key = key;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (min_leaf[best_b] < min_leaf[best_a]) std::swap(best_a, best_b);

    Merge m;
    m.left = node[best_a];
    m.right = node[best_b];
    m.similarity = best;
    // Average linkage cannot invert; max() only absorbs rounding noise.
    m.height = std::max(last_height, 1.0 - best);
    m.size = size[best_a] + size[best_b];
    last_height = m.height;
    tree.merges.push_back(m);

    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == best_a || c == best_b) continue;
      sum(best_a, c) = sum(c, best_a) = sum(best_a, c) + sum(best_b, c);
    }
    size[best_a] = m.size;
    min_leaf[best_a] = std::min(min_leaf[best_a], min_leaf[best_b]);
    node[best_a] = n + step;
    active[best_b] = false;
  }

  tree.merges_applied = merges_for_target(tree.merges, n, target);
  UnionFind uf(2 * n);
  for (std::size_t i = 0; i < tree.merges_applied; ++i) {
    uf.unite(tree.merges[i].left, n + i);
    uf.unite(tree.merges[i].right, n + i);
  }
  std::map<std::size_t, std::size_t> root_to_cluster;
  tree.cluster_of.resize(n);
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    auto [it, inserted] = root_to_cluster.emplace(uf.find(leaf), root_to_cluster.size());
    tree.cluster_of[leaf] = it->second;
  }
  tree.cluster_count = root_to_cluster.size();
  return tree;
}

HexLayout hex_layout(const ClusterTree& tree, const Matrix& similarity) {
  const std::size_t n = tree.leaf_count;
  HexLayout layout;
  layout.cells.resize(n);
  layout.centroids.resize(tree.cluster_count);
  layout.seats.resize(tree.cluster_count);
  if (n == 0) return layout;

  const auto members = tree.members();
  std::vector<std::size_t> order;
  std::vector<bool> seen(tree.cluster_count, false);
  for (auto leaf : leaf_order(tree)) {
    const std::size_t c = tree.cluster_of[leaf];
    if (!seen[c]) {
      seen[c] = true;
      order.push_back(c);
    }
  }

  std::set<hex::Axial> occupied;
  std::vector<std::size_t> placed;
  for (const std::size_t c : order) {
    const auto& group = members[c];
    hex::Axial seat{0, 0};
    if (!placed.empty()) {
      std::size_t anchor = placed.front();
      double best = -1.0;
      for (auto p : placed) {
        const double sim = mean_similarity(similarity, group, members[p]);
        if (sim > best) {
          best = sim;
          anchor = p;
        }
      }
      const hex::Axial origin{0, 0};
      bool found = false;
      for (int d = 1; !found; ++d) {
        int best_origin = std::numeric_limits<int>::max();
        for (const hex::Axial& candidate : hex::ring(layout.seats[anchor], d)) {
          if (occupied.count(candidate)) continue;
          const auto cells = hex::spiral(candidate, group.size());
          bool fits = std::none_of(cells.begin(), cells.end(),
                                   [&](const hex::Axial& a) { return occupied.count(a) > 0; });
          const int dist = hex::distance(candidate, origin);
          if (fits && dist < best_origin) {
            best_origin = dist;
            seat = candidate;
            found = true;
          }
        }
      }
    }
    layout.seats[c] = seat;

    // Medoid first, then by similarity to it.
    std::size_t medoid = group.front();
    double medoid_score = -1.0;
    for (auto a : group) {
      double score = 0.0;
      for (auto b : group) score += a == b ? 0.0 : similarity(a, b);
      if (score > medoid_score) {
        medoid_score = score;
        medoid = a;
      }
    }
    std::vector<std::size_t> fill = group;
    std::sort(fill.begin(), fill.end(), [&](std::size_t a, std::size_t b) {
      if (a == medoid || b == medoid) return a == medoid && b != medoid;
      if (similarity(medoid, a) != similarity(medoid, b))
        return similarity(medoid, a) > similarity(medoid, b);
      return a < b;
    });
    const auto cells = hex::spiral(seat, fill.size());
    HexLayout::Centroid centroid;
    for (std::size_t i = 0; i < fill.size(); ++i) {
      layout.cells[fill[i]] = cells[i];
      occupied.insert(cells[i]);
      centroid.q += cells[i].q;
      centroid.r += cells[i].r;
    }
    centroid.q /= static_cast<double>(fill.size());
    centroid.r /= static_cast<double>(fill.size());
    layout.centroids[c] = centroid;
    placed.push_back(c);
  }
  return layout;
}

std::vector<std::string> assign_colors(const ClusterTree& tree, Palette palette) {
  if (tree.cluster_count < 1) throw Error(ErrorCode::kInvalidArgument, "tree has no clusters");
  return palette_colors(palette, tree.cluster_count);
}

std::vector<std::string> ThemeMap::colors_by_theme(std::size_t topic_count) const {
  std::vector<std::string> out(topic_count, kOffMapColor);
  for (std::size_t i = 0; i < themes.size(); ++i) out.at(themes[i]) = theme_color(i);
  return out;
}

ThemeMap build_theme_map(const TopicModel& model, const Vocabulary& vocab, const MapOptions& options,
                         std::span<const ThemeId> themes, Palette palette, std::string model_hash) {
  ThemeMap map;
  map.model_hash = std::move(model_hash);
  map.options = options;
  map.palette = palette;
  if (themes.empty()) {
    map.themes.resize(model.topic_count());
    std::iota(map.themes.begin(), map.themes.end(), ThemeId{0});
  } else {
    map.themes.assign(themes.begin(), themes.end());
  }
  map.similarity = theme_cooccurrence(model.paper_weight_matrix(), options.presence_threshold, map.themes);
  ClusterTarget target = options.clusters;
  if (target.kind == ClusterTarget::Kind::kCount)
    target.count = std::min(target.count, map.themes.size());
  map.tree = agglomerative_cluster(map.similarity.values, Linkage::kAverage, target);
  map.layout = hex_layout(map.tree, map.similarity.values);
  map.cluster_colors = assign_colors(map.tree, palette);
  for (ThemeId t : map.themes) map.words.push_back(top_words(model, vocab, t, options.top_terms));
  return map;
}

json cluster_target_to_json(const ClusterTarget& target) {
  switch (target.kind) {
    case ClusterTarget::Kind::kCount: return {{"rule", "count"}, {"count", target.count}};
    case ClusterTarget::Kind::kCutHeight: return {{"rule", "cut_height"}, {"height", target.height}};
    case ClusterTarget::Kind::kLargestGap: return {{"rule", "largest_gap"}};
  }
  return {};
}

ClusterTarget cluster_target_from_json(const json& j) {
  const std::string rule = j.at("rule").get<std::string>();
  if (rule == "count") return ClusterTarget::clusters(j.at("count").get<std::size_t>());
  if (rule == "cut_height") return ClusterTarget::cut_height(j.at("height").get<double>());
  if (rule == "largest_gap") return ClusterTarget::largest_gap();
  throw Error(ErrorCode::kDataError, "unknown cluster rule '" + rule + "'");
}

json theme_map_to_json(const ThemeMap& map) {
  json themes = json::array();
  for (std::size_t i = 0; i < map.themes.size(); ++i) {
    json terms = json::array();
    for (const auto& tw : map.words[i].top_terms) terms.push_back({{"term", tw.term}, {"weight", tw.weight}});
    themes.push_back({{"id", map.themes[i]},
                      {"label", map.words[i].auto_label},
                      {"top_terms", std::move(terms)},
                      {"q", map.layout.cells[i].q},
                      {"r", map.layout.cells[i].r},
                      {"cluster", map.tree.cluster_of[i]},
                      {"color", map.theme_color(i)}});
  }
  json clusters = json::array();
  const auto members = map.tree.members();
  for (std::size_t c = 0; c < map.tree.cluster_count; ++c) {
    json ids = json::array();
    for (auto local : members[c]) ids.push_back(map.themes[local]);
    clusters.push_back({{"id", c},
                        {"color", map.cluster_colors[c]},
                        {"centroid", {{"q", map.layout.centroids[c].q}, {"r", map.layout.centroids[c].r}}},
                        {"themes", std::move(ids)}});
  }
  json merges = json::array();
  for (const auto& m : map.tree.merges)
    merges.push_back({{"left", m.left}, {"right", m.right}, {"similarity", m.similarity},
                      {"height", m.height}, {"size", m.size}});
  json sim = json::array();
  for (std::size_t r = 0; r < map.similarity.values.rows(); ++r) {
    auto row = map.similarity.values.row(r);
    sim.push_back(std::vector<double>(row.begin(), row.end()));
  }
  json empty = json::array();
  for (auto local : map.similarity.empty) empty.push_back(map.themes[local]);

  return {{"format", kLayoutFormat},
          {"version", kLayoutVersion},
          {"model_hash", map.model_hash},
          {"palette", map.palette == Palette::kOverview ? "overview" : "excerpt"},
          {"presence_threshold", map.options.presence_threshold},
          {"cluster_target", cluster_target_to_json(map.options.clusters)},
          {"top_terms", map.options.top_terms},
          {"cluster_count", map.tree.cluster_count},
          {"merges_applied", map.tree.merges_applied},
          {"themes", std::move(themes)},
          {"clusters", std::move(clusters)},
          {"merges", std::move(merges)},
          {"similarity", std::move(sim)},
          {"empty_themes", std::move(empty)}};
}

std::string serialize_layout(const ThemeMap& map) { return theme_map_to_json(map).dump(2) + "\n"; }

LayoutHeader read_layout_header(std::string_view bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kDataError, "corrupt_artifact", std::string("layout artifact: ") + e.what());
  }
  if (j.value("format", "") != kLayoutFormat || j.value("version", 0) != kLayoutVersion)
    throw Error(ErrorCode::kDataError, "corrupt_artifact", "not a version 1 layout artifact");
  try {
    LayoutHeader h;
    h.model_hash = j.at("model_hash").get<std::string>();
    h.options.presence_threshold = j.at("presence_threshold").get<double>();
    h.options.clusters = cluster_target_from_json(j.at("cluster_target"));
    h.options.top_terms = j.at("top_terms").get<std::size_t>();
    return h;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kDataError, "corrupt_artifact", std::string("layout artifact: ") + e.what());
  }
}

void save_layout(const ThemeMap& map, const std::string& path) {
  io::write_file_atomic(path, serialize_layout(map));
}

}  // namespace thematic
