#include "fixtures.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "thematic/pipeline.h"

namespace testing_support {

namespace fs = std::filesystem;

std::string word(std::size_t index) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('a' + index % 26));
    index /= 26;
  } while (index > 0);
  while (s.size() < 2) s.insert(s.begin(), 'a');
  return "zq" + s;
}

GeneratedCorpus disjoint_topic_corpus(std::size_t topics, std::size_t docs, std::size_t vocab,
                                      std::size_t tokens_per_doc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GeneratedCorpus out;
  out.topics = topics;
  const std::size_t per = vocab / topics;
  out.phi = Matrix(topics, per * topics);
  out.topic_words.resize(topics);
  for (std::size_t t = 0; t < topics; ++t) {
    double total = 0.0;
    for (std::size_t w = 0; w < per; ++w) total += 1.0 / static_cast<double>(w + 1);
    for (std::size_t w = 0; w < per; ++w) {
      const std::size_t col = t * per + w;
      out.vocab.push_back(word(col));
      out.topic_words[t].push_back(word(col));
      out.phi(t, col) = (1.0 / static_cast<double>(w + 1)) / total;
    }
  }
  std::vector<std::discrete_distribution<std::size_t>> draw;
  for (std::size_t t = 0; t < topics; ++t) {
    auto row = out.phi.row(t);
    draw.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(t * per),
                      row.begin() + static_cast<std::ptrdiff_t>((t + 1) * per));
  }
  std::uniform_int_distribution<std::size_t> pick_topic(0, topics - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t d = 0; d < docs; ++d) {
    const std::size_t main = d % topics;
    std::size_t second = pick_topic(rng);
    const double share = (d % 3 == 0 && second != main) ? 0.3 : 0.0;
    std::ostringstream body;
    for (std::size_t i = 0; i < tokens_per_doc; ++i) {
      const std::size_t t = unit(rng) < share ? second : main;
      body << out.topic_words[t][draw[t](rng)] << (i % 12 == 11 ? ". " : " ");
    }
    char id[16];
    std::snprintf(id, sizeof id, "g%04zu", d);
    out.corpus.push_back({id, "Generated paper number " + std::to_string(d), body.str(),
                          {{"year", std::to_string(2000 + d % 20)}}});
  }
  return out;
}

Trained small_trained(std::uint64_t seed, std::size_t docs, std::size_t topics, std::size_t chunks) {
  auto gen = disjoint_topic_corpus(4, docs, 120, 120, seed);
  thematic::IngestOptions ingest;
  ingest.chunk_count = chunks;
  thematic::CorpusBundle bundle = thematic::ingest(gen.corpus, ingest);
  thematic::LdaOptions lda;
  lda.topics = topics;
  lda.iterations = 60;
  lda.seed = seed;
  lda.alpha = 0.3;
  thematic::TopicModel model = thematic::train_lda(bundle, lda);
  return {std::move(bundle), std::move(model)};
}

thematic::TopicModel random_model(std::size_t docs, std::size_t chunks, std::size_t topics,
                                  std::size_t vocab, std::uint64_t seed, std::size_t tie_every) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  thematic::TopicModel::Parts p;
  p.alpha = 0.1;
  p.beta = 0.01;
  p.seed = seed;
  p.chunks_per_document = static_cast<std::uint32_t>(chunks);
  for (std::size_t d = 0; d < docs; ++d) {
    char id[16];
    std::snprintf(id, sizeof id, "d%03zu", d);
    p.doc_ids.push_back(id);
  }
  p.chunk_lengths.assign(docs * chunks, 20);
  auto fill_row = [&](std::span<double> row, double zero_prob) {
    double total = 0.0;
    for (auto& v : row) {
      const double u = unit(rng);
      v = u < zero_prob ? 0.0 : -std::log(unit(rng) + 1e-300);
      total += v;
    }
    if (total == 0.0) {
      row[0] = 1.0;
      total = 1.0;
    }
    for (auto& v : row) v /= total;
  };
  p.phi = Matrix(topics, vocab);
  for (std::size_t t = 0; t < topics; ++t) fill_row(p.phi.row(t), 0.0);
  p.theta = Matrix(docs * chunks, topics);
  for (std::size_t d = 0; d < docs; ++d) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto row = p.theta.row(d * chunks + c);
      if (tie_every > 0 && d % tie_every == 1) {
        auto prev = p.theta.row((d - 1) * chunks + c);
        std::copy(prev.begin(), prev.end(), row.begin());
      } else {
        fill_row(row, 0.6);
      }
    }
  }
  p.log_likelihood = {-1.0};
  p.corpus_hash = "synthetic";
  p.vocabulary_hash = "synthetic";
  return thematic::TopicModel(std::move(p));
}

Matrix random_similarity(std::size_t n, std::mt19937_64& rng, bool dyadic) {
  Matrix s(n, n);
  std::uniform_int_distribution<int> step(0, 16);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    s(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) s(i, j) = s(j, i) = dyadic ? step(rng) / 16.0 : unit(rng);
  }
  return s;
}

Matrix jaccard_oracle(const Matrix& w, double tau) {
  const std::size_t k = w.cols();
  std::vector<std::set<std::size_t>> sets(k);
  for (std::size_t p = 0; p < w.rows(); ++p)
    for (std::size_t t = 0; t < k; ++t)
      if (w(p, t) >= tau) sets[t].insert(p);
  Matrix s(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) {
        s(a, b) = 1.0;
        continue;
      }
      std::vector<std::size_t> inter, uni;
      std::set_intersection(sets[a].begin(), sets[a].end(), sets[b].begin(), sets[b].end(),
                            std::back_inserter(inter));
      std::set_union(sets[a].begin(), sets[a].end(), sets[b].begin(), sets[b].end(), std::back_inserter(uni));
      s(a, b) = uni.empty() ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
    }
  }
  return s;
}

std::vector<OracleMerge> average_linkage_oracle(const Matrix& s) {
  const std::size_t n = s.rows();
  struct Cluster {
    std::size_t id;
    std::vector<std::size_t> leaves;
  };
  std::vector<Cluster> live;
  for (std::size_t i = 0; i < n; ++i) live.push_back({i, {i}});
  std::vector<OracleMerge> out;
  while (live.size() > 1) {
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    std::pair<std::size_t, std::size_t> best_key{n, n};
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = 0; j < live.size(); ++j) {
        if (i == j) continue;
        double sum = 0.0;
        for (auto a : live[i].leaves)
          for (auto b : live[j].leaves) sum += s(a, b);
        const double avg = sum / static_cast<double>(live[i].leaves.size() * live[j].leaves.size());
        const std::size_t mi = *std::min_element(live[i].leaves.begin(), live[i].leaves.end());
        const std::size_t mj = *std::min_element(live[j].leaves.begin(), live[j].leaves.end());
        if (mi > mj) continue;  // visit each unordered pair once, smaller side first
        std::pair<std::size_t, std::size_t> key{mi, mj};
        if (avg > best || (avg == best && key < best_key)) {
          best = avg;
          best_key = key;
          bi = i;
          bj = j;
        }
      }
    }
    OracleMerge m{live[bi].id, live[bj].id, live[bi].leaves.size() + live[bj].leaves.size(), best};
    Cluster merged{n + out.size(), live[bi].leaves};
    merged.leaves.insert(merged.leaves.end(), live[bj].leaves.begin(), live[bj].leaves.end());
    out.push_back(m);
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(std::max(bi, bj)));
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(std::min(bi, bj)));
    live.push_back(std::move(merged));
  }
  return out;
}

std::vector<std::size_t> cut_oracle(std::size_t n, const std::vector<OracleMerge>& merges, std::size_t applied) {
  std::vector<std::set<std::size_t>> members(2 * n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::set<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) roots.insert(i);
  for (std::size_t i = 0; i < applied; ++i) {
    members[n + i] = members[merges[i].left];
    members[n + i].insert(members[merges[i].right].begin(), members[merges[i].right].end());
    roots.erase(merges[i].left);
    roots.erase(merges[i].right);
    roots.insert(n + i);
  }
  std::vector<std::pair<std::size_t, std::size_t>> by_min;  // (smallest leaf, root)
  for (auto r : roots) by_min.push_back({*members[r].begin(), r});
  std::sort(by_min.begin(), by_min.end());
  std::vector<std::size_t> label(n);
  for (std::size_t c = 0; c < by_min.size(); ++c)
    for (auto leaf : members[by_min[c].second]) label[leaf] = c;
  return label;
}

int cube_distance(int q1, int r1, int q2, int r2) {
  const int dq = q1 - q2, dr = r1 - r2, ds = (-q1 - r1) - (-q2 - r2);
  return std::max({std::abs(dq), std::abs(dr), std::abs(ds)});
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  fs::path dir = fs::temp_directory_path() / ("thematic_" + tag + "_" + std::to_string(rng() % 1000000000));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_manifest(const thematic::Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir / "docs");
  std::ofstream manifest(dir / "manifest.jsonl");
  for (const auto& d : corpus) {
    std::ofstream(dir / "docs" / (d.doc_id + ".txt")) << d.body;
    nlohmann::json rec = {{"doc_id", d.doc_id}, {"title", d.title}, {"body_path", "docs/" + d.doc_id + ".txt"},
                          {"metadata", d.metadata}};
    manifest << rec.dump() << "\n";
  }
  return dir / "manifest.jsonl";
}

}  // namespace testing_support
