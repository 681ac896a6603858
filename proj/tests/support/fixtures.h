#pragma once

// Synthetic corpora and models for the tests, plus brute-force reference
// implementations that deliberately share no code with the library.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "thematic/corpus.h"
#include "thematic/matrix.h"
#include "thematic/theme_map.h"
#include "thematic/topic_model.h"

namespace testing_support {

using thematic::Matrix;

/// Alphabetic pseudo-word for an index: "zq" + base-26 letters. Never a
/// stopword and always at least three letters.
std::string word(std::size_t index);

struct GeneratedCorpus {
  thematic::Corpus corpus;
  std::size_t topics = 0;
  std::vector<std::vector<std::string>> topic_words;  // true vocabulary per topic
  Matrix phi;                                         // topics x (vocab) true word probabilities
  std::vector<std::string> vocab;                     // column names for phi
};

/// Documents drawn from `topics` topics with disjoint vocabularies of
/// vocab/topics words each (Zipf-like weights). Each document mixes one or
/// two topics.
GeneratedCorpus disjoint_topic_corpus(std::size_t topics, std::size_t docs, std::size_t vocab,
                                      std::size_t tokens_per_doc, std::uint64_t seed);

/// A trained model small enough for per-test use, with its bundle.
struct Trained {
  thematic::CorpusBundle bundle;
  thematic::TopicModel model;
};
Trained small_trained(std::uint64_t seed = 3, std::size_t docs = 40, std::size_t topics = 6,
                      std::size_t chunks = 10);

/// A model with random theta rows (some entries exactly zero) and random phi.
/// Doc ids are "d000", "d001", ... Pairs of documents share identical rows
/// every `tie_every` documents so that relevance ties occur.
thematic::TopicModel random_model(std::size_t docs, std::size_t chunks, std::size_t topics,
                                  std::size_t vocab, std::uint64_t seed, std::size_t tie_every = 7);

/// Random symmetric matrix with unit diagonal. With `dyadic`, entries are
/// multiples of 1/16 so every average the clustering computes is exact and
/// ties are frequent.
Matrix random_similarity(std::size_t n, std::mt19937_64& rng, bool dyadic);

// ---- Oracles -------------------------------------------------------------

Matrix jaccard_oracle(const Matrix& paper_weights, double tau);

struct OracleMerge {
  std::size_t left, right, size;
  double similarity;
};
/// Average linkage by explicit member lists, recomputing every cluster pair
/// average from the raw matrix at every step.
std::vector<OracleMerge> average_linkage_oracle(const Matrix& s);

/// Cluster label per leaf after the first `merges` merges, clusters numbered
/// by smallest leaf.
std::vector<std::size_t> cut_oracle(std::size_t n, const std::vector<OracleMerge>& merges,
                                    std::size_t applied);

int cube_distance(int q1, int r1, int q2, int r2);

/// Reads a whole file.
std::string slurp(const std::filesystem::path& path);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

/// Writes `corpus` as a manifest (JSON lines plus one body file per doc).
std::filesystem::path write_manifest(const thematic::Corpus& corpus, const std::filesystem::path& dir);

}  // namespace testing_support
