#pragma once

// LDA trained by collapsed Gibbs sampling. Each chunk is one LDA document;
// paper-level theme weights are the mean of the paper's chunk rows.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thematic/corpus.h"
#include "thematic/matrix.h"

namespace thematic {

using ThemeId = std::uint32_t;

inline constexpr std::size_t kDefaultTopicCount = 85;
inline constexpr double kDefaultBeta = 0.01;
inline constexpr std::size_t kDefaultIterations = 1000;

inline double default_alpha(std::size_t topics) { return 50.0 / static_cast<double>(topics); }

struct LdaOptions {
  std::size_t topics = kDefaultTopicCount;
  std::optional<double> alpha;  // symmetric; 50/K when unset
  double beta = kDefaultBeta;
  std::size_t iterations = kDefaultIterations;
  std::uint64_t seed = 1;

  double resolved_alpha() const { return alpha.value_or(default_alpha(topics)); }
};

struct SweepStats {
  std::size_t sweep = 0;  // 1-based
  double log_likelihood = 0.0;
  std::uint64_t topic_count_total = 0;  // sum over topics of n_k
  std::uint64_t token_total = 0;
};

using SweepObserver = std::function<void(const SweepStats&)>;

class TopicModel {
 public:
  struct Parts {
    double alpha = 0.0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t iterations = 1;
    std::uint32_t chunks_per_document = 0;
    std::vector<std::string> doc_ids;           // sorted, unique
    std::vector<std::uint32_t> chunk_lengths;   // tokens per chunk row
    std::vector<std::uint32_t> assignments;     // per token; may be empty
    Matrix phi;                                 // K x V
    Matrix theta;                               // (N * C) x K
    std::vector<double> log_likelihood;         // one entry per sweep
    std::string corpus_hash;
    std::string vocabulary_hash;
  };

  TopicModel() = default;
  /// Validates shapes and the normalization invariants; throws Error(kDataError).
  explicit TopicModel(Parts parts);

  std::size_t topic_count() const { return parts_.phi.rows(); }
  std::size_t vocabulary_size() const { return parts_.phi.cols(); }
  std::size_t document_count() const { return parts_.doc_ids.size(); }
  std::size_t chunks_per_document() const { return parts_.chunks_per_document; }
  std::size_t chunk_count() const { return parts_.theta.rows(); }

  double alpha() const { return parts_.alpha; }
  double beta() const { return parts_.beta; }
  std::uint64_t seed() const { return parts_.seed; }
  std::uint32_t iterations() const { return parts_.iterations; }
  const std::string& corpus_hash() const { return parts_.corpus_hash; }
  const std::string& vocabulary_hash() const { return parts_.vocabulary_hash; }

  const Matrix& phi() const { return parts_.phi; }
  const Matrix& theta() const { return parts_.theta; }
  const std::vector<std::uint32_t>& assignments() const { return parts_.assignments; }
  const std::vector<std::uint32_t>& chunk_lengths() const { return parts_.chunk_lengths; }
  const std::vector<double>& log_likelihood() const { return parts_.log_likelihood; }
  const std::vector<std::string>& doc_ids() const { return parts_.doc_ids; }

  std::optional<std::size_t> document_index(std::string_view doc_id) const;
  /// Same as document_index but throws Error(kNotFound).
  std::size_t require_document(std::string_view doc_id) const;
  void require_theme(std::size_t theme_id) const;

  std::size_t chunk_row(std::size_t doc_index, std::size_t chunk) const {
    return doc_index * parts_.chunks_per_document + chunk;
  }
  std::span<const double> chunk_theta(std::size_t doc_index, std::size_t chunk) const {
    return parts_.theta.row(chunk_row(doc_index, chunk));
  }
  /// Mean of the document's chunk theta rows.
  std::span<const double> paper_weights(std::size_t doc_index) const {
    return paper_weights_.row(doc_index);
  }
  const Matrix& paper_weight_matrix() const { return paper_weights_; }

  /// Smallest value a theta entry of this chunk row can take: the weight of
  /// a theme with no tokens assigned in the chunk.
  double smoothing_floor(std::size_t row) const;

  const Parts& parts() const { return parts_; }
  bool operator==(const TopicModel& other) const;

 private:
  Parts parts_;
  Matrix paper_weights_;
};

/// Throws Error(kDataError, "empty_corpus") or Error(kInvalidArgument) when
/// K < 2, K > V, alpha/beta <= 0 or iterations < 1.
TopicModel train_lda(const CorpusBundle& bundle, const LdaOptions& options,
                     const SweepObserver& observer = {});

struct TermWeight {
  TermId term_id = 0;
  std::string term;
  double weight = 0.0;
};

struct Theme {
  ThemeId theme_id = 0;
  std::vector<TermWeight> top_terms;  // weight descending, term id ascending on ties
  std::string auto_label;             // top three terms joined
};

Theme top_words(const TopicModel& model, const Vocabulary& vocab, std::size_t theme_id,
                std::size_t n);

struct PaperThemeDistribution {
  std::string doc_id;
  std::vector<double> weights;
};

PaperThemeDistribution paper_distribution(const TopicModel& model, std::string_view doc_id);

std::string serialize_model(const TopicModel& model);
TopicModel deserialize_model(std::string_view bytes);
void save_model(const TopicModel& model, const std::string& path);
TopicModel load_model(const std::string& path);
/// SHA-256 of serialize_model(model), i.e. of the artifact file.
std::string model_hash(const TopicModel& model);

}  // namespace thematic
