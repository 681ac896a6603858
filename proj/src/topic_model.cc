#include "thematic/topic_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.h"
#include "thematic/hash.h"
#include "thematic/rng.h"

namespace thematic {

namespace {

constexpr std::string_view kModelMagic = "TMLM";
constexpr std::uint32_t kModelVersion = 1;
constexpr double kRowSumTolerance = 1e-9;

void check_stochastic_rows(const Matrix& m, const char* name) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (double v : m.row(r)) {
      if (!(v >= 0.0))
        throw Error(ErrorCode::kDataError, std::string(name) + " has a negative or NaN entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw Error(ErrorCode::kDataError,
                  std::string(name) + " row " + std::to_string(r) + " does not sum to 1");
  }
}

// Collapsed Gibbs sampler state. Counts are kept as integers so the sampler is
// exactly reproducible; word-topic counts are stored word-major for locality.
class GibbsSampler {
 public:
  GibbsSampler(const CorpusBundle& bundle, std::size_t topics, double alpha, double beta,
               std::uint64_t seed)
      : k_(topics), v_(bundle.vocabulary.size()), alpha_(alpha), beta_(beta), rng_(seed) {
    for (const auto& doc : bundle.documents) {
      for (const auto& chunk : doc.chunks) {
        chunk_begin_.push_back(words_.size());
        words_.insert(words_.end(), chunk.tokens.begin(), chunk.tokens.end());
      }
    }
    chunk_begin_.push_back(words_.size());
    const std::size_t m = chunk_begin_.size() - 1;
    n_chunk_topic_.assign(m * k_, 0);
    n_word_topic_.assign(v_ * k_, 0);
    n_topic_.assign(k_, 0);
    z_.resize(words_.size());
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t t = chunk_begin_[c]; t < chunk_begin_[c + 1]; ++t) {
        auto k = static_cast<std::uint32_t>(rng_.below(k_));
        z_[t] = k;
        add(c, words_[t], k, +1);
      }
    }
    cumulative_.resize(k_);
  }

  std::size_t chunk_rows() const { return chunk_begin_.size() - 1; }
  std::size_t tokens() const { return words_.size(); }

  void sweep() {
    const double v_beta = static_cast<double>(v_) * beta_;
    for (std::size_t c = 0; c < chunk_rows(); ++c) {
      std::int64_t* chunk_counts = &n_chunk_topic_[c * k_];
      for (std::size_t t = chunk_begin_[c]; t < chunk_begin_[c + 1]; ++t) {
        const TermId w = words_[t];
        add(c, w, z_[t], -1);
        const std::int64_t* word_counts = &n_word_topic_[static_cast<std::size_t>(w) * k_];
        double total = 0.0;
        for (std::size_t k = 0; k < k_; ++k) {
          total += (static_cast<double>(chunk_counts[k]) + alpha_) *
                   (static_cast<double>(word_counts[k]) + beta_) /
                   (static_cast<double>(n_topic_[k]) + v_beta);
          cumulative_[k] = total;
        }
        const double u = rng_.uniform() * total;
        std::size_t k_new = 0;
        while (k_new + 1 < k_ && cumulative_[k_new] <= u) ++k_new;
        z_[t] = static_cast<std::uint32_t>(k_new);
        add(c, w, z_[t], +1);
      }
    }
  }

  std::uint64_t topic_count_total() const {
    return static_cast<std::uint64_t>(std::accumulate(n_topic_.begin(), n_topic_.end(), std::int64_t{0}));
  }

  // log p(w, z) with phi and theta integrated out.
  double log_likelihood() const {
    const double kd = static_cast<double>(k_);
    const double vd = static_cast<double>(v_);
    const double lg_beta = std::lgamma(beta_);
    const double lg_alpha = std::lgamma(alpha_);
    double ll = kd * (std::lgamma(vd * beta_) - vd * lg_beta);
    for (std::size_t k = 0; k < k_; ++k) {
      ll -= std::lgamma(static_cast<double>(n_topic_[k]) + vd * beta_);
    }
    for (std::size_t w = 0; w < v_; ++w) {
      for (std::size_t k = 0; k < k_; ++k) {
        auto n = n_word_topic_[w * k_ + k];
        ll += n == 0 ? lg_beta : std::lgamma(static_cast<double>(n) + beta_);
      }
    }
    const std::size_t m = chunk_rows();
    ll += static_cast<double>(m) * (std::lgamma(kd * alpha_) - kd * lg_alpha);
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t k = 0; k < k_; ++k) {
        auto n = n_chunk_topic_[c * k_ + k];
        ll += n == 0 ? lg_alpha : std::lgamma(static_cast<double>(n) + alpha_);
      }
      const auto len = static_cast<double>(chunk_begin_[c + 1] - chunk_begin_[c]);
      ll -= std::lgamma(len + kd * alpha_);
    }
    return ll;
  }

  Matrix phi() const {
    Matrix phi(k_, v_);
    const double v_beta = static_cast<double>(v_) * beta_;
    for (std::size_t k = 0; k < k_; ++k) {
      const double denom = static_cast<double>(n_topic_[k]) + v_beta;
      for (std::size_t w = 0; w < v_; ++w)
        phi(k, w) = (static_cast<double>(n_word_topic_[w * k_ + k]) + beta_) / denom;
    }
    return phi;
  }

  Matrix theta() const {
    Matrix theta(chunk_rows(), k_);
    const double k_alpha = static_cast<double>(k_) * alpha_;
    for (std::size_t c = 0; c < chunk_rows(); ++c) {
      const double denom = static_cast<double>(chunk_begin_[c + 1] - chunk_begin_[c]) + k_alpha;
      for (std::size_t k = 0; k < k_; ++k)
        theta(c, k) = (static_cast<double>(n_chunk_topic_[c * k_ + k]) + alpha_) / denom;
    }
    return theta;
  }

  std::vector<std::uint32_t> chunk_lengths() const {
    std::vector<std::uint32_t> out(chunk_rows());
    for (std::size_t c = 0; c < out.size(); ++c)
      out[c] = static_cast<std::uint32_t>(chunk_begin_[c + 1] - chunk_begin_[c]);
    return out;
  }

  const std::vector<std::uint32_t>& assignments() const { return z_; }

 private:
  void add(std::size_t chunk, TermId w, std::uint32_t k, int delta) {
    n_chunk_topic_[chunk * k_ + k] += delta;
    n_word_topic_[static_cast<std::size_t>(w) * k_ + k] += delta;
    n_topic_[k] += delta;
  }

  std::size_t k_;
  std::size_t v_;
  double alpha_;
  double beta_;
  Rng rng_;
  std::vector<TermId> words_;
  std::vector<std::size_t> chunk_begin_;
  std::vector<std::uint32_t> z_;
  std::vector<std::int64_t> n_chunk_topic_;
  std::vector<std::int64_t> n_word_topic_;
  std::vector<std::int64_t> n_topic_;
  std::vector<double> cumulative_;
};

}  // namespace

TopicModel::TopicModel(Parts parts) : parts_(std::move(parts)) {
  const std::size_t k = parts_.phi.rows();
  if (k < 2) throw Error(ErrorCode::kDataError, "model needs at least 2 topics");
  if (parts_.iterations < 1) throw Error(ErrorCode::kDataError, "model iterations must be >= 1");
  if (!(parts_.alpha > 0.0) || !(parts_.beta > 0.0))
    throw Error(ErrorCode::kDataError, "model priors must be positive");
  if (parts_.chunks_per_document == 0) throw Error(ErrorCode::kDataError, "chunks per document is zero");
  if (!std::is_sorted(parts_.doc_ids.begin(), parts_.doc_ids.end()) ||
      std::adjacent_find(parts_.doc_ids.begin(), parts_.doc_ids.end()) != parts_.doc_ids.end())
    throw Error(ErrorCode::kDataError, "model doc ids must be sorted and unique");
  const std::size_t m = parts_.doc_ids.size() * parts_.chunks_per_document;
  if (parts_.theta.rows() != m || parts_.theta.cols() != k)
    throw Error(ErrorCode::kDataError, "theta shape does not match documents x topics");
  if (parts_.chunk_lengths.size() != m)
    throw Error(ErrorCode::kDataError, "chunk length list does not match chunk rows");
  if (!parts_.assignments.empty()) {
    const std::uint64_t tokens = std::accumulate(parts_.chunk_lengths.begin(), parts_.chunk_lengths.end(),
                                                 std::uint64_t{0});
    if (parts_.assignments.size() != tokens)
      throw Error(ErrorCode::kDataError, "assignment count does not match token count");
    for (auto z : parts_.assignments)
      if (z >= k) throw Error(ErrorCode::kDataError, "topic assignment out of range");
  }
  check_stochastic_rows(parts_.phi, "phi");
  check_stochastic_rows(parts_.theta, "theta");

  const std::size_t c = parts_.chunks_per_document;
  paper_weights_ = Matrix(parts_.doc_ids.size(), k);
  for (std::size_t d = 0; d < parts_.doc_ids.size(); ++d) {
    auto out = paper_weights_.row(d);
    for (std::size_t j = 0; j < c; ++j) {
      auto row = parts_.theta.row(d * c + j);
      for (std::size_t t = 0; t < k; ++t) out[t] += row[t];
    }
    for (auto& v : out) v /= static_cast<double>(c);
  }
}

std::optional<std::size_t> TopicModel::document_index(std::string_view doc_id) const {
  auto it = std::lower_bound(parts_.doc_ids.begin(), parts_.doc_ids.end(), doc_id);
  if (it == parts_.doc_ids.end() || *it != doc_id) return std::nullopt;
  return static_cast<std::size_t>(it - parts_.doc_ids.begin());
}

std::size_t TopicModel::require_document(std::string_view doc_id) const {
  if (auto idx = document_index(doc_id)) return *idx;
  throw Error(ErrorCode::kNotFound, "unknown_doc_id", "unknown doc_id '" + std::string(doc_id) + "'");
}

void TopicModel::require_theme(std::size_t theme_id) const {
  if (theme_id >= topic_count())
    throw Error(ErrorCode::kNotFound, "unknown_theme",
                "theme " + std::to_string(theme_id) + " out of range [0, " +
                    std::to_string(topic_count()) + ")");
}

double TopicModel::smoothing_floor(std::size_t row) const {
  const double k_alpha = static_cast<double>(topic_count()) * parts_.alpha;
  return parts_.alpha / (static_cast<double>(parts_.chunk_lengths.at(row)) + k_alpha);
}

bool TopicModel::operator==(const TopicModel& o) const {
  const Parts& a = parts_;
  const Parts& b = o.parts_;
  return a.alpha == b.alpha && a.beta == b.beta && a.seed == b.seed && a.iterations == b.iterations &&
         a.chunks_per_document == b.chunks_per_document && a.doc_ids == b.doc_ids &&
         a.chunk_lengths == b.chunk_lengths && a.assignments == b.assignments && a.phi == b.phi &&
         a.theta == b.theta && a.log_likelihood == b.log_likelihood &&
         a.corpus_hash == b.corpus_hash && a.vocabulary_hash == b.vocabulary_hash;
}

TopicModel train_lda(const CorpusBundle& bundle, const LdaOptions& options,
                     const SweepObserver& observer) {
  if (bundle.documents.empty() || bundle.total_tokens() == 0)
    throw Error(ErrorCode::kDataError, "empty_corpus", "corpus bundle has no modeled documents");
  const std::size_t k = options.topics;
  const double alpha = options.resolved_alpha();
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "topic count must be >= 2");
  if (k > bundle.vocabulary.size())
    throw Error(ErrorCode::kInvalidArgument,
                "topic count " + std::to_string(k) + " exceeds vocabulary size " +
                    std::to_string(bundle.vocabulary.size()));
  if (!(alpha > 0.0) || !(options.beta > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "alpha and beta must be positive");
  if (options.iterations < 1) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");

  GibbsSampler sampler(bundle, k, alpha, options.beta, options.seed);
  std::vector<double> trace;
  trace.reserve(options.iterations);
  for (std::size_t s = 1; s <= options.iterations; ++s) {
    sampler.sweep();
    trace.push_back(sampler.log_likelihood());
    if (observer) observer({s, trace.back(), sampler.topic_count_total(), sampler.tokens()});
  }

  TopicModel::Parts parts;
  parts.alpha = alpha;
  parts.beta = options.beta;
  parts.seed = options.seed;
  parts.iterations = static_cast<std::uint32_t>(options.iterations);
  parts.chunks_per_document = bundle.chunk_count;
  for (const auto& doc : bundle.documents) parts.doc_ids.push_back(doc.doc_id);
  parts.chunk_lengths = sampler.chunk_lengths();
  parts.assignments = sampler.assignments();
  parts.phi = sampler.phi();
  parts.theta = sampler.theta();
  parts.log_likelihood = std::move(trace);
  parts.corpus_hash = sha256_hex(serialize_bundle(bundle));
  parts.vocabulary_hash = bundle.vocabulary.hash();
  return TopicModel(std::move(parts));
}

Theme top_words(const TopicModel& model, const Vocabulary& vocab, std::size_t theme_id,
                std::size_t n) {
  model.require_theme(theme_id);
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "top word count must be >= 1");
  if (vocab.size() != model.vocabulary_size())
    throw Error(ErrorCode::kDataError, "vocabulary does not match model");
  auto row = model.phi().row(theme_id);
  std::vector<TermId> ids(row.size());
  std::iota(ids.begin(), ids.end(), TermId{0});
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](TermId a, TermId b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
  Theme theme;
  theme.theme_id = static_cast<ThemeId>(theme_id);
  for (std::size_t i = 0; i < n; ++i)
    theme.top_terms.push_back({ids[i], vocab.term(ids[i]), row[ids[i]]});
  for (std::size_t i = 0; i < std::min<std::size_t>(3, n); ++i) {
    if (i) theme.auto_label += ", ";
    theme.auto_label += theme.top_terms[i].term;
  }
  return theme;
}

PaperThemeDistribution paper_distribution(const TopicModel& model, std::string_view doc_id) {
  const std::size_t d = model.require_document(doc_id);
  auto w = model.paper_weights(d);
  return {std::string(doc_id), std::vector<double>(w.begin(), w.end())};
}

std::string serialize_model(const TopicModel& model) {
  const auto& p = model.parts();
  io::Writer w;
  w.raw(kModelMagic);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(model.topic_count()));
  w.u32(static_cast<std::uint32_t>(model.vocabulary_size()));
  w.u32(p.chunks_per_document);
  w.u32(static_cast<std::uint32_t>(p.doc_ids.size()));
  w.f64(p.alpha);
  w.f64(p.beta);
  w.u64(p.seed);
  w.u32(p.iterations);
  w.str(p.corpus_hash);
  w.str(p.vocabulary_hash);
  for (const auto& id : p.doc_ids) w.str(id);
  for (auto len : p.chunk_lengths) w.u32(len);
  w.u64(p.assignments.size());
  for (auto z : p.assignments) w.u32(z);
  for (double v : p.phi.data()) w.f64(v);
  for (double v : p.theta.data()) w.f64(v);
  w.u32(static_cast<std::uint32_t>(p.log_likelihood.size()));
  for (double v : p.log_likelihood) w.f64(v);
  return w.take();
}

TopicModel deserialize_model(std::string_view bytes) {
  io::Reader r(bytes, "model artifact");
  if (r.raw(kModelMagic.size()) != kModelMagic) r.fail("not a model artifact (bad magic)");
  if (std::uint32_t v = r.u32(); v != kModelVersion)
    r.fail("unsupported model version " + std::to_string(v));
  TopicModel::Parts p;
  const std::uint32_t k = r.u32();
  const std::uint32_t v = r.u32();
  p.chunks_per_document = r.u32();
  const std::uint32_t n = r.u32();
  p.alpha = r.f64();
  p.beta = r.f64();
  p.seed = r.u64();
  p.iterations = r.u32();
  p.corpus_hash = r.str();
  p.vocabulary_hash = r.str();
  p.doc_ids.resize(n);
  for (auto& id : p.doc_ids) id = r.str();
  const std::size_t m = static_cast<std::size_t>(n) * p.chunks_per_document;
  p.chunk_lengths.resize(m);
  for (auto& len : p.chunk_lengths) len = r.u32();
  const std::uint64_t tokens = r.u64();
  if (tokens > bytes.size()) r.fail("implausible token count");
  p.assignments.resize(tokens);
  for (auto& z : p.assignments) z = r.u32();
  if (static_cast<std::uint64_t>(k) * v * 8 > bytes.size() || m * k * 8 > bytes.size())
    r.fail("implausible matrix dimensions");
  p.phi = Matrix(k, v);
  for (auto& x : p.phi.data()) x = r.f64();
  p.theta = Matrix(m, k);
  for (auto& x : p.theta.data()) x = r.f64();
  p.log_likelihood.resize(r.u32());
  for (auto& x : p.log_likelihood) x = r.f64();
  r.expect_end();
  return TopicModel(std::move(p));
}

void save_model(const TopicModel& model, const std::string& path) {
  io::write_file_atomic(path, serialize_model(model));
}

TopicModel load_model(const std::string& path) { return deserialize_model(io::read_file(path)); }

std::string model_hash(const TopicModel& model) { return sha256_hex(serialize_model(model)); }

}  // namespace thematic
