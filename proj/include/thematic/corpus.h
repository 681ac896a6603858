#pragma once

// Corpus ingestion: loading documents, tokenizing, building the vocabulary
// and cutting each document into a fixed number of equal chunks.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thematic/error.h"
#include "thematic/stopwords.h"

namespace thematic {

using TermId = std::uint32_t;

inline constexpr std::size_t kDefaultChunkCount = 30;

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
  std::map<std::string, std::string> metadata;  // year, venue, authors, ...

  bool operator==(const Document&) const = default;
};

using Corpus = std::vector<Document>;

enum class CorpusFormat {
  kManifest,   // JSON-lines manifest with body_path per record
  kDirectory,  // directory of *.json records with inline body
};

/// Parses "manifest" or "directory".
CorpusFormat parse_corpus_format(std::string_view name);

/// Loads every document, sorted by doc_id. Rejects missing or duplicate ids,
/// missing titles and bodies that are empty after trimming.
Corpus load_corpus(const std::filesystem::path& source, CorpusFormat format);

struct TokenizerRules {
  bool lowercase = true;
  std::size_t min_length = 3;
  std::vector<std::string> stopwords = english_stopwords();  // sorted
};

/// Alphabetic ASCII runs of at least `min_length` characters, case-folded,
/// stopwords removed. Any other byte (digits, punctuation, non-ASCII) splits.
std::vector<std::string> tokenize(std::string_view text, const TokenizerRules& rules);

/// Order-preserving partition of `items` into `parts` runs whose lengths
/// differ by at most one; the first `items.size() % parts` runs get the extra
/// element. Requires parts >= 1 and items.size() >= parts.
template <class T>
std::vector<std::vector<T>> split_balanced(std::span<const T> items, std::size_t parts) {
  std::vector<std::vector<T>> out(parts);
  const std::size_t base = items.size() / parts;
  const std::size_t extra = items.size() % parts;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    std::size_t len = base + (i < extra ? 1 : 0);
    out[i].assign(items.begin() + pos, items.begin() + pos + len);
    pos += len;
  }
  return out;
}

struct Chunk {
  std::string doc_id;
  std::uint32_t index = 0;
  std::vector<TermId> tokens;

  bool operator==(const Chunk&) const = default;
};

/// Splits a document's encoded token sequence into `chunk_count` chunks.
/// Throws Error(kDataError, "too_short") when there are fewer tokens than
/// chunks, or kInvalidArgument when chunk_count is zero.
std::vector<Chunk> chunk_document(std::string_view doc_id, std::span<const TermId> tokens,
                                  std::size_t chunk_count);

struct VocabularyOptions {
  std::size_t min_df = 2;
  double max_df_fraction = 0.9;
};

/// Tokens attributed to one document. Several entries may share a doc_id
/// (e.g. one per chunk); document frequency counts distinct doc_ids.
struct TokenizedText {
  std::string doc_id;
  std::vector<std::string> tokens;
};

/// Term <-> id bijection. Ids are positions in lexicographic term order.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> document_frequency,
             std::vector<std::string> stopwords, VocabularyOptions options);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::string& term(TermId id) const { return terms_.at(id); }
  std::optional<TermId> id_of(std::string_view term) const;
  std::uint32_t document_frequency(TermId id) const { return df_.at(id); }

  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::uint32_t>& document_frequencies() const { return df_; }
  const std::vector<std::string>& stopwords() const { return stopwords_; }
  const VocabularyOptions& options() const { return options_; }

  /// Token ids for the in-vocabulary tokens, in order; others are dropped.
  std::vector<TermId> encode(std::span<const std::string> tokens) const;

  /// SHA-256 of the vocabulary's serialized form. Models record it so that a
  /// model can only be served against the bundle it was trained on.
  std::string hash() const;

  bool operator==(const Vocabulary& other) const {
    return terms_ == other.terms_ && df_ == other.df_ && stopwords_ == other.stopwords_ &&
           options_.min_df == other.options_.min_df &&
           options_.max_df_fraction == other.options_.max_df_fraction;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::vector<std::string> stopwords_;
  VocabularyOptions options_;
};

/// Keeps terms whose document frequency lies in
/// [min_df, max_df_fraction * N] (N = distinct doc_ids) and that are not
/// stopwords. Throws Error(kInvalidArgument) on bad thresholds or when no term
/// survives.
Vocabulary build_vocabulary(std::span<const TokenizedText> texts, const VocabularyOptions& options,
                            const std::vector<std::string>& stopwords);

struct EncodedDocument {
  std::string doc_id;
  std::string title;
  std::map<std::string, std::string> metadata;
  std::vector<Chunk> chunks;

  std::size_t token_count() const;
  bool operator==(const EncodedDocument&) const = default;
};

struct ExcludedDocument {
  std::string doc_id;
  std::string reason;  // "too_short"
  std::uint32_t token_count = 0;

  bool operator==(const ExcludedDocument&) const = default;
};

struct IngestOptions {
  std::size_t chunk_count = kDefaultChunkCount;
  TokenizerRules tokenizer;
  VocabularyOptions vocabulary;
};

/// Vocabulary plus every modeled document as `chunk_count` encoded chunks.
struct CorpusBundle {
  std::uint32_t chunk_count = kDefaultChunkCount;
  bool lowercase = true;
  std::uint32_t min_token_length = 3;
  Vocabulary vocabulary;
  std::vector<EncodedDocument> documents;  // sorted by doc_id
  std::vector<ExcludedDocument> excluded;

  std::size_t total_chunks() const { return documents.size() * chunk_count; }
  std::size_t total_tokens() const;
  bool operator==(const CorpusBundle&) const = default;
};

/// Tokenizes, builds the vocabulary over documents with at least
/// `chunk_count` tokens, re-encodes and chunks. Documents with fewer than
/// `chunk_count` tokens (before or after vocabulary filtering) are listed in
/// `excluded` instead of being padded.
CorpusBundle ingest(const Corpus& corpus, const IngestOptions& options);

std::string serialize_bundle(const CorpusBundle& bundle);
CorpusBundle deserialize_bundle(std::string_view bytes);
void save_bundle(const CorpusBundle& bundle, const std::string& path);
CorpusBundle load_bundle(const std::string& path);

}  // namespace thematic
