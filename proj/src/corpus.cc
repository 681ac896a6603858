#include "thematic/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "binary_io.h"
#include "thematic/hash.h"

namespace thematic {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kBundleMagic = "TMCB";
constexpr std::uint32_t kBundleVersion = 1;

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string metadata_value(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

Document document_from_record(const json& rec, const std::string& where) {
  if (!rec.is_object())
    throw Error(ErrorCode::kDataError, "malformed_record", where + ": record is not an object");
  auto field = [&](const char* name) -> std::string {
    auto it = rec.find(name);
    if (it == rec.end() || !it->is_string() || it->get<std::string>().empty())
      throw Error(ErrorCode::kDataError, std::string("missing_") + name,
                  where + ": missing or empty field '" + name + "'");
    return it->get<std::string>();
  };
  Document doc;
  doc.doc_id = field("doc_id");
  doc.title = field("title");
  if (auto it = rec.find("metadata"); it != rec.end() && !it->is_null()) {
    if (!it->is_object())
      throw Error(ErrorCode::kDataError, "malformed_record",
                  where + ": metadata for '" + doc.doc_id + "' is not an object");
    for (const auto& [k, v] : it->items()) doc.metadata[k] = metadata_value(v);
  }
  return doc;
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kDataError, "malformed_record", where + ": " + e.what());
  }
}

Corpus load_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read manifest: " + manifest.string());
  const fs::path base = manifest.parent_path();
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const std::string where = manifest.string() + ":" + std::to_string(line_no);
    json rec = parse_json(line, where);
    Document doc = document_from_record(rec, where);
    auto bp = rec.find("body_path");
    if (bp == rec.end() || !bp->is_string())
      throw Error(ErrorCode::kDataError, "missing_body_path",
                  where + ": missing body_path for '" + doc.doc_id + "'");
    fs::path body_path = bp->get<std::string>();
    if (body_path.is_relative()) body_path = base / body_path;
    doc.body = io::read_file(body_path.string());
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_directory(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Corpus corpus;
  for (const auto& path : files) {
    json rec = parse_json(io::read_file(path.string()), path.string());
    Document doc = document_from_record(rec, path.string());
    auto body = rec.find("body");
    if (body == rec.end() || !body->is_string())
      throw Error(ErrorCode::kDataError, "missing_body",
                  path.string() + ": missing body for '" + doc.doc_id + "'");
    doc.body = body->get<std::string>();
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

void write_vocabulary(io::Writer& w, const Vocabulary& vocab) {
  w.u32(static_cast<std::uint32_t>(vocab.options().min_df));
  w.f64(vocab.options().max_df_fraction);
  w.u32(static_cast<std::uint32_t>(vocab.stopwords().size()));
  for (const auto& s : vocab.stopwords()) w.str(s);
  w.u32(static_cast<std::uint32_t>(vocab.size()));
  for (TermId id = 0; id < vocab.size(); ++id) {
    w.str(vocab.term(id));
    w.u32(vocab.document_frequency(id));
  }
}

}  // namespace

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "manifest") return CorpusFormat::kManifest;
  if (name == "directory") return CorpusFormat::kDirectory;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown corpus format '" + std::string(name) + "' (manifest|directory)");
}

Corpus load_corpus(const fs::path& source, CorpusFormat format) {
  std::error_code ec;
  if (!fs::exists(source, ec))
    throw Error(ErrorCode::kIoError, "corpus source does not exist: " + source.string());
  if (format == CorpusFormat::kDirectory && !fs::is_directory(source))
    throw Error(ErrorCode::kIoError, "corpus source is not a directory: " + source.string());

  Corpus corpus = format == CorpusFormat::kManifest ? load_manifest(source) : load_directory(source);

  std::sort(corpus.begin(), corpus.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (i > 0 && corpus[i].doc_id == corpus[i - 1].doc_id)
      throw Error(ErrorCode::kDataError, "duplicate_doc_id",
                  "duplicate doc_id '" + corpus[i].doc_id + "' in " + source.string());
    if (is_blank(corpus[i].body))
      throw Error(ErrorCode::kDataError, "empty_body",
                  "document '" + corpus[i].doc_id + "' has an empty body");
  }
  return corpus;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerRules& rules) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_alpha(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_alpha(static_cast<unsigned char>(text[j]))) ++j;
    if (j - i >= rules.min_length) {
      std::string tok(text.substr(i, j - i));
      if (rules.lowercase)
        for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (!std::binary_search(rules.stopwords.begin(), rules.stopwords.end(), tok))
        tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

std::vector<Chunk> chunk_document(std::string_view doc_id, std::span<const TermId> tokens,
                                  std::size_t chunk_count) {
  if (chunk_count == 0) throw Error(ErrorCode::kInvalidArgument, "chunk count must be >= 1");
  if (tokens.size() < chunk_count)
    throw Error(ErrorCode::kDataError, "too_short",
                "document '" + std::string(doc_id) + "' has " + std::to_string(tokens.size()) +
                    " tokens, fewer than " + std::to_string(chunk_count) + " chunks");
  auto parts = split_balanced(tokens, chunk_count);
  std::vector<Chunk> chunks(chunk_count);
  for (std::size_t i = 0; i < chunk_count; ++i) {
    chunks[i].doc_id = std::string(doc_id);
    chunks[i].index = static_cast<std::uint32_t>(i);
    chunks[i].tokens = std::move(parts[i]);
  }
  return chunks;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> document_frequency,
                       std::vector<std::string> stopwords, VocabularyOptions options)
    : terms_(std::move(terms)),
      df_(std::move(document_frequency)),
      stopwords_(std::move(stopwords)),
      options_(options) {
  if (terms_.size() != df_.size())
    throw Error(ErrorCode::kDataError, "vocabulary term and frequency lists differ in length");
  for (std::size_t i = 1; i < terms_.size(); ++i)
    if (!(terms_[i - 1] < terms_[i]))
      throw Error(ErrorCode::kDataError, "vocabulary terms must be strictly sorted");
}

std::optional<TermId> Vocabulary::id_of(std::string_view term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term);
  if (it == terms_.end() || *it != term) return std::nullopt;
  return static_cast<TermId>(it - terms_.begin());
}

std::vector<TermId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TermId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens)
    if (auto id = id_of(t)) ids.push_back(*id);
  return ids;
}

std::string Vocabulary::hash() const {
  io::Writer w;
  write_vocabulary(w, *this);
  return sha256_hex(w.bytes());
}

Vocabulary build_vocabulary(std::span<const TokenizedText> texts, const VocabularyOptions& options,
                            const std::vector<std::string>& stopwords) {
  if (options.min_df < 1) throw Error(ErrorCode::kInvalidArgument, "min_df must be >= 1");
  if (!(options.max_df_fraction > 0.0 && options.max_df_fraction <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "max_df_fraction must be in (0, 1]");

  std::map<std::string, std::set<std::string_view>> docs_by_term;
  std::set<std::string_view> doc_ids;
  for (const auto& text : texts) {
    doc_ids.insert(text.doc_id);
    for (const auto& tok : text.tokens) docs_by_term[tok].insert(text.doc_id);
  }
  std::vector<std::string> sorted_stop = stopwords;
  std::sort(sorted_stop.begin(), sorted_stop.end());

  const double max_df = options.max_df_fraction * static_cast<double>(doc_ids.size());
  std::vector<std::string> terms;
  std::vector<std::uint32_t> df;
  for (const auto& [term, docs] : docs_by_term) {
    if (docs.size() < options.min_df || static_cast<double>(docs.size()) > max_df) continue;
    if (std::binary_search(sorted_stop.begin(), sorted_stop.end(), term)) continue;
    terms.push_back(term);
    df.push_back(static_cast<std::uint32_t>(docs.size()));
  }
  if (terms.empty())
    throw Error(ErrorCode::kInvalidArgument, "empty_vocabulary",
                "no term satisfies min_df=" + std::to_string(options.min_df) +
                    " and max_df_fraction=" + std::to_string(options.max_df_fraction));
  return Vocabulary(std::move(terms), std::move(df), std::move(sorted_stop), options);
}

std::size_t EncodedDocument::token_count() const {
  std::size_t n = 0;
  for (const auto& c : chunks) n += c.tokens.size();
  return n;
}

std::size_t CorpusBundle::total_tokens() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.token_count();
  return n;
}

CorpusBundle ingest(const Corpus& corpus, const IngestOptions& options) {
  if (options.chunk_count == 0) throw Error(ErrorCode::kInvalidArgument, "chunk count must be >= 1");
  TokenizerRules rules = options.tokenizer;
  std::sort(rules.stopwords.begin(), rules.stopwords.end());

  CorpusBundle bundle;
  bundle.chunk_count = static_cast<std::uint32_t>(options.chunk_count);
  bundle.lowercase = rules.lowercase;
  bundle.min_token_length = static_cast<std::uint32_t>(rules.min_length);

  std::vector<TokenizedText> texts;
  std::vector<const Document*> sources;
  for (const auto& doc : corpus) {
    auto tokens = tokenize(doc.body, rules);
    if (tokens.size() < options.chunk_count) {
      bundle.excluded.push_back({doc.doc_id, "too_short", static_cast<std::uint32_t>(tokens.size())});
      continue;
    }
    texts.push_back({doc.doc_id, std::move(tokens)});
    sources.push_back(&doc);
  }
  if (texts.empty())
    throw Error(ErrorCode::kDataError, "no_documents",
                "no document has at least " + std::to_string(options.chunk_count) + " tokens");

  bundle.vocabulary = build_vocabulary(texts, options.vocabulary, rules.stopwords);

  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto ids = bundle.vocabulary.encode(texts[i].tokens);
    const Document& src = *sources[i];
    if (ids.size() < options.chunk_count) {
      bundle.excluded.push_back({src.doc_id, "too_short", static_cast<std::uint32_t>(ids.size())});
      continue;
    }
    EncodedDocument enc;
    enc.doc_id = src.doc_id;
    enc.title = src.title;
    enc.metadata = src.metadata;
    enc.chunks = chunk_document(src.doc_id, ids, options.chunk_count);
    bundle.documents.push_back(std::move(enc));
  }
  std::sort(bundle.documents.begin(), bundle.documents.end(),
            [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
  std::sort(bundle.excluded.begin(), bundle.excluded.end(),
            [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
  return bundle;
}

std::string serialize_bundle(const CorpusBundle& bundle) {
  io::Writer w;
  w.raw(kBundleMagic);
  w.u32(kBundleVersion);
  w.u32(bundle.chunk_count);
  w.u8(bundle.lowercase ? 1 : 0);
  w.u32(bundle.min_token_length);
  write_vocabulary(w, bundle.vocabulary);
  w.u32(static_cast<std::uint32_t>(bundle.documents.size()));
  for (const auto& doc : bundle.documents) {
    w.str(doc.doc_id);
    w.str(doc.title);
    w.u32(static_cast<std::uint32_t>(doc.metadata.size()));
    for (const auto& [k, v] : doc.metadata) {
      w.str(k);
      w.str(v);
    }
    for (const auto& chunk : doc.chunks) {
      w.u32(static_cast<std::uint32_t>(chunk.tokens.size()));
      for (TermId t : chunk.tokens) w.u32(t);
    }
  }
  w.u32(static_cast<std::uint32_t>(bundle.excluded.size()));
  for (const auto& ex : bundle.excluded) {
    w.str(ex.doc_id);
    w.str(ex.reason);
    w.u32(ex.token_count);
  }
  return w.take();
}

CorpusBundle deserialize_bundle(std::string_view bytes) {
  io::Reader r(bytes, "corpus bundle");
  if (r.raw(kBundleMagic.size()) != kBundleMagic) r.fail("not a corpus bundle (bad magic)");
  if (std::uint32_t v = r.u32(); v != kBundleVersion)
    r.fail("unsupported bundle version " + std::to_string(v));
  CorpusBundle b;
  b.chunk_count = r.u32();
  if (b.chunk_count == 0) r.fail("chunk count is zero");
  b.lowercase = r.u8() != 0;
  b.min_token_length = r.u32();

  VocabularyOptions vopt;
  vopt.min_df = r.u32();
  vopt.max_df_fraction = r.f64();
  std::vector<std::string> stop(r.u32());
  for (auto& s : stop) s = r.str();
  std::uint32_t v = r.u32();
  std::vector<std::string> terms(v);
  std::vector<std::uint32_t> df(v);
  for (std::uint32_t i = 0; i < v; ++i) {
    terms[i] = r.str();
    df[i] = r.u32();
  }
  b.vocabulary = Vocabulary(std::move(terms), std::move(df), std::move(stop), vopt);

  std::uint32_t n = r.u32();
  b.documents.resize(n);
  for (auto& doc : b.documents) {
    doc.doc_id = r.str();
    doc.title = r.str();
    std::uint32_t m = r.u32();
    for (std::uint32_t i = 0; i < m; ++i) {
      std::string k = r.str();
      doc.metadata[k] = r.str();
    }
    doc.chunks.resize(b.chunk_count);
    for (std::uint32_t c = 0; c < b.chunk_count; ++c) {
      auto& chunk = doc.chunks[c];
      chunk.doc_id = doc.doc_id;
      chunk.index = c;
      chunk.tokens.resize(r.u32());
      for (auto& t : chunk.tokens) {
        t = r.u32();
        if (t >= v) r.fail("term id out of range in '" + doc.doc_id + "'");
      }
    }
  }
  for (std::size_t i = 1; i < b.documents.size(); ++i)
    if (!(b.documents[i - 1].doc_id < b.documents[i].doc_id))
      r.fail("documents not sorted by unique doc_id");
  b.excluded.resize(r.u32());
  for (auto& ex : b.excluded) {
    ex.doc_id = r.str();
    ex.reason = r.str();
    ex.token_count = r.u32();
  }
  r.expect_end();
  return b;
}

void save_bundle(const CorpusBundle& bundle, const std::string& path) {
  io::write_file_atomic(path, serialize_bundle(bundle));
}

CorpusBundle load_bundle(const std::string& path) {
  return deserialize_bundle(io::read_file(path));
}

}  // namespace thematic
