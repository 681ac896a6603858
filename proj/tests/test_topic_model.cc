#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "thematic/topic_model.h"

using namespace thematic;
using namespace testing_support;

namespace {

CorpusBundle tiny_bundle(std::size_t chunks = 5) {
  auto gen = disjoint_topic_corpus(3, 18, 60, 60, 4);
  IngestOptions opts;
  opts.chunk_count = chunks;
  return ingest(gen.corpus, opts);
}

LdaOptions quick(std::size_t k = 3, std::size_t iters = 30, std::uint64_t seed = 9) {
  LdaOptions o;
  o.topics = k;
  o.iterations = iters;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(Lda, RejectsBadConfigurations) {
  CorpusBundle b = tiny_bundle();
  auto expect_code = [&](LdaOptions o, ErrorCode code) {
    try {
      train_lda(b, o);
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  expect_code(quick(1), ErrorCode::kInvalidArgument);
  expect_code(quick(b.vocabulary.size() + 1), ErrorCode::kInvalidArgument);
  LdaOptions o = quick();
  o.alpha = 0.0;
  expect_code(o, ErrorCode::kInvalidArgument);
  o = quick();
  o.beta = -1.0;
  expect_code(o, ErrorCode::kInvalidArgument);
  expect_code(quick(3, 0), ErrorCode::kInvalidArgument);

  CorpusBundle empty;
  empty.vocabulary = b.vocabulary;
  try {
    train_lda(empty, quick());
    ADD_FAILURE() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDataError);
  }
}

TEST(Lda, DefaultAlphaIsFiftyOverK) {
  LdaOptions o;
  EXPECT_EQ(o.topics, 85u);
  EXPECT_DOUBLE_EQ(o.resolved_alpha(), 50.0 / 85.0);
  EXPECT_DOUBLE_EQ(o.beta, 0.01);
  EXPECT_EQ(o.iterations, 1000u);
}

TEST(Lda, SameSeedSameModel) {
  CorpusBundle b = tiny_bundle();
  TopicModel m1 = train_lda(b, quick());
  TopicModel m2 = train_lda(b, quick());
  EXPECT_TRUE(m1 == m2);
  EXPECT_EQ(serialize_model(m1), serialize_model(m2));
  TopicModel m3 = train_lda(b, quick(3, 30, 10));
  EXPECT_NE(m1.assignments(), m3.assignments());
}

TEST(Lda, RowsAreNormalized) {
  CorpusBundle b = tiny_bundle();
  TopicModel m = train_lda(b, quick(4));
  for (const Matrix* mat : {&m.phi(), &m.theta(), &m.paper_weight_matrix()}) {
    for (std::size_t r = 0; r < mat->rows(); ++r) {
      auto row = mat->row(r);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
      for (double v : row) EXPECT_GT(v, 0.0);
    }
  }
}

TEST(Lda, EstimatesFollowFromFinalAssignments) {
  CorpusBundle b = tiny_bundle();
  const LdaOptions opts = quick(4, 25);
  TopicModel m = train_lda(b, opts);
  const std::size_t k = m.topic_count(), v = m.vocabulary_size();
  const double alpha = opts.resolved_alpha(), beta = opts.beta;

  std::vector<std::vector<std::size_t>> nck(m.chunk_count(), std::vector<std::size_t>(k));
  std::vector<std::vector<std::size_t>> nkw(k, std::vector<std::size_t>(v));
  std::vector<std::size_t> nk(k);
  std::size_t pos = 0, row = 0;
  for (const auto& doc : b.documents) {
    for (const auto& chunk : doc.chunks) {
      EXPECT_EQ(m.chunk_lengths()[row], chunk.tokens.size());
      for (TermId w : chunk.tokens) {
        const std::uint32_t z = m.assignments().at(pos++);
        ASSERT_LT(z, k);
        ++nck[row][z];
        ++nkw[z][w];
        ++nk[z];
      }
      ++row;
    }
  }
  EXPECT_EQ(pos, m.assignments().size());
  EXPECT_EQ(std::accumulate(nk.begin(), nk.end(), std::size_t{0}), b.total_tokens());
  for (std::size_t c = 0; c < m.chunk_count(); ++c)
    for (std::size_t t = 0; t < k; ++t)
      EXPECT_NEAR(m.theta()(c, t),
                  (static_cast<double>(nck[c][t]) + alpha) /
                      (static_cast<double>(m.chunk_lengths()[c]) + static_cast<double>(k) * alpha),
                  1e-12);
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t w = 0; w < v; ++w)
      EXPECT_NEAR(m.phi()(t, w),
                  (static_cast<double>(nkw[t][w]) + beta) /
                      (static_cast<double>(nk[t]) + static_cast<double>(v) * beta),
                  1e-12);
}

TEST(Lda, ObserverSeesConsistentCountsAndRisingLikelihood) {
  CorpusBundle b = tiny_bundle();
  std::vector<SweepStats> seen;
  TopicModel m = train_lda(b, quick(3, 40), [&](const SweepStats& s) { seen.push_back(s); });
  ASSERT_EQ(seen.size(), 40u);
  ASSERT_EQ(m.log_likelihood().size(), 40u);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i].sweep, i + 1);
    EXPECT_EQ(seen[i].topic_count_total, b.total_tokens());
    EXPECT_EQ(seen[i].token_total, b.total_tokens());
    EXPECT_EQ(seen[i].log_likelihood, m.log_likelihood()[i]);
  }
  EXPECT_GT(m.log_likelihood()[9], m.log_likelihood()[0]);
}

TEST(Lda, RecoversDisjointTopics) {
  auto gen = disjoint_topic_corpus(3, 60, 90, 200, 17);
  IngestOptions ing;
  ing.chunk_count = 10;
  CorpusBundle b = ingest(gen.corpus, ing);
  LdaOptions o = quick(3, 200, 5);
  TopicModel m = train_lda(b, o);
  Vocabulary v = b.vocabulary;
  // Each recovered theme's top word belongs to one generator topic, and all
  // three generator topics are hit.
  std::set<std::size_t> hit;
  for (std::size_t t = 0; t < 3; ++t) {
    Theme th = top_words(m, v, t, 5);
    std::set<std::size_t> owners;
    for (const auto& tw : th.top_terms)
      for (std::size_t g = 0; g < 3; ++g)
        if (std::count(gen.topic_words[g].begin(), gen.topic_words[g].end(), tw.term)) owners.insert(g);
    EXPECT_EQ(owners.size(), 1u) << th.auto_label;
    hit.insert(owners.begin(), owners.end());
  }
  EXPECT_EQ(hit.size(), 3u);
  // The generator's most probable word per topic is the recovered theme's top word.
  for (std::size_t t = 0; t < 3; ++t) {
    const std::string top = top_words(m, v, t, 1).top_terms[0].term;
    bool is_generator_top = false;
    for (const auto& words : gen.topic_words) is_generator_top |= words.front() == top;
    EXPECT_TRUE(is_generator_top) << top;
  }
}

TEST(TopWords, ArgmaxAndTieRule) {
  TopicModel::Parts p;
  p.alpha = 0.1;
  p.beta = 0.1;
  p.chunks_per_document = 1;
  p.doc_ids = {"a"};
  p.chunk_lengths = {4};
  p.phi = Matrix(2, 4);
  const double r0[] = {0.1, 0.2, 0.5, 0.2};
  const double r1[] = {0.25, 0.25, 0.25, 0.25};
  for (int i = 0; i < 4; ++i) p.phi(0, i) = r0[i], p.phi(1, i) = r1[i];
  p.theta = Matrix(1, 2, 0.5);
  TopicModel m(p);
  Vocabulary v({"analysis", "design", "interview", "study"}, {1, 1, 1, 1}, {}, {});
  Theme t0 = top_words(m, v, 0, 1);
  ASSERT_EQ(t0.top_terms.size(), 1u);
  EXPECT_EQ(t0.top_terms[0].term, "interview");
  EXPECT_DOUBLE_EQ(t0.top_terms[0].weight, 0.5);
  Theme t0b = top_words(m, v, 0, 3);
  EXPECT_EQ(t0b.top_terms[1].term_id, 1u);  // tie 0.2 / 0.2: lower id first
  EXPECT_EQ(t0b.top_terms[2].term_id, 3u);
  EXPECT_EQ(t0b.auto_label, "interview, design, study");
  Theme t1 = top_words(m, v, 1, 10);
  ASSERT_EQ(t1.top_terms.size(), 4u);
  for (TermId i = 0; i < 4; ++i) EXPECT_EQ(t1.top_terms[i].term_id, i);
  EXPECT_THROW(top_words(m, v, 2, 1), Error);
  EXPECT_THROW(top_words(m, v, 0, 0), Error);
}

TEST(PaperDistribution, MeanOfChunkRows) {
  TopicModel::Parts p;
  p.alpha = 0.1;
  p.beta = 0.1;
  p.chunks_per_document = 2;
  p.doc_ids = {"x"};
  p.chunk_lengths = {1, 1};
  p.phi = Matrix(2, 2, 0.5);
  p.theta = Matrix(2, 2);
  p.theta(0, 0) = 1.0;
  p.theta(1, 1) = 1.0;
  TopicModel m(p);
  EXPECT_EQ(paper_distribution(m, "x").weights, (std::vector<double>{0.5, 0.5}));
  EXPECT_THROW(paper_distribution(m, "y"), Error);
}

TEST(PaperDistribution, OneHotChunksGiveOneHotPaper) {
  TopicModel::Parts p;
  p.alpha = 0.1;
  p.beta = 0.1;
  p.chunks_per_document = 30;
  p.doc_ids = {"x"};
  p.chunk_lengths.assign(30, 3);
  p.phi = Matrix(5, 2, 0.5);
  p.theta = Matrix(30, 5);
  for (std::size_t c = 0; c < 30; ++c) p.theta(c, 3) = 1.0;
  TopicModel m(p);
  EXPECT_EQ(paper_distribution(m, "x").weights, (std::vector<double>{0, 0, 0, 1, 0}));
}

TEST(PaperDistribution, EqualsBruteForceMean) {
  TopicModel m = random_model(20, 7, 6, 10, 3);
  for (std::size_t d = 0; d < m.document_count(); ++d) {
    auto dist = paper_distribution(m, m.doc_ids()[d]);
    for (std::size_t t = 0; t < 6; ++t) {
      double sum = 0.0;
      for (std::size_t c = 0; c < 7; ++c) sum += m.theta()(d * 7 + c, t);
      EXPECT_NEAR(dist.weights[t], sum / 7.0, 1e-15);
    }
  }
}

TEST(TopicModelParts, ValidationRejectsBrokenModels) {
  TopicModel good = random_model(3, 2, 3, 4, 1);
  TopicModel::Parts p = good.parts();
  p.theta(0, 0) += 0.1;
  EXPECT_THROW(TopicModel{p}, Error);
  p = good.parts();
  p.phi = Matrix(3, 5, 0.2);
  p.phi(0, 0) = -0.2;
  p.phi(0, 1) = 0.6;
  EXPECT_THROW(TopicModel{p}, Error);
  p = good.parts();
  p.doc_ids.pop_back();
  EXPECT_THROW(TopicModel{p}, Error);
}

TEST(ModelArtifact, RoundTripAndCorruption) {
  CorpusBundle b = tiny_bundle();
  TopicModel m = train_lda(b, quick());
  const std::string bytes = serialize_model(m);
  EXPECT_EQ(bytes.substr(0, 4), "TMLM");
  TopicModel back = deserialize_model(bytes);
  EXPECT_TRUE(back == m);
  EXPECT_EQ(model_hash(back), model_hash(m));
  EXPECT_EQ(m.vocabulary_hash(), b.vocabulary.hash());
  EXPECT_THROW(deserialize_model(bytes.substr(0, bytes.size() - 3)), Error);
  EXPECT_THROW(deserialize_model(bytes + "!"), Error);
  std::string bad = bytes;
  bad[4] = 9;  // version
  EXPECT_THROW(deserialize_model(bad), Error);
}

TEST(ModelLookup, UnknownIds) {
  TopicModel m = random_model(3, 2, 3, 4, 1);
  try {
    m.require_document("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
    EXPECT_EQ(e.reason(), "unknown_doc_id");
  }
  EXPECT_THROW(m.require_theme(3), Error);
  EXPECT_NO_THROW(m.require_theme(2));
}
