#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "qidf/query.hpp"
#include "qidf/rescale.hpp"
#include "support.hpp"

using namespace qidf;

namespace {

Corpus small_corpus()
{
    Corpus c;
    c.add({"a", "alpha beta"});
    c.add({"b", "beta gamma gamma"});
    c.add({"c", "delta"});
    c.add({"d", "alpha alpha beta"});
    return c;
}

} // namespace

TEST(ScoreQuery, EmptyAndUnknownTokens)
{
    auto idx = build_index(small_corpus(), TokenizerMode::t0_default);
    auto s = score_query(idx, std::vector<Token>{});
    EXPECT_EQ(s, std::vector<double>(4, 0.0));
    auto u = score_query(idx, std::vector<Token>{"nothing"});
    EXPECT_EQ(u, std::vector<double>(4, 0.0));
}

TEST(ScoreQuery, RepeatedTokenCountsTwice)
{
    auto idx = build_index(small_corpus(), TokenizerMode::t0_default);
    auto once = score_query(idx, std::vector<Token>{"alpha"});
    auto twice = score_query(idx, std::vector<Token>{"alpha", "alpha"});
    for (std::size_t d = 0; d < once.size(); ++d) {
        EXPECT_EQ(twice[d], 2.0 * once[d]);
    }
}

TEST(TopK, KLargerThanNReturnsAll)
{
    auto idx = build_index(small_corpus(), TokenizerMode::t0_default);
    auto list = top_k(idx, "beta", TokenizerMode::t0_default, 50);
    EXPECT_EQ(list.hits.size(), 4U);
    for (std::size_t i = 1; i < list.hits.size(); ++i) {
        EXPECT_GE(list.hits[i - 1].score, list.hits[i].score);
    }
}

TEST(TopK, ZeroScoresFallBackToIndexOrder)
{
    auto idx = build_index(small_corpus(), TokenizerMode::t0_default);
    auto list = top_k(idx, "unrelated words", TokenizerMode::t0_default, 3);
    ASSERT_EQ(list.hits.size(), 3U);
    EXPECT_EQ(list.hits[0].doc_id, "a");
    EXPECT_EQ(list.hits[1].doc_id, "b");
    EXPECT_EQ(list.hits[2].doc_id, "c");
}

TEST(TopK, TiesByAscendingIndex)
{
    Corpus c;
    c.add({"x", "same words"});
    c.add({"y", "other"});
    c.add({"z", "same words"});
    auto idx = build_index(c, TokenizerMode::t0_default);
    auto list = top_k(idx, "same", TokenizerMode::t0_default, 3);
    EXPECT_EQ(list.hits[0].doc_id, "x");
    EXPECT_EQ(list.hits[1].doc_id, "z");
    EXPECT_EQ(list.hits[0].score, list.hits[1].score);
}

TEST(TopK, Errors)
{
    auto idx = build_index(small_corpus(), TokenizerMode::t0_default);
    EXPECT_THROW(top_k(idx, "alpha", TokenizerMode::t2_identifier_aware, 3), Error);
    EXPECT_THROW(top_k(idx, "alpha", TokenizerMode::t0_default, 0), DomainError);
}

TEST(TopK, HapaxDocumentRisesAtLowQ)
{
    // One document holds a df=1 token; 40 distractors of 400 share two mid-df tokens at tf 3.
    Corpus c;
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> fill(0, 29);
    for (int d = 0; d < 400; ++d) {
        std::string text;
        if (d < 40) {
            text = "common1 common1 common1 common2 common2 common2";
        } else if (d == 200) {
            text = "rareident";
        }
        for (int i = 0; i < 8; ++i) {
            text += " fill" + std::to_string(fill(rng));
        }
        c.add({"d" + std::to_string(d), text});
    }
    auto base = build_index<double>(c, TokenizerMode::t0_default);
    const std::string query = "rareident common1 common2";
    auto bm25 = top_k(base, query, TokenizerMode::t0_default, 100);
    std::size_t bm25_rank = 0;
    while (bm25.hits[bm25_rank].doc_id != "d200") {
        ++bm25_rank;
    }
    EXPECT_GT(bm25_rank, 0U);

    auto low = base;
    rescale_index(low, 0.1);
    auto qlog = top_k(low, query, TokenizerMode::t0_default, 100);
    EXPECT_EQ(qlog.hits[0].doc_id, "d200");

    qidf_test::DenseBm25 oracle(c, TokenizerMode::t0_default);
    auto expected = qidf_test::rank_dense(oracle.scores(query, 0.1), 100);
    EXPECT_EQ(expected[0], 200U);
    auto expected_bm25 = qidf_test::rank_dense(oracle.scores(query, 1.0), 100);
    EXPECT_EQ(expected_bm25[bm25_rank], 200U);
}

TEST(BatchRetrieve, OrderDeterminismAndThreads)
{
    std::mt19937_64 rng(10);
    auto corpus = qidf_test::random_corpus(rng, {120, 300, 30});
    auto idx = build_index(corpus, TokenizerMode::t0_default);
    QuerySet qs;
    for (int i = 0; i < 57; ++i) {
        qs.push_back({"q" + std::to_string(i), qidf_test::random_query(rng, 300)});
    }
    EXPECT_TRUE(batch_retrieve(idx, QuerySet{}, TokenizerMode::t0_default, 10).empty());
    auto serial = batch_retrieve(idx, qs, TokenizerMode::t0_default, 10);
    std::vector<double> latencies;
    auto parallel = batch_retrieve(idx, qs, TokenizerMode::t0_default, 10, default_stopwords(), {4, &latencies});
    ASSERT_EQ(serial.size(), qs.size());
    ASSERT_EQ(latencies.size(), qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
        EXPECT_EQ(serial[i].query_id, qs[i].query_id);
        EXPECT_EQ(parallel[i].query_id, qs[i].query_id);
        ASSERT_EQ(serial[i].hits.size(), parallel[i].hits.size());
        for (std::size_t r = 0; r < serial[i].hits.size(); ++r) {
            EXPECT_EQ(serial[i].hits[r].doc, parallel[i].hits[r].doc);
            EXPECT_EQ(serial[i].hits[r].score, parallel[i].hits[r].score);
        }
        EXPECT_GE(latencies[i], 0.0);
    }
}

TEST(WriteRun, TrecRows)
{
    std::vector<RankedList> lists = {{"q1", {{0, "a", 2.5}, {3, "d", 1.0}}}};
    std::ostringstream out;
    write_run(out, lists);
    EXPECT_EQ(out.str(), "q1\ta\t1\t2.5\nq1\td\t2\t1\n");
}
