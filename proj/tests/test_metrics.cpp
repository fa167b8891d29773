#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qidf/metrics.hpp"

using namespace qidf;

namespace {

RankedList ranking(std::initializer_list<const char*> ids)
{
    RankedList list{"q", {}};
    double score = 100.0;
    std::uint32_t i = 0;
    for (const char* id : ids) {
        list.hits.push_back({i++, id, score});
        score -= 1.0;
    }
    return list;
}

RankedList ranked_with_gold_at(std::size_t rank, std::size_t length = 30)
{
    RankedList list{"q", {}};
    for (std::size_t i = 1; i <= length; ++i) {
        list.hits.push_back({static_cast<std::uint32_t>(i), i == rank ? "gold" : "d" + std::to_string(i),
                             static_cast<double>(length - i)});
    }
    return list;
}

} // namespace

TEST(Ndcg, SingleRelevant)
{
    Judgments j = {{"gold", 1}};
    EXPECT_DOUBLE_EQ(*ndcg_at_k(ranked_with_gold_at(1), j), 1.0);
    EXPECT_DOUBLE_EQ(*ndcg_at_k(ranked_with_gold_at(23), j), 0.0);
    EXPECT_DOUBLE_EQ(*ndcg_at_k(ranked_with_gold_at(10), j), 1.0 / std::log2(11.0));
    EXPECT_DOUBLE_EQ(*ndcg_at_k(ranked_with_gold_at(11), j), 0.0);
}

TEST(Ndcg, TwoRelevantAtRanksTwoAndThree)
{
    Judgments j = {{"r1", 1}, {"r2", 1}, {"n", 0}};
    double want = (1.0 / std::log2(3.0) + 1.0 / std::log2(4.0)) / (1.0 + 1.0 / std::log2(3.0));
    EXPECT_DOUBLE_EQ(*ndcg_at_k(ranking({"x", "r1", "r2", "y"}), j), want);
}

TEST(Ndcg, LinearGradedGains)
{
    Judgments j = {{"a", 2}, {"b", 1}};
    double dcg = 1.0 / 1.0 + 2.0 / std::log2(3.0);
    double idcg = 2.0 / 1.0 + 1.0 / std::log2(3.0);
    EXPECT_DOUBLE_EQ(*ndcg_at_k(ranking({"b", "a"}), j), dcg / idcg);
}

TEST(Ndcg, NoRelevantIsSkipped)
{
    EXPECT_FALSE(ndcg_at_k(ranking({"a"}), Judgments{{"a", 0}}).has_value());
    EXPECT_FALSE(ndcg_at_k(ranking({"a"}), Judgments{}).has_value());
}

TEST(Mrr, Values)
{
    Judgments j = {{"gold", 1}};
    EXPECT_DOUBLE_EQ(*reciprocal_rank(ranked_with_gold_at(4), j), 0.25);
    EXPECT_DOUBLE_EQ(*reciprocal_rank(ranked_with_gold_at(4), j, 3), 0.0);
    EXPECT_DOUBLE_EQ(*reciprocal_rank(ranking({"x"}), j), 0.0);
}

TEST(Recall, Values)
{
    Judgments j = {{"a", 1}, {"b", 1}};
    EXPECT_DOUBLE_EQ(*recall_at_k(ranking({"x", "y", "a"}), j, 2), 0.0);
    EXPECT_DOUBLE_EQ(*recall_at_k(ranking({"b", "a", "x"}), j, 2), 1.0);
    EXPECT_DOUBLE_EQ(*recall_at_k(ranking({"b", "x", "a"}), j, 2), 0.5);
}

TEST(Evaluate, MeanOverJudgedQueries)
{
    QrelSet qrels;
    qrels.judgments["q1"]["a"] = 1;
    qrels.judgments["q2"]["b"] = 1;
    qrels.judgments["q3"]["c"] = 0;
    std::vector<RankedList> lists = {
        {"q1", {{0, "a", 1.0}}},
        {"q2", {{0, "x", 2.0}, {1, "b", 1.0}}},
        {"q3", {{0, "c", 1.0}}},
        {"q4", {{0, "c", 1.0}}},
    };
    auto report = evaluate(lists, qrels, Metric::mrr);
    EXPECT_EQ(report.n_queries, 2U);
    EXPECT_EQ(report.skipped, 2U);
    EXPECT_DOUBLE_EQ(report.per_query.at("q1"), 1.0);
    EXPECT_DOUBLE_EQ(report.per_query.at("q2"), 0.5);
    EXPECT_DOUBLE_EQ(report.mean, 0.75);
    EXPECT_DOUBLE_EQ(evaluate(lists, qrels, Metric::recall, 1).mean, 0.5);
}

TEST(NdcgProperties, InvariantUnderMonotoneScoreTransform)
{
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> scores(40);
        for (auto& s : scores) {
            s = u(rng);
        }
        Judgments j;
        for (int r = 0; r < 5; ++r) {
            j["d" + std::to_string(rng() % 40)] = static_cast<int>(rng() % 3) + 1;
        }
        auto rank = [&](auto transform) {
            std::vector<std::uint32_t> order(40);
            std::vector<double> t;
            for (double s : scores) {
                t.push_back(transform(s));
            }
            std::vector<std::uint32_t> scratch;
            RankedList list{"q", {}};
            for (auto d : select_top_k(t, 40, scratch)) {
                list.hits.push_back({d, "d" + std::to_string(d), t[d]});
            }
            return *ndcg_at_k(list, j);
        };
        double base = rank([](double s) { return s; });
        EXPECT_DOUBLE_EQ(base, rank([](double s) { return std::exp(s); }));
        EXPECT_DOUBLE_EQ(base, rank([](double s) { return 3.0 * s + 7.0; }));
        EXPECT_DOUBLE_EQ(base, rank([](double s) { return std::atan(s); }));
        EXPECT_GE(base, 0.0);
        EXPECT_LE(base, 1.0);
    }
}
