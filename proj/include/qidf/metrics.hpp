#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qidf/corpus_io.hpp"
#include "qidf/query.hpp"

namespace qidf {

using Judgments = std::map<std::string, int>;

namespace detail {

inline int relevance_of(const Judgments& judged, const std::string& doc_id)
{
    auto it = judged.find(doc_id);
    return it == judged.end() ? 0 : it->second;
}

inline std::size_t count_relevant(const Judgments& judged)
{
    return static_cast<std::size_t>(
        std::count_if(judged.begin(), judged.end(), [](const auto& kv) { return kv.second > 0; }));
}

} // namespace detail

/// NDCG@k with linear gains rel_i / log2(i + 1). Empty when the query has no
/// document with relevance > 0 (such queries are skipped, not scored 0).
inline std::optional<double> ndcg_at_k(const RankedList& ranked, const Judgments& judged, std::size_t k = 10)
{
    if (detail::count_relevant(judged) == 0) {
        return std::nullopt;
    }
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ranked.hits.size()); ++i) {
        dcg += detail::relevance_of(judged, ranked.hits[i].doc_id) / std::log2(static_cast<double>(i) + 2.0);
    }
    std::vector<int> ideal;
    for (const auto& [doc, rel] : judged) {
        if (rel > 0) {
            ideal.push_back(rel);
        }
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) {
        idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg / idcg;
}

/// 1 / rank of the first relevant hit within the first k hits, 0 if none.
inline std::optional<double> reciprocal_rank(const RankedList& ranked, const Judgments& judged,
                                             std::size_t k = std::numeric_limits<std::size_t>::max())
{
    if (detail::count_relevant(judged) == 0) {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < std::min(k, ranked.hits.size()); ++i) {
        if (detail::relevance_of(judged, ranked.hits[i].doc_id) > 0) {
            return 1.0 / static_cast<double>(i + 1);
        }
    }
    return 0.0;
}

/// |relevant within top k| / |relevant|.
inline std::optional<double> recall_at_k(const RankedList& ranked, const Judgments& judged, std::size_t k)
{
    auto relevant = detail::count_relevant(judged);
    if (relevant == 0) {
        return std::nullopt;
    }
    std::size_t found = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.hits.size()); ++i) {
        if (detail::relevance_of(judged, ranked.hits[i].doc_id) > 0) {
            ++found;
        }
    }
    return static_cast<double>(found) / static_cast<double>(relevant);
}

enum class Metric { ndcg, mrr, recall };

inline const char* to_string(Metric m)
{
    switch (m) {
    case Metric::ndcg: return "ndcg";
    case Metric::mrr: return "mrr";
    case Metric::recall: return "recall";
    }
    return "?";
}

struct EvalReport {
    std::map<std::string, double> per_query;
    double mean = 0.0;
    std::size_t n_queries = 0;
    /// Ranked queries without any relevant judgment.
    std::size_t skipped = 0;
};

/// Scores every ranked list against `qrels` with metric@k and averages over the
/// queries that have at least one relevant document.
inline EvalReport evaluate(std::span<const RankedList> lists, const QrelSet& qrels, Metric metric,
                           std::size_t k = 10)
{
    static const Judgments none;
    EvalReport report;
    for (const auto& list : lists) {
        const auto* judged = qrels.find(list.query_id);
        const Judgments& j = judged ? *judged : none;
        std::optional<double> value;
        switch (metric) {
        case Metric::ndcg: value = ndcg_at_k(list, j, k); break;
        case Metric::mrr: value = reciprocal_rank(list, j, k); break;
        case Metric::recall: value = recall_at_k(list, j, k); break;
        }
        if (!value) {
            ++report.skipped;
            continue;
        }
        report.per_query[list.query_id] = *value;
    }
    double sum = 0.0;
    for (const auto& [qid, v] : report.per_query) {
        sum += v;
    }
    report.n_queries = report.per_query.size();
    report.mean = report.n_queries ? sum / static_cast<double>(report.n_queries) : 0.0;
    return report;
}

} // namespace qidf
