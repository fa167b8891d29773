#pragma once

#include <algorithm>
#include <chrono>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qidf/corpus_io.hpp"
#include "qidf/errors.hpp"
#include "qidf/index.hpp"
#include "qidf/tokenizer.hpp"

namespace qidf {

struct Hit {
    std::uint32_t doc = 0;
    std::string doc_id;
    double score = 0.0;
};

/// Hits in descending score order; equal scores are ordered by ascending document index.
struct RankedList {
    std::string query_id;
    std::vector<Hit> hits;
};

/// Accumulates matrix[t, d] over the query tokens (with multiplicity) into a
/// dense per-document vector. Unknown tokens contribute nothing. This is the
/// single query path shared by every scorer and IDF transform.
template <std::floating_point Real>
void score_query_into(const BasicScoreIndex<Real>& index, std::span<const Token> tokens, std::vector<double>& out)
{
    out.assign(index.num_docs(), 0.0);
    for (const auto& tok : tokens) {
        auto t = index.term_id(tok);
        if (!t) {
            continue;
        }
        auto docs = index.column_docs(*t);
        auto vals = index.column_scores(*t);
        for (std::size_t i = 0; i < docs.size(); ++i) {
            out[docs[i]] += static_cast<double>(vals[i]);
        }
    }
}

template <std::floating_point Real>
std::vector<double> score_query(const BasicScoreIndex<Real>& index, std::span<const Token> tokens)
{
    std::vector<double> scores;
    score_query_into(index, tokens, scores);
    return scores;
}

/// Indices of the k best entries of `scores` (all of them when k >= size),
/// by descending score then ascending index.
inline std::vector<std::uint32_t> select_top_k(std::span<const double> scores, std::size_t k,
                                               std::vector<std::uint32_t>& scratch)
{
    const std::size_t n = scores.size();
    k = std::min(k, n);
    scratch.resize(n);
    std::iota(scratch.begin(), scratch.end(), 0U);
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    };
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end(), better);
    return {scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k)};
}

template <std::floating_point Real>
RankedList top_k_tokens(const BasicScoreIndex<Real>& index, std::span<const Token> tokens, std::size_t k,
                        std::string query_id = {})
{
    if (k == 0) {
        throw DomainError("top_k: k must be >= 1");
    }
    std::vector<double> scores;
    std::vector<std::uint32_t> scratch;
    score_query_into(index, tokens, scores);
    RankedList list{std::move(query_id), {}};
    for (auto d : select_top_k(scores, k, scratch)) {
        list.hits.push_back({d, index.doc_id(d), scores[d]});
    }
    return list;
}

template <std::floating_point Real>
void require_mode(const BasicScoreIndex<Real>& index, TokenizerMode mode)
{
    if (index.header().mode != mode) {
        throw Error(std::string("tokenizer mode ") + to_string(mode) + " does not match index mode "
                    + to_string(index.header().mode));
    }
}

/// Tokenizes `query_text` with `mode` and returns the k best documents.
template <std::floating_point Real>
RankedList top_k(const BasicScoreIndex<Real>& index, std::string_view query_text, TokenizerMode mode, std::size_t k,
                 const StopwordSet& stopwords = default_stopwords(), std::string query_id = {})
{
    require_mode(index, mode);
    auto tokens = tokenize(query_text, mode, stopwords);
    return top_k_tokens(index, tokens, k, std::move(query_id));
}

struct BatchOptions {
    std::size_t threads = 1;
    /// When set, receives one wall-clock latency in milliseconds per query (query order).
    std::vector<double>* latencies_ms = nullptr;
};

/// top_k over every query; output order matches `queries`. Each worker owns a
/// contiguous slice of queries, so results do not depend on the thread count.
template <std::floating_point Real>
std::vector<RankedList> batch_retrieve(const BasicScoreIndex<Real>& index, const QuerySet& queries,
                                       TokenizerMode mode, std::size_t k,
                                       const StopwordSet& stopwords = default_stopwords(), BatchOptions opts = {})
{
    require_mode(index, mode);
    if (k == 0) {
        throw DomainError("top_k: k must be >= 1");
    }
    std::vector<RankedList> out(queries.size());
    if (opts.latencies_ms) {
        opts.latencies_ms->assign(queries.size(), 0.0);
    }
    auto run_range = [&](std::size_t begin, std::size_t end) {
        std::vector<double> scores;
        std::vector<std::uint32_t> scratch;
        for (std::size_t i = begin; i < end; ++i) {
            auto start = std::chrono::steady_clock::now();
            auto tokens = tokenize(queries[i].text, mode, stopwords);
            score_query_into(index, tokens, scores);
            RankedList list{queries[i].query_id, {}};
            for (auto d : select_top_k(scores, k, scratch)) {
                list.hits.push_back({d, index.doc_id(d), scores[d]});
            }
            out[i] = std::move(list);
            if (opts.latencies_ms) {
                std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
                (*opts.latencies_ms)[i] = elapsed.count();
            }
        }
    };
    std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, queries.size()));
    if (threads == 1) {
        run_range(0, queries.size());
        return out;
    }
    {
        std::vector<std::jthread> workers;
        std::size_t chunk = (queries.size() + threads - 1) / threads;
        for (std::size_t w = 0; w < threads; ++w) {
            std::size_t begin = w * chunk;
            std::size_t end = std::min(queries.size(), begin + chunk);
            if (begin < end) {
                workers.emplace_back(run_range, begin, end);
            }
        }
    }
    return out;
}

/// TREC-style run rows: query_id, doc_id, rank (1-based), score; tab separated.
inline void write_run(std::ostream& out, std::span<const RankedList> lists)
{
    auto old_precision = out.precision(9);
    for (const auto& list : lists) {
        for (std::size_t r = 0; r < list.hits.size(); ++r) {
            out << list.query_id << '\t' << list.hits[r].doc_id << '\t' << (r + 1) << '\t' << list.hits[r].score
                << '\n';
        }
    }
    out.precision(old_precision);
}

} // namespace qidf
