#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <vector>

#include "qidf/errors.hpp"
#include "qidf/idf.hpp"
#include "qidf/index.hpp"

namespace qidf {

struct RescaleOutcome {
    /// True when the parameter was the identity and the matrix was left untouched.
    bool skipped = false;
};

namespace detail {

template <std::floating_point Real>
void require_fresh_bm25(const BasicScoreIndex<Real>& index, const char* op)
{
    if (index.header().scorer != Scorer::bm25) {
        throw StateError(std::string(op) + ": only BM25 indexes carry the Lucene IDF column to rescale");
    }
    if (index.header().transformed()) {
        throw StateError(std::string(op)
                         + ": index already transformed; rescale a freshly built or reloaded baseline");
    }
}

/// Multiplies column t by factors[t]. Every factor is checked first so the
/// matrix is either fully rescaled or left untouched.
template <std::floating_point Real>
void scale_columns(BasicScoreIndex<Real>& index, const std::vector<double>& factors)
{
    auto col_ptr = index.col_ptr();
    auto scores = index.mutable_scores();
    constexpr double limit = static_cast<double>(std::numeric_limits<Real>::max());
    for (std::size_t t = 0; t < factors.size(); ++t) {
        double peak = 0.0;
        for (auto i = col_ptr[t]; i < col_ptr[t + 1]; ++i) {
            peak = std::max(peak, std::abs(static_cast<double>(scores[i])));
        }
        if (!std::isfinite(factors[t]) || peak * std::abs(factors[t]) > limit) {
            throw DomainError("rescale of column '" + index.term(t) + "' overflows the score type");
        }
    }
    for (std::size_t t = 0; t < factors.size(); ++t) {
        const double factor = factors[t];
        for (auto i = col_ptr[t]; i < col_ptr[t + 1]; ++i) {
            scores[i] = static_cast<Real>(static_cast<double>(scores[i]) * factor);
        }
    }
}

} // namespace detail

/// Replaces the baked Lucene IDF of every column by the q-log RSJ IDF, in place:
/// s_td <- s_td * idf_qlog(n_t, N, q) / idf_lucene(n_t, N). One O(|V| + nnz) pass.
///
/// q == 1.0 exactly skips the pass so the matrix and header stay bit-identical
/// to the BM25 build. Transforms do not compose: a second call throws StateError.
template <std::floating_point Real>
RescaleOutcome rescale_index(BasicScoreIndex<Real>& index, double q)
{
    if (!std::isfinite(q)) {
        throw DomainError("rescale_index: q must be finite");
    }
    detail::require_fresh_bm25(index, "rescale_index");
    if (q == 1.0) {
        return {true};
    }
    const std::uint64_t n_docs = index.num_docs();
    std::vector<double> factors(index.num_terms());
    for (std::size_t t = 0; t < factors.size(); ++t) {
        const std::uint32_t df = index.df(t);
        factors[t] = idf_qlog(df, n_docs, q) / idf_lucene(df, n_docs);
    }
    detail::scale_columns(index, factors);
    index.mutable_header().applied_q = q;
    return {false};
}

/// idf^gamma baseline: column t scaled by idf_lucene(n_t, N)^(gamma - 1) so the
/// effective IDF becomes idf_lucene^gamma. gamma == 1.0 skips the pass.
template <std::floating_point Real>
RescaleOutcome rescale_index_gamma(BasicScoreIndex<Real>& index, double gamma)
{
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw DomainError("rescale_index_gamma: gamma must be finite and > 0");
    }
    detail::require_fresh_bm25(index, "rescale_index_gamma");
    if (gamma == 1.0) {
        return {true};
    }
    const std::uint64_t n_docs = index.num_docs();
    std::vector<double> factors(index.num_terms());
    for (std::size_t t = 0; t < factors.size(); ++t) {
        factors[t] = std::pow(idf_lucene(index.df(t), n_docs), gamma - 1.0);
    }
    detail::scale_columns(index, factors);
    index.mutable_header().applied_gamma = gamma;
    return {false};
}

} // namespace qidf
