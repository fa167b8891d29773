#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qidf/corpus_io.hpp"
#include "qidf/errors.hpp"
#include "qidf/index.hpp"
#include "qidf/tokenizer.hpp"

namespace qidf {

/// Label-free corpus statistics over the same token stream the index sees
/// (so t0/t2/t3 counts are taken after stopword removal).
struct CorpusStats {
    std::uint64_t n_tok = 0;      // total token occurrences T
    std::uint64_t vocab_size = 0; // distinct types |V|
    double htok = 0.0;            // share of token occurrences whose type occurs exactly once
    double ttr = 0.0;             // |V| / T
    double median_df = 0.0;       // lower median of document frequency over the vocabulary
    double frac_df_le5 = 0.0;     // share of the vocabulary with df <= 5
};

inline CorpusStats compute_corpus_stats(const TermCounts& counts)
{
    if (counts.doc_ids.empty() || counts.total_tokens == 0) {
        throw Error("corpus statistics need at least one token");
    }
    CorpusStats s;
    s.n_tok = counts.total_tokens;
    s.vocab_size = counts.terms.size();
    std::uint64_t hapax = 0;
    std::uint64_t low_df = 0;
    std::vector<std::uint32_t> dfs;
    dfs.reserve(counts.terms.size());
    for (std::size_t t = 0; t < counts.terms.size(); ++t) {
        if (counts.collection_frequency(t) == 1) {
            ++hapax;
        }
        auto df = counts.df(t);
        if (df <= 5) {
            ++low_df;
        }
        dfs.push_back(df);
    }
    const auto total = static_cast<double>(s.n_tok);
    const auto vocab = static_cast<double>(s.vocab_size);
    s.htok = static_cast<double>(hapax) / total;
    s.ttr = vocab / total;
    s.frac_df_le5 = static_cast<double>(low_df) / vocab;
    auto mid = dfs.begin() + static_cast<std::ptrdiff_t>((dfs.size() - 1) / 2);
    std::nth_element(dfs.begin(), mid, dfs.end());
    s.median_df = *mid;
    return s;
}

inline CorpusStats compute_corpus_stats(const Corpus& corpus, TokenizerMode mode,
                                        const StopwordSet& stopwords = default_stopwords())
{
    if (corpus.empty()) {
        throw Error("corpus statistics need a non-empty corpus");
    }
    return compute_corpus_stats(count_terms(corpus, mode, stopwords));
}

/// q = clip(1 - coefficient * htok, clip_lo, clip_hi).
struct PredictorModel {
    double coefficient = 7.28;
    double clip_lo = 0.01;
    double clip_hi = 1.0;
};

inline double predict_q(const CorpusStats& stats, const PredictorModel& model = {})
{
    return std::clamp(1.0 - model.coefficient * stats.htok, model.clip_lo, model.clip_hi);
}

inline double predict_q(double htok, const PredictorModel& model = {})
{
    CorpusStats s;
    s.htok = htok;
    return predict_q(s, model);
}

/// Share of the BM25 -> oracle NDCG gap captured at the predicted q.
/// Empty when the gap is below 1e-9 ("flat" corpora).
struct Recovery {
    std::optional<double> fraction;

    bool flat() const noexcept { return !fraction.has_value(); }
};

inline constexpr double kFlatGap = 1e-9;

inline Recovery recovery(double ndcg_bm25, double ndcg_pred, double ndcg_opt)
{
    double gap = ndcg_opt - ndcg_bm25;
    if (gap < kFlatGap) {
        return {};
    }
    return {(ndcg_pred - ndcg_bm25) / gap};
}

/// Least-squares coefficient of q_opt ~ 1 - c * htok over (htok, q_opt) pairs,
/// c = sum(htok (1 - q_opt)) / sum(htok^2).
inline double fit_coefficient(std::span<const std::pair<double, double>> points)
{
    double num = 0.0;
    double den = 0.0;
    for (auto [htok, q_opt] : points) {
        num += htok * (1.0 - q_opt);
        den += htok * htok;
    }
    if (points.empty() || den == 0.0) {
        throw DomainError("fit_coefficient: need at least one point with htok != 0");
    }
    return num / den;
}

} // namespace qidf
