#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>

#include "qidf/index.hpp"

namespace qidf {

/// Largest within-document relative frequency tf/|d| admitted by the DPH
/// normaliser; a term filling its whole document would otherwise hit log(0).
inline constexpr double kDphMaxRelativeFreq = 1.0 - 1e-9;

/// Parameter-free DPH weight of the divergence-from-randomness family:
///
///   f    = min(tf / dl, 1 - 1e-9)
///   norm = (1 - f)^2 / (tf + 1)
///   w    = norm * (tf * log2((tf * avgdl / dl) * (N / F)) + 0.5 * log2(2 pi tf (1 - f)))
///
/// where F is the collection frequency of the term. Negative weights are kept.
inline double dph_weight(double tf, double doc_len, double avg_len, double n_docs, double coll_freq)
{
    double f = std::min(tf / doc_len, kDphMaxRelativeFreq);
    double norm = (1.0 - f) * (1.0 - f) / (tf + 1.0);
    return norm
        * (tf * std::log2((tf * avg_len / doc_len) * (n_docs / coll_freq))
           + 0.5 * std::log2(2.0 * std::numbers::pi * tf * (1.0 - f)));
}

/// Stores DPH weights in the same CSC layout so queries run through the
/// unchanged scoring path. The header is marked Scorer::dph.
template <std::floating_point Real = float>
BasicScoreIndex<Real> build_dph_index(const Corpus& corpus, TokenizerMode mode,
                                      const StopwordSet& stopwords = default_stopwords())
{
    auto counts = count_terms(corpus, mode, stopwords);
    detail::check_buildable(corpus, counts);

    const double n_docs = static_cast<double>(corpus.size());
    const double avg_len = static_cast<double>(counts.total_tokens) / n_docs;
    std::vector<Real> scores(counts.row_idx.size());
    for (std::size_t t = 0; t < counts.terms.size(); ++t) {
        const double cf = static_cast<double>(counts.collection_frequency(t));
        for (auto i = counts.col_ptr[t]; i < counts.col_ptr[t + 1]; ++i) {
            double dl = counts.doc_len[counts.row_idx[i]];
            scores[i] = static_cast<Real>(dph_weight(counts.tf[i], dl, avg_len, n_docs, cf));
        }
    }

    IndexHeader header;
    header.mode = mode;
    header.scorer = Scorer::dph;
    header.k1 = 0.0; // unused by DPH
    header.b = 0.0;
    return BasicScoreIndex<Real>::from_parts(header, std::move(counts.terms), std::move(counts.col_ptr),
                                             std::move(counts.row_idx), std::move(scores),
                                             std::move(counts.doc_ids), std::move(counts.doc_len));
}

} // namespace qidf
