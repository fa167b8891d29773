#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qidf/corpus_io.hpp"
#include "qidf/errors.hpp"
#include "qidf/idf.hpp"
#include "qidf/tokenizer.hpp"

namespace qidf {

enum class Scorer : std::uint8_t { bm25 = 0, dph = 1 };

inline const char* to_string(Scorer s)
{
    return s == Scorer::bm25 ? "bm25" : "dph";
}

struct BuildParams {
    double k1 = 1.5;
    double b = 0.75;
    /// RSJ smoothing; fixed.
    static constexpr double delta = kRsjDelta;

    void validate() const
    {
        if (!(k1 > 0.0) || !std::isfinite(k1)) {
            throw DomainError("k1 must be > 0");
        }
        if (!(b >= 0.0 && b <= 1.0)) {
            throw DomainError("b must lie in [0, 1]");
        }
    }
};

/// Provenance carried in the index file header.
struct IndexHeader {
    TokenizerMode mode = TokenizerMode::t0_default;
    Scorer scorer = Scorer::bm25;
    double k1 = 1.5;
    double b = 0.75;
    std::optional<double> applied_q;
    std::optional<double> applied_gamma;

    bool transformed() const noexcept { return applied_q.has_value() || applied_gamma.has_value(); }
};

/// Compressed-sparse-column term x document matrix of per-(term, doc) scores.
///
/// Column t holds the documents containing term t in strictly increasing
/// order; its length is the term's document frequency. Terms are stored in
/// lexicographic order and every stored column is non-empty. Only the score
/// values are ever mutated after construction.
template <std::floating_point Real>
class BasicScoreIndex {
public:
    using real_type = Real;

    BasicScoreIndex() = default;

    /// Assembles an index from raw arrays, checking every structural invariant.
    static BasicScoreIndex from_parts(IndexHeader header, std::vector<std::string> terms,
                                      std::vector<std::uint64_t> col_ptr, std::vector<std::uint32_t> row_idx,
                                      std::vector<Real> scores, std::vector<std::string> doc_ids,
                                      std::vector<std::uint32_t> doc_lengths)
    {
        BasicScoreIndex idx;
        idx.header_ = header;
        idx.terms_ = std::move(terms);
        idx.col_ptr_ = std::move(col_ptr);
        idx.row_idx_ = std::move(row_idx);
        idx.scores_ = std::move(scores);
        idx.doc_ids_ = std::move(doc_ids);
        idx.doc_len_ = std::move(doc_lengths);
        idx.validate();
        idx.rebuild_lookup();
        std::uint64_t total = std::accumulate(idx.doc_len_.begin(), idx.doc_len_.end(), std::uint64_t{0});
        idx.avg_len_ = idx.doc_len_.empty() ? 0.0
                                            : static_cast<double>(total) / static_cast<double>(idx.doc_len_.size());
        return idx;
    }

    const IndexHeader& header() const noexcept { return header_; }
    IndexHeader& mutable_header() noexcept { return header_; }

    std::size_t num_docs() const noexcept { return doc_ids_.size(); }
    std::size_t num_terms() const noexcept { return terms_.size(); }
    std::size_t nnz() const noexcept { return row_idx_.size(); }
    double avg_doc_len() const noexcept { return avg_len_; }

    std::span<const std::uint64_t> col_ptr() const noexcept { return col_ptr_; }
    std::span<const std::uint32_t> row_idx() const noexcept { return row_idx_; }
    std::span<const Real> scores() const noexcept { return scores_; }
    std::span<Real> mutable_scores() noexcept { return scores_; }

    std::span<const std::string> terms() const noexcept { return terms_; }
    std::span<const std::string> doc_ids() const noexcept { return doc_ids_; }
    std::span<const std::uint32_t> doc_lengths() const noexcept { return doc_len_; }

    const std::string& term(std::size_t t) const { return terms_[t]; }
    const std::string& doc_id(std::size_t d) const { return doc_ids_[d]; }

    std::optional<std::uint32_t> term_id(std::string_view term) const
    {
        auto it = lookup_.find(std::string(term));
        if (it == lookup_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    std::uint32_t df(std::size_t t) const noexcept
    {
        return static_cast<std::uint32_t>(col_ptr_[t + 1] - col_ptr_[t]);
    }

    /// Document frequency of `term`, 0 when it is not in the vocabulary.
    std::uint32_t df(std::string_view term) const
    {
        auto id = term_id(term);
        return id ? df(*id) : 0;
    }

    std::span<const std::uint32_t> column_docs(std::size_t t) const noexcept
    {
        return std::span<const std::uint32_t>(row_idx_).subspan(col_ptr_[t], col_ptr_[t + 1] - col_ptr_[t]);
    }

    std::span<const Real> column_scores(std::size_t t) const noexcept
    {
        return std::span<const Real>(scores_).subspan(col_ptr_[t], col_ptr_[t + 1] - col_ptr_[t]);
    }

private:
    void validate() const
    {
        if (col_ptr_.size() != terms_.size() + 1) {
            throw FormatError("col_ptr length must be |V| + 1");
        }
        if (col_ptr_.front() != 0 || col_ptr_.back() != row_idx_.size()) {
            throw FormatError("col_ptr must start at 0 and end at nnz");
        }
        if (scores_.size() != row_idx_.size()) {
            throw FormatError("scores and row_idx lengths differ");
        }
        if (doc_len_.size() != doc_ids_.size()) {
            throw FormatError("doc length table does not match document count");
        }
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            if (col_ptr_[t + 1] <= col_ptr_[t]) {
                throw FormatError("column " + std::to_string(t) + " is empty or col_ptr decreases");
            }
            if (t > 0 && !(terms_[t - 1] < terms_[t])) {
                throw FormatError("vocabulary is not strictly sorted at term " + std::to_string(t));
            }
            for (auto i = col_ptr_[t]; i < col_ptr_[t + 1]; ++i) {
                if (row_idx_[i] >= doc_ids_.size()) {
                    throw FormatError("row index out of range in column " + std::to_string(t));
                }
                if (i > col_ptr_[t] && row_idx_[i] <= row_idx_[i - 1]) {
                    throw FormatError("row indices not strictly increasing in column " + std::to_string(t));
                }
            }
        }
        for (auto s : scores_) {
            if (!std::isfinite(s)) {
                throw FormatError("non-finite score in matrix");
            }
        }
    }

    void rebuild_lookup()
    {
        lookup_.clear();
        lookup_.reserve(terms_.size());
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            lookup_.emplace(terms_[t], static_cast<std::uint32_t>(t));
        }
    }

    IndexHeader header_;
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> lookup_;
    std::vector<std::uint64_t> col_ptr_{0};
    std::vector<std::uint32_t> row_idx_;
    std::vector<Real> scores_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_len_;
    double avg_len_ = 0.0;
};

/// Single-precision storage; the representation the bit-identity gate refers to.
using SparseScoreIndex = BasicScoreIndex<float>;

struct TermStats {
    std::vector<std::uint32_t> df;
    std::size_t num_docs = 0;
    double avg_doc_len = 0.0;
};

template <std::floating_point Real>
TermStats term_stats(const BasicScoreIndex<Real>& index)
{
    TermStats stats;
    stats.df.reserve(index.num_terms());
    for (std::size_t t = 0; t < index.num_terms(); ++t) {
        stats.df.push_back(index.df(t));
    }
    stats.num_docs = index.num_docs();
    stats.avg_doc_len = index.avg_doc_len();
    return stats;
}

/// Raw term-frequency matrix of a tokenized corpus in the same CSC layout as
/// the score index: the common input of every scorer and of corpus statistics.
struct TermCounts {
    std::vector<std::string> terms;       // sorted
    std::vector<std::uint64_t> col_ptr;   // |V| + 1
    std::vector<std::uint32_t> row_idx;   // nnz
    std::vector<std::uint32_t> tf;        // nnz
    std::vector<std::string> doc_ids;     // N
    std::vector<std::uint32_t> doc_len;   // N, post-tokenization
    std::uint64_t total_tokens = 0;

    std::uint32_t df(std::size_t t) const noexcept
    {
        return static_cast<std::uint32_t>(col_ptr[t + 1] - col_ptr[t]);
    }

    /// Total occurrences of term t across the corpus.
    std::uint64_t collection_frequency(std::size_t t) const noexcept
    {
        std::uint64_t cf = 0;
        for (auto i = col_ptr[t]; i < col_ptr[t + 1]; ++i) {
            cf += tf[i];
        }
        return cf;
    }
};

inline TermCounts count_terms(const Corpus& corpus, TokenizerMode mode,
                              const StopwordSet& stopwords = default_stopwords())
{
    TermCounts counts;
    std::unordered_map<std::string, std::uint32_t> first_seen;
    std::vector<std::string> seen_order;
    // per document: (first-seen term id, tf), sorted by id
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> doc_terms(corpus.size());

    counts.doc_ids.reserve(corpus.size());
    counts.doc_len.reserve(corpus.size());
    std::unordered_map<std::uint32_t, std::uint32_t> local;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const auto& doc = corpus[d];
        auto tokens = tokenize(doc.text, mode, stopwords);
        local.clear();
        for (auto& tok : tokens) {
            auto [it, inserted] = first_seen.try_emplace(tok, static_cast<std::uint32_t>(seen_order.size()));
            if (inserted) {
                seen_order.push_back(tok);
            }
            ++local[it->second];
        }
        auto& row = doc_terms[d];
        row.assign(local.begin(), local.end());
        std::sort(row.begin(), row.end());
        counts.doc_ids.push_back(doc.doc_id);
        counts.doc_len.push_back(static_cast<std::uint32_t>(tokens.size()));
        counts.total_tokens += tokens.size();
    }

    std::vector<std::uint32_t> order(seen_order.size());
    std::iota(order.begin(), order.end(), 0U);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return seen_order[a] < seen_order[b]; });
    std::vector<std::uint32_t> rank(seen_order.size());
    counts.terms.reserve(seen_order.size());
    for (std::uint32_t r = 0; r < order.size(); ++r) {
        rank[order[r]] = r;
        counts.terms.push_back(std::move(seen_order[order[r]]));
    }

    counts.col_ptr.assign(counts.terms.size() + 1, 0);
    for (const auto& row : doc_terms) {
        for (auto [id, tf] : row) {
            ++counts.col_ptr[rank[id] + 1];
        }
    }
    std::partial_sum(counts.col_ptr.begin(), counts.col_ptr.end(), counts.col_ptr.begin());
    std::uint64_t nnz = counts.col_ptr.back();
    counts.row_idx.resize(nnz);
    counts.tf.resize(nnz);
    std::vector<std::uint64_t> cursor(counts.col_ptr.begin(), counts.col_ptr.end() - 1);
    // documents visited in ascending order keep every column sorted by row
    for (std::uint32_t d = 0; d < doc_terms.size(); ++d) {
        for (auto [id, tf] : doc_terms[d]) {
            auto slot = cursor[rank[id]]++;
            counts.row_idx[slot] = d;
            counts.tf[slot] = tf;
        }
    }
    return counts;
}

namespace detail {

inline void check_buildable(const Corpus& corpus, const TermCounts& counts)
{
    if (corpus.empty()) {
        throw BuildError("cannot build an index over an empty corpus");
    }
    if (counts.total_tokens == 0) {
        throw BuildError("no document produced any token");
    }
}

} // namespace detail

/// BM25 saturating term-frequency factor f(k1 + 1) / (f + k1(1 - b + b |d| / avgdl)).
inline double bm25_tf_factor(double tf, double doc_len, double avg_len, double k1, double b)
{
    return tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc_len / avg_len));
}

/// Builds the BM25 score matrix with the Lucene shifted IDF multiplied into
/// every entry. Scores are computed in double and narrowed to Real.
template <std::floating_point Real = float>
BasicScoreIndex<Real> build_index(const Corpus& corpus, TokenizerMode mode, const BuildParams& params = {},
                                  const StopwordSet& stopwords = default_stopwords())
{
    params.validate();
    auto counts = count_terms(corpus, mode, stopwords);
    detail::check_buildable(corpus, counts);

    const std::uint64_t n_docs = corpus.size();
    const double avg_len = static_cast<double>(counts.total_tokens) / static_cast<double>(n_docs);
    std::vector<Real> scores(counts.row_idx.size());
    for (std::size_t t = 0; t < counts.terms.size(); ++t) {
        const double idf = idf_lucene(counts.df(t), n_docs);
        for (auto i = counts.col_ptr[t]; i < counts.col_ptr[t + 1]; ++i) {
            double f = counts.tf[i];
            double dl = counts.doc_len[counts.row_idx[i]];
            scores[i] = static_cast<Real>(idf * bm25_tf_factor(f, dl, avg_len, params.k1, params.b));
        }
    }

    IndexHeader header;
    header.mode = mode;
    header.scorer = Scorer::bm25;
    header.k1 = params.k1;
    header.b = params.b;
    return BasicScoreIndex<Real>::from_parts(header, std::move(counts.terms), std::move(counts.col_ptr),
                                             std::move(counts.row_idx), std::move(scores),
                                             std::move(counts.doc_ids), std::move(counts.doc_len));
}

} // namespace qidf
