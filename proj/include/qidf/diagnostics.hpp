#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qidf/corpus_io.hpp"
#include "qidf/errors.hpp"
#include "qidf/index.hpp"
#include "qidf/index_io.hpp"
#include "qidf/metrics.hpp"
#include "qidf/query.hpp"
#include "qidf/rescale.hpp"
#include "qidf/tokenizer.hpp"

namespace qidf {

// ---------------------------------------------------------------------------
// q sweep

inline const std::vector<double>& default_q_grid()
{
    static const std::vector<double> grid = {0.05, 0.10, 0.20, 0.30, 0.50, 0.70, 0.90, 1.00};
    return grid;
}

struct SweepRow {
    double q = 1.0;
    double mean_ndcg = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    double q_opt = 1.0;
    double best_ndcg = 0.0;

    /// Row for exactly this q, if it was swept.
    std::optional<SweepRow> at(double q) const
    {
        for (const auto& r : rows) {
            if (r.q == q) {
                return r;
            }
        }
        return std::nullopt;
    }
};

namespace detail {

inline void check_grid(std::span<const double> grid)
{
    if (grid.empty()) {
        throw DomainError("q_sweep: grid must not be empty");
    }
    for (double q : grid) {
        if (!std::isfinite(q)) {
            throw DomainError("q_sweep: grid values must be finite");
        }
    }
}

/// Argmax over rows; on equal NDCG the larger q (closer to BM25) wins.
inline void select_q_opt(SweepTable& table)
{
    const SweepRow* best = nullptr;
    for (const auto& r : table.rows) {
        if (!best || r.mean_ndcg > best->mean_ndcg || (r.mean_ndcg == best->mean_ndcg && r.q > best->q)) {
            best = &r;
        }
    }
    table.q_opt = best->q;
    table.best_ndcg = best->mean_ndcg;
}

template <std::floating_point Real>
double mean_ndcg_at_10(const BasicScoreIndex<Real>& index, const QuerySet& queries, const QrelSet& qrels,
                       const StopwordSet& stopwords)
{
    auto lists = batch_retrieve(index, queries, index.header().mode, 10, stopwords);
    return evaluate(lists, qrels, Metric::ndcg, 10).mean;
}

} // namespace detail

/// Mean NDCG@10 for each q in `grid`, each run on a fresh copy of the BM25 baseline.
template <std::floating_point Real>
SweepTable q_sweep(const BasicScoreIndex<Real>& baseline, const QuerySet& queries, const QrelSet& qrels,
                   std::span<const double> grid = default_q_grid(), const StopwordSet& stopwords = default_stopwords())
{
    detail::check_grid(grid);
    SweepTable table;
    for (double q : grid) {
        auto index = baseline;
        rescale_index(index, q);
        table.rows.push_back({q, detail::mean_ndcg_at_10(index, queries, qrels, stopwords)});
    }
    detail::select_q_opt(table);
    return table;
}

/// Same as above, reloading the baseline from disk for every grid point.
template <std::floating_point Real = float>
SweepTable q_sweep(const std::string& base_index_path, const QuerySet& queries, const QrelSet& qrels,
                   std::span<const double> grid = default_q_grid(), const StopwordSet& stopwords = default_stopwords())
{
    detail::check_grid(grid);
    SweepTable table;
    for (double q : grid) {
        auto index = load_index<Real>(base_index_path);
        rescale_index(index, q);
        table.rows.push_back({q, detail::mean_ndcg_at_10(index, queries, qrels, stopwords)});
    }
    detail::select_q_opt(table);
    return table;
}

inline void write_sweep_csv(std::ostream& out, const SweepTable& table)
{
    auto old_precision = out.precision(6);
    out << "q,mean_ndcg\n";
    for (const auto& r : table.rows) {
        out << r.q << ',' << r.mean_ndcg << '\n';
    }
    out.precision(old_precision);
}

// ---------------------------------------------------------------------------
// df-bin occlusion

/// Closed df interval [lo, hi]; hi = max() for an open upper bin.
struct DfBin {
    std::uint32_t lo = 1;
    std::uint32_t hi = std::numeric_limits<std::uint32_t>::max();

    bool contains(std::uint32_t df) const noexcept { return df >= lo && df <= hi; }
    bool open() const noexcept { return hi == std::numeric_limits<std::uint32_t>::max(); }
};

inline std::string to_string(const DfBin& bin)
{
    if (bin.open()) {
        return std::to_string(bin.lo) + "+";
    }
    if (bin.lo == bin.hi) {
        return std::to_string(bin.lo);
    }
    return std::to_string(bin.lo) + "-" + std::to_string(bin.hi);
}

inline const std::vector<DfBin>& default_df_bins()
{
    static const std::vector<DfBin> bins = {
        {1, 1},     {2, 2},       {3, 5},         {6, 20},
        {21, 50},   {51, 200},    {201, 1000},    {1001, 5000},
        {5001, std::numeric_limits<std::uint32_t>::max()},
    };
    return bins;
}

/// Bins must be non-empty, ascending and pairwise disjoint.
inline void validate_bins(std::span<const DfBin> bins)
{
    if (bins.empty()) {
        throw DomainError("df bins: need at least one bin");
    }
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i].lo == 0 || bins[i].lo > bins[i].hi) {
            throw DomainError("df bins: bad interval " + to_string(bins[i]));
        }
        if (i > 0 && bins[i].lo <= bins[i - 1].hi) {
            throw DomainError("df bins: " + to_string(bins[i - 1]) + " and " + to_string(bins[i])
                              + " overlap or are out of order");
        }
    }
}

/// Parses "1,2,3-5,6-20,5001+".
inline std::vector<DfBin> parse_df_bins(std::string_view text)
{
    auto parse_num = [&](std::string_view s) {
        std::uint32_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
            throw DomainError("df bins: cannot parse '" + std::string(text) + "'");
        }
        return v;
    };
    std::vector<DfBin> bins;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (!item.empty() && item.back() == '+') {
            bins.push_back({parse_num(item.substr(0, item.size() - 1)), std::numeric_limits<std::uint32_t>::max()});
        } else if (auto dash = item.find('-'); dash != std::string_view::npos) {
            bins.push_back({parse_num(item.substr(0, dash)), parse_num(item.substr(dash + 1))});
        } else {
            auto v = parse_num(item);
            bins.push_back({v, v});
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    validate_bins(bins);
    return bins;
}

struct BinLoss {
    DfBin bin;
    double mean_loss = 0.0;   // mean over judged queries of NDCG(full) - NDCG(occluded); may be negative
    std::size_t affected = 0; // queries with at least one token in the bin
};

struct OcclusionReport {
    double q = 1.0;
    double full_ndcg = 0.0;
    std::size_t n_queries = 0;
    std::vector<BinLoss> bins;
};

/// Rescales a copy of `baseline` to q, then for every bin re-runs each query with
/// the tokens whose df falls in the bin removed, and averages the NDCG@10 loss.
template <std::floating_point Real>
OcclusionReport df_bin_occlusion(const BasicScoreIndex<Real>& baseline, const QuerySet& queries, const QrelSet& qrels,
                                 std::span<const DfBin> bins = default_df_bins(), double q = 1.0,
                                 const StopwordSet& stopwords = default_stopwords())
{
    validate_bins(bins);
    auto index = baseline;
    rescale_index(index, q);
    const auto mode = index.header().mode;

    OcclusionReport report;
    report.q = q;
    for (const auto& bin : bins) {
        report.bins.push_back({bin, 0.0, 0});
    }
    double full_sum = 0.0;
    for (const auto& query : queries) {
        const auto* judged = qrels.find(query.query_id);
        if (!judged || detail::count_relevant(*judged) == 0) {
            continue;
        }
        auto tokens = tokenize(query.text, mode, stopwords);
        std::vector<std::uint32_t> dfs;
        dfs.reserve(tokens.size());
        for (const auto& tok : tokens) {
            dfs.push_back(index.df(tok));
        }
        double full = *ndcg_at_k(top_k_tokens(index, tokens, 10), *judged, 10);
        full_sum += full;
        ++report.n_queries;
        for (auto& entry : report.bins) {
            std::vector<Token> kept;
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                if (!entry.bin.contains(dfs[i])) {
                    kept.push_back(tokens[i]);
                }
            }
            if (kept.size() == tokens.size()) {
                continue;
            }
            ++entry.affected;
            entry.mean_loss += full - *ndcg_at_k(top_k_tokens(index, kept, 10), *judged, 10);
        }
    }
    if (report.n_queries) {
        const auto n = static_cast<double>(report.n_queries);
        report.full_ndcg = full_sum / n;
        for (auto& entry : report.bins) {
            entry.mean_loss /= n;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// per-query mechanism features

struct QueryToken {
    std::string surface; // pre-lowercase form
    std::uint32_t df = 0;
};

struct QueryFeatures {
    double low_df_mass = 0.0;         // share of tokens with df <= 5
    double median_df = 0.0;
    double identifier_fraction = 0.0; // share of tokens with an internal capital or a dot
};

inline bool looks_like_identifier(std::string_view surface)
{
    if (surface.find('.') != std::string_view::npos) {
        return true;
    }
    return std::any_of(surface.begin() + (surface.empty() ? 0 : 1), surface.end(),
                       [](char c) { return c >= 'A' && c <= 'Z'; });
}

inline QueryFeatures query_features(std::span<const QueryToken> tokens)
{
    QueryFeatures f;
    if (tokens.empty()) {
        return f;
    }
    std::vector<std::uint32_t> dfs;
    std::size_t low = 0;
    std::size_t ident = 0;
    for (const auto& t : tokens) {
        dfs.push_back(t.df);
        low += t.df <= 5 ? 1 : 0;
        ident += looks_like_identifier(t.surface) ? 1 : 0;
    }
    const auto n = static_cast<double>(tokens.size());
    f.low_df_mass = static_cast<double>(low) / n;
    f.identifier_fraction = static_cast<double>(ident) / n;
    std::sort(dfs.begin(), dfs.end());
    const std::size_t m = dfs.size() / 2;
    f.median_df = dfs.size() % 2 ? dfs[m] : (static_cast<double>(dfs[m - 1]) + dfs[m]) / 2.0;
    return f;
}

/// Tokens of `query_text` under the index's mode, each paired with the surface of
/// the word it came from and its df in the index (0 when out of vocabulary).
template <std::floating_point Real>
std::vector<QueryToken> query_tokens(const BasicScoreIndex<Real>& index, std::string_view query_text,
                                     const StopwordSet& stopwords = default_stopwords())
{
    const auto mode = index.header().mode;
    std::vector<QueryToken> out;
    for (const auto& w : words(query_text, mode, stopwords)) {
        for (const auto& tok : tokenize(w.surface, mode, stopwords)) {
            out.push_back({std::string(w.surface), index.df(tok)});
        }
    }
    return out;
}

template <std::floating_point Real>
QueryFeatures query_features(const BasicScoreIndex<Real>& index, std::string_view query_text,
                             const StopwordSet& stopwords = default_stopwords())
{
    auto tokens = query_tokens(index, query_text, stopwords);
    return query_features(tokens);
}

// ---------------------------------------------------------------------------
// Recall@K-tokens

using TokenCounter = std::function<std::uint64_t(const std::string& doc_id)>;

/// Counts whitespace-separated chunks of each document's text.
inline TokenCounter whitespace_token_counter(const Corpus& corpus)
{
    auto counts = std::make_shared<std::unordered_map<std::string, std::uint64_t>>();
    for (const auto& doc : corpus) {
        (*counts)[doc.doc_id] = split_whitespace(doc.text).size();
    }
    return [counts](const std::string& doc_id) -> std::uint64_t {
        auto it = counts->find(doc_id);
        return it == counts->end() ? 0 : it->second;
    };
}

struct BudgetRecall {
    std::uint64_t budget = 0;
    double recall = 0.0;
};

struct TokenBudgetReport {
    std::vector<BudgetRecall> rows;
    std::size_t n_queries = 0;
};

/// For each query, walks its ranking top-down summing counter(doc) up to and
/// including the first relevant document (the gold document). The query is
/// recalled at budget K iff that running total is <= K; a query whose ranking
/// holds no relevant document is recalled at no budget.
inline TokenBudgetReport recall_at_token_budget(std::span<const RankedList> rankings, const QrelSet& qrels,
                                                std::span<const std::uint64_t> budgets, const TokenCounter& counter)
{
    if (!std::is_sorted(budgets.begin(), budgets.end())) {
        throw DomainError("recall_at_token_budget: budgets must be ascending");
    }
    TokenBudgetReport report;
    for (auto k : budgets) {
        report.rows.push_back({k, 0.0});
    }
    std::vector<std::size_t> recalled(budgets.size(), 0);
    for (const auto& list : rankings) {
        const auto* judged = qrels.find(list.query_id);
        if (!judged || detail::count_relevant(*judged) == 0) {
            continue;
        }
        ++report.n_queries;
        std::uint64_t total = 0;
        std::optional<std::uint64_t> through_gold;
        for (const auto& hit : list.hits) {
            total += counter(hit.doc_id);
            if (detail::relevance_of(*judged, hit.doc_id) > 0) {
                through_gold = total;
                break;
            }
        }
        if (!through_gold) {
            continue;
        }
        for (std::size_t i = 0; i < budgets.size(); ++i) {
            if (*through_gold <= budgets[i]) {
                ++recalled[i];
            }
        }
    }
    if (report.n_queries) {
        for (std::size_t i = 0; i < budgets.size(); ++i) {
            report.rows[i].recall = static_cast<double>(recalled[i]) / static_cast<double>(report.n_queries);
        }
    }
    return report;
}

} // namespace qidf
