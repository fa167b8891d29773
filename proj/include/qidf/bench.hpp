#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include <sys/resource.h>

#include "qidf/corpus_io.hpp"
#include "qidf/errors.hpp"
#include "qidf/index.hpp"
#include "qidf/index_io.hpp"
#include "qidf/query.hpp"
#include "qidf/rescale.hpp"
#include "qidf/tokenizer.hpp"

namespace qidf {

namespace stats {

/// Linear-interpolated percentile, p in [0, 100]. Copies its input.
inline double percentile(std::vector<double> values, double p)
{
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

inline double median(std::vector<double> values)
{
    return percentile(std::move(values), 50.0);
}

/// Median absolute deviation from the median (unscaled).
inline double mad(const std::vector<double>& values)
{
    double m = median(values);
    std::vector<double> dev;
    dev.reserve(values.size());
    for (double v : values) {
        dev.push_back(std::abs(v - m));
    }
    return median(std::move(dev));
}

} // namespace stats

template <typename F>
double time_ms(F&& fn)
{
    auto start = std::chrono::steady_clock::now();
    fn();
    std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    return elapsed.count();
}

/// Peak resident set size of this process in MiB.
inline double peak_rss_mib()
{
    rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0) {
        return 0.0;
    }
    return static_cast<double>(usage.ru_maxrss) / 1024.0; // ru_maxrss is KiB on Linux
}

struct BenchOptions {
    std::size_t trials = 5;
    std::size_t queries_per_trial = 1000;
    std::size_t top_k = 100;
    std::size_t rescale_reps = 5;
    double q = 0.1; // transform whose rescale cost is timed
    std::uint64_t seed = 0;
};

struct MedianMad {
    double median = 0.0;
    double mad = 0.0;
};

inline MedianMad summarize(const std::vector<double>& values)
{
    return {stats::median(values), stats::mad(values)};
}

struct BenchReport {
    BenchOptions options;
    std::optional<double> build_ms;
    MedianMad rescale_ms;
    std::uint64_t index_bytes_bm25 = 0;
    std::uint64_t index_bytes_qlog = 0;
    MedianMad p50_ms; // q-log index, across trials
    MedianMad p95_ms;
    MedianMad p50_bm25_ms;
    MedianMad p50_delta_pct; // (q-log - BM25) / BM25 per trial
    double peak_rss_mib = 0.0;
};

/// Times per-query top-k retrieval over `trials` trials of `queries_per_trial`
/// queries each (the query set is cycled, in a seeded shuffled order per trial).
/// Score and selection buffers are allocated once and the index is warmed by an
/// untimed pass before the first trial.
template <std::floating_point Real>
std::vector<std::vector<double>> time_queries(const BasicScoreIndex<Real>& index, const QuerySet& queries,
                                              const BenchOptions& opts,
                                              const StopwordSet& stopwords = default_stopwords())
{
    if (queries.empty()) {
        throw Error("bench: no queries");
    }
    if (opts.top_k == 0 || opts.trials == 0 || opts.queries_per_trial == 0) {
        throw DomainError("bench: trials, queries per trial and top-k must be >= 1");
    }
    const auto mode = index.header().mode;
    std::vector<std::vector<Token>> tokens;
    tokens.reserve(queries.size());
    for (const auto& q : queries) {
        tokens.push_back(tokenize(q.text, mode, stopwords));
    }
    std::vector<double> scores(index.num_docs());
    std::vector<std::uint32_t> scratch(index.num_docs());
    std::vector<std::uint32_t> top;
    double sink = 0.0;
    for (const auto& t : tokens) {
        score_query_into(index, t, scores);
        top = select_top_k(scores, opts.top_k, scratch);
        sink += top.empty() ? 0.0 : scores[top.front()];
    }

    std::vector<std::vector<double>> per_trial(opts.trials);
    std::vector<std::size_t> order(queries.size());
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(opts.seed + trial);
        std::shuffle(order.begin(), order.end(), rng);
        auto& lat = per_trial[trial];
        lat.reserve(opts.queries_per_trial);
        for (std::size_t i = 0; i < opts.queries_per_trial; ++i) {
            const auto& t = tokens[order[i % order.size()]];
            lat.push_back(time_ms([&] {
                score_query_into(index, t, scores);
                top = select_top_k(scores, opts.top_k, scratch);
            }));
            sink += top.empty() ? 0.0 : scores[top.front()];
        }
    }
    volatile double keep = sink;
    (void)keep;
    return per_trial;
}

struct PairedLatencies {
    std::vector<std::vector<double>> first; // [trial][query]
    std::vector<std::vector<double>> second;
};

/// Times the same query stream on two indexes of equal shape, alternating per
/// query (and swapping which index goes first on every other query) so that
/// clock and cache drift affect both sides equally.
template <std::floating_point Real>
PairedLatencies time_queries_paired(const BasicScoreIndex<Real>& first, const BasicScoreIndex<Real>& second,
                                    const QuerySet& queries, const BenchOptions& opts,
                                    const StopwordSet& stopwords = default_stopwords())
{
    if (first.num_docs() != second.num_docs() || first.header().mode != second.header().mode) {
        throw Error("bench: paired indexes differ in document count or tokenizer mode");
    }
    if (queries.empty()) {
        throw Error("bench: no queries");
    }
    if (opts.top_k == 0 || opts.trials == 0 || opts.queries_per_trial == 0) {
        throw DomainError("bench: trials, queries per trial and top-k must be >= 1");
    }
    const auto mode = first.header().mode;
    std::vector<std::vector<Token>> tokens;
    tokens.reserve(queries.size());
    for (const auto& q : queries) {
        tokens.push_back(tokenize(q.text, mode, stopwords));
    }
    std::vector<double> scores(first.num_docs());
    std::vector<std::uint32_t> scratch(first.num_docs());
    std::vector<std::uint32_t> top;
    double sink = 0.0;
    auto once = [&](const BasicScoreIndex<Real>& index, const std::vector<Token>& t) {
        double ms = time_ms([&] {
            score_query_into(index, t, scores);
            top = select_top_k(scores, opts.top_k, scratch);
        });
        sink += top.empty() ? 0.0 : scores[top.front()];
        return ms;
    };
    for (const auto& t : tokens) {
        once(first, t);
        once(second, t);
    }

    PairedLatencies out{std::vector<std::vector<double>>(opts.trials), std::vector<std::vector<double>>(opts.trials)};
    std::vector<std::size_t> order(queries.size());
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(opts.seed + trial);
        std::shuffle(order.begin(), order.end(), rng);
        auto& a = out.first[trial];
        auto& b = out.second[trial];
        a.reserve(opts.queries_per_trial);
        b.reserve(opts.queries_per_trial);
        for (std::size_t i = 0; i < opts.queries_per_trial; ++i) {
            const auto& t = tokens[order[i % order.size()]];
            if (i % 2 == 0) {
                a.push_back(once(first, t));
                b.push_back(once(second, t));
            } else {
                b.push_back(once(second, t));
                a.push_back(once(first, t));
            }
        }
    }
    volatile double keep = sink;
    (void)keep;
    return out;
}

/// Systems table for a BM25 baseline and its q-log rescale.
/// `corpus` is only used to time the index build.
template <std::floating_point Real>
BenchReport run_bench(const BasicScoreIndex<Real>& baseline, const QuerySet& queries, const BenchOptions& opts,
                      const Corpus* corpus = nullptr, const StopwordSet& stopwords = default_stopwords())
{
    BenchReport report;
    report.options = opts;
    if (corpus) {
        const auto mode = baseline.header().mode;
        BuildParams params{baseline.header().k1, baseline.header().b};
        report.build_ms = time_ms([&] { (void)build_index<Real>(*corpus, mode, params, stopwords); });
    }

    std::vector<double> rescale_times;
    BasicScoreIndex<Real> transformed;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, opts.rescale_reps); ++r) {
        transformed = baseline;
        rescale_times.push_back(time_ms([&] { rescale_index(transformed, opts.q); }));
    }
    report.rescale_ms = summarize(rescale_times);
    report.index_bytes_bm25 = serialized_size(baseline);
    report.index_bytes_qlog = serialized_size(transformed);

    std::vector<double> p50;
    std::vector<double> p95;
    std::vector<double> p50_bm25;
    std::vector<double> delta;
    auto lat = time_queries_paired(baseline, transformed, queries, opts, stopwords);
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
        p50.push_back(stats::percentile(lat.second[trial], 50.0));
        p95.push_back(stats::percentile(lat.second[trial], 95.0));
        p50_bm25.push_back(stats::percentile(lat.first[trial], 50.0));
        delta.push_back(100.0 * (p50.back() - p50_bm25.back()) / p50_bm25.back());
    }
    report.p50_ms = summarize(p50);
    report.p95_ms = summarize(p95);
    report.p50_bm25_ms = summarize(p50_bm25);
    report.p50_delta_pct = summarize(delta);
    report.peak_rss_mib = peak_rss_mib();
    return report;
}

inline void write_bench_table(std::ostream& out, const BenchReport& r)
{
    auto old_flags = out.flags();
    auto old_precision = out.precision();
    out.setf(std::ios::fixed);
    out.precision(3);
    out << "metric\tvalue\n";
    if (r.build_ms) {
        out << "index_build_s\t" << *r.build_ms / 1000.0 << '\n';
    }
    out << "rescale_ms (q=" << r.options.q << ")\t" << r.rescale_ms.median << " ± " << r.rescale_ms.mad << '\n';
    out << "index_size_bm25_mib\t" << static_cast<double>(r.index_bytes_bm25) / (1024.0 * 1024.0) << '\n';
    out << "index_size_qlog_mib\t" << static_cast<double>(r.index_bytes_qlog) / (1024.0 * 1024.0) << '\n';
    out << "query_p50_ms\t" << r.p50_ms.median << " ± " << r.p50_ms.mad << '\n';
    out << "query_p95_ms\t" << r.p95_ms.median << " ± " << r.p95_ms.mad << '\n';
    out << "query_p50_bm25_ms\t" << r.p50_bm25_ms.median << " ± " << r.p50_bm25_ms.mad << '\n';
    out << "query_p50_delta_pct\t" << r.p50_delta_pct.median << " ± " << r.p50_delta_pct.mad << '\n';
    out << "peak_rss_mib\t" << r.peak_rss_mib << '\n';
    out << "protocol\t" << r.options.trials << " trials x " << r.options.queries_per_trial
        << " queries interleaved per query with BM25, top-"
        << r.options.top_k << ", seed " << r.options.seed << '\n';
    out.flags(old_flags);
    out.precision(old_precision);
}

} // namespace qidf
