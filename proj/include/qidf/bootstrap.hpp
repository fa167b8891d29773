#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "qidf/errors.hpp"

namespace qidf {

struct BootstrapResult {
    double mean_delta = 0.0; // observed mean(b) - mean(a)
    double ci_lo = 0.0;      // 2.5th percentile of resampled deltas
    double ci_hi = 0.0;      // 97.5th percentile
    std::uint64_t sign_reversals = 0;
    std::uint64_t resamples = 0;
    std::uint64_t seed = 0;
    std::size_t n_queries = 0;

    bool operator==(const BootstrapResult&) const = default;

    /// True when no resample reached the null side; report as p <= 1 / resamples.
    bool no_reversals() const noexcept { return sign_reversals == 0; }

    double empirical_p() const noexcept
    {
        return resamples ? static_cast<double>(sign_reversals) / static_cast<double>(resamples) : 1.0;
    }
};

struct BootstrapOptions {
    std::uint64_t resamples = 10'000;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Unbiased draw in [0, n) by rejection; independent of the standard library's distributions.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n)
{
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = 0;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

/// Linear-interpolated percentile of sorted values, p in [0, 1].
inline double percentile_sorted(const std::vector<double>& sorted, double p)
{
    if (sorted.empty()) {
        return 0.0;
    }
    double pos = p * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

} // namespace detail

/// Paired bootstrap over queries of delta = metric_b - metric_a.
///
/// Each resample draws n queries with replacement. Resample r owns a generator
/// seeded from (seed, r), so the result is identical for any thread count.
/// A resample counts as a sign reversal when, shifted to the null (centred on
/// the observed mean), it is at least as extreme as the observed delta in the
/// opposite direction, i.e. its uncentred mean is <= 0 when the observed mean is
/// positive (>= 0 when negative). With a zero observed mean every resample counts.
inline BootstrapResult paired_bootstrap(const std::map<std::string, double>& metric_a,
                                        const std::map<std::string, double>& metric_b, BootstrapOptions opts = {})
{
    if (metric_a.size() != metric_b.size()
        || !std::equal(metric_a.begin(), metric_a.end(), metric_b.begin(),
                       [](const auto& x, const auto& y) { return x.first == y.first; })) {
        throw Error("paired_bootstrap: the two systems were scored on different query sets");
    }
    if (metric_a.empty()) {
        throw Error("paired_bootstrap: no queries");
    }
    if (opts.resamples == 0) {
        throw DomainError("paired_bootstrap: resamples must be >= 1");
    }

    std::vector<double> delta;
    delta.reserve(metric_a.size());
    auto ib = metric_b.begin();
    for (auto ia = metric_a.begin(); ia != metric_a.end(); ++ia, ++ib) {
        delta.push_back(ib->second - ia->second);
    }
    const std::size_t n = delta.size();
    double observed = 0.0;
    for (double d : delta) {
        observed += d;
    }
    observed /= static_cast<double>(n);

    std::vector<double> means(opts.resamples);
    auto run = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t r = begin; r < end; ++r) {
            std::mt19937_64 rng(detail::splitmix64(opts.seed ^ detail::splitmix64(r)));
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sum += delta[detail::bounded(rng, n)];
            }
            means[r] = sum / static_cast<double>(n);
        }
    };
    std::size_t threads = std::max<std::size_t>(1, std::min<std::uint64_t>(opts.threads, opts.resamples));
    if (threads == 1) {
        run(0, opts.resamples);
    } else {
        std::vector<std::jthread> workers;
        std::uint64_t chunk = (opts.resamples + threads - 1) / threads;
        for (std::size_t w = 0; w < threads; ++w) {
            std::uint64_t begin = w * chunk;
            std::uint64_t end = std::min<std::uint64_t>(opts.resamples, begin + chunk);
            if (begin < end) {
                workers.emplace_back(run, begin, end);
            }
        }
    }

    BootstrapResult result;
    result.mean_delta = observed;
    result.resamples = opts.resamples;
    result.seed = opts.seed;
    result.n_queries = n;
    for (double m : means) {
        bool reversed = observed > 0.0 ? m <= 0.0 : (observed < 0.0 ? m >= 0.0 : true);
        if (reversed) {
            ++result.sign_reversals;
        }
    }
    std::sort(means.begin(), means.end());
    result.ci_lo = detail::percentile_sorted(means, 0.025);
    result.ci_hi = detail::percentile_sorted(means, 0.975);
    return result;
}

/// Smallest p-value the harness will print.
inline constexpr double kMinReportedP = 1e-4;

/// "p <= 1e-4 (empirical resolution)" when no resample reversed, otherwise the
/// empirical reversal rate; never below kMinReportedP.
inline std::string format_p_value(const BootstrapResult& r)
{
    auto fmt = [](double p) {
        double exponent = std::round(std::log10(p));
        char buf[32];
        if (std::abs(p - std::pow(10.0, exponent)) < 1e-12 * p) {
            std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(exponent));
        } else {
            std::snprintf(buf, sizeof buf, "%.4g", p);
        }
        return std::string(buf);
    };
    double resolution = std::max(kMinReportedP, r.resamples ? 1.0 / static_cast<double>(r.resamples) : 1.0);
    if (r.no_reversals()) {
        return "p ≤ " + fmt(resolution) + " (empirical resolution)";
    }
    return "p = " + fmt(std::max(resolution, r.empirical_p()));
}

} // namespace qidf
