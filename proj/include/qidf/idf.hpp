#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "qidf/errors.hpp"

namespace qidf {

/// Below this distance from q = 1 the q-logarithm is evaluated as log(x).
inline constexpr double kLnQGuard = 1e-9;

/// Smoothing added to both sides of the RSJ odds.
inline constexpr double kRsjDelta = 0.5;

/// Tsallis q-logarithm, (x^(1-q) - 1) / (1 - q), i.e. a Box-Cox transform of x
/// with lambda = 1 - q. Within kLnQGuard of q = 1 it returns log(x), the
/// removable-singularity limit.
inline double ln_q(double x, double q)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("ln_q: x must be finite and > 0, got " + std::to_string(x));
    }
    if (!std::isfinite(q)) {
        throw DomainError("ln_q: q must be finite");
    }
    double lambda = 1.0 - q;
    if (std::abs(lambda) < kLnQGuard) {
        return std::log(x);
    }
    // expm1 form of (x^lambda - 1) / lambda; same function, no cancellation near lambda = 0.
    return std::expm1(lambda * std::log(x)) / lambda;
}

/// Smoothed Robertson-Sparck-Jones odds (N - n_t + delta) / (n_t + delta).
/// Falls below 1 once n_t > N / 2; callers keep the resulting negative log-weights.
inline double rsj_odds(std::uint64_t n_t, std::uint64_t n_docs, double delta = kRsjDelta)
{
    if (n_t > n_docs) {
        throw DomainError("rsj_odds: n_t (" + std::to_string(n_t) + ") exceeds N ("
                          + std::to_string(n_docs) + ")");
    }
    if (!(delta > 0.0)) {
        throw DomainError("rsj_odds: delta must be > 0");
    }
    auto nt = static_cast<double>(n_t);
    auto n = static_cast<double>(n_docs);
    return (n - nt + delta) / (nt + delta);
}

/// q-log RSJ IDF. Strictly decreasing in n_t for every q; equals the classical
/// log-odds IDF at q = 1.
inline double idf_qlog(std::uint64_t n_t, std::uint64_t n_docs, double q)
{
    return ln_q(rsj_odds(n_t, n_docs), q);
}

/// Lucene's shifted IDF log(1 + odds); strictly positive for every observed term.
inline double idf_lucene(std::uint64_t n_t, std::uint64_t n_docs)
{
    if (n_t == 0) {
        throw DomainError("idf_lucene: n_t must be >= 1 (unobserved terms have no column)");
    }
    return std::log1p(rsj_odds(n_t, n_docs));
}

} // namespace qidf
