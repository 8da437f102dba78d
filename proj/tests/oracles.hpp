#pragma once

// Test-side reference implementations, independent of the library's
// computational routes: dense matrix algebra for powers and exponentials,
// back-substitution for inverses and set-partition counting for Stirling
// numbers.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "fracmat/twoband.hpp"
#include "fracmat/upper_triangular.hpp"

namespace oracles {

using Dense = std::vector<std::vector<double>>;

inline Dense dense_identity(std::size_t n) {
    Dense m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        m[i][i] = 1.0;
    return m;
}

inline Dense to_dense(const fracmat::UpperTriangularMatrix& u) {
    const std::size_t n = u.size();
    Dense m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            m[i][j] = u.at(i, j);
    return m;
}

inline Dense dense_two_band(const fracmat::TwoBandMatrix& a) {
    const std::size_t n = a.size();
    Dense m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] = a.diag(i);
        if (i + 1 < n)
            m[i][i + 1] = -a.diag(i);
    }
    return m;
}

inline Dense dense_multiply(const Dense& a, const Dense& b) {
    const std::size_t n = a.size();
    Dense c(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a[i][k];
            if (aik == 0.0)
                continue;
            for (std::size_t j = 0; j < n; ++j)
                c[i][j] += aik * b[k][j];
        }
    return c;
}

/// k-fold repeated multiplication; the reference for natural powers.
inline Dense dense_power(const Dense& a, int k) {
    Dense r = dense_identity(a.size());
    for (int j = 0; j < k; ++j)
        r = dense_multiply(r, a);
    return r;
}

inline double max_abs(const Dense& a) {
    double m = 0.0;
    for (const auto& row : a)
        for (double v : row)
            m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const Dense& a, const Dense& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            m = std::max(m, std::abs(a[i][j] - b[i][j]));
    return m;
}

/// Solve U x = b by back substitution; the reference for negative powers.
inline std::vector<double> solve_upper(const fracmat::UpperTriangularMatrix& u,
                                       std::vector<double> b) {
    const std::size_t n = u.size();
    std::vector<double> x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j)
            s -= u.at(ii, j) * x[j];
        x[ii] = s / u.at(ii, ii);
    }
    return x;
}

/// Truncated exponential series sum_{k<=40} (-t)^k A^k / k!; the reference
/// for the matrix semigroup at moderate t.
inline Dense exp_series(const fracmat::TwoBandMatrix& a, double t, int terms = 40) {
    const std::size_t n = a.size();
    const Dense ad = dense_two_band(a);
    Dense acc = dense_identity(n);
    Dense term = dense_identity(n);
    for (int k = 1; k <= terms; ++k) {
        term = dense_multiply(term, ad);
        const double c = -t / static_cast<double>(k);
        for (auto& row : term)
            for (double& v : row)
                v *= c;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                acc[i][j] += term[i][j];
    }
    return acc;
}

/// Number of partitions of an n-set into q nonempty blocks, by the
/// add-one-element recursion; the reference for Stirling numbers.
inline std::int64_t set_partition_count(int n, int q) {
    if (q < 1 || q > n)
        return 0;
    std::vector<std::vector<std::int64_t>> s(n + 1, std::vector<std::int64_t>(q + 1, 0));
    s[0][0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= q && j <= i; ++j)
            s[i][j] = s[i - 1][j - 1] + static_cast<std::int64_t>(j) * s[i - 1][j];
    return s[n][q];
}

/// Random diagonal in [lo, hi] with pairwise separation at least min_sep.
inline std::vector<double> random_separated_diag(std::mt19937_64& rng, std::size_t n, double lo,
                                                 double hi, double min_sep) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> d(n);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (double& v : d)
            v = dist(rng);
        std::vector<double> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        bool ok = true;
        for (std::size_t i = 1; i < n; ++i)
            ok = ok && sorted[i] - sorted[i - 1] >= min_sep;
        if (ok)
            return d;
    }
    assert(false && "could not sample a separated diagonal");
    return d;
}

} // namespace oracles
