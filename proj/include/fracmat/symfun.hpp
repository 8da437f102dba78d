#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fracmat/errors.hpp"

namespace fracmat {

namespace detail {

/// Running product kept as sign and log-magnitude so that long chains of
/// factors (node gaps on graded grids shrink geometrically) neither overflow
/// nor underflow before the final combination.
struct SignedProduct {
    double log_abs = 0.0;
    int sign = 1;

    void mul(double x) {
        if (x == 0.0) {
            sign = 0;
            return;
        }
        if (x < 0.0) {
            sign = -sign;
            x = -x;
        }
        log_abs += std::log(x);
    }

    double value() const {
        return sign == 0 ? 0.0 : static_cast<double>(sign) * std::exp(log_abs);
    }
};

struct SignedLogTerm {
    double log_abs;
    int sign;
};

struct SignedLogSum {
    double value = 0.0;
    /// max |term| / |sum| on the normalized scale; gauges how many digits the
    /// alternating sum cancelled away.
    double cancellation = std::numeric_limits<double>::infinity();
};

/// Sum of signed log-magnitude terms, factored around the largest term.
inline SignedLogSum sum_signed_log_terms(std::span<const SignedLogTerm> terms) {
    double lead = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms)
        if (t.sign != 0)
            lead = std::max(lead, t.log_abs);
    SignedLogSum out;
    if (!std::isfinite(lead)) {
        out.value = 0.0;
        out.cancellation = 1.0;
        return out;
    }
    double acc = 0.0;
    for (const auto& t : terms)
        if (t.sign != 0)
            acc += static_cast<double>(t.sign) * std::exp(t.log_abs - lead);
    if (acc == 0.0) {
        out.value = 0.0;
        return out;
    }
    out.value = std::copysign(std::exp(lead + std::log(std::abs(acc))), acc);
    out.cancellation = 1.0 / std::abs(acc);
    return out;
}

} // namespace detail

/// Ordered list of real variables a_1..a_m for symmetric-function evaluation.
class VarList {
public:
    explicit VarList(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty())
            throw Error("VarList requires at least one variable");
        for (double v : values_)
            if (!std::isfinite(v))
                throw Error("VarList entries must be finite");
    }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }

    /// True when the minimum pairwise separation exceeds rel_tol * max|a_i|.
    bool distinct(double rel_tol = 1e-6) const {
        if (values_.size() < 2)
            return true;
        std::vector<double> sorted = values_;
        std::sort(sorted.begin(), sorted.end());
        double scale = 0.0;
        for (double v : sorted)
            scale = std::max(scale, std::abs(v));
        if (scale == 0.0)
            return false;
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < sorted.size(); ++i)
            min_gap = std::min(min_gap, sorted[i] - sorted[i - 1]);
        return min_gap > rel_tol * scale;
    }

private:
    std::vector<double> values_;
};

/// Binomial coefficient with a real upper argument:
/// alpha (alpha-1) ... (alpha-k+1) / k!.  Equals 0 for integer alpha = m with
/// 0 <= m < k, since the falling factorial hits an exact zero.
inline double binom_real(double alpha, int k) {
    if (k < 0)
        throw Error("binom_real requires k >= 0");
    double result = 1.0;
    for (int j = 0; j < k; ++j)
        result *= (alpha - j) / (j + 1);
    return result;
}

namespace detail {

/// Complete homogeneous symmetric polynomial H_q over a variable span via the
/// append-one-variable recurrence; valid for repeated variables.
inline double hq_dp(std::span<const double> vars, int q) {
    if (q < 0)
        return 0.0;
    std::vector<double> h(static_cast<std::size_t>(q) + 1, 0.0);
    h[0] = 1.0;
    for (double a : vars)
        for (int r = 1; r <= q; ++r)
            h[r] += a * h[r - 1];
    return h[q];
}

inline double binom_count(std::size_t n, std::size_t k) {
    // C(n, k) in floating point; only used for enumeration-size estimates.
    double r = 1.0;
    k = std::min(k, n - k);
    for (std::size_t j = 1; j <= k; ++j)
        r *= static_cast<double>(n - k + j) / static_cast<double>(j);
    return r;
}

} // namespace detail

/// H_q by direct enumeration of the C(m+q-1, q) degree-q monomials; the
/// ground-truth route.  Requests beyond 10^6 terms are delegated to the
/// recurrence, which computes the identical value.
inline double hq_monomial(const VarList& vars, int q) {
    if (q < 0)
        throw Error("hq_monomial requires q >= 0");
    if (q == 0)
        return 1.0;
    const std::size_t m = vars.size();
    if (detail::binom_count(m + static_cast<std::size_t>(q) - 1, static_cast<std::size_t>(q)) > 1e6)
        return detail::hq_dp(std::span<const double>(vars.values()), q);
    double total = 0.0;
    // Multisets i_1 <= ... <= i_q enumerated depth-first.
    auto rec = [&](auto&& self, int remaining, std::size_t start, double prod) -> void {
        if (remaining == 0) {
            total += prod;
            return;
        }
        for (std::size_t i = start; i < m; ++i)
            self(self, remaining - 1, i, prod * vars[i]);
    };
    rec(rec, q, 0, 1.0);
    return total;
}

/// H_q via the recurrence H_q(a_1..a_m) = H_q(a_1..a_{m-1}) + a_m H_{q-1}(a_1..a_m).
/// Safe for repeated variables.
inline double hq_recurrence(const VarList& vars, int q) {
    if (q < 0)
        throw Error("hq_recurrence requires q >= 0");
    return detail::hq_dp(std::span<const double>(vars.values()), q);
}

/// H_q as the rational sum  sum_j a_j^{q+m-1} / prod_{i != j} (a_j - a_i);
/// requires pairwise-distinct variables.  The form loses roughly one digit
/// per decade of variable clustering, hence the separation gate.
inline double hq_sylvester(const VarList& vars, int q, double rel_tol = 1e-6) {
    if (q < 0)
        throw Error("hq_sylvester requires q >= 0");
    const std::size_t m = vars.size();
    if (m == 1)
        return std::pow(vars[0], q);
    if (!vars.distinct(rel_tol))
        throw DegenerateVariables("variables closer than the separation tolerance; use hq_recurrence");
    if (q == 0)
        return 1.0;
    const int power = q + static_cast<int>(m) - 1;
    std::vector<detail::SignedLogTerm> terms(m);
    for (std::size_t j = 0; j < m; ++j) {
        detail::SignedProduct t;
        const double aj = vars[j];
        if (aj == 0.0) {
            terms[j] = {0.0, 0}; // 0^{q+m-1} with q >= 1
            continue;
        }
        t.mul(aj);
        t.log_abs *= power;
        if (t.sign < 0 && power % 2 == 0)
            t.sign = 1;
        for (std::size_t i = 0; i < m; ++i)
            if (i != j) {
                detail::SignedProduct d;
                d.mul(aj - vars[i]);
                t.log_abs -= d.log_abs;
                t.sign *= d.sign;
            }
        terms[j] = {t.log_abs, t.sign};
    }
    return detail::sum_signed_log_terms(terms).value;
}

/// Stirling number of the second kind via the alternating binomial sum,
/// carried out exactly in 128-bit integers.
inline std::int64_t stirling2(int n, int q) {
    if (!(1 <= q && q <= n))
        throw Error("stirling2 requires 1 <= q <= n");
    if (n > 26)
        throw IntegerOverflow("stirling2: i^n exceeds 128-bit range for n > 26");
    auto ipow = [](__int128 base, int e) {
        __int128 r = 1;
        for (int j = 0; j < e; ++j)
            r *= base;
        return r;
    };
    __int128 sum = 0;
    __int128 cqi = 1; // C(q, i), starting at i = 0
    for (int i = 1; i <= q; ++i) {
        cqi = cqi * (q - i + 1) / i;
        __int128 term = cqi * ipow(i, n);
        sum += ((q - i) % 2 == 0) ? term : -term;
    }
    __int128 qfact = 1;
    for (int i = 2; i <= q; ++i)
        qfact *= i;
    if (sum % qfact != 0)
        throw IntegerOverflow("stirling2: internal sum not divisible by q!");
    __int128 result = sum / qfact;
    if (result > std::numeric_limits<std::int64_t>::max() || result < 0)
        throw IntegerOverflow("stirling2 result exceeds 64-bit range");
    return static_cast<std::int64_t>(result);
}

/// Gaussian binomial coefficient; returns 0 for r > p, and the ordinary
/// binomial coefficient in the v -> 1 limit.
inline double gaussian_binomial(int p, int r, double v) {
    if (p < 0 || r < 0)
        throw Error("gaussian_binomial requires p, r >= 0");
    if (r > p)
        return 0.0;
    if (r == 0)
        return 1.0;
    if (v == 1.0)
        return binom_real(static_cast<double>(p), r);
    double result = 1.0;
    for (int i = 1; i <= r; ++i)
        result *= (1.0 - std::pow(v, p - r + i)) / (1.0 - std::pow(v, i));
    return result;
}

} // namespace fracmat
