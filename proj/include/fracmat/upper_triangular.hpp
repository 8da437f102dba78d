#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fracmat/errors.hpp"

namespace fracmat {

/// Dense upper-triangular matrix in packed row-major storage; strictly lower
/// entries are never stored.
class UpperTriangularMatrix {
public:
    explicit UpperTriangularMatrix(std::size_t n)
        : n_(n), e_(n * (n + 1) / 2, 0.0) {
        if (n == 0)
            throw Error("UpperTriangularMatrix requires n >= 1");
    }

    static UpperTriangularMatrix identity(std::size_t n) {
        UpperTriangularMatrix m(n);
        for (std::size_t i = 0; i < n; ++i)
            m.ref(i, i) = 1.0;
        return m;
    }

    std::size_t size() const { return n_; }

    double& ref(std::size_t i, std::size_t j) {
        assert(i <= j && j < n_);
        return e_[offset(i) + (j - i)];
    }

    double at(std::size_t i, std::size_t j) const {
        assert(i < n_ && j < n_);
        return i <= j ? e_[offset(i) + (j - i)] : 0.0;
    }

    const std::vector<double>& packed() const { return e_; }
    std::vector<double>& packed() { return e_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : e_)
            m = std::max(m, std::abs(v));
        return m;
    }

    /// Max absolute row sum.
    double inf_norm() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = i; j < n_; ++j)
                s += std::abs(e_[offset(i) + (j - i)]);
            m = std::max(m, s);
        }
        return m;
    }

    void scale(double c) {
        for (double& v : e_)
            v *= c;
    }

    /// Entry-wise division; x/x is exactly 1, unlike x * (1/x).
    void divide(double c) {
        for (double& v : e_)
            v /= c;
    }

    /// this += c * other
    void add_scaled(const UpperTriangularMatrix& other, double c) {
        assert(other.n_ == n_);
        for (std::size_t k = 0; k < e_.size(); ++k)
            e_[k] += c * other.e_[k];
    }

    void throw_if_not_finite(const char* context) const {
        for (double v : e_)
            if (!std::isfinite(v))
                throw NumericalBreakdown(std::string(context) + ": non-finite matrix entry");
    }

    /// y = M x
    std::vector<double> apply(std::span<const double> x) const {
        assert(x.size() == n_);
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            const double* row = &e_[offset(i)];
            for (std::size_t j = i; j < n_; ++j)
                s += row[j - i] * x[j];
            y[i] = s;
        }
        return y;
    }

private:
    std::size_t offset(std::size_t i) const { return i * n_ - i * (i - 1) / 2; }

    std::size_t n_;
    std::vector<double> e_;
};

inline UpperTriangularMatrix multiply(const UpperTriangularMatrix& a, const UpperTriangularMatrix& b) {
    const std::size_t n = a.size();
    assert(b.size() == n);
    UpperTriangularMatrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i; k < n; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0)
                continue;
            for (std::size_t j = k; j < n; ++j)
                c.ref(i, j) += aik * b.at(k, j);
        }
    }
    return c;
}

inline double max_abs_diff(const UpperTriangularMatrix& a, const UpperTriangularMatrix& b) {
    assert(a.size() == b.size());
    double m = 0.0;
    for (std::size_t k = 0; k < a.packed().size(); ++k)
        m = std::max(m, std::abs(a.packed()[k] - b.packed()[k]));
    return m;
}

/// exp(T) by scaling-and-squaring with a degree-13 truncated Taylor series on
/// the scaled matrix; the scaled norm is kept at or below 1/2.
inline UpperTriangularMatrix tri_exp(const UpperTriangularMatrix& t) {
    const std::size_t n = t.size();
    const double nrm = t.inf_norm();
    int s = 0;
    if (nrm > 0.5)
        s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    UpperTriangularMatrix x = t;
    x.scale(std::ldexp(1.0, -s));
    UpperTriangularMatrix e = UpperTriangularMatrix::identity(n);
    UpperTriangularMatrix m = UpperTriangularMatrix::identity(n);
    for (int j = 1; j <= 13; ++j) {
        m = multiply(m, x);
        m.scale(1.0 / j);
        e.add_scaled(m, 1.0);
    }
    for (int j = 0; j < s; ++j)
        e = multiply(e, e);
    e.throw_if_not_finite("tri_exp");
    return e;
}

/// Upper-triangular square root (positive diagonal) by the superdiagonal
/// recurrence; divisions are by r_ii + r_jj, so clustered or repeated
/// diagonals are harmless.
inline UpperTriangularMatrix tri_sqrt(const UpperTriangularMatrix& t) {
    const std::size_t n = t.size();
    UpperTriangularMatrix r(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = t.at(i, i);
        if (d <= 0.0)
            throw NonPositiveDiagonal("tri_sqrt requires a positive diagonal");
        r.ref(i, i) = std::sqrt(d);
    }
    for (std::size_t d = 1; d < n; ++d) {
        for (std::size_t i = 0; i + d < n; ++i) {
            const std::size_t j = i + d;
            double s = t.at(i, j);
            for (std::size_t k = i + 1; k < j; ++k)
                s -= r.at(i, k) * r.at(k, j);
            r.ref(i, j) = s / (r.at(i, i) + r.at(j, j));
        }
    }
    return r;
}

/// log(T) for positive-diagonal upper-triangular T by inverse scaling and
/// squaring: repeated triangular square roots bring T within 0.2 of the
/// identity, then a 22-term Mercator series is rescaled by 2^s.
inline UpperTriangularMatrix tri_log(const UpperTriangularMatrix& t) {
    const std::size_t n = t.size();
    UpperTriangularMatrix w = t;
    UpperTriangularMatrix id = UpperTriangularMatrix::identity(n);
    int s = 0;
    while (max_abs_diff(w, id) > 0.2) {
        w = tri_sqrt(w);
        if (++s > 100)
            throw NumericalBreakdown("tri_log: square-root phase did not contract");
    }
    UpperTriangularMatrix e = w;
    e.add_scaled(id, -1.0);
    UpperTriangularMatrix acc(n);
    UpperTriangularMatrix p = e;
    for (int j = 1; j <= 22; ++j) {
        acc.add_scaled(p, (j % 2 == 1 ? 1.0 : -1.0) / j);
        if (j < 22)
            p = multiply(p, e);
    }
    acc.scale(std::ldexp(1.0, s));
    acc.throw_if_not_finite("tri_log");
    return acc;
}

} // namespace fracmat
