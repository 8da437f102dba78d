#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fracmat/errors.hpp"
#include "fracmat/funcspec.hpp"
#include "fracmat/twoband.hpp"
#include "fracmat/upper_triangular.hpp"

namespace fracmat {

enum class SemigroupStrategy { UniformClosedForm, Eigen, Series };

/// e^{-tA} for a two-band generator A.
///
/// Strategy selection at construction: uniform diagonals take the Poisson
/// closed form, well-separated diagonals take the eigendecomposition route
/// (kept only if P D P^{-1} reconstructs A to 1e-9), everything else uses
/// scaling-and-squaring on the dense triangular form.  Eigen evaluations are
/// additionally screened against sub-stochasticity; a violation means the
/// rational factors cancelled badly, and the value is recomputed by series.
class MatrixSemigroup {
public:
    explicit MatrixSemigroup(TwoBandMatrix generator) : a_(std::move(generator)) {
        choose_strategy();
    }

    MatrixSemigroup(TwoBandMatrix generator, SemigroupStrategy forced)
        : a_(std::move(generator)), strategy_(forced) {
        if (forced == SemigroupStrategy::Eigen)
            eigen_ = eigendecompose(a_);
    }

    const TwoBandMatrix& generator() const { return a_; }
    SemigroupStrategy strategy() const { return strategy_; }
    double min_diag() const { return a_.min_diag(); }

    /// e^{-tA}; t >= 0.
    UpperTriangularMatrix at(double t) const {
        if (!(t >= 0.0))
            throw Error("MatrixSemigroup::at requires t >= 0");
        const std::size_t n = a_.size();
        if (t == 0.0)
            return UpperTriangularMatrix::identity(n);
        switch (strategy_) {
        case SemigroupStrategy::UniformClosedForm: {
            // entry (s, m): (t a)^{m-s} e^{-t a} / (m-s)!  with a the common
            // diagonal; evaluated in log form to dodge overflow.
            const double ta = t * mean_diag();
            UpperTriangularMatrix r(n);
            const double log_ta = std::log(ta);
            for (std::size_t d = 0; d < n; ++d) {
                const double entry =
                    std::exp(static_cast<double>(d) * log_ta - ta - std::lgamma(static_cast<double>(d) + 1.0));
                for (std::size_t s = 0; s + d < n; ++s)
                    r.ref(s, s + d) = entry;
            }
            return r;
        }
        case SemigroupStrategy::Eigen: {
            // P e^{-tD} P^{-1}: scale the columns of P, then one multiply.
            UpperTriangularMatrix scaled(n);
            for (std::size_t s = 0; s < n; ++s)
                for (std::size_t m = s; m < n; ++m)
                    scaled.ref(s, m) = eigen_->p.at(s, m) * std::exp(-t * eigen_->d[m]);
            UpperTriangularMatrix r = multiply(scaled, eigen_->p_inv);
            if (a_.positive() && !substochastic(r))
                return series_at(t);
            return r;
        }
        case SemigroupStrategy::Series:
            return series_at(t);
        }
        throw Error("corrupt semigroup strategy");
    }

    /// I - e^{-tA} without forming the difference once it would cancel:
    /// a truncated alternating series when ||tA|| <= 1/2, else a direct
    /// subtraction with the diagonal replaced by -expm1(-t a_k).
    UpperTriangularMatrix deviation_from_identity(double t) const {
        const std::size_t n = a_.size();
        if (t == 0.0)
            return UpperTriangularMatrix(n);
        UpperTriangularMatrix x = a_.dense();
        x.scale(t);
        if (x.inf_norm() <= 0.5) {
            UpperTriangularMatrix acc(n);
            UpperTriangularMatrix m = UpperTriangularMatrix::identity(n);
            for (int j = 1; j <= 17; ++j) {
                m = multiply(m, x);
                m.scale(1.0 / j);
                acc.add_scaled(m, j % 2 == 1 ? 1.0 : -1.0);
            }
            return acc;
        }
        UpperTriangularMatrix r = at(t);
        r.scale(-1.0);
        for (std::size_t s = 0; s < n; ++s)
            r.ref(s, s) = -std::expm1(-t * a_.diag(s));
        return r;
    }

private:
    void choose_strategy() {
        if (a_.uniform()) {
            strategy_ = SemigroupStrategy::UniformClosedForm;
            return;
        }
        if (a_.distinct()) {
            try {
                EigenFactors f = eigendecompose(a_);
                if (reconstructs(f)) {
                    eigen_ = std::move(f);
                    strategy_ = SemigroupStrategy::Eigen;
                    return;
                }
            } catch (const DegenerateDiagonal&) {
            }
        }
        strategy_ = SemigroupStrategy::Series;
    }

    bool reconstructs(const EigenFactors& f) const {
        const std::size_t n = a_.size();
        if (max_abs_diff(multiply(f.p, f.p_inv), UpperTriangularMatrix::identity(n)) > 1e-9)
            return false;
        UpperTriangularMatrix pd(n);
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t m = s; m < n; ++m)
                pd.ref(s, m) = f.p.at(s, m) * f.d[m];
        const UpperTriangularMatrix full = multiply(pd, f.p_inv);
        return max_abs_diff(full, a_.dense()) <= 1e-9 * std::max(1.0, a_.max_abs_diag());
    }

    double mean_diag() const {
        double s = 0.0;
        for (double v : a_.diagonal())
            s += v;
        return s / static_cast<double>(a_.size());
    }

    UpperTriangularMatrix series_at(double t) const {
        UpperTriangularMatrix x = a_.dense();
        x.scale(-t);
        return tri_exp(x);
    }

    static bool substochastic(const UpperTriangularMatrix& r) {
        const std::size_t n = r.size();
        for (std::size_t s = 0; s < n; ++s) {
            double row = 0.0;
            for (std::size_t m = s; m < n; ++m) {
                const double v = r.at(s, m);
                if (v < -1e-9 || v > 1.0 + 1e-9)
                    return false;
                row += v;
            }
            if (row > 1.0 + 1e-9)
                return false;
        }
        return true;
    }

    TwoBandMatrix a_;
    SemigroupStrategy strategy_ = SemigroupStrategy::Series;
    std::optional<EigenFactors> eigen_;
};

/// Direction of the characteristic flow X_x(t) = g^{-1}(g(x) +/- t).
/// Forward follows g upward.  Backward follows it downward, which is the
/// flow of the semigroup generated by -(d/dg) and the one the killed matrix
/// semigroups discretize.
enum class FlowDirection { Forward, Backward };

/// What happens when a characteristic reaches the edge of [a, b]: Kill pins
/// it at the exit boundary (function values drop to zero), Extend follows g
/// beyond the window for as long as g stays invertible, so a finite interval
/// can stand in for a half-line domain.  Either way, leaving the natural
/// range of g kills the characteristic.
enum class BoundaryBehavior { Kill, Extend };

/// The composition semigroup T_t f(x) = f(g^{-1}(g(x) + t)) of a strictly
/// monotone g, with killing at the boundary the flow exits through.
class CharacteristicSemigroup {
public:
    CharacteristicSemigroup(FunctionSpec g, double a, double b,
                            FlowDirection direction = FlowDirection::Forward,
                            BoundaryBehavior boundary = BoundaryBehavior::Kill)
        : g_(std::move(g)), a_(a), b_(b), direction_(direction), boundary_(boundary) {
        if (!(a < b))
            throw Error("CharacteristicSemigroup requires a < b");
        if (g_.monotonicity() == Monotonicity::NonMonotone)
            throw NonMonotoneSamples("characteristic semigroup requires strictly monotone g");
        ga_ = g_(a_);
        gb_ = g_(b_);
    }

    const FunctionSpec& g() const { return g_; }
    double a() const { return a_; }
    double b() const { return b_; }

    bool killed(double t, double x) const { return !flow(t, x).alive; }

    /// X_x(t); killed characteristics stay pinned at their exit boundary.
    double position(double t, double x) const { return flow(t, x).x; }

    /// T_t f(x): f along the characteristic, zero once it has been killed.
    double at(double t, const FunctionSpec& f, double x) const {
        const FlowPoint p = flow(t, x);
        return p.alive ? f(p.x) : 0.0;
    }

private:
    struct FlowPoint {
        bool alive;
        double x;
    };

    FlowPoint flow(double t, double x) const {
        if (!(t >= 0.0))
            throw Error("characteristic semigroup requires t >= 0");
        const double pad = 1e-12 * std::max(1.0, std::abs(b_ - a_));
        if (x < a_ - pad || x > b_ + pad)
            throw Error("evaluation point outside [a, b]");
        const bool up = direction_ == FlowDirection::Forward;
        const double u = g_(x) + (up ? t : -t);
        // The flow can only cross the image endpoint it moves toward; that
        // boundary is closed (value zero as soon as the exit time is reached).
        const double u_exit = up ? std::max(ga_, gb_) : std::min(ga_, gb_);
        const bool past = up ? u >= u_exit : u <= u_exit;
        if (!past)
            return {true, g_.invert(u, 1e-12)};
        if (boundary_ == BoundaryBehavior::Kill)
            return {false, exit_point()};
        try {
            return {true, g_.invert(u, 1e-12, InversionRange::Extended)};
        } catch (const Error&) {
            // Beyond the natural range of g itself.
            return {false, exit_point()};
        }
    }

    double exit_point() const {
        const bool up = direction_ == FlowDirection::Forward;
        const bool toward_b = up == (gb_ > ga_);
        return toward_b ? b_ : a_;
    }

    FunctionSpec g_;
    double a_;
    double b_;
    FlowDirection direction_;
    BoundaryBehavior boundary_;
    double ga_ = 0.0;
    double gb_ = 0.0;
};

/// Empirical sup of |d X_x(t) / dx| over a probe grid, by central
/// differences; a lower bound on the C^1 -> C^1 growth factor of T_t.
inline double norm_estimate_c1(const CharacteristicSemigroup& c, double t,
                               std::span<const double> probe_nodes) {
    if (probe_nodes.empty())
        throw Error("norm_estimate_c1 requires a non-empty probe grid");
    double sup = 0.0;
    for (double x : probe_nodes) {
        const double delta = 1e-6 * std::max(1.0, std::abs(x));
        double lo = x - delta, hi = x + delta;
        if (lo < c.a()) {
            lo = c.a();
            hi = std::min(c.b(), lo + 2.0 * delta);
        }
        if (hi > c.b()) {
            hi = c.b();
            lo = std::max(c.a(), hi - 2.0 * delta);
        }
        if (!(hi > lo))
            continue;
        const double d = (c.position(t, hi) - c.position(t, lo)) / (hi - lo);
        sup = std::max(sup, std::abs(d));
    }
    return sup;
}

} // namespace fracmat
