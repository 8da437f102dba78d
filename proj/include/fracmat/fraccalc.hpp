#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "fracmat/balakrishnan.hpp"
#include "fracmat/errors.hpp"
#include "fracmat/funcspec.hpp"
#include "fracmat/semigroup.hpp"
#include "fracmat/twoband.hpp"

namespace fracmat {

/// Uniform partition of [a, x] into n subintervals; the last node is pinned
/// to x rather than accumulated.
class Grid {
public:
    Grid(double a, double x, std::size_t n) : a_(a), x_(x), n_(n) {
        if (!(a < x))
            throw Error("Grid requires a < x");
        if (n < 1)
            throw Error("Grid requires n >= 1");
        h_ = (x - a) / static_cast<double>(n);
    }

    double left() const { return a_; }
    double right() const { return x_; }
    std::size_t n() const { return n_; }
    double h() const { return h_; }

    double node(std::size_t k) const {
        return k == n_ ? x_ : a_ + h_ * static_cast<double>(k);
    }

    std::vector<double> nodes() const {
        std::vector<double> v(n_ + 1);
        for (std::size_t k = 0; k <= n_; ++k)
            v[k] = node(k);
        return v;
    }

private:
    double a_;
    double x_;
    std::size_t n_;
    double h_;
};

enum class Side { Left, Right };

/// Grid samples of f in operator order.  Left ordering walks from the
/// evaluation point backwards (f_j = f(x_{n-j})); right ordering walks
/// forward (f_j = f(x_j)).  The (n+1)-th sample is 0 by the kill convention
/// and is never stored.
struct SampleVector {
    Side side;
    std::vector<double> values;

    static SampleVector left_ordered(const FunctionSpec& f, const Grid& grid) {
        SampleVector s{Side::Left, std::vector<double>(grid.n())};
        for (std::size_t j = 0; j < grid.n(); ++j)
            s.values[j] = f(grid.node(grid.n() - j));
        return s;
    }

    static SampleVector right_ordered(const FunctionSpec& f, const Grid& grid) {
        SampleVector s{Side::Right, std::vector<double>(grid.n())};
        for (std::size_t j = 0; j < grid.n(); ++j)
            s.values[j] = f(grid.node(j));
        return s;
    }
};

enum class FracMethod { GlSum, MatrixPower, Balakrishnan, RlQuadrature };

/// Value of a fractional operator at the evaluation point together with the
/// per-node vector it was projected from.
struct FracResult {
    std::complex<double> value;
    std::vector<std::complex<double>> node_values; // matrix-row order
    FracMethod method;
    Side side;
    double alpha;
    Grid grid;

    /// Evaluation point of row r: x_{n-r} on the left side, x_r on the right.
    double point_for_row(std::size_t r) const {
        return side == Side::Left ? grid.node(grid.n() - r) : grid.node(r);
    }

    std::size_t node_index_for_row(std::size_t r) const {
        return side == Side::Left ? grid.n() - r : r;
    }

    double real_value() const { return value.real(); }
};

namespace detail {

/// Toeplitz application of the uniform-grid power: out_r = sum_k w_k f_{r+k}.
inline std::vector<double> apply_uniform_weights(std::span<const double> w,
                                                 std::span<const double> f) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t k = 0; r + k < n; ++k)
            s += w[k] * f[r + k];
        out[r] = s;
    }
    return out;
}

inline void require_vanishing(double fa, const char* which) {
    if (!(std::abs(fa) <= 1e-10)) {
        if (which[0] == 'a')
            throw NonVanishingAtA("left-sided operators require f(a) = 0");
        throw NonVanishingAtB("right-sided operators require f(b) = 0");
    }
}

} // namespace detail

/// Left Grunwald-Letnikov operator of order alpha on [a, x]:
/// h^{-alpha} sum_k (-1)^k binom(alpha, k) f(x - kh), truncated at the grid
/// because samples at and below a vanish.  Negative alpha realizes the
/// fractional integral with rising-factorial weights.
inline FracResult gl_left(const FunctionSpec& f, const Grid& grid, double alpha) {
    detail::require_vanishing(f(grid.left()), "a");
    const SampleVector samples = SampleVector::left_ordered(f, grid);
    const std::vector<double> w = uniform_power_weights(grid.n(), grid.h(), alpha);
    const std::vector<double> v = detail::apply_uniform_weights(w, samples.values);
    FracResult r{std::complex<double>(v[0], 0.0), {}, FracMethod::GlSum, Side::Left, alpha, grid};
    r.node_values.reserve(v.size());
    for (double y : v)
        r.node_values.emplace_back(y, 0.0);
    return r;
}

/// Right Grunwald-Letnikov operator on [x, b] (the grid spans [x, b] and the
/// evaluation point is its left endpoint).  Carries the fixed branch
/// (-1)^alpha = e^{i alpha pi}, so integer orders land on the ordinary
/// one-sided derivatives: the imaginary part vanishes for even integers.
inline FracResult gl_right(const FunctionSpec& f, const Grid& grid, double alpha) {
    detail::require_vanishing(f(grid.right()), "b");
    const SampleVector samples = SampleVector::right_ordered(f, grid);
    const std::vector<double> w = uniform_power_weights(grid.n(), grid.h(), alpha);
    const std::vector<double> v = detail::apply_uniform_weights(w, samples.values);
    const std::complex<double> branch = std::polar(1.0, alpha * 3.14159265358979323846);
    FracResult r{branch * v[0], {}, FracMethod::GlSum, Side::Right, alpha, grid};
    r.node_values.reserve(v.size());
    for (double y : v)
        r.node_values.push_back(branch * y);
    return r;
}

/// Fractional derivative of f with respect to g on [a, x]: builds the
/// two-band matrix from g at the reversed nodes (g is normalized to
/// g(a) = 0), raises it to the power alpha and applies it to the left-ordered
/// samples.  Exponent 1 reproduces the first divided difference
/// (f_0 - f_1)/(g_0 - g_1).
inline FracResult frac_deriv_wrt(const FunctionSpec& f, const FunctionSpec& g, const Grid& grid,
                                 double alpha, FracMethod method = FracMethod::MatrixPower) {
    detail::require_vanishing(f(grid.left()), "a");
    const std::size_t n = grid.n();
    const double ga = g(grid.left());
    std::vector<double> g_desc(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        g_desc[k] = g(grid.node(n - k)) - ga;
    const TwoBandMatrix a = TwoBandMatrix::from_g_samples(g_desc);
    const SampleVector samples = SampleVector::left_ordered(f, grid);

    std::vector<double> v;
    if (method == FracMethod::MatrixPower) {
        if (a.uniform()) {
            double mean = 0.0;
            for (double d : a.diagonal())
                mean += d;
            mean /= static_cast<double>(n);
            const std::vector<double> w = uniform_power_weights(n, 1.0 / mean, alpha);
            v = detail::apply_uniform_weights(w, samples.values);
        } else {
            v = real_power(a, alpha).apply(samples.values);
        }
    } else if (method == FracMethod::Balakrishnan) {
        const MatrixSemigroup s(a);
        UpperTriangularMatrix p(n);
        if (alpha > 0.0 && alpha < 1.0)
            p = frac_power_bf01(s, alpha);
        else if (alpha > 1.0 && alpha != std::rint(alpha))
            p = frac_power_bf02(s, alpha, static_cast<int>(std::floor(alpha)) + 1);
        else if (alpha < 0.0 && alpha > -1.0)
            p = neg_power_bf03(s, -alpha);
        else if (alpha == std::rint(alpha) && alpha >= 0.0)
            p = natural_power(a, static_cast<int>(alpha));
        else
            throw Error("balakrishnan method covers alpha in (-1,0) u (0,1) u (1,inf) \\ Z");
        v = p.apply(samples.values);
    } else {
        throw Error("frac_deriv_wrt supports the matrix-power and balakrishnan methods");
    }

    FracResult r{std::complex<double>(v[0], 0.0), {}, method, Side::Left, alpha, grid};
    r.node_values.reserve(v.size());
    for (double y : v)
        r.node_values.emplace_back(y, 0.0);
    return r;
}

namespace detail {

/// tanh-sinh quadrature of F over (0, G); F may blow up like an integrable
/// power at either endpoint.  tau_max must be large enough that the strongest
/// endpoint singularity is fully damped, or every level undercounts the same
/// tail and the refinement falsely settles.
template <typename F>
double tanh_sinh(double big_g, double tol, double tau_max, F&& f) {
    constexpr double kPi2 = 1.5707963267948966;
    double prev = 0.0;
    bool have_prev = false;
    // Level 0 evaluates on a unit step; each level halves it and reuses
    // nothing (the integrand is cheap enough to keep this simple).
    for (int level = 0; level <= 10; ++level) {
        const double h = 1.0 / static_cast<double>(1 << level);
        double acc = 0.0;
        const long k_max = static_cast<long>(std::ceil(tau_max / h));
        for (long k = -k_max; k <= k_max; ++k) {
            const double tau = h * static_cast<double>(k);
            const double s = kPi2 * std::sinh(tau);
            const double ch = std::cosh(s);
            const double w = h * 0.5 * big_g * kPi2 * std::cosh(tau) / (ch * ch);
            if (!(w > 1e-280))
                continue;
            // u and G-u computed separately; both stay positive and accurate.
            const double u = big_g / (1.0 + std::exp(-2.0 * s));
            const double rem = big_g / (1.0 + std::exp(2.0 * s));
            if (u <= 0.0 || rem <= 0.0)
                continue;
            acc += w * f(u, rem);
        }
        if (have_prev && std::abs(acc - prev) <= tol * (1.0 + std::abs(acc)))
            return acc;
        prev = acc;
        have_prev = true;
    }
    throw ToleranceNotMet("tanh-sinh refinement stalled above the requested tolerance");
}

} // namespace detail

/// Riemann-Liouville derivative of f by g at x, 0 < alpha < 1, evaluated as
/// (1/Gamma(1-alpha)) integral of phi'(u) (G-u)^{-alpha} du over (0, G) with
/// G = g(x) - g(a) and phi = f o g^{-1}; the derivative-of-integral form is
/// integrated by parts once (f(a) = 0 kills the boundary term), leaving a
/// weakly singular integral that tanh-sinh quadrature resolves.
inline double rl_wrt_quadrature(const FunctionSpec& f, const FunctionSpec& g, double a, double x,
                                double alpha, double tol = 1e-8) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error("rl_wrt_quadrature requires 0 < alpha < 1");
    if (!(a < x))
        throw Error("rl_wrt_quadrature requires a < x");
    detail::require_vanishing(f(a), "a");
    if (g.monotonicity() != Monotonicity::Increasing)
        throw NonMonotoneSamples("rl_wrt_quadrature requires strictly increasing g");
    const double ga = g(a);
    const double big_g = g(x) - ga;
    if (!(big_g > 0.0))
        throw NonMonotoneSamples("g(x) must exceed g(a)");
    // The kernel weakens to (G-u)^{-alpha}; push the cutoff far enough out
    // that the damped singular tail is below resolution even as alpha -> 1.
    const double tau_max =
        std::max(4.5, std::asinh(30.0 / (1.5707963267948966 * (1.0 - alpha))));
    const double integral = detail::tanh_sinh(big_g, tol, tau_max, [&](double u, double rem) {
        const double xi = g.invert(ga + u, 1e-12);
        const double dg = g.derivative(xi);
        if (dg == 0.0)
            throw EvalDomainError("g' vanishes inside the integration range");
        return (f.derivative(xi) / dg) * std::pow(rem, -alpha);
    });
    return integral / std::tgamma(1.0 - alpha);
}

namespace detail {

/// k-th derivative of f with respect to g at y by nested central divided
/// differences, all at step h.
inline double nested_g_derivative(const FunctionSpec& f, const FunctionSpec& g, int k, double y,
                                  double h) {
    if (k == 0)
        return f(y);
    const double up = nested_g_derivative(f, g, k - 1, y + h, h);
    const double dn = nested_g_derivative(f, g, k - 1, y - h, h);
    const double dg = g(y + h) - g(y - h);
    if (dg == 0.0)
        throw EvalDomainError("g is flat across the differentiation stencil");
    return (up - dn) / dg;
}

} // namespace detail

/// Taylor expansion of f in powers of (g(x) - g(a)) up to the given order,
/// with the g-derivatives at a computed by nested divided differences.  The
/// step balances truncation against rounding as eps^{1/(k+2)}, scaled so the
/// induced g-increment (not the x-increment) has that size.
inline double taylor_wrt(const FunctionSpec& f, const FunctionSpec& g, double a, double x,
                         int order) {
    if (order < 0)
        throw Error("taylor_wrt requires order >= 0");
    const double dg = g(x) - g(a);
    const double x_scale = std::max(1.0, std::abs(a));
    const double g_slope = std::max(1.0, std::abs(g.derivative(a)));
    double sum = f(a);
    double dg_pow = 1.0;
    double factorial = 1.0;
    for (int k = 1; k <= order; ++k) {
        dg_pow *= dg;
        factorial *= k;
        const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 2)) *
                         x_scale / g_slope;
        sum += detail::nested_g_derivative(f, g, k, a, h) / factorial * dg_pow;
    }
    return sum;
}

} // namespace fracmat
