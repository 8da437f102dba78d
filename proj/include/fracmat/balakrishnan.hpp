#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "fracmat/errors.hpp"
#include "fracmat/semigroup.hpp"
#include "fracmat/twoband.hpp"
#include "fracmat/upper_triangular.hpp"

namespace fracmat {

/// Discretization of the semigroup integrals over (0, inf): log-substituted
/// composite Gauss-Legendre panels between an analytic head bound and an
/// analytic exponential tail.
struct QuadratureScheme {
    double split_point = 1.0;   ///< decade boundaries sit at split_point * 10^k
    int panels_per_decade = 4;
    int nodes_per_panel = 16;
    double horizon_scale = 40.0; ///< T_max = horizon_scale / min diagonal
    double tolerance = 1e-9;     ///< absolute, max-entry
    int max_refinements = 2;     ///< panel doublings tried before giving up;
                                 ///< 0 integrates once at the given resolution
};

struct QuadratureReport {
    int panels = 0;
    double truncation_bound = 0.0; ///< analytic bound on the neglected head + tail
};

namespace detail {

inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double xi = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double p1 = 1.0, p2 = 0.0, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            p1 = 1.0;
            p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * xi * p2 - j * p3) / (j + 1.0);
            }
            dp = n * (xi * p1 - p2) / (xi * xi - 1.0);
            const double dx = p1 / dp;
            xi -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        x[i] = -xi;
        x[n - 1 - i] = xi;
        const double weight = 2.0 / ((1.0 - xi * xi) * dp * dp);
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    return {std::move(x), std::move(w)};
}

/// Composite panel integration over t in [t0, t1], substituted as t = e^u;
/// the integrand must already include the dt = t du measure factor.  Panel
/// edges are decade-aligned to the scheme's split point.
template <typename F>
UpperTriangularMatrix integrate_log_panels(std::size_t n, double t0, double t1,
                                           const QuadratureScheme& q, int panels_per_decade,
                                           int* panel_count, F&& integrand) {
    const double u0 = std::log(t0);
    const double u1 = std::log(t1);
    const double width = std::log(10.0) / panels_per_decade;
    const double anchor = std::log(q.split_point);
    const long k_lo = static_cast<long>(std::floor((u0 - anchor) / width));
    const long k_hi = static_cast<long>(std::ceil((u1 - anchor) / width));
    const auto [xs, ws] = gauss_legendre(q.nodes_per_panel);
    UpperTriangularMatrix acc(n);
    int used = 0;
    for (long k = k_lo; k < k_hi; ++k) {
        const double lo = std::max(u0, anchor + k * width);
        const double hi = std::min(u1, anchor + (k + 1) * width);
        if (!(hi > lo))
            continue;
        ++used;
        const double mid = 0.5 * (lo + hi);
        const double hw = 0.5 * (hi - lo);
        for (int j = 0; j < q.nodes_per_panel; ++j) {
            const double t = std::exp(mid + hw * xs[j]);
            acc.add_scaled(integrand(t), ws[j] * hw);
        }
    }
    if (panel_count)
        *panel_count = used;
    return acc;
}

/// Taylor coefficient of x^p in (1 - e^{-x})^ell, which is
/// (-1)^{p+ell} ell! S(p, ell) / p! with S a Stirling number of the second
/// kind; exact for the small p the head series needs.
inline double deviation_series_coeff(int p, int ell) {
    const double magnitude = std::exp(std::lgamma(ell + 1.0) - std::lgamma(p + 1.0)) *
                             static_cast<double>(stirling2(p, ell));
    return (p + ell) % 2 == 0 ? magnitude : -magnitude;
}

/// integral of t^{-alpha-1} (I - T_t)^ell dt over (0, inf).  The head
/// (0, t0] is summed analytically from the power series of (I - T_t)^ell
/// (three terms; the split survives alpha -> ell, where a pure truncation
/// bound would need an unreachable t0), the body is integrated by panels and
/// the tail keeps its exact leading term  I * T_max^{-alpha} / alpha.
inline UpperTriangularMatrix deviation_power_integral(const MatrixSemigroup& s, double alpha,
                                                      int ell, const QuadratureScheme& q,
                                                      int panels_per_decade,
                                                      QuadratureReport* report) {
    if (ell > 20)
        throw Error("difference order above 20 is not supported");
    const std::size_t n = s.generator().size();
    const double norm_a = s.generator().dense().inf_norm();
    const double t_max = q.horizon_scale / s.min_diag();
    const double head_budget = q.tolerance / 4.0;
    const int p_next = ell + 3; // first power not summed analytically
    const double c_next = std::abs(deviation_series_coeff(p_next, ell));
    double t0 = std::pow(head_budget * (p_next - alpha) / (2.0 * c_next * std::pow(norm_a, p_next)),
                         1.0 / (p_next - alpha));
    t0 = std::min({t0, 0.4 / (norm_a * ell), 0.5 * t_max});
    if (!(t0 > 1e-280))
        t0 = 1e-280;
    int used = 0;
    UpperTriangularMatrix acc = integrate_log_panels(
        n, t0, t_max, q, panels_per_decade, &used, [&](double t) {
            UpperTriangularMatrix d = s.deviation_from_identity(t);
            UpperTriangularMatrix p = d;
            for (int j = 1; j < ell; ++j)
                p = multiply(p, d);
            // t^{-alpha-1} dt = t^{-alpha} du
            p.scale(std::pow(t, -alpha));
            return p;
        });
    for (int p = ell; p < p_next; ++p)
        acc.add_scaled(natural_power(s.generator(), p),
                       deviation_series_coeff(p, ell) * std::pow(t0, p - alpha) / (p - alpha));
    // Tail: (I - T_t)^ell = I + (cross terms decaying like e^{-amin t}).
    const double tail_lead = std::pow(t_max, -alpha) / alpha;
    for (std::size_t i = 0; i < n; ++i)
        acc.ref(i, i) += tail_lead;
    if (report) {
        report->panels = used;
        const double amin = s.min_diag();
        const double tail_rest = std::pow(2.0, ell) * std::pow(t_max, -alpha - 1.0) *
                                 std::exp(-amin * t_max) / amin;
        report->truncation_bound = head_budget + tail_rest;
    }
    acc.throw_if_not_finite("deviation integral");
    return acc;
}

/// integral of t^{alpha-1} T_t dt over (0, inf), 0 < alpha < 1.  The head is
/// summed analytically from T_t = sum (-tA)^p / p! (three terms, so small
/// alpha needs no unreachable t0), the tail decays like e^{-amin T_max}.
inline UpperTriangularMatrix semigroup_moment_integral(const MatrixSemigroup& s, double alpha,
                                                       const QuadratureScheme& q,
                                                       int panels_per_decade,
                                                       QuadratureReport* report) {
    const std::size_t n = s.generator().size();
    const double amin = s.min_diag();
    const double norm_a = s.generator().dense().inf_norm();
    const double t_max = q.horizon_scale / amin;
    const double head_budget = q.tolerance / 4.0;
    double t0 = std::pow(head_budget * 6.0 * (3.0 + alpha) / (2.0 * std::pow(norm_a, 3)),
                         1.0 / (3.0 + alpha));
    t0 = std::min({t0, 0.4 / norm_a, 0.5 * t_max});
    if (!(t0 > 1e-280))
        t0 = 1e-280;
    int used = 0;
    UpperTriangularMatrix acc = integrate_log_panels(
        n, t0, t_max, q, panels_per_decade, &used, [&](double t) {
            UpperTriangularMatrix m = s.at(t);
            m.scale(std::pow(t, alpha)); // t^{alpha-1} dt = t^{alpha} du
            return m;
        });
    double factorial = 1.0;
    for (int p = 0; p <= 2; ++p) {
        if (p > 0)
            factorial *= p;
        const double sign = p % 2 == 0 ? 1.0 : -1.0;
        acc.add_scaled(natural_power(s.generator(), p),
                       sign * std::pow(t0, alpha + p) / (factorial * (alpha + p)));
    }
    if (report) {
        report->panels = used;
        const double tail = std::pow(t_max, alpha - 1.0) * std::exp(-amin * t_max) / amin;
        report->truncation_bound = head_budget + tail;
    }
    acc.throw_if_not_finite("semigroup moment integral");
    return acc;
}

/// Run an integral at the scheme's resolution, then at doubled resolutions
/// until two consecutive passes agree to the scheme tolerance.  Refusal to
/// settle raises ToleranceNotMet.  With max_refinements = 0 the single pass
/// is returned unchecked (fixed-resolution studies).
template <typename Eval>
UpperTriangularMatrix refine_to_tolerance(const QuadratureScheme& q, QuadratureReport* report,
                                          Eval&& eval) {
    QuadratureReport local;
    UpperTriangularMatrix prev = eval(q.panels_per_decade, &local);
    if (q.max_refinements <= 0) {
        if (report)
            *report = local;
        return prev;
    }
    for (int j = 1; j <= q.max_refinements; ++j) {
        UpperTriangularMatrix cur = eval((1 << j) * q.panels_per_decade, &local);
        if (max_abs_diff(prev, cur) <= q.tolerance) {
            if (report)
                *report = local;
            return cur;
        }
        prev = std::move(cur);
    }
    throw ToleranceNotMet("panel refinement stalled above the requested tolerance");
}

} // namespace detail

/// (-A)^alpha, 0 < alpha < 1, as (1/Gamma(-alpha)) integral of
/// t^{-alpha-1}(T_t - I) dt.
inline UpperTriangularMatrix frac_power_bf01(const MatrixSemigroup& s, double alpha,
                                             const QuadratureScheme& q = {},
                                             QuadratureReport* report = nullptr) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error("frac_power_bf01 requires 0 < alpha < 1");
    if (!(s.min_diag() > 0.0))
        throw NonPositiveDiagonal("frac_power_bf01 requires positive generator diagonals");
    UpperTriangularMatrix r = detail::refine_to_tolerance(q, report, [&](int ppd, QuadratureReport* rep) {
        return detail::deviation_power_integral(s, alpha, 1, q, ppd, rep);
    });
    // 1/Gamma(-alpha) applied to (T_t - I) = -(I - T_t); Gamma(-alpha) < 0.
    r.scale(-1.0 / std::tgamma(-alpha));
    return r;
}

/// (-A)^alpha for 1 < alpha < ell via the ell-fold difference
/// (I - T_t)^ell; normalized by the numerically computed scalar constant
/// integral of t^{-alpha-1}(1 - e^{-t})^ell dt, which makes the scalar case
/// exact by construction.
inline UpperTriangularMatrix frac_power_bf02(const MatrixSemigroup& s, double alpha, int ell,
                                             const QuadratureScheme& q = {},
                                             QuadratureReport* report = nullptr) {
    if (ell < 2)
        throw Error("frac_power_bf02 requires ell >= 2");
    if (!(alpha > 1.0 && alpha < static_cast<double>(ell)))
        throw Error("frac_power_bf02 requires 1 < alpha < ell");
    if (!(s.min_diag() > 0.0))
        throw NonPositiveDiagonal("frac_power_bf02 requires positive generator diagonals");
    const MatrixSemigroup unit(TwoBandMatrix({1.0}));
    UpperTriangularMatrix r = detail::refine_to_tolerance(q, report, [&](int ppd, QuadratureReport* rep) {
        UpperTriangularMatrix num = detail::deviation_power_integral(s, alpha, ell, q, ppd, rep);
        const UpperTriangularMatrix c = detail::deviation_power_integral(unit, alpha, ell, q, ppd, nullptr);
        num.divide(c.at(0, 0));
        return num;
    });
    return r;
}

/// (-A)^{-alpha}, 0 < alpha < 1, as (1/Gamma(alpha)) integral of
/// t^{alpha-1} T_t dt.
inline UpperTriangularMatrix neg_power_bf03(const MatrixSemigroup& s, double alpha,
                                            const QuadratureScheme& q = {},
                                            QuadratureReport* report = nullptr) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error("neg_power_bf03 requires 0 < alpha < 1");
    if (!(s.min_diag() > 0.0))
        throw DivergentTail("neg_power_bf03 requires positive generator diagonals for an integrable tail");
    UpperTriangularMatrix r = detail::refine_to_tolerance(q, report, [&](int ppd, QuadratureReport* rep) {
        return detail::semigroup_moment_integral(s, alpha, q, ppd, rep);
    });
    r.scale(1.0 / std::tgamma(alpha));
    return r;
}

} // namespace fracmat
