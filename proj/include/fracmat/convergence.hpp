#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracmat/errors.hpp"
#include "fracmat/fraccalc.hpp"
#include "fracmat/funcspec.hpp"
#include "fracmat/semigroup.hpp"

namespace fracmat {

enum class GrowthRegime {
    Bounded,      ///< bounded semigroup: predicted exponent alpha
    Polynomial,   ///< ||T_t|| <= M (1 + t^p): predicted exponent alpha/(p+1)
    NegativePower ///< killed negative power: predicted exponent 1
};

/// One empirical rate measurement: a candidate evaluated over doubling grid
/// sizes against a fixed reference value.
struct SweepPlan {
    std::function<double(std::size_t)> candidate;
    double oracle_value = 0.0;
    std::vector<std::size_t> grid_sizes; ///< at least 4, strictly doubling
    double interval_length = 1.0;        ///< h = interval_length / n
    double predicted_exponent = 0.0;
    GrowthRegime regime = GrowthRegime::Bounded;
    std::string label;
};

struct RateReport {
    std::vector<std::size_t> grid_sizes;
    std::vector<double> hs;
    std::vector<double> errors;
    double slope = 0.0;
    double residual = 0.0; ///< rms residual of the log-log fit
    double predicted_exponent = 0.0;
    GrowthRegime regime = GrowthRegime::Bounded;
    bool passed = false;          ///< slope >= predicted - 0.2
    bool monotone_errors = true;  ///< false is a warning, not a failure
    std::string label;
};

/// Least-squares slope of y against x; optionally reports the rms residual.
inline double fit_loglog_slope(std::span<const double> xs, std::span<const double> ys,
                               double* residual = nullptr) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n)
        throw Error("slope fit requires at least two matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0)
        throw Error("slope fit requires distinct abscissae");
    const double slope = sxy / sxx;
    if (residual) {
        const double intercept = my - slope * mx;
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - (slope * xs[i] + intercept);
            rss += r * r;
        }
        *residual = std::sqrt(rss / static_cast<double>(n));
    }
    return slope;
}

/// Evaluate the candidate across the plan's grids, fit the log-log error
/// slope against h, and compare it with the predicted exponent minus the
/// 0.2 fitting margin (the theorems give upper bounds, so faster observed
/// convergence is fine).
inline RateReport run_sweep(const SweepPlan& plan) {
    if (plan.grid_sizes.size() < 4)
        throw Error("a sweep needs at least 4 grid sizes");
    for (std::size_t i = 1; i < plan.grid_sizes.size(); ++i)
        if (plan.grid_sizes[i] != 2 * plan.grid_sizes[i - 1])
            throw Error("sweep grid sizes must double");
    if (!std::isfinite(plan.oracle_value))
        throw OracleNotConverged("sweep oracle value is not finite");

    RateReport rep;
    rep.grid_sizes = plan.grid_sizes;
    rep.predicted_exponent = plan.predicted_exponent;
    rep.regime = plan.regime;
    rep.label = plan.label;
    std::vector<double> log_h, log_e;
    for (std::size_t n : plan.grid_sizes) {
        const double h = plan.interval_length / static_cast<double>(n);
        double err = std::abs(plan.candidate(n) - plan.oracle_value);
        if (!std::isfinite(err))
            throw NumericalBreakdown("candidate produced a non-finite value in a sweep");
        err = std::max(err, 1e-300); // keep the log finite on exact hits
        rep.hs.push_back(h);
        rep.errors.push_back(err);
        log_h.push_back(std::log(h));
        log_e.push_back(std::log(err));
    }
    for (std::size_t i = 1; i < rep.errors.size(); ++i)
        if (rep.errors[i] > rep.errors[i - 1])
            rep.monotone_errors = false; // grids double, so errors should shrink
    rep.slope = fit_loglog_slope(log_h, log_e, &rep.residual);
    rep.passed = rep.slope >= plan.predicted_exponent - 0.2;
    return rep;
}

struct GrowthClassification {
    GrowthRegime regime;
    double p;     ///< fitted polynomial exponent (0 when bounded)
    double slope; ///< raw fitted slope of the C^1 norm proxy
};

/// Classify the C^1 growth of the characteristic semigroup of g by fitting
/// log sup|X'_x(t)| against log t over the probe times.  Slopes at or below
/// 0.1 count as bounded.  The backward (killed) flow is probed, with the
/// window treated as a cutout of a half-line domain.
inline GrowthClassification classify_growth(const FunctionSpec& g, double a, double b,
                                            std::span<const double> probe_times = {}) {
    std::vector<double> times(probe_times.begin(), probe_times.end());
    if (times.empty()) {
        for (int i = 0; i < 8; ++i)
            times.push_back(10.0 * std::pow(100.0, i / 7.0));
    }
    const CharacteristicSemigroup c(g, a, b, FlowDirection::Backward, BoundaryBehavior::Extend);
    std::vector<double> nodes(129);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        nodes[i] = a + (b - a) * static_cast<double>(i) / (nodes.size() - 1);
    std::vector<double> log_t, log_v;
    for (double t : times) {
        const double v = norm_estimate_c1(c, t, nodes);
        if (v > 0.0) {
            log_t.push_back(std::log(t));
            log_v.push_back(std::log(v));
        }
    }
    if (log_t.size() < 2)
        throw Error("growth classification needs at least two usable probe times");
    const double slope = fit_loglog_slope(log_t, log_v);
    if (slope <= 0.1)
        return {GrowthRegime::Bounded, 0.0, slope};
    return {GrowthRegime::Polynomial, slope, slope};
}

/// Predicted convergence exponent for a derivative of order alpha under the
/// given semigroup growth regime, with the consistency modulus proportional
/// to h.
inline double predicted_exponent(GrowthRegime regime, double alpha, double p = 0.0) {
    switch (regime) {
    case GrowthRegime::Bounded: return alpha;
    case GrowthRegime::Polynomial: return alpha / (p + 1.0);
    case GrowthRegime::NegativePower: return 1.0;
    }
    throw Error("corrupt growth regime");
}

/// Plan builder for frac_deriv_wrt sweeps; the oracle defaults to the
/// singular-kernel quadrature at tolerance 1e-8.
inline SweepPlan make_dwrt_plan(FunctionSpec f, FunctionSpec g, double a, double x, double alpha,
                                FracMethod method, std::size_t n0, int levels,
                                GrowthRegime regime, double growth_p = 0.0,
                                std::optional<double> oracle_override = std::nullopt) {
    SweepPlan plan;
    plan.label = "frac_deriv_wrt sweep";
    plan.interval_length = x - a;
    for (int i = 0; i < levels; ++i)
        plan.grid_sizes.push_back(n0 << i);
    plan.regime = regime;
    plan.predicted_exponent = predicted_exponent(regime, std::abs(alpha), growth_p);
    plan.oracle_value = oracle_override ? *oracle_override
                                        : rl_wrt_quadrature(f, g, a, x, alpha, 1e-8);
    plan.candidate = [f = std::move(f), g = std::move(g), a, x, alpha, method](std::size_t n) {
        return frac_deriv_wrt(f, g, Grid(a, x, n), alpha, method).real_value();
    };
    return plan;
}

} // namespace fracmat
