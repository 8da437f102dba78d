#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "fracmat/errors.hpp"
#include "fracmat/expression.hpp"

namespace fracmat {

enum class Monotonicity { Increasing, Decreasing, NonMonotone };

enum class InversionRange {
    Domain,  ///< target must lie in the image of [a, b]
    Extended ///< bracket may grow beyond b (resp. below a) along a monotone tail
};

/// A parsed scalar function together with its working interval, its exact
/// symbolic derivative, a screened monotonicity verdict and (for catalog
/// entries) a closed-form inverse.
class FunctionSpec {
public:
    FunctionSpec(Expression expr, double a, double b,
                 std::optional<Expression> inverse = std::nullopt)
        : expr_(std::move(expr)),
          deriv_(expr_.derivative()),
          a_(a),
          b_(b),
          inverse_(std::move(inverse)) {
        if (!(a < b))
            throw Error("FunctionSpec requires a < b");
        screen_monotonicity();
    }

    static FunctionSpec from_string(std::string_view src, double a, double b) {
        return FunctionSpec(Expression::parse(src), a, b);
    }

    double operator()(double x) const { return expr_.eval(x); }
    double derivative(double x) const { return deriv_.eval(x); }

    const Expression& expression() const { return expr_; }
    const Expression& derivative_expression() const { return deriv_; }

    double a() const { return a_; }
    double b() const { return b_; }
    Monotonicity monotonicity() const { return mono_; }
    bool has_closed_inverse() const { return inverse_.has_value(); }

    /// x with |g(x) - y| <= tol (1 + |y|): closed form when available,
    /// otherwise bisection to a narrow bracket refined by a few safeguarded
    /// Newton steps.
    double invert(double y, double tol = 1e-10,
                  InversionRange range = InversionRange::Domain) const {
        if (mono_ == Monotonicity::NonMonotone)
            throw InversionFailure("cannot invert: function is not monotone on its interval");
        if (inverse_) {
            double x;
            try {
                x = inverse_->eval(y);
                // A closed-form inverse can evaluate happily outside the
                // branch where it actually inverts (x^2 vs sqrt); round-trip
                // to reject such points.
                if (std::abs(expr_.eval(x) - y) > std::max(tol, 1e-9) * (1.0 + std::abs(y)))
                    throw OutOfRange("inversion target outside the function's image");
            } catch (const EvalDomainError&) {
                throw OutOfRange("inversion target outside the function's image");
            }
            if (range == InversionRange::Domain) {
                const double pad = 1e-9 * (1.0 + std::abs(b_ - a_));
                if (x < a_ - pad || x > b_ + pad)
                    throw OutOfRange("inversion target outside the image of [a, b]");
            }
            return x;
        }
        double lo = a_, hi = b_;
        double flo = expr_.eval(lo), fhi = expr_.eval(hi);
        const bool increasing = mono_ == Monotonicity::Increasing;
        auto below = [&](double f) { return increasing ? f < y : f > y; };
        if (below(fhi)) {
            if (range == InversionRange::Domain)
                throw OutOfRange("inversion target outside the image of [a, b]");
            // Walk the bracket outward along the monotone tail.
            double step = std::max(1.0, hi - lo);
            for (int i = 0; i < 200 && below(fhi); ++i) {
                lo = hi;
                flo = fhi;
                hi += step;
                step *= 2.0;
                fhi = expr_.eval(hi);
            }
            if (below(fhi))
                throw InversionFailure("monotone tail never reaches the target value");
        } else if (!below(flo) && flo != y) {
            if (range == InversionRange::Domain)
                throw OutOfRange("inversion target outside the image of [a, b]");
            double step = std::max(1.0, hi - lo);
            for (int i = 0; i < 200 && !below(flo); ++i) {
                hi = lo;
                fhi = flo;
                lo -= step;
                step *= 2.0;
                flo = expr_.eval(lo);
            }
            if (!below(flo))
                throw InversionFailure("monotone tail never reaches the target value");
        }
        // Bisection to 1e-12 of the bracket width.
        const double width_goal = 1e-12 * std::max(1.0, std::abs(hi - lo));
        for (int i = 0; i < 200 && hi - lo > width_goal; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = expr_.eval(mid);
            if (below(fm))
                lo = mid;
            else
                hi = mid;
        }
        double x = 0.5 * (lo + hi);
        for (int i = 0; i < 5; ++i) {
            double d;
            try {
                d = deriv_.eval(x);
            } catch (const EvalDomainError&) {
                break;
            }
            if (d == 0.0 || !std::isfinite(d))
                break;
            const double next = x - (expr_.eval(x) - y) / d;
            if (next < lo || next > hi)
                break;
            x = next;
        }
        if (std::abs(expr_.eval(x) - y) > tol * (1.0 + std::abs(y)))
            throw InversionFailure("inversion did not reach the requested tolerance");
        return x;
    }

private:
    void screen_monotonicity() {
        // 1024-point screen; a verdict, not a proof.
        constexpr int kPoints = 1024;
        bool up = true, down = true;
        double prev;
        try {
            prev = expr_.eval(a_);
            for (int k = 1; k < kPoints; ++k) {
                const double x = a_ + (b_ - a_) * static_cast<double>(k) / (kPoints - 1);
                const double v = expr_.eval(x);
                if (!(v > prev))
                    up = false;
                if (!(v < prev))
                    down = false;
                prev = v;
            }
        } catch (const EvalDomainError&) {
            mono_ = Monotonicity::NonMonotone;
            return;
        }
        mono_ = up ? Monotonicity::Increasing
                   : down ? Monotonicity::Decreasing
                          : Monotonicity::NonMonotone;
    }

    Expression expr_;
    Expression deriv_;
    double a_;
    double b_;
    std::optional<Expression> inverse_;
    Monotonicity mono_ = Monotonicity::NonMonotone;
};

/// Prebuilt functions used throughout the examples: power-beta (x^beta),
/// neg-power-beta (-x^beta), identity, monomial (x^p) and expfun (e^x).
/// Power-type entries carry exact closed-form inverses.
inline FunctionSpec catalog(std::string_view name, double param = 0.0,
                            double a = 0.0, double b = 1.0) {
    auto expr = [](const std::string& s) { return Expression::parse(s); };
    auto num = [](double v) {
        char buf[40];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    };
    if (name == "identity")
        return FunctionSpec(expr("x"), a, b, expr("x"));
    if (name == "power-beta") {
        if (!(param > 0.0))
            throw Error("power-beta requires beta > 0");
        return FunctionSpec(expr("x^" + num(param)), a, b, expr("x^" + num(1.0 / param)));
    }
    if (name == "neg-power-beta") {
        if (!(param > 0.0))
            throw Error("neg-power-beta requires beta > 0");
        return FunctionSpec(expr("-x^" + num(param)), a, b, expr("(-x)^" + num(1.0 / param)));
    }
    if (name == "monomial") {
        if (!(param > 0.0))
            throw Error("monomial requires p > 0");
        return FunctionSpec(expr("x^" + num(param)), a, b, expr("x^" + num(1.0 / param)));
    }
    if (name == "expfun")
        return FunctionSpec(expr("exp(x)"), a, b, expr("log(x)"));
    throw UnknownCatalogEntry("unknown catalog entry: " + std::string(name));
}

} // namespace fracmat
