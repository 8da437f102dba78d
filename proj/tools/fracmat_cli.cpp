// Command-line front end: every computation in the library behind one
// subcommand each, with deterministic JSON/CSV output.
//
// Exit codes: 0 success, 2 flag/expression validation, 3 numerical domain
// failure, 4 tolerance not met.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracmat/balakrishnan.hpp"
#include "fracmat/convergence.hpp"
#include "fracmat/errors.hpp"
#include "fracmat/fraccalc.hpp"
#include "fracmat/funcspec.hpp"
#include "fracmat/json_io.hpp"
#include "fracmat/semigroup.hpp"
#include "fracmat/symfun.hpp"
#include "fracmat/twoband.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
    std::string f_expr;
    std::string g_expr;
    std::string diag_list;
    double alpha = 0.0;
    double a = 0.0;
    double x = 1.0;
    double b = 1.0;
    std::size_t n = 64;
    std::string method = "matrix-power";
    std::string out_path;
    std::string format = "json";
};

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os)
        throw fracmat::Error("cannot open output file: " + out_path);
    os << text;
}

std::vector<double> parse_diag(const std::string& list) {
    std::vector<double> diag;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            diag.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
                ++used;
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw fracmat::Error("bad --diag entry: '" + item + "'");
        }
    }
    if (diag.empty())
        throw fracmat::Error("--diag needs at least one entry");
    return diag;
}

fracmat::TwoBandMatrix matrix_from_opts(const CommonOpts& o) {
    if (!o.diag_list.empty())
        return fracmat::TwoBandMatrix(parse_diag(o.diag_list));
    if (o.g_expr.empty())
        throw fracmat::Error("either --diag or --g is required");
    const fracmat::FunctionSpec g = fracmat::FunctionSpec::from_string(o.g_expr, o.a, o.x);
    const fracmat::Grid grid(o.a, o.x, o.n);
    const double ga = g(grid.left());
    std::vector<double> g_desc(o.n + 1);
    for (std::size_t k = 0; k <= o.n; ++k)
        g_desc[k] = g(grid.node(o.n - k)) - ga;
    return fracmat::TwoBandMatrix::from_g_samples(g_desc);
}

int selftest_main();

int run(const CommonOpts& o, const std::string& sub, const std::string& side, double t_flag,
        bool characteristic, double x0, double t_max, std::size_t steps,
        const std::string& direction, bool extend, std::size_t n_min, int levels,
        const std::string& regime_flag, double growth_p, std::optional<double> oracle_value,
        int ell, double quad_tolerance) {
    using namespace fracmat;

    if (sub == "matpow") {
        const TwoBandMatrix m = matrix_from_opts(o);
        const UpperTriangularMatrix p = real_power(m, o.alpha);
        json doc{{"schema", 1},
                 {"command", "matpow"},
                 {"alpha", o.alpha},
                 {"diag", m.diagonal()},
                 {"matrix", to_json(p)}};
        emit(o.out_path, doc.dump(2) + "\n");
        return 0;
    }

    if (sub == "gl") {
        if (o.f_expr.empty())
            throw Error("--f is required");
        const bool right = side == "right";
        FracResult r = right
                           ? gl_right(FunctionSpec::from_string(o.f_expr, o.x, o.b), Grid(o.x, o.b, o.n), o.alpha)
                           : gl_left(FunctionSpec::from_string(o.f_expr, o.a, o.x), Grid(o.a, o.x, o.n), o.alpha);
        if (o.format == "csv") {
            emit(o.out_path, result_csv(r));
        } else {
            emit(o.out_path, result_metadata(r, right ? "gl-right" : "gl-left").dump(2) + "\n");
        }
        return 0;
    }

    if (sub == "dwrt") {
        if (o.f_expr.empty() || o.g_expr.empty())
            throw Error("--f and --g are required");
        const FracMethod method = o.method == "balakrishnan" ? FracMethod::Balakrishnan
                                  : o.method == "matrix-power"
                                      ? FracMethod::MatrixPower
                                      : throw Error("--method must be matrix-power or balakrishnan");
        const FunctionSpec f = FunctionSpec::from_string(o.f_expr, o.a, o.x);
        const FunctionSpec g = FunctionSpec::from_string(o.g_expr, o.a, o.x);
        const FracResult r = frac_deriv_wrt(f, g, Grid(o.a, o.x, o.n), o.alpha, method);
        if (o.format == "csv")
            emit(o.out_path, result_csv(r));
        else
            emit(o.out_path, result_metadata(r, o.method).dump(2) + "\n");
        return 0;
    }

    if (sub == "semigroup") {
        if (characteristic) {
            if (o.g_expr.empty())
                throw Error("--g is required");
            const FunctionSpec g = FunctionSpec::from_string(o.g_expr, o.a, o.b);
            const CharacteristicSemigroup c(
                g, o.a, o.b,
                direction == "backward" ? FlowDirection::Backward : FlowDirection::Forward,
                extend ? BoundaryBehavior::Extend : BoundaryBehavior::Kill);
            std::string csv = "t,X\n";
            for (std::size_t k = 0; k <= steps; ++k) {
                const double t = t_max * static_cast<double>(k) / static_cast<double>(steps);
                csv += format_double(t);
                csv += ',';
                csv += format_double(c.position(t, x0));
                csv += '\n';
            }
            emit(o.out_path, csv);
            return 0;
        }
        const TwoBandMatrix m = matrix_from_opts(o);
        const MatrixSemigroup s(m);
        const UpperTriangularMatrix e = s.at(t_flag);
        const char* strat = s.strategy() == SemigroupStrategy::UniformClosedForm ? "uniform"
                            : s.strategy() == SemigroupStrategy::Eigen           ? "eigen"
                                                                                 : "series";
        json doc{{"schema", 1},
                 {"command", "semigroup"},
                 {"t", t_flag},
                 {"strategy", strat},
                 {"diag", m.diagonal()},
                 {"matrix", to_json(e)}};
        emit(o.out_path, doc.dump(2) + "\n");
        return 0;
    }

    if (sub == "converge") {
        if (o.f_expr.empty() || o.g_expr.empty())
            throw Error("--f and --g are required");
        FunctionSpec f = FunctionSpec::from_string(o.f_expr, o.a, o.x);
        FunctionSpec g = FunctionSpec::from_string(o.g_expr, o.a, o.x);
        const FracMethod method =
            o.method == "balakrishnan" ? FracMethod::Balakrishnan : FracMethod::MatrixPower;
        GrowthRegime regime = GrowthRegime::Bounded;
        double p = growth_p;
        if (regime_flag == "polynomial") {
            regime = GrowthRegime::Polynomial;
        } else if (regime_flag == "negative-power") {
            regime = GrowthRegime::NegativePower;
        } else if (regime_flag == "auto") {
            try {
                const GrowthClassification c = classify_growth(g, o.a, o.x);
                regime = c.regime;
                p = c.p;
            } catch (const Error&) {
                regime = GrowthRegime::Bounded; // killed flow: contraction
            }
        } else if (regime_flag != "bounded") {
            throw Error("--regime must be auto, bounded, polynomial or negative-power");
        }
        if (!oracle_value && !(o.alpha > 0.0 && o.alpha < 1.0))
            throw Error("converge needs --oracle-value outside alpha in (0,1)");
        const SweepPlan plan = make_dwrt_plan(std::move(f), std::move(g), o.a, o.x, o.alpha,
                                              method, n_min, levels, regime, p, oracle_value);
        const RateReport rep = run_sweep(plan);
        if (o.format == "csv")
            emit(o.out_path, rate_report_csv(rep));
        else
            emit(o.out_path, to_json(rep).dump(2) + "\n");
        return 0;
    }

    if (sub == "balakrishnan-check") {
        const TwoBandMatrix m = matrix_from_opts(o);
        const MatrixSemigroup s(m);
        QuadratureScheme scheme;
        scheme.tolerance = quad_tolerance;
        QuadratureReport report;
        UpperTriangularMatrix approx(m.size());
        UpperTriangularMatrix closed(m.size());
        if (o.method == "bf01") {
            approx = frac_power_bf01(s, o.alpha, scheme, &report);
            closed = real_power(m, o.alpha);
        } else if (o.method == "bf02") {
            approx = frac_power_bf02(s, o.alpha, ell, scheme, &report);
            closed = real_power(m, o.alpha);
        } else if (o.method == "bf03") {
            approx = neg_power_bf03(s, o.alpha, scheme, &report);
            closed = real_power(m, -o.alpha);
        } else {
            throw Error("--method must be bf01, bf02 or bf03");
        }
        json doc{{"schema", 1},
                 {"alpha", o.alpha},
                 {"method", o.method},
                 {"max_abs_error_vs_closed_form", max_abs_diff(approx, closed)},
                 {"panels", report.panels}};
        emit(o.out_path, doc.dump(2) + "\n");
        return 0;
    }

    if (sub == "selftest")
        return selftest_main();

    throw Error("unknown subcommand");
}

// Built-in identity suites: the symmetric-function identities and the
// two-band power laws, on fixed deterministic samples.
int selftest_main() {
    using namespace fracmat;
    int passed = 0, total = 0;
    auto check = [&](bool ok) {
        ++total;
        if (ok)
            ++passed;
        return ok;
    };

    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<double> unif(0.1, 10.0);

    // Cross-route H_q agreement on random well-separated variables.
    int sym_pass = 0, sym_total = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 2 + trial % 7;
        std::vector<double> v(m);
        bool ok_sep = false;
        while (!ok_sep) {
            for (double& z : v)
                z = unif(rng);
            ok_sep = VarList(v).distinct(1e-3);
        }
        const VarList vars(v);
        const int q = 1 + trial % 8;
        const double mono = hq_monomial(vars, q);
        const double rec = hq_recurrence(vars, q);
        const double syl = hq_sylvester(vars, q);
        bool ok = std::abs(rec - mono) <= 1e-12 * std::abs(mono) &&
                  std::abs(syl - mono) <= 1e-8 * std::abs(mono);
        // Lemma recurrence: H_q(a_1..a_m) = H_q(a_1..a_{m-1}) + a_m H_{q-1}(a_1..a_m)
        if (m > 1) {
            const VarList head(std::vector<double>(v.begin(), v.end() - 1));
            const double law = hq_recurrence(head, q) + v.back() * hq_recurrence(vars, q - 1);
            ok = ok && std::abs(law - mono) <= 1e-12 * std::abs(mono);
        }
        ++sym_total;
        if (check(ok))
            ++sym_pass;
    }
    // Stirling and Gaussian bridges.
    int bridge_pass = 0, bridge_total = 0;
    for (int m = 1; m <= 6; ++m)
        for (int q = 0; q <= 6; ++q) {
            std::vector<double> v(m);
            for (int i = 0; i < m; ++i)
                v[i] = i + 1.0;
            const double h = hq_monomial(VarList(v), q);
            const double s = q == 0 ? 1.0 : static_cast<double>(stirling2(q + m, m));
            ++bridge_total;
            if (check(std::abs(h - s) <= 1e-9 * std::max(1.0, s)))
                ++bridge_pass;
        }
    for (double v : {0.3, 0.7, 1.5})
        for (int m = 1; m <= 5; ++m)
            for (int q = 0; q <= 5; ++q) {
                std::vector<double> vars(m);
                for (int i = 0; i < m; ++i)
                    vars[i] = std::pow(v, i);
                const double h = hq_monomial(VarList(vars), q);
                const double gb = gaussian_binomial(m + q - 1, q, v);
                ++bridge_total;
                if (check(std::abs(h - gb) <= 1e-9 * std::max(1.0, std::abs(gb))))
                    ++bridge_pass;
            }

    // Two-band semigroup laws on random distinct-diagonal matrices.
    int band_pass = 0, band_total = 0;
    std::uniform_real_distribution<double> du(0.5, 4.0);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 2 + trial % 9;
        std::vector<double> diag(n);
        bool ok_sep = false;
        while (!ok_sep) {
            for (double& z : diag)
                z = du(rng);
            ok_sep = VarList(diag).distinct(0.025);
        }
        const TwoBandMatrix m(diag);
        const double alpha = 0.3 + 0.2 * (trial % 4);
        const double beta = 0.5;
        const UpperTriangularMatrix pa = real_power(m, alpha);
        const UpperTriangularMatrix pb = real_power(m, beta);
        const UpperTriangularMatrix pab = real_power(m, alpha + beta);
        const double scale = std::max(1e-300, pab.max_abs());
        bool ok = max_abs_diff(multiply(pa, pb), pab) <= 1e-8 * scale;
        const UpperTriangularMatrix half = real_power(m, 0.5);
        ok = ok && max_abs_diff(multiply(half, half), m.dense()) <= 1e-8 * std::max(1.0, m.max_abs_diag());
        ++band_total;
        if (check(ok))
            ++band_pass;
    }

    std::printf("symfun identities: %d/%d passed\n", sym_pass, sym_total);
    std::printf("symfun bridges: %d/%d passed\n", bridge_pass, bridge_total);
    std::printf("twoband semigroup laws: %d/%d passed\n", band_pass, band_total);
    std::printf("total: %d/%d\n", passed, total);
    return passed == total ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional calculus of a function with respect to a function via two-band matrix powers"};
    app.require_subcommand(1);
    app.footer("Expression grammar for --f/--g (whitespace-insensitive):\n"
               "  expr   := term (('+'|'-') term)*\n"
               "  term   := factor (('*'|'/') factor)*\n"
               "  factor := ['-'] power\n"
               "  power  := atom ['^' factor]\n"
               "  atom   := number | 'x' | func '(' expr ')' | '(' expr ')'\n"
               "  func   := exp | log | sqrt | sin | cos | abs | pow(expr, expr)\n"
               "Left-sided operators use [--a, --x] with the value reported at x;\n"
               "right-sided ones use [--x, --b] with the value reported at x.");

    CommonOpts o;
    std::string side = "left";
    double t_flag = 1.0;
    bool characteristic = false;
    double x0 = 1.0;
    double t_max = 1.0;
    std::size_t steps = 100;
    std::string direction = "forward";
    bool extend = false;
    std::size_t n_min = 32;
    int levels = 4;
    std::string regime = "bounded";
    double growth_p = 0.0;
    double oracle_value_flag = std::numeric_limits<double>::quiet_NaN();
    int ell = 2;
    double quad_tolerance = fracmat::QuadratureScheme{}.tolerance;

    auto add_common = [&](CLI::App* sub, bool wants_alpha) {
        sub->add_option("--f", o.f_expr, "expression for f(x)");
        sub->add_option("--g", o.g_expr, "expression for g(x)");
        sub->add_option("--diag", o.diag_list, "comma-separated diagonal a_1,...,a_n");
        if (wants_alpha)
            sub->add_option("--alpha", o.alpha, "order of the operator")->required();
        sub->add_option("--a", o.a, "left endpoint");
        sub->add_option("--x", o.x, "evaluation point");
        sub->add_option("--b", o.b, "right endpoint (right-sided operators)");
        sub->add_option("--n", o.n, "number of grid subintervals");
        sub->add_option("--out", o.out_path, "output path (default stdout)");
        sub->add_option("--format", o.format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* matpow = app.add_subcommand("matpow", "arbitrary real power of a two-band matrix");
    add_common(matpow, true);

    CLI::App* gl = app.add_subcommand("gl", "Grunwald-Letnikov operator on a uniform grid");
    add_common(gl, true);
    gl->add_option("--side", side, "left or right")->check(CLI::IsMember({"left", "right"}));

    CLI::App* dwrt = app.add_subcommand("dwrt", "fractional derivative of f with respect to g");
    add_common(dwrt, true);
    dwrt->add_option("--method", o.method, "matrix-power or balakrishnan")
        ->check(CLI::IsMember({"matrix-power", "balakrishnan"}));

    CLI::App* semi = app.add_subcommand("semigroup", "matrix semigroup e^{-tA} or characteristic flow");
    add_common(semi, false);
    semi->add_option("--t", t_flag, "time for the matrix semigroup");
    semi->add_flag("--characteristic", characteristic, "emit a characteristic trajectory as CSV");
    semi->add_option("--x0", x0, "starting point of the characteristic");
    semi->add_option("--t-max", t_max, "trajectory horizon");
    semi->add_option("--steps", steps, "trajectory steps");
    semi->add_option("--direction", direction, "forward or backward flow")
        ->check(CLI::IsMember({"forward", "backward"}));
    semi->add_flag("--extend", extend, "follow characteristics beyond [a, b]");

    CLI::App* conv = app.add_subcommand("converge", "empirical convergence-rate sweep");
    add_common(conv, true);
    conv->add_option("--method", o.method, "matrix-power or balakrishnan")
        ->check(CLI::IsMember({"matrix-power", "balakrishnan"}));
    conv->add_option("--n-min", n_min, "coarsest grid size");
    conv->add_option("--levels", levels, "number of doublings (>= 4)");
    conv->add_option("--regime", regime, "auto, bounded, polynomial or negative-power");
    conv->add_option("--p", growth_p, "polynomial growth exponent when --regime polynomial");
    conv->add_option("--oracle-value", oracle_value_flag, "reference value override");

    CLI::App* bal = app.add_subcommand("balakrishnan-check",
                                       "quadrature power against the closed form");
    add_common(bal, true);
    bal->add_option("--method", o.method, "bf01, bf02 or bf03")
        ->check(CLI::IsMember({"bf01", "bf02", "bf03"}));
    bal->add_option("--ell", ell, "difference order for bf02");
    bal->add_option("--tolerance", quad_tolerance, "quadrature tolerance (absolute)");

    CLI::App* self = app.add_subcommand("selftest", "run the built-in identity suites");
    (void)self;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) // --help and friends
            return app.exit(e);
        std::ostringstream devnull;
        app.exit(e, devnull, devnull);
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 2;
    }

    // o.method starts as "matrix-power"; only bf commands want another default.
    if (bal->parsed() && !bal->count("--method"))
        o.method = "bf01";

    const std::string sub = app.get_subcommands().front()->get_name();
    std::optional<double> oracle_value;
    if (conv->parsed() && conv->count("--oracle-value"))
        oracle_value = oracle_value_flag;

    try {
        return run(o, sub, side, t_flag, characteristic, x0, t_max, steps, direction, extend,
                   n_min, levels, regime, growth_p, oracle_value, ell, quad_tolerance);
    } catch (const fracmat::ToleranceNotMet& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 4;
    } catch (const fracmat::ParseError& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 2;
    } catch (const fracmat::UnknownCatalogEntry& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 2;
    } catch (const fracmat::NonPositiveDiagonal& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::DegenerateDiagonal& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::NumericalBreakdown& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::NonMonotoneSamples& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::EvalDomainError& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::NonVanishingAtA& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::NonVanishingAtB& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::InversionFailure& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::OutOfRange& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::DivergentTail& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    } catch (const fracmat::Error& e) {
        // Remaining library errors are argument problems.
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fracmat: %s\n", e.what());
        return 3;
    }
}
