#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "fracmat/twoband.hpp"
#include "oracles.hpp"

using namespace fracmat;
using Catch::Approx;

TEST_CASE("natural_power hand cases") {
    const TwoBandMatrix a({1.0, 2.0});
    const UpperTriangularMatrix p2 = natural_power(a, 2);
    CHECK(p2.at(0, 0) == Approx(1.0));
    CHECK(p2.at(0, 1) == Approx(-3.0));
    CHECK(p2.at(1, 1) == Approx(4.0));

    const UpperTriangularMatrix p0 = natural_power(a, 0);
    CHECK(p0.at(0, 0) == 1.0);
    CHECK(p0.at(0, 1) == 0.0);
    CHECK(p0.at(1, 1) == 1.0);

    CHECK(max_abs_diff(natural_power(a, 1), a.dense()) == 0.0);
}

TEST_CASE("natural_power equals k-fold dense multiplication") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + rng() % 19;
        const std::vector<double> diag = oracles::random_separated_diag(rng, n, 0.5, 4.0, 1e-4);
        const TwoBandMatrix a(diag);
        const int k = static_cast<int>(rng() % 16);
        const oracles::Dense want = oracles::dense_power(oracles::dense_two_band(a), k);
        const oracles::Dense got = oracles::to_dense(natural_power(a, k));
        const double scale = std::max(1.0, oracles::max_abs(want));
        CHECK(oracles::max_abs_diff(got, want) <= 1e-9 * scale);
    }
}

TEST_CASE("eigendecompose hand cases and errors") {
    const TwoBandMatrix a({1.0, 2.0});
    const EigenFactors f = eigendecompose(a);
    CHECK(f.p.at(0, 1) == Approx(-1.0));
    CHECK(f.p_inv.at(0, 1) == Approx(1.0));
    CHECK(f.d[0] == 1.0);
    CHECK(f.d[1] == 2.0);

    const TwoBandMatrix single({3.5});
    const EigenFactors f1 = eigendecompose(single);
    CHECK(f1.p.at(0, 0) == 1.0);
    CHECK(f1.d[0] == 3.5);

    CHECK_THROWS_AS(eigendecompose(TwoBandMatrix({3.0, 3.0})), DegenerateDiagonal);
}

TEST_CASE("eigendecompose reconstructs the matrix") {
    // The reconstruction tolerances presume well-separated diagonals; the
    // factors' entries grow like (spread/gap)^n, and their products lose
    // exactly that many digits.
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng() % 9;
        const TwoBandMatrix a(oracles::random_separated_diag(rng, n, 0.5, 4.0, 0.15));
        const EigenFactors f = eigendecompose(a);
        CHECK(max_abs_diff(multiply(f.p, f.p_inv), UpperTriangularMatrix::identity(n)) <= 1e-9);
        UpperTriangularMatrix pd(n);
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t m = s; m < n; ++m)
                pd.ref(s, m) = f.p.at(s, m) * f.d[m];
        CHECK(max_abs_diff(multiply(pd, f.p_inv), a.dense()) <= 1e-8 * a.max_abs_diag());
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(f.p.at(i, i) == 1.0);
            CHECK(f.p_inv.at(i, i) == 1.0);
        }
    }
}

TEST_CASE("real_power hand cases") {
    const TwoBandMatrix a({1.0, 2.0});
    const UpperTriangularMatrix h = real_power(a, 0.5);
    CHECK(h.at(0, 1) == Approx(1.0 - std::sqrt(2.0)).epsilon(1e-12));
    CHECK(max_abs_diff(multiply(h, h), a.dense()) <= 1e-10);

    CHECK(max_abs_diff(real_power(a, 1.0), a.dense()) == 0.0);

    // A^{-1} (A v) = v against back substitution.
    const UpperTriangularMatrix inv = real_power(a, -1.0);
    const std::vector<double> v{0.3, -1.7};
    const std::vector<double> av = a.dense().apply(v);
    const std::vector<double> back = inv.apply(av);
    CHECK(back[0] == Approx(v[0]).epsilon(1e-9));
    CHECK(back[1] == Approx(v[1]).epsilon(1e-9));
    const std::vector<double> solved = oracles::solve_upper(a.dense(), av);
    CHECK(back[0] == Approx(solved[0]).epsilon(1e-9));
    CHECK(back[1] == Approx(solved[1]).epsilon(1e-9));

    CHECK_THROWS_AS(real_power(TwoBandMatrix({1.0, -2.0}), 0.5), NonPositiveDiagonal);
}

TEST_CASE("uniform_real_power rows") {
    const UpperTriangularMatrix u = uniform_real_power(3, 1.0, 0.5);
    CHECK(u.at(0, 0) == Approx(1.0));
    CHECK(u.at(0, 1) == Approx(-0.5));
    CHECK(u.at(0, 2) == Approx(-0.125));

    // Integer order: the first row vanishes beyond column m+1.
    const UpperTriangularMatrix u2 = uniform_real_power(6, 0.5, 2.0);
    CHECK(u2.at(0, 3) == 0.0);
    CHECK(u2.at(0, 5) == 0.0);
    CHECK(u2.at(0, 2) == Approx(4.0)); // h^{-2} binom(2,2)

    const UpperTriangularMatrix u0 = uniform_real_power(4, 0.25, 0.0);
    CHECK(max_abs_diff(u0, UpperTriangularMatrix::identity(4)) == 0.0);
}

TEST_CASE("from_g_samples") {
    // g(x) = x on [0,1] with h = 0.25, reversed samples.
    const std::vector<double> gx{1.0, 0.75, 0.5, 0.25, 0.0};
    const TwoBandMatrix a = TwoBandMatrix::from_g_samples(gx);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(a.diag(k) == Approx(4.0));

    // g(x) = x^2 on the same nodes.
    const std::vector<double> gx2{1.0, 0.5625, 0.25, 0.0625, 0.0};
    const TwoBandMatrix a2 = TwoBandMatrix::from_g_samples(gx2);
    CHECK(a2.diag(0) == Approx(1.0 / 0.4375));
    CHECK(a2.diag(1) == Approx(3.2));
    CHECK(a2.diag(2) == Approx(1.0 / 0.1875));
    CHECK(a2.diag(3) == Approx(16.0));

    CHECK_THROWS_AS(TwoBandMatrix::from_g_samples(std::vector<double>{0.0, 1.0}),
                    NonMonotoneSamples);
}

TEST_CASE("closed form agrees with natural powers") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + rng() % 9;
        const TwoBandMatrix a(oracles::random_separated_diag(rng, n, 0.5, 4.0, 0.1));
        for (int k : {0, 1, 2, 3}) {
            const UpperTriangularMatrix closed = real_power_closed_form(a, static_cast<double>(k));
            const UpperTriangularMatrix nat = natural_power(a, k);
            const double scale = std::max(1.0, nat.max_abs());
            CHECK(max_abs_diff(closed, nat) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("semigroup law and square root on sampled matrices") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 2 + rng() % 11;
        const TwoBandMatrix a(oracles::random_separated_diag(rng, n, 0.5, 4.0, 0.1));
        for (auto [alpha, beta] : {std::pair{0.3, 0.5}, {0.5, 0.7}, {1.5, 0.3}, {1.5, 1.5}}) {
            const UpperTriangularMatrix pa = real_power(a, alpha);
            const UpperTriangularMatrix pb = real_power(a, beta);
            const UpperTriangularMatrix pab = real_power(a, alpha + beta);
            CHECK(max_abs_diff(multiply(pa, pb), pab) <= 1e-8 * std::max(1.0, pab.max_abs()));
        }
        const UpperTriangularMatrix h = real_power(a, 0.5);
        CHECK(max_abs_diff(multiply(h, h), a.dense()) <= 1e-8 * a.max_abs_diag());
    }
}

TEST_CASE("uniform dispatch and perturbed-uniform fallback") {
    const std::size_t n = 16;
    const double h = 0.25;
    std::vector<double> diag(n, 1.0 / h);
    CHECK(max_abs_diff(real_power(TwoBandMatrix(diag), 0.5), uniform_real_power(n, h, 0.5)) <=
          1e-14);

    // A relative 1e-8 perturbation sits between the uniform and distinct
    // tolerances, forcing the log/exp fallback.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1e-8, 1e-8);
    for (double& v : diag)
        v *= 1.0 + dist(rng);
    const TwoBandMatrix perturbed(diag);
    CHECK_FALSE(perturbed.uniform());
    CHECK_FALSE(perturbed.distinct());
    const UpperTriangularMatrix p = real_power(perturbed, 0.5);
    CHECK(max_abs_diff(p, uniform_real_power(n, h, 0.5)) <= 1e-5);
}

TEST_CASE("graded grids route around the cancelling closed form") {
    // Diagonals from g(x) = x^1.5 spread two decades; the rational form
    // cancels catastrophically here while the log/exp route stays accurate.
    const std::size_t n = 64;
    std::vector<double> g_desc(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        g_desc[k] = std::pow(static_cast<double>(n - k) / n, 1.5);
    const TwoBandMatrix a = TwoBandMatrix::from_g_samples(g_desc);
    CHECK(a.distinct());
    const UpperTriangularMatrix h = real_power(a, 0.5);
    CHECK(max_abs_diff(multiply(h, h), a.dense()) <= 1e-8 * a.max_abs_diag());
    // The raw closed form refuses rather than returning garbage.
    CHECK_THROWS_AS(real_power_closed_form(a, 0.5), NumericalBreakdown);
}

TEST_CASE("log/exp route reproduces the binomial form on uniform grids") {
    // The two derivations of the uniform-grid power (logarithm series vs
    // binomial weights) must land on the same matrix.
    const std::size_t n = 8;
    const double h = 0.5;
    const TwoBandMatrix a(std::vector<double>(n, 1.0 / h));
    for (double alpha : {0.5, -0.5, 1.7}) {
        const UpperTriangularMatrix iss = real_power_log_exp(a, alpha);
        const UpperTriangularMatrix bin = uniform_real_power(n, h, alpha);
        CHECK(max_abs_diff(iss, bin) <= 1e-11 * std::max(1.0, bin.max_abs()));
    }
}

TEST_CASE("concurrent callers see identical results") {
    const TwoBandMatrix a({0.7, 1.9, 3.1, 2.4});
    const UpperTriangularMatrix reference = real_power(a, 0.6);
    std::vector<std::thread> workers;
    std::array<double, 8> defects{};
    for (int w = 0; w < 8; ++w)
        workers.emplace_back([&, w] {
            const UpperTriangularMatrix mine = real_power(a, 0.6);
            defects[w] = max_abs_diff(mine, reference);
        });
    for (auto& t : workers)
        t.join();
    for (double d : defects)
        CHECK(d == 0.0);
}

TEST_CASE("two-band predicates") {
    CHECK(TwoBandMatrix({2.0, 2.0, 2.0}).uniform());
    CHECK_FALSE(TwoBandMatrix({2.0, 2.0 + 1e-6}).uniform());
    CHECK(TwoBandMatrix({1.0, 2.0}).distinct());
    CHECK_FALSE(TwoBandMatrix({1.0, 1.0 + 1e-8}).distinct());
    CHECK_THROWS_AS(TwoBandMatrix(std::vector<double>{}), Error);
}
