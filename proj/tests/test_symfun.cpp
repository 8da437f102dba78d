#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "fracmat/symfun.hpp"
#include "oracles.hpp"

using namespace fracmat;
using Catch::Approx;

TEST_CASE("hq_monomial matches hand expansions") {
    CHECK(hq_monomial(VarList({5.0, 7.0}), 0) == 1.0);
    const double a = 1.3, b = -0.4;
    CHECK(hq_monomial(VarList({a, b}), 2) == Approx(a * a + a * b + b * b).epsilon(1e-14));
    CHECK(hq_monomial(VarList({1.0, 2.0, 3.0}), 2) == Approx(25.0));
    CHECK(hq_monomial(VarList({1.0, 2.0, 3.0}), 2) ==
          Approx(static_cast<double>(stirling2(5, 3))));
}

TEST_CASE("hq_recurrence base cases and repeated variables") {
    CHECK(hq_recurrence(VarList({1.0, 2.0, 3.0}), 2) == Approx(25.0));
    const double x = 1.7;
    CHECK(hq_recurrence(VarList({x}), 4) == Approx(x * x * x * x));
    // 4 monomials of degree 3 in two copies of 2: each contributes 8.
    CHECK(hq_recurrence(VarList({2.0, 2.0}), 3) == Approx(32.0));
    CHECK(hq_monomial(VarList({2.0, 2.0}), 3) == Approx(32.0));
}

TEST_CASE("hq_sylvester on separated variables, rejection near coincidence") {
    CHECK(hq_sylvester(VarList({1.0, 2.0}), 1) == Approx(3.0));
    CHECK(hq_sylvester(VarList({1.0, 2.0, 3.0}), 2) == Approx(25.0));
    CHECK_THROWS_AS(hq_sylvester(VarList({1.0, 1.0 + 1e-14}), 2), DegenerateVariables);
}

TEST_CASE("binom_real values and Pascal's rule") {
    CHECK(binom_real(0.5, 2) == Approx(-0.125));
    CHECK(binom_real(3.0, 5) == 0.0);
    CHECK(binom_real(-0.5, 3) == Approx(-0.3125));
    CHECK(binom_real(2.7, 0) == 1.0);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double alpha = dist(rng);
        const int k = 1 + static_cast<int>(rng() % 10);
        const double lhs = binom_real(alpha, k);
        const double rhs = binom_real(alpha - 1.0, k) + binom_real(alpha - 1.0, k - 1);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("stirling2 against set-partition counting") {
    CHECK(stirling2(5, 3) == 25);
    CHECK(stirling2(4, 1) == 1);
    for (int n = 1; n <= 12; ++n)
        for (int q = 1; q <= n; ++q)
            CHECK(stirling2(n, q) == oracles::set_partition_count(n, q));
    CHECK(stirling2(9, 9) == 1);
    CHECK_THROWS_AS(stirling2(27, 5), IntegerOverflow);
    CHECK_THROWS_AS(stirling2(3, 4), Error);
}

TEST_CASE("gaussian binomial product form and classical limit") {
    for (double v : {0.25, 0.9, 2.0})
        CHECK(gaussian_binomial(2, 1, v) == Approx(1.0 + v).epsilon(1e-13));
    CHECK(gaussian_binomial(4, 2, 0.5) == Approx(2.1875));
    CHECK(gaussian_binomial(3, 5, 0.7) == 0.0);
    for (int p = 0; p <= 6; ++p)
        for (int r = 0; r <= p; ++r) {
            CHECK(gaussian_binomial(p, r, 1.0 + 1e-8) ==
                  Approx(binom_real(p, r)).margin(1e-6));
            CHECK(gaussian_binomial(p, r, 1.0 - 1e-8) ==
                  Approx(binom_real(p, r)).margin(1e-6));
        }
}

TEST_CASE("cross-route equality on random separated variables") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 1 + rng() % 8;
        const std::vector<double> v = oracles::random_separated_diag(rng, m, 0.1, 10.0, 0.05);
        const VarList vars(v);
        const int q = static_cast<int>(rng() % 9);
        const double mono = hq_monomial(vars, q);
        const double rec = hq_recurrence(vars, q);
        const double syl = hq_sylvester(vars, q);
        CHECK(std::abs(rec - mono) <= 1e-12 * std::abs(mono));
        CHECK(std::abs(syl - mono) <= 1e-8 * std::abs(mono));
    }
}

TEST_CASE("append-variable recurrence identity") {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + rng() % 6;
        std::vector<double> v(m);
        for (double& z : v)
            z = dist(rng);
        const int q = 1 + static_cast<int>(rng() % 7);
        const VarList vars(v);
        const VarList head(std::vector<double>(v.begin(), v.end() - 1));
        const double lhs = hq_recurrence(vars, q);
        const double rhs = hq_recurrence(head, q) + v.back() * hq_recurrence(vars, q - 1);
        CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("Stirling bridge") {
    for (int m = 1; m <= 6; ++m)
        for (int q = 0; q <= 6; ++q) {
            std::vector<double> v(m);
            for (int i = 0; i < m; ++i)
                v[i] = i + 1.0;
            const double h = hq_monomial(VarList(v), q);
            const double s = q == 0 ? 1.0 : static_cast<double>(stirling2(q + m, m));
            CHECK(h == Approx(s).epsilon(1e-11));
        }
}

TEST_CASE("Gaussian bridge") {
    for (double v : {0.3, 0.7, 1.5})
        for (int m = 1; m <= 5; ++m)
            for (int q = 0; q <= 5; ++q) {
                std::vector<double> vars(m);
                for (int i = 0; i < m; ++i)
                    vars[i] = std::pow(v, i);
                CHECK(hq_monomial(VarList(vars), q) ==
                      Approx(gaussian_binomial(m + q - 1, q, v)).epsilon(1e-11));
            }
}

TEST_CASE("oversized monomial enumerations delegate to the recurrence") {
    // C(39, 10) ~ 6.4e8 monomials; the call must route to the recurrence and
    // agree with it identically.
    std::vector<double> v(30);
    for (int i = 0; i < 30; ++i)
        v[i] = 0.05 * (i + 1);
    const VarList vars(v);
    CHECK(hq_monomial(vars, 10) == hq_recurrence(vars, 10));
}

TEST_CASE("VarList validation and distinct predicate") {
    CHECK_THROWS_AS(VarList(std::vector<double>{}), Error);
    CHECK_THROWS_AS(VarList({1.0, std::nan("")}), Error);
    CHECK(VarList({1.0, 2.0}).distinct(1e-6));
    CHECK_FALSE(VarList({1.0, 1.0 + 1e-9}).distinct(1e-6));
    CHECK(VarList({4.0}).distinct(1e-6));
}
