#include <catch2/catch_amalgamated.hpp>

#include "graphwave/profile.hpp"
#include "graphwave/quadrature.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace graphwave;
using graphwave::test::error_code_of;
using Catch::Approx;

TEST_CASE("zero and constant profiles evaluate trivially", "[profile]") {
    const auto z = DampingProfile::zero(2.0);
    CHECK(z.is_zero());
    for (double x : {0.0, 0.7, 2.0}) {
        CHECK(z.eval(x) == 0.0);
        CHECK(z.eval_d1(x) == 0.0);
        CHECK(z.eval_d2(x) == 0.0);
    }
    const auto c = DampingProfile::constant(2.0, 1.0);
    CHECK(c.kind() == ProfileKind::constant);
    CHECK(c.eval(0.3) == 2.0);
    CHECK(c.eval_d1(0.3) == 0.0);
    CHECK(c.eval_d2(0.3) == 0.0);
    CHECK(DampingProfile::constant(0.0, 1.0).is_zero());
}

TEST_CASE("quadratic bump x(1-x) at the midpoint", "[profile]") {
    // Interior positivity is all that is required; the ends may touch zero.
    const auto a = DampingProfile::piecewise({0.0, 1.0}, {{0.0, 1.0, -1.0}});
    CHECK(a.eval(0.5) == Approx(0.25).margin(1e-15));
    CHECK(a.eval_d1(0.5) == Approx(0.0).margin(1e-15));
    CHECK(a.eval_d2(0.5) == Approx(-2.0));
    CHECK(a.sup_abs(0) == Approx(0.25));
    CHECK(a.sup_abs(1) == Approx(1.0));
}

TEST_CASE("breakpoint convention picks the right piece inside, the left piece at the end", "[profile]") {
    // a = 1 + x on [0, 1), a = 3 - x on [1, 2]: continuous, kink at x = 1.
    const auto a = DampingProfile::piecewise({0.0, 1.0, 2.0}, {{1.0, 1.0}, {2.0, -1.0}});
    CHECK(a.eval_d1(1.0) == -1.0);
    CHECK(a.eval_d1(2.0) == -1.0);
    CHECK(a.eval_d1(0.0) == 1.0);
    CHECK(a.max_jump(0) == Approx(0.0).margin(1e-15));
    CHECK(a.max_jump(1) == Approx(2.0));
    CHECK(a.d1_at_tail() == 1.0);
    CHECK(a.d1_at_head() == -1.0);
}

TEST_CASE("evaluation outside the edge is rejected", "[profile]") {
    const auto a = DampingProfile::constant(1.0, 1.0);
    CHECK(error_code_of([&] { (void)a.eval(-1e-3); }) == Errc::out_of_domain);
    CHECK(error_code_of([&] { (void)a.eval(1.001); }) == Errc::out_of_domain);
}

TEST_CASE("inadmissible profiles are rejected", "[profile]") {
    CHECK(error_code_of([] { (void)DampingProfile::constant(-1.0, 1.0); }) == Errc::invalid_profile);
    // dips below zero inside the edge
    CHECK(error_code_of([] { (void)DampingProfile::piecewise({0.0, 1.0}, {{0.1, -1.0, 1.0}}); }) ==
          Errc::invalid_profile);
    // zero piece next to a positive piece
    CHECK(error_code_of([] { (void)DampingProfile::piecewise({0.0, 0.5, 1.0}, {{0.0}, {1.0}}); }) ==
          Errc::invalid_profile);
    CHECK(error_code_of([] { (void)DampingProfile::piecewise({0.0, 0.5, 0.5}, {{1.0}, {1.0}}); }) ==
          Errc::invalid_profile);
    CHECK(error_code_of([] { (void)DampingProfile::piecewise({0.1, 1.0}, {{1.0}}); }) == Errc::invalid_profile);
    CHECK(DampingProfile::piecewise({0.0, 1.0}, {{0.0, 0.0}}).is_zero());
}

TEST_CASE("reflection reverses the coordinate", "[profile][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coef(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double len = 0.5 + coef(rng);
        const double mid = len * (0.2 + 0.6 * coef(rng));
        // positive coefficients keep every piece positive on (0, width)
        const auto a = DampingProfile::piecewise(
            {0.0, mid, len}, {{coef(rng) + 0.1, coef(rng), coef(rng)}, {coef(rng) + 0.1, coef(rng)}});
        const auto r = a.reflected();
        REQUIRE(r.length() == Approx(len));
        for (int i = 0; i <= 20; ++i) {
            const double x = std::min(len, len * i / 20.0);
            if (std::abs(x - mid) < 1e-9 || std::abs(len - x - mid) < 1e-9) continue;
            CHECK(r.eval(x) == Approx(a.eval(len - x)).margin(1e-12));
            CHECK(r.eval_d1(x) == Approx(-a.eval_d1(len - x)).margin(1e-12));
        }
        CHECK(r.reflected().eval(0.3 * len) == Approx(a.eval(0.3 * len)).margin(1e-12));
    }
}

TEST_CASE("random admissible profiles are nonnegative everywhere", "[profile][property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int accepted = 0;
    for (int trial = 0; trial < 400; ++trial) {
        std::vector<double> c{u(rng), u(rng), u(rng), u(rng)};
        try {
            const auto a = DampingProfile::piecewise({0.0, 1.0}, {c});
            ++accepted;
            for (int i = 0; i <= 1000; ++i) CHECK(a.eval(i / 1000.0) >= -1e-14);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::invalid_profile);
        }
    }
    CHECK(accepted > 20);
}

TEST_CASE("polynomial roots in an interval", "[profile][poly]") {
    // (s - 0.25)(s - 0.5)(s - 2) = s^3 - 2.75 s^2 + 1.625 s - 0.25
    const auto roots = poly::real_roots_in({-0.25, 1.625, -2.75, 1.0}, 0.0, 1.0);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == Approx(0.25));
    CHECK(roots[1] == Approx(0.5));
    CHECK(poly::eval({1.0, 2.0, 3.0}, 2.0, 1) == Approx(14.0));
    CHECK(poly::eval({1.0, 2.0, 3.0}, 2.0, 2) == Approx(6.0));
}

TEST_CASE("Gauss-Legendre rules integrate monomials exactly", "[quadrature]") {
    for (int n = 1; n <= 12; ++n) {
        const auto rule = gauss_legendre(n);
        REQUIRE(rule.nodes.size() == static_cast<std::size_t>(n));
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], k);
            const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            CHECK(sum == Approx(exact).margin(1e-14));
        }
    }
}
