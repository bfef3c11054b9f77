#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sigmabilap/cone_exponents.hpp"
#include "sigmabilap/errors.hpp"

using namespace sigmabilap;

namespace {

constexpr double pi = std::numbers::pi;

double legendre_poly(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return p0;
    for (int k = 1; k < n; ++k) {
        const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

}  // namespace

TEST_CASE("exponent pairs") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> ud(2, 9);
    std::uniform_real_distribution<double> um(1e-3, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const int d = ud(rng);
        const double mu = um(rng);
        const auto [lm, lp] = lambda_pm(d, mu);
        CHECK(lm < 0.0);
        CHECK(lp > 0.0);
        CHECK(std::abs(lp + lm - (2.0 - d)) <= 1e-12 * std::max(1.0, std::abs(2.0 - d)));
        CHECK(std::abs(lp * lm + mu) <= 1e-12 * mu);
    }
    const double a = 1.5 * pi;
    const auto [lm, lp] = lambda_pm(2, std::pow(pi / a, 2));
    CHECK(lp == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(lm == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(lambda_pm(1, 1.0), PreconditionViolation);
    CHECK_THROWS_AS(lambda_pm(3, 0.0), PreconditionViolation);
    const auto all = cone_exponents({3, {0.75, 2.0, 6.0}});
    REQUIRE(all.size() == 3);
    CHECK(all[0].second == doctest::Approx(0.5));
    CHECK(all[1].second == doctest::Approx(1.0));
    CHECK(all[2].second == doctest::Approx(2.0));
}

TEST_CASE("Legendre functions") {
    for (int n = 0; n <= 6; ++n)
        for (double x = -0.9; x <= 1.0 + 1e-12; x += 0.05) {
            const double xx = std::min(x, 1.0);
            CHECK(std::abs(legendre_p(n, xx) - legendre_poly(n, xx)) <= 1e-12);
        }
    for (double nu : {0.25, 0.5, 1.7, 4.2, 9.5})
        for (double th : {0.1, 0.8, 1.6, 2.4, 2.8})
            CHECK(legendre_p(nu, std::cos(th)) == doctest::Approx(legendre_p_mehler(nu, th)).epsilon(1e-9).scale(1.0));
    CHECK_THROWS_AS(legendre_p(0.5, -1.0), PreconditionViolation);
    CHECK_THROWS_AS(legendre_p(-0.5, 0.0), PreconditionViolation);
}

TEST_CASE("cap eigenvalues") {
    CHECK(cap_mu1(pi / 2) == doctest::Approx(2.0).epsilon(1e-12));
    double prev = 1e300;
    for (int i = 0; i < 50; ++i) {
        const double a = 0.1 * pi + 0.8 * pi * i / 49.0;
        const double mu = cap_mu1(a);
        CHECK(mu <= prev);
        prev = mu;
    }
    // small caps approach the flat disk: mu1 ~ (j01 / alpha)^2
    CHECK(cap_mu1(0.1) * 0.01 == doctest::Approx(2.404825557695773 * 2.404825557695773).epsilon(1e-2));
    CHECK_THROWS_AS(cap_mu1(0.95 * pi), PreconditionViolation);
}

TEST_CASE("critical aperture") {
    const double ac = critical_aperture();
    CHECK(ac > pi / 2);
    CHECK(ac < 0.9 * pi);
    CHECK(std::abs(legendre_p(0.5, std::cos(ac))) <= 1e-10);
    CHECK(cap_mu1(ac) == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(std::abs(legendre_p_mehler(0.5, ac)) <= 1e-6);
}

TEST_CASE("Fredholm classification") {
    // beta = 0, l = 1, d = 3: Isomorphism iff Lambda1+ > 1/2
    CHECK(fredholm_classify({0.0, 1, 3}, 0.6) == FredholmClass::Isomorphism);
    CHECK(fredholm_classify({0.0, 1, 3}, 0.5) == FredholmClass::NotFredholm);
    CHECK(fredholm_classify({0.0, 1, 3}, 0.4) == FredholmClass::InjectiveNotOnto);
    CHECK(fredholm_classify({2.0, 1, 3}, 0.4) == FredholmClass::OntoNotInjective);
    CHECK(fredholm_classify({-3.0, 1, 3}, 0.6) == FredholmClass::InjectiveNotOnto);
    CHECK(fredholm_classify({-0.1, 1, 3}, 0.6) == FredholmClass::NotFredholm);
    CHECK(to_string(FredholmClass::OntoNotInjective) == "OntoNotInjective");
    CHECK_THROWS_AS(fredholm_classify({0.0, 0, 3}, 0.6), PreconditionViolation);
    for (int d = 2; d <= 9; ++d)
        for (double lam : {0.1, 0.5, 0.75, 1.0, 1.5, 3.0})
            CHECK(high_dim_iso_check(d, lam) == (fredholm_classify({0.0, 1, d}, lam) == FredholmClass::Isomorphism));
    CHECK(high_dim_iso_check(5, 0.6));
    CHECK_FALSE(high_dim_iso_check(3, 0.5));
}
