#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sigmabilap/corner_spectrum.hpp"
#include "sigmabilap/errors.hpp"

using namespace sigmabilap;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(CornerProblem({0.0, -1.0}).validate(), PreconditionViolation);
    CHECK_THROWS_AS(CornerProblem({pi, -1.0}).validate(), PreconditionViolation);
    CHECK_THROWS_AS(CornerProblem({1.0, 0.5}).validate(), PreconditionViolation);
    CHECK_THROWS_AS(find_eta0({4.0, -10.0}), PreconditionViolation);
    CHECK_NOTHROW(CornerProblem({1.0, -1.0}).validate());
}

TEST_CASE("g at the symmetric configuration") {
    CHECK(eval_g({pi / 2, -1.0}) == doctest::Approx(-8.0).epsilon(1e-14));
}

TEST_CASE("g is the second-order Taylor coefficient") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ua(0.1, pi - 0.1), uk(-10.0, -0.1);
    for (int i = 0; i < 20; ++i) {
        const CornerProblem p{ua(rng), uk(rng)};
        CHECK(even_derivative_at_zero(p, 1) == doctest::Approx(2.0 * eval_g(p)).epsilon(1e-12));
    }
}

TEST_CASE("even derivatives agree with finite differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(0.2, pi - 0.2), uk(-6.0, -0.2);
    for (int i = 0; i < 10; ++i) {
        const CornerProblem p{ua(rng), uk(rng)};
        auto h = [&](double e) { return eval_h(p, e); };
        // central differences for h'', h'''' and h^(6) at 0
        const double s = 1e-2;
        const double d2 = (-h(2 * s) + 16 * h(s) - 30 * h(0) + 16 * h(-s) - h(-2 * s)) / (12 * s * s);
        const double t = 1e-2;
        const double d4 = (-h(3 * t) + 12 * h(2 * t) - 39 * h(t) + 56 * h(0) - 39 * h(-t) + 12 * h(-2 * t) -
                           h(-3 * t)) /
                          (6 * std::pow(t, 4));
        auto sixth = [&](double u) {
            return (-h(4 * u) + 12 * h(3 * u) - 52 * h(2 * u) + 116 * h(u) - 150 * h(0) + 116 * h(-u) -
                    52 * h(-2 * u) + 12 * h(-3 * u) - h(-4 * u)) /
                   (4 * std::pow(u, 6));
        };
        // Richardson step on the u^4 error term
        const double d6 = (16.0 * sixth(2e-2) - sixth(4e-2)) / 15.0;
        CHECK(d2 == doctest::Approx(even_derivative_at_zero(p, 1)).epsilon(1e-5));
        CHECK(d4 == doctest::Approx(even_derivative_at_zero(p, 2)).epsilon(1e-5));
        CHECK(d6 == doctest::Approx(even_derivative_at_zero(p, 3)).epsilon(1e-5));
    }
}

TEST_CASE("fourth derivative is non-positive at the interval endpoints") {
    for (int i = 1; i <= 50; ++i) {
        const double a = pi * i / 51.0;
        const auto [lm, lp] = interval_endpoints(a);
        CHECK(lm < lp);
        CHECK(lp < 0.0);
        const double scale = 1.0 + std::abs(eval_g_tilde(a, lm - 1.0)) + std::abs(eval_g_tilde(a, lp + 1.0));
        CHECK(eval_g_tilde(a, lm) <= 1e-9 * scale);
        CHECK(eval_g_tilde(a, lp) <= 1e-9 * scale);
        CHECK(eval_g_tilde(a, 0.5 * (lm + lp)) == doctest::Approx(even_derivative_at_zero({a, 0.5 * (lm + lp)}, 2)).epsilon(1e-10));
    }
}

TEST_CASE("g is negative exactly between the endpoints") {
    for (double a : {0.4, 1.0, pi / 2, 2.3, 2.9}) {
        const auto [lm, lp] = interval_endpoints(a);
        CHECK(eval_g({a, 0.5 * (lm + lp)}) < 0.0);
        CHECK(eval_g({a, lm * 1.01}) > 0.0);
        CHECK(eval_g({a, lp * 0.99}) > 0.0);
        CHECK(std::abs(eval_g({a, lm})) < 1e-9 * (1.0 + lm * lm));
    }
}

TEST_CASE("root count matches membership") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ua(0.02, pi - 0.02), uk(-12.0, -0.05);
    int inside = 0, outside = 0;
    while (inside < 100 || outside < 100) {
        const CornerProblem p{ua(rng), uk(rng)};
        const RegionReport r = classify_region(p, 1e-3);
        const auto root = find_eta0(p);
        if (r.membership == Membership::Inside && inside < 100) {
            ++inside;
            REQUIRE(root);
            CHECK(root->sign_changes_found == 1);
            CHECK(root->residual <= 1e-10);
            CHECK(root->eta0 >= root->bracket.first);
            CHECK(root->eta0 <= root->bracket.second);
        } else if (r.membership == Membership::Outside && outside < 100) {
            ++outside;
            CHECK_FALSE(root);
        }
    }
}

TEST_CASE("known exponent") {
    const auto r = find_eta0({pi / 2, -10.0});
    REQUIRE(r);
    CHECK(r->eta0 == doctest::Approx(0.58048435917941843).epsilon(1e-13));
    for (double e : {0.1, 0.5, 1.0, 5.0, 49.0, 51.0, 80.0}) {
        const CornerProblem p{pi / 2, -10.0};
        if (e < 100.0 && std::isfinite(eval_h(p, e)))
            CHECK(eval_h_scaled(p, e) == doctest::Approx(2.0 * eval_h(p, e) * std::exp(-2.0 * pi * e)).epsilon(1e-10));
    }
}

TEST_CASE("large exponents use extended precision") {
    // thin sectors: h is a difference of huge terms at the root
    const CornerProblem p{0.02, -12.0};
    REQUIRE(classify_region(p, 1e-3).membership == Membership::Inside);
    const auto r = find_eta0(p);
    REQUIRE(r);
    CHECK(r->extended_precision);
    CHECK(r->residual <= 1e-10);
    CHECK(r->eta0 == doctest::Approx(2.00105).epsilon(1e-5));
}

TEST_CASE("transmission determinant vanishes on the dispersion zero set") {
    const CornerProblem p{1.2, -20.0};
    REQUIRE(classify_region(p, 1e-3).membership == Membership::Inside);
    const auto r = find_eta0(p);
    REQUIRE(r);
    CHECK(normalized_determinant(p, cplx(1.0, r->eta0)) <= 1e-8);
    CHECK(normalized_determinant(p, cplx(1.0, r->eta0 + 0.3)) > 1e-6);
    const Matrix4c s = scaled_transmission_matrix(p, cplx(1.0, r->eta0));
    for (int i = 0; i < 4; ++i) CHECK(s.row(i).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("angular profile satisfies the corner problem") {
    const CornerProblem p{pi / 2, -10.0};
    const auto r = find_eta0(p);
    REQUIRE(r);
    const AngularProfile ang = angular_profile(p, cplx(1.0, r->eta0));
    CHECK(interface_residual(ang) <= 1e-10);
    CHECK(angular_biharmonic_residual(ang) <= 1e-10);
    double cmax = 0.0;
    for (const cplx& c : ang.coeffs) cmax = std::max(cmax, std::abs(c));
    CHECK(cmax == doctest::Approx(1.0));
    for (double th : {0.0, pi}) {
        const ProfileJet j = evaluate_profile(ang, th);
        CHECK(std::abs(j.d[0]) <= 1e-12);
        CHECK(std::abs(j.d[1]) <= 1e-12);
    }
    // continuity of phi, phi' and the weighted jumps at the interface
    const ProfileJet l = evaluate_profile(ang, std::nextafter(p.alpha, 0.0));
    const ProfileJet rr = evaluate_profile(ang, std::nextafter(p.alpha, pi));
    CHECK(std::abs(l.d[0] - rr.d[0]) <= 1e-12);
    CHECK(std::abs(l.d[1] - rr.d[1]) <= 1e-12);
    CHECK_THROWS_AS(angular_profile(p, cplx(1.0, r->eta0 + 0.2)), NotSingular);
}

TEST_CASE("lower-bound sequence") {
    const CornerProblem p{pi / 2, -10.0};
    const auto r = find_eta0(p);
    REQUIRE(r);
    const AngularProfile ang = angular_profile(p, cplx(1.0, r->eta0));
    const double v1 = varsigma_norm_sq(ang, r->eta0, 1);
    CHECK(singular_sequence_lower_bound(ang, r->eta0, 1, 1.0) == doctest::Approx(0.5 * v1));
    const auto seq = singular_sequence_lower_bounds(ang, r->eta0, 200, 0.5);
    CHECK(seq[99] == doctest::Approx(singular_sequence_lower_bound(ang, r->eta0, 100, 0.5)).epsilon(1e-12));
    for (std::size_t m = 50; m < seq.size(); ++m) CHECK(seq[m] > seq[m - 1]);
    CHECK_THROWS_AS(singular_sequence_lower_bound(ang, r->eta0, 1, 0.0), PreconditionViolation);
}

TEST_CASE("region map") {
    RegionMapSpec spec;
    spec.n_alpha = 12;
    spec.n_kappa = 9;
    spec.threads = 3;
    const auto a = region_map(spec);
    spec.threads = 1;
    const auto b = region_map(spec);
    REQUIRE(a.size() == 108);
    std::ostringstream sa, sb;
    write_region_csv(sa, a);
    write_region_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("alpha,kappa,g,ell_minus,ell_plus,membership,eta0,residual\n", 0) == 0);
    for (const auto& c : a) {
        CHECK_FALSE(c.failed);
        if (c.report.membership == Membership::Inside) CHECK(c.root.has_value());
        if (c.report.membership == Membership::Outside) CHECK_FALSE(c.root.has_value());
    }
    spec.kappa_max = 0.1;
    CHECK_THROWS_AS(region_map(spec), PreconditionViolation);
}

TEST_CASE("membership is symmetric under (pi - alpha, 1/kappa)") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ua(0.05, pi - 0.05), uk(-8.0, -0.125);
    for (int i = 0; i < 200; ++i) {
        const CornerProblem p{ua(rng), uk(rng)};
        const CornerProblem q{pi - p.alpha, 1.0 / p.kappa};
        CHECK(eval_g(q) * p.kappa * p.kappa == doctest::Approx(eval_g(p)).epsilon(1e-10).scale(1.0));
        const auto rp = find_eta0(p), rq = find_eta0(q);
        CHECK(rp.has_value() == rq.has_value());
        if (rp && rq) CHECK(rp->eta0 == doctest::Approx(rq->eta0).epsilon(1e-9));
    }
}
