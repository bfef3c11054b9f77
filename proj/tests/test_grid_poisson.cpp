#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "sigmabilap/errors.hpp"
#include "sigmabilap/grid.hpp"
#include "sigmabilap/twostep_solver.hpp"

using namespace sigmabilap;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("rectangle and L-shape node counts") {
    const Grid2D r = Grid2D::rectangle(8, 4, 0.0, 1.0, 0.0, 0.5);
    CHECK(r.num_unknowns() == 7 * 3);
    CHECK(r.corners().empty());
    const Grid2D l = Grid2D::lshape(8);
    CHECK(l.num_unknowns() == 49 - 16);
    REQUIRE(l.corners().size() == 1);
    CHECK(l.corners()[0].alpha == doctest::Approx(1.5 * pi));
    CHECK(l.interior_connected());
}

TEST_CASE("corner frame polar coordinates") {
    const Grid2D l = Grid2D::lshape(16);
    const CornerFrame& c = l.corners()[0];
    CHECK(corner_polar(c, {0.5, 0.0}).theta == doctest::Approx(0.0));
    CHECK(corner_polar(c, {0.0, 0.5}).theta == doctest::Approx(pi / 2));
    CHECK(corner_polar(c, {-0.5, 0.0}).theta == doctest::Approx(pi));
    CHECK(corner_polar(c, {0.0, -0.5}).theta == doctest::Approx(1.5 * pi));
    CHECK(corner_polar(c, {0.3, 0.4}).r == doctest::Approx(0.5));
    for (int k : l.interior_nodes()) {
        const double t = corner_polar(c, l.node(k)).theta;
        CHECK(t > 0.0);
        CHECK(t < 1.5 * pi);
    }
}

TEST_CASE("notched corners are mirror images") {
    const Grid2D g = Grid2D::notched(32);
    REQUIRE(g.corners().size() == 2);
    const auto& a = g.corners()[0];
    const auto& b = g.corners()[1];
    for (Point p : {Point{-0.5, 0.3}, Point{0.4, 0.1}, Point{-0.2, -0.7}}) {
        const auto pa = corner_polar(a, p);
        const auto pb = corner_polar(b, {p.x, -p.y});
        CHECK(pa.r == doctest::Approx(pb.r));
        CHECK(pa.theta == doctest::Approx(pb.theta));
    }
    CHECK_THROWS_AS(Grid2D::notched(30), PreconditionViolation);
}

TEST_CASE("bad corner frames are rejected") {
    Grid2D l = Grid2D::lshape(16);
    l.clear_corners();
    CHECK_THROWS_AS(l.add_corner({{0.0, 0.0}, 1.5 * pi, {0.0, 1.0}, 1}), FrameError);
    CHECK_THROWS_AS(l.add_corner({{0.0, 0.0}, 1.5 * pi, {1.0, 0.0}, -1}), FrameError);
    CHECK_THROWS_AS(l.add_corner({{0.5, 0.5}, 1.5 * pi, {1.0, 0.0}, 1}), FrameError);
    CHECK_THROWS_AS(l.add_corner({{0.0, 0.0}, pi, {1.0, 0.0}, 1}), FrameError);
    CHECK_NOTHROW(l.add_corner({{0.0, 0.0}, 1.5 * pi, {1.0, 0.0}, 1}));
    // clockwise frame starting on the other edge
    l.clear_corners();
    CHECK_NOTHROW(l.add_corner({{0.0, 0.0}, 1.5 * pi, {0.0, -1.0}, -1}));
}

TEST_CASE("domain files") {
    std::istringstream in("# L-shape\ndomain = lshape\nn = 16\n");
    const Grid2D g = build_domain(parse_key_values(in));
    CHECK(g.nx() == 16);
    CHECK(g.corners().size() == 1);
    std::istringstream r("domain=rectangle\nnx=10\nny=5\nx1=2\n");
    const Grid2D rg = build_domain(parse_key_values(r));
    CHECK(rg.h() == doctest::Approx(0.2));
    std::istringstream c("domain=lshape\nn=16\ncorner=0,0,0,-1,-1\n");
    const Grid2D cg = build_domain(parse_key_values(c));
    REQUIRE(cg.corners().size() == 1);
    CHECK(cg.corners()[0].orientation == -1);
    std::istringstream bad("domain=disk\nn=8\n");
    CHECK_THROWS_AS(build_domain(parse_key_values(bad)), PreconditionViolation);
    std::istringstream junk("domain\n");
    CHECK_THROWS_AS(parse_key_values(junk), PreconditionViolation);
}

TEST_CASE("sigma fields") {
    const Grid2D g = Grid2D::rectangle(4, 4);
    const SigmaField s = SigmaField::from_function(g, [](double x, double) { return x < 0.5 ? 1.0 : -2.0; });
    CHECK_NOTHROW(s.validate(g));
    const NodeField inv = s.inverse_at_nodes(g);
    CHECK(inv(g.node_index(1, 2)) == doctest::Approx(1.0));
    CHECK(inv(g.node_index(2, 2)) == doctest::Approx(0.25));
    CHECK(inv(g.node_index(3, 2)) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(SigmaField::constant(g, 0.0).validate(g), PreconditionViolation);
    std::istringstream file("1 1 1 1\n1 1 1 1\n-1 -1 -1 -1\n-1,-1,-1,-1\n");
    const SigmaField f = read_sigma_file(file, g);
    CHECK(f.cell(0, 0, 4) == 1.0);
    CHECK(f.cell(3, 3, 4) == -1.0);
    std::istringstream shortf("1 2 3\n");
    CHECK_THROWS_AS(read_sigma_file(shortf, g), PreconditionViolation);
}

TEST_CASE("Poisson solver") {
    SUBCASE("zero data") {
        const Grid2D g = Grid2D::lshape(16);
        CHECK(solve_poisson_dirichlet(g, g.zeros()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("manufactured solution converges at second order") {
        double prev = 0.0;
        for (int n : {16, 32, 64}) {
            const Grid2D g = Grid2D::rectangle(n, n);
            const NodeField rhs = g.interpolate([](double x, double y) {
                return -2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
            });
            double res = 1.0;
            const PoissonSolver solver(g);
            const NodeField u = solver.solve(rhs, &res);
            CHECK(res <= 1e-10);
            double err = 0.0;
            for (int k : g.interior_nodes()) {
                const Point p = g.node(k);
                err = std::max(err, std::abs(u(k) - std::sin(pi * p.x) * std::sin(pi * p.y)));
            }
            if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
            prev = err;
            const NodeField back = solver.apply(u);
            for (int k : g.interior_nodes()) CHECK(back(k) == doctest::Approx(rhs(k)).epsilon(1e-9).scale(1.0));
        }
    }
    SUBCASE("maximum principle") {
        const Grid2D g = Grid2D::lshape(32);
        const NodeField rhs = g.interpolate([](double x, double y) { return -1.0 - x * x - std::abs(y); });
        const NodeField u = solve_poisson_dirichlet(g, rhs);
        CHECK(u.minCoeff() >= 0.0);
    }
    SUBCASE("boundary data") {
        const Grid2D g = Grid2D::rectangle(20, 20);
        NodeField b = g.zeros();
        for (int k = 0; k < g.num_nodes(); ++k) {
            const Point p = g.node(k);
            b(k) = p.x + 2.0 * p.y;  // discrete harmonic
        }
        const PoissonSolver solver(g);
        const NodeField u = solver.solve_with_boundary(g.zeros(), b);
        for (int k : g.interior_nodes()) CHECK(u(k) == doctest::Approx(b(k)).epsilon(1e-12));
    }
}
