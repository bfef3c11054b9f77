#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "sigmabilap/errors.hpp"
#include "sigmabilap/twostep_solver.hpp"

namespace sigmabilap {

struct PoissonSolver::Impl {
    Eigen::SparseMatrix<double> a;  // -h^2 Delta_h, SPD
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

PoissonSolver::PoissonSolver(Grid2D grid) : grid_(std::move(grid)), impl_(std::make_unique<Impl>()) {
    const int n = grid_.num_unknowns();
    const int stride = grid_.nx() + 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * static_cast<std::size_t>(n));
    for (int k : grid_.interior_nodes()) {
        const int row = grid_.unknown(k);
        trip.emplace_back(row, row, 4.0);
        for (int nb : {k - 1, k + 1, k - stride, k + stride}) {
            const int col = grid_.unknown(nb);
            if (col >= 0) trip.emplace_back(row, col, -1.0);
        }
    }
    impl_->a.resize(n, n);
    impl_->a.setFromTriplets(trip.begin(), trip.end());
    impl_->ldlt.compute(impl_->a);
    if (impl_->ldlt.info() != Eigen::Success)
        throw NumericalFailure("Poisson factorization failed");
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

NodeField PoissonSolver::solve(const NodeField& rhs, double* residual) const {
    return solve_with_boundary(rhs, NodeField(), residual);
}

NodeField PoissonSolver::solve_with_boundary(const NodeField& rhs, const NodeField& boundary,
                                             double* residual) const {
    const int nn = grid_.num_nodes();
    if (rhs.size() != nn) throw PreconditionViolation("rhs size does not match the grid");
    const bool lifted = boundary.size() > 0;
    if (lifted && boundary.size() != nn)
        throw PreconditionViolation("boundary data size does not match the grid");
    const int stride = grid_.nx() + 1;
    const double h2 = grid_.h() * grid_.h();
    Eigen::VectorXd b(grid_.num_unknowns());
    for (int k : grid_.interior_nodes()) {
        double s = -h2 * rhs(k);
        if (lifted)
            for (int nb : {k - 1, k + 1, k - stride, k + stride})
                if (grid_.kind(nb) == NodeKind::Boundary) s += boundary(nb);
        b(grid_.unknown(k)) = s;
    }
    Eigen::VectorXd u = impl_->ldlt.solve(b);
    const double bn = b.norm();
    double res = bn > 0.0 ? (impl_->a * u - b).norm() / bn : (impl_->a * u).norm();
    if (res > 1e-10 && std::isfinite(res)) {
        u += impl_->ldlt.solve(b - impl_->a * u);
        res = bn > 0.0 ? (impl_->a * u - b).norm() / bn : (impl_->a * u).norm();
    }
    if (!std::isfinite(res) || res > 1e-10)
        throw NumericalFailure("Poisson solve residual above 1e-10");
    if (residual) *residual = res;

    NodeField out = grid_.zeros();
    for (int k : grid_.interior_nodes()) out(k) = u(grid_.unknown(k));
    if (lifted)
        for (int k = 0; k < nn; ++k)
            if (grid_.kind(k) == NodeKind::Boundary) out(k) = boundary(k);
    return out;
}

NodeField PoissonSolver::apply(const NodeField& u) const {
    const int stride = grid_.nx() + 1;
    const double inv_h2 = 1.0 / (grid_.h() * grid_.h());
    NodeField out = grid_.zeros();
    for (int k : grid_.interior_nodes())
        out(k) = (u(k - 1) + u(k + 1) + u(k - stride) + u(k + stride) - 4.0 * u(k)) * inv_h2;
    return out;
}

NodeField solve_poisson_dirichlet(const Grid2D& grid, const NodeField& rhs) {
    return PoissonSolver(grid).solve(rhs);
}

double full_pairing(const Grid2D& grid, const NodeField& a, const NodeField& b) {
    double s = 0.0;
    for (int k : grid.interior_nodes()) s += a(k) * b(k);
    return grid.h() * grid.h() * s;
}

Pairing::Pairing(const Grid2D& grid, double exclusion) : w_(grid.zeros()) {
    const double h2 = grid.h() * grid.h();
    const double rad = exclusion * grid.h();
    for (int k : grid.interior_nodes()) {
        bool keep = true;
        for (const CornerFrame& c : grid.corners())
            if (corner_polar(c, grid.node(k)).r < rad) keep = false;
        if (keep) w_(k) = h2;
    }
}

double Pairing::operator()(const NodeField& a, const NodeField& b) const {
    return (w_.array() * a.array() * b.array()).sum();
}

double Pairing::norm(const NodeField& a) const { return std::sqrt((*this)(a, a)); }

}  // namespace sigmabilap
