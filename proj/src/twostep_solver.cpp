#include "sigmabilap/twostep_solver.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "sigmabilap/errors.hpp"

namespace sigmabilap {

namespace {

constexpr double pi = std::numbers::pi;

NodeField times(const NodeField& a, const NodeField& b) { return a.cwiseProduct(b); }

double full_norm(const Grid2D& g, const NodeField& a) { return std::sqrt(full_pairing(g, a, a)); }

}  // namespace

FieldSolution two_step_solve(const PoissonSolver& solver, const SigmaField& sigma,
                             const NodeField& f) {
    const NodeField sinv = sigma.inverse_at_nodes(solver.grid());
    FieldSolution out;
    out.p = solver.solve(f, &out.residual_p);
    out.v = solver.solve(times(sinv, out.p), &out.residual_v);
    return out;
}

CornerSingularity compute_zeta(const PoissonSolver& solver, int corner) {
    const Grid2D& g = solver.grid();
    if (corner < 0 || corner >= static_cast<int>(g.corners().size()))
        throw PreconditionViolation("corner index out of range");
    const CornerFrame& c = g.corners()[corner];
    const double e = pi / c.alpha;
    CornerSingularity s;
    s.corner = corner;
    s.singular_part = g.zeros();
    for (int k = 0; k < g.num_nodes(); ++k) {
        if (g.kind(k) == NodeKind::Outside) continue;
        const PolarCoord pc = corner_polar(c, g.node(k));
        if (pc.r > 0.0) s.singular_part(k) = std::pow(pc.r, -e) * std::sin(e * pc.theta);
    }
    const NodeField smooth = solver.solve_with_boundary(g.zeros(), -s.singular_part);
    s.zeta = g.zeros();
    for (int k : g.interior_nodes()) s.zeta(k) = s.singular_part(k) + smooth(k);
    return s;
}

std::vector<CornerSingularity> compute_all_zeta(const PoissonSolver& solver) {
    std::vector<CornerSingularity> out;
    for (int i = 0; i < static_cast<int>(solver.grid().corners().size()); ++i)
        out.push_back(compute_zeta(solver, i));
    return out;
}

void attach_sigma(const PoissonSolver& solver, const SigmaField& sigma, CornerSingularity& s) {
    const NodeField sinv = sigma.inverse_at_nodes(solver.grid());
    const NodeField g = times(sinv, s.zeta);
    s.psi = solver.solve(g);
    s.pairing = Pairing(solver.grid())(g, s.zeta);
}

double zeta_harmonicity_residual(const PoissonSolver& solver, const CornerSingularity& s,
                                 double r_min) {
    const Grid2D& g = solver.grid();
    const NodeField lap = solver.apply(s.zeta);
    const CornerFrame& c = g.corners()[s.corner];
    double worst = 0.0;
    for (int k : g.interior_nodes())
        if (corner_polar(c, g.node(k)).r >= r_min) worst = std::max(worst, std::abs(lap(k)));
    return worst;
}

double singular_coefficient(const Pairing& pairing, const NodeField& g, const NodeField& zeta) {
    return -pairing(g, zeta) / pi;
}

MMatrix assemble_M(const PoissonSolver& solver, const SigmaField& sigma,
                   const std::vector<CornerSingularity>& sings, double tol_m) {
    const Grid2D& g = solver.grid();
    const Pairing pair(g);
    const NodeField sinv = sigma.inverse_at_nodes(g);
    const int n = static_cast<int>(sings.size());
    MMatrix out;
    out.m.resize(n, n);
    out.scale = 0.0;
    for (int i = 0; i < n; ++i) {
        const NodeField a = times(sinv, sings[i].zeta);
        for (int j = 0; j < n; ++j) out.m(i, j) = pair(a, sings[j].zeta);
        out.scale = std::max(out.scale, pair(times(sinv.cwiseAbs(), sings[i].zeta), sings[i].zeta));
    }
    out.tol = tol_m;
    if (n == 0) return out;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.m, Eigen::ComputeFullV);
    out.singular_values = svd.singularValues();
    for (int k = 0; k < n; ++k)
        if (out.singular_values(k) <= tol_m * out.scale) ++out.kernel_dim;
    out.kernel_basis = svd.matrixV().rightCols(out.kernel_dim);
    return out;
}

FieldSolution corrected_two_step_solve(const PoissonSolver& solver, const SigmaField& sigma,
                                       const NodeField& f,
                                       const std::vector<CornerSingularity>& sings,
                                       double tol_m) {
    if (sings.empty()) return two_step_solve(solver, sigma, f);
    const MMatrix mm = assemble_M(solver, sigma, sings, tol_m);
    if (mm.kernel_dim > 0)
        throw SingularMMatrix("pairing matrix is singular; use the constrained solve");
    const Grid2D& g = solver.grid();
    const Pairing pair(g);
    const NodeField sinv = sigma.inverse_at_nodes(g);

    FieldSolution out;
    out.p = solver.solve(f, &out.residual_p);
    const NodeField sp0 = times(sinv, out.p);
    const int n = static_cast<int>(sings.size());
    Eigen::VectorXd rhs(n);
    for (int j = 0; j < n; ++j) rhs(j) = -pair(sp0, sings[j].zeta);
    const Eigen::VectorXd a = mm.m.colPivHouseholderQr().solve(rhs);
    for (int i = 0; i < n; ++i) out.p += a(i) * sings[i].zeta;
    out.v = solver.solve(times(sinv, out.p), &out.residual_v);
    return out;
}

NodeField combine_zeta(const std::vector<CornerSingularity>& sings, const Eigen::VectorXd& coeffs) {
    if (sings.empty()) return {};
    NodeField b = NodeField::Zero(sings.front().zeta.size());
    for (std::size_t i = 0; i < sings.size(); ++i) b += coeffs(i) * sings[i].zeta;
    return b;
}

std::vector<NodeField> kernel_functions_psi(const PoissonSolver& solver, const SigmaField& sigma,
                                            const std::vector<CornerSingularity>& sings,
                                            const Eigen::MatrixXd& kernel_basis) {
    std::vector<NodeField> out;
    if (kernel_basis.cols() == 0) return out;
    if (kernel_basis.rows() != static_cast<Eigen::Index>(sings.size()))
        throw PreconditionViolation("kernel basis rows must match the number of corners");
    const NodeField sinv = sigma.inverse_at_nodes(solver.grid());
    for (Eigen::Index m = 0; m < kernel_basis.cols(); ++m)
        out.push_back(solver.solve(times(sinv, combine_zeta(sings, kernel_basis.col(m)))));
    return out;
}

double discrete_kernel_residual(const PoissonSolver& solver, const NodeField& beta,
                                const NodeField& test_field) {
    const Grid2D& g = solver.grid();
    const NodeField lap = solver.apply(test_field);
    const double den = full_norm(g, beta) * full_norm(g, lap);
    return den > 0.0 ? std::abs(full_pairing(g, beta, lap)) / den : 0.0;
}

double solvability_residual(const Grid2D& grid, const NodeField& f, const NodeField& psi) {
    const double den = full_norm(grid, f) * full_norm(grid, psi);
    return den > 0.0 ? std::abs(full_pairing(grid, f, psi)) / den : 0.0;
}

FieldSolution constrained_solve(const PoissonSolver& solver, const SigmaField& sigma,
                                const NodeField& f, const std::vector<CornerSingularity>& sings,
                                const Eigen::MatrixXd& kernel_basis, double solvability_tol) {
    if (kernel_basis.cols() == 0) return corrected_two_step_solve(solver, sigma, f, sings);
    const Grid2D& g = solver.grid();
    for (const NodeField& psi : kernel_functions_psi(solver, sigma, sings, kernel_basis))
        if (solvability_residual(g, f, psi) > solvability_tol)
            throw NotSolvable("data is not orthogonal to the kernel functions");

    const Pairing pair(g);
    const NodeField sinv = sigma.inverse_at_nodes(g);
    const int n = static_cast<int>(sings.size());
    const int nk = static_cast<int>(kernel_basis.cols());
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = pair(times(sinv, sings[i].zeta), sings[j].zeta);

    FieldSolution out;
    out.p = solver.solve(f, &out.residual_p);
    const int nc = n - nk;
    if (nc > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
        std::vector<int> gamma(nc);
        for (int i = 0; i < nc; ++i) gamma[i] = qr.colsPermutation().indices()(i);
        Eigen::MatrixXd mt(nc, nc);
        for (int i = 0; i < nc; ++i)
            for (int j = 0; j < nc; ++j) mt(i, j) = m(gamma[i], gamma[j]);
        const Eigen::MatrixXd mt_inv = mt.inverse();
        const NodeField sp0 = times(sinv, out.p);
        Eigen::VectorXd a(nc);
        for (int i = 0; i < nc; ++i) a(i) = pair(sp0, sings[gamma[i]].zeta);
        for (int i = 0; i < nc; ++i) {
            NodeField lambda = NodeField::Zero(out.p.size());
            for (int j = 0; j < nc; ++j) lambda += mt_inv(i, j) * sings[gamma[j]].zeta;
            out.p -= a(i) * lambda;
        }
    }
    out.v = solver.solve(times(sinv, out.p), &out.residual_v);
    return out;
}

KernelOnset kernel_onset_scan(const PoissonSolver& solver, const CornerSingularity& s,
                              const std::function<SigmaField(double)>& family, double t_lo,
                              double t_hi, const std::vector<NodeField>& test_fields, int n_scan) {
    if (!(t_lo > 0.0 && t_hi > t_lo) || n_scan < 2)
        throw PreconditionViolation("kernel_onset_scan needs 0 < t_lo < t_hi");
    const Grid2D& g = solver.grid();
    const Pairing pair(g);
    auto F = [&](double t) {
        const NodeField sinv = family(t).inverse_at_nodes(g);
        return pair(times(sinv, s.zeta), s.zeta);
    };
    const double ratio = std::pow(t_hi / t_lo, 1.0 / (n_scan - 1));
    double a = t_lo, fa = F(a);
    double b = 0.0, fb = 0.0;
    bool found = false;
    for (int i = 1; i < n_scan && !found; ++i) {
        const double t = (i == n_scan - 1) ? t_hi : t_lo * std::pow(ratio, i);
        const double ft = F(t);
        if ((fa < 0.0) != (ft < 0.0)) {
            b = t;
            fb = ft;
            found = true;
        } else {
            a = t;
            fa = ft;
        }
    }
    if (!found) throw BracketFailure("pairing does not change sign over the t range");

    KernelOnset out;
    out.bracket = {a, b};
    for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double fm = F(mid);
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    out.t_star = std::abs(fa) <= std::abs(fb) ? a : b;
    const SigmaField sigma = family(out.t_star);
    const NodeField sinv = sigma.inverse_at_nodes(g);
    const NodeField rhs = times(sinv, s.zeta);
    out.pairing_at_root = pair(rhs, s.zeta);
    out.pairing_scale = pair(times(sinv.cwiseAbs(), s.zeta), s.zeta);
    out.psi = solver.solve(rhs);
    out.psi_singular_coefficient = singular_coefficient(pair, rhs, s.zeta);
    for (const NodeField& v : test_fields)
        out.kernel_residual = std::max(out.kernel_residual, discrete_kernel_residual(solver, s.zeta, v));
    return out;
}

FieldSolution1D two_step_solve_1d(const Eigen::VectorXd& sigma_cells, const Eigen::VectorXd& f) {
    const int n = static_cast<int>(sigma_cells.size());
    if (n < 2 || f.size() != n + 1)
        throw PreconditionViolation("1D solve needs n >= 2 cells and n + 1 nodal values");
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(sigma_cells(i)) || std::abs(sigma_cells(i)) < 1e-12)
            throw PreconditionViolation("|sigma| must stay above sigma_min");
    const double h = 1.0 / n;
    const int m = n - 1;
    Eigen::SparseMatrix<double> a(m, m);
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m; ++i) {
        trip.emplace_back(i, i, 2.0);
        if (i > 0) trip.emplace_back(i, i - 1, -1.0);
        if (i + 1 < m) trip.emplace_back(i, i + 1, -1.0);
    }
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success) throw NumericalFailure("1D factorization failed");

    auto solve = [&](const Eigen::VectorXd& rhs, double& res) {
        const Eigen::VectorXd b = -h * h * rhs.segment(1, m);
        const Eigen::VectorXd u = ldlt.solve(b);
        const double bn = b.norm();
        res = bn > 0.0 ? (a * u - b).norm() / bn : 0.0;
        if (!std::isfinite(res) || res > 1e-10) throw NumericalFailure("1D solve residual above 1e-10");
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n + 1);
        out.segment(1, m) = u;
        return out;
    };
    FieldSolution1D out;
    out.p = solve(f, out.residual_p);
    Eigen::VectorXd sp = Eigen::VectorXd::Zero(n + 1);
    for (int i = 1; i < n; ++i)
        sp(i) = 0.5 * (1.0 / sigma_cells(i - 1) + 1.0 / sigma_cells(i)) * out.p(i);
    out.v = solve(sp, out.residual_v);
    return out;
}

}  // namespace sigmabilap
