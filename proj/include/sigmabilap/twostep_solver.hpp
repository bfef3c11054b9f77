#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sigmabilap/grid.hpp"

namespace sigmabilap {

// 5-point Dirichlet Laplacian on the interior nodes of a grid, factorized once.
class PoissonSolver {
public:
    explicit PoissonSolver(Grid2D grid);
    ~PoissonSolver();
    PoissonSolver(PoissonSolver&&) noexcept;
    PoissonSolver& operator=(PoissonSolver&&) noexcept;

    const Grid2D& grid() const { return grid_; }

    // Delta_h u = rhs at interior nodes, u = boundary on boundary nodes (zero
    // when boundary is empty). residual receives ||A u - b|| / ||b||.
    NodeField solve(const NodeField& rhs, double* residual = nullptr) const;
    NodeField solve_with_boundary(const NodeField& rhs, const NodeField& boundary,
                                  double* residual = nullptr) const;

    // Delta_h u at interior nodes, zero elsewhere.
    NodeField apply(const NodeField& u) const;

private:
    struct Impl;
    Grid2D grid_;
    std::unique_ptr<Impl> impl_;
};

NodeField solve_poisson_dirichlet(const Grid2D& grid, const NodeField& rhs);

struct FieldSolution {
    NodeField p;
    NodeField v;
    double residual_p = 0.0;
    double residual_v = 0.0;
};

// h^2-weighted nodal sum over interior nodes.
double full_pairing(const Grid2D& grid, const NodeField& a, const NodeField& b);

// Nodal pairing with a disk of radius exclusion * h removed around every
// registered corner.
class Pairing {
public:
    explicit Pairing(const Grid2D& grid, double exclusion = 4.0);
    double operator()(const NodeField& a, const NodeField& b) const;
    double norm(const NodeField& a) const;
    const Eigen::VectorXd& weights() const { return w_; }

private:
    Eigen::VectorXd w_;
};

FieldSolution two_step_solve(const PoissonSolver& solver, const SigmaField& sigma,
                             const NodeField& f);

struct CornerSingularity {
    int corner = 0;
    NodeField singular_part;  // r^(-pi/alpha) sin(pi theta / alpha)
    NodeField zeta;
    NodeField psi;  // Delta psi = sigma^-1 zeta; empty until attach_sigma
    double pairing = 0.0;  // (sigma^-1 zeta, zeta)
};

CornerSingularity compute_zeta(const PoissonSolver& solver, int corner);
std::vector<CornerSingularity> compute_all_zeta(const PoissonSolver& solver);

// Fills psi and the self-pairing for the given sigma.
void attach_sigma(const PoissonSolver& solver, const SigmaField& sigma, CornerSingularity& s);

// max |Delta_h zeta| over interior nodes at distance >= r_min from the corner.
double zeta_harmonicity_residual(const PoissonSolver& solver, const CornerSingularity& s,
                                 double r_min);

// c = -(1/pi) (g, zeta)
double singular_coefficient(const Pairing& pairing, const NodeField& g, const NodeField& zeta);

struct MMatrix {
    Eigen::MatrixXd m;
    Eigen::VectorXd singular_values;
    Eigen::MatrixXd kernel_basis;  // N x kernel_dim, from the SVD
    int kernel_dim = 0;
    double scale = 0.0;  // max_i (|sigma^-1| zeta_i, zeta_i)
    double tol = 0.0;
};

// Kernel dimension counts singular values below tol_m * scale.
MMatrix assemble_M(const PoissonSolver& solver, const SigmaField& sigma,
                   const std::vector<CornerSingularity>& sings, double tol_m = 1e-8);

FieldSolution corrected_two_step_solve(const PoissonSolver& solver, const SigmaField& sigma,
                                       const NodeField& f,
                                       const std::vector<CornerSingularity>& sings,
                                       double tol_m = 1e-8);

// psi_m solving Delta psi_m = sigma^-1 beta_m, beta_m = sum_i basis(i, m) zeta_i.
std::vector<NodeField> kernel_functions_psi(const PoissonSolver& solver, const SigmaField& sigma,
                                            const std::vector<CornerSingularity>& sings,
                                            const Eigen::MatrixXd& kernel_basis);

// Combination sum_i coeffs(i) zeta_i.
NodeField combine_zeta(const std::vector<CornerSingularity>& sings, const Eigen::VectorXd& coeffs);

// |(beta, Delta_h v')| / (||beta|| ||Delta_h v'||), beta = sigma Delta_h psi.
double discrete_kernel_residual(const PoissonSolver& solver, const NodeField& beta,
                                const NodeField& test_field);

// |<f, psi>| / (||f|| ||psi||)
double solvability_residual(const Grid2D& grid, const NodeField& f, const NodeField& psi);

FieldSolution constrained_solve(const PoissonSolver& solver, const SigmaField& sigma,
                                const NodeField& f, const std::vector<CornerSingularity>& sings,
                                const Eigen::MatrixXd& kernel_basis, double solvability_tol = 1e-6);

struct KernelOnset {
    double t_star = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    double pairing_at_root = 0.0;
    double pairing_scale = 0.0;  // (|sigma^-1| zeta, zeta) at t_star
    NodeField psi;
    double kernel_residual = 0.0;  // worst over the supplied test fields
    double psi_singular_coefficient = 0.0;
};

// Geometric scan of t in [t_lo, t_hi] for a sign change of (sigma_t^-1 zeta, zeta),
// bisection, then psi at the zero.
KernelOnset kernel_onset_scan(const PoissonSolver& solver, const CornerSingularity& s,
                              const std::function<SigmaField(double)>& family, double t_lo,
                              double t_hi, const std::vector<NodeField>& test_fields,
                              int n_scan = 64);

// One-dimensional analogue on (0, 1) with n cells: sigma per cell, f and the
// returned fields on the n + 1 nodes.
struct FieldSolution1D {
    Eigen::VectorXd p;
    Eigen::VectorXd v;
    double residual_p = 0.0;
    double residual_v = 0.0;
};

FieldSolution1D two_step_solve_1d(const Eigen::VectorXd& sigma_cells, const Eigen::VectorXd& f);

}  // namespace sigmabilap
