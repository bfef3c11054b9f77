#pragma once

#include <array>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace sigmabilap {

// (a, b) split at 0; sigma = 1 on (a, 0) and kappa on (0, b).
struct TwoSegmentDomain {
    double a = -1.0;
    double b = 1.0;
};

// (-1, 1) with sigma = kappa on (-delta, delta) and 1 elsewhere.
struct ThreeSegmentDomain {
    double delta = 0.5;
};

using KernelDomain = std::variant<TwoSegmentDomain, ThreeSegmentDomain>;

enum class RootSource { ClosedForm, DeterminantScan };

struct ContrastRoots {
    std::vector<double> roots;  // ascending
    RootSource source = RootSource::ClosedForm;
};

// Cubic on [x_left, x_right] written as sum_k c[k] (x - anchor)^k.
struct CubicPiece {
    double x_left = 0.0;
    double x_right = 0.0;
    double anchor = 0.0;
    double sigma = 1.0;
    std::array<double, 4> c{};
};

struct PiecewiseCubic {
    std::vector<CubicPiece> pieces;

    // deriv in 0..3; interface points belong to the left piece
    double eval(double x, int deriv = 0) const;
};

std::pair<double, double> quadratic_coefficients(double t);

ContrastRoots critical_contrasts_two_segment(double t);
ContrastRoots critical_contrasts_three_segment(double delta);

Eigen::MatrixXd build_kernel_system(const KernelDomain& dom, double kappa);
double kernel_determinant(const KernelDomain& dom, double kappa);
// |det| over the product of row norms
double normalized_kernel_determinant(const KernelDomain& dom, double kappa);

struct ScanOptions {
    double kappa_min = -1e8;  // scan |kappa| geometrically over [-kappa_max, -kappa_min]
    double kappa_max = -1e-8;
    int points = 10000;
};

// Sign changes of the determinant on a geometric grid, refined by bisection.
ContrastRoots scan_critical_contrasts(const KernelDomain& dom, const ScanOptions& opts = {});

std::optional<PiecewiseCubic> kernel_basis(const KernelDomain& dom, double kappa,
                                           double tol = 1e-8);

// Clamped end conditions followed by the four interface conditions at each
// interface (value, slope, sigma v'', sigma v''').
Eigen::VectorXd kernel_conditions(const PiecewiseCubic& v);

struct KernelSample {
    double x, v, v1, v2;
};

std::vector<KernelSample> sample_kernel(const PiecewiseCubic& v, int n = 1001);

}  // namespace sigmabilap
