#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sigmabilap {

using cplx = std::complex<double>;
using Matrix4c = Eigen::Matrix<cplx, 4, 4>;

// Corner of aperture alpha on the boundary, with the interface theta = alpha
// separating sigma1 (0 < theta < alpha) from sigma2 = kappa * sigma1.
struct CornerProblem {
    double alpha = 0.0;
    double kappa = 0.0;

    // Throws PreconditionViolation unless 0 < alpha < pi and kappa < 0.
    void validate() const;
};

enum class Membership { Inside, Outside, Boundary };

std::string to_string(Membership m);

struct RegionReport {
    double g_value = 0.0;
    double ell_minus = 0.0;
    double ell_plus = 0.0;
    Membership membership = Membership::Boundary;
};

struct SingularExponentResult {
    double eta0 = 0.0;
    // |h| at the root. When the root needed more than double precision to
    // reach the tolerance, this is |h| at the extended-precision root and
    // eta0 is that root rounded to double.
    double residual = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    int sign_changes_found = 0;
    double slope = 0.0;  // |h'(eta0)|
    bool extended_precision = false;
    bool near_degenerate = false;
};

struct RootScanOptions {
    double eta_min = 1e-4;
    double ratio = 1.1;
    double eta_max = 10.0;
    int max_doublings = 40;
    double root_tol = 1e-10;
};

double eval_h(const CornerProblem& p, double eta);
// h(eta) * 2 exp(-2 pi |eta|); same sign as h, finite for every eta.
double eval_h_scaled(const CornerProblem& p, double eta);
double eval_h_derivative(const CornerProblem& p, double eta);
double eval_g(const CornerProblem& p);
// h^(4)(0) as a function of kappa.
double eval_g_tilde(double alpha, double kappa);

std::pair<double, double> interval_endpoints(double alpha);

RegionReport classify_region(const CornerProblem& p, double eps_boundary);

std::optional<SingularExponentResult> find_eta0(const CornerProblem& p,
                                                const RootScanOptions& opts = {});

// h^(2k)(0).
double even_derivative_at_zero(const CornerProblem& p, int k);

Matrix4c transmission_matrix(const CornerProblem& p, cplx lambda);
// Rows divided by their largest entry.
Matrix4c scaled_transmission_matrix(const CornerProblem& p, cplx lambda);
cplx transmission_determinant(const CornerProblem& p, cplx lambda);
// |det| divided by the product of the row 2-norms.
double normalized_determinant(const CornerProblem& p, cplx lambda);

struct AngularProfile {
    cplx lambda;
    std::array<cplx, 4> coeffs{};
    double alpha = 0.0;
    double kappa = 0.0;
};

struct ProfileJet {
    std::array<cplx, 5> d{};  // phi, phi', ..., phi''''
};

AngularProfile angular_profile(const CornerProblem& p, cplx lambda,
                               double singular_tol = 1e-8);

ProfileJet evaluate_profile(const AngularProfile& ang, double theta);

// Max over the four interface rows of |row . c| / sum_j |row_j c_j|.
double interface_residual(const AngularProfile& ang);

// Relative L2 norm of psi'' + (lambda-2)^2 psi, psi = phi'' + lambda^2 phi,
// by 64-point Gauss-Legendre on each side of the interface.
double angular_biharmonic_residual(const AngularProfile& ang);

double varsigma_norm_sq(const AngularProfile& ang, double eta0, int m);
double singular_sequence_lower_bound(const AngularProfile& ang, double eta0, int m,
                                     double delta);
// Entries m = 1..m_max of the same sequence, sharing one quadrature.
std::vector<double> singular_sequence_lower_bounds(const AngularProfile& ang, double eta0,
                                                   int m_max, double delta);

struct RegionMapSpec {
    double alpha_min = 0.0;
    double alpha_max = 3.14159265358979323846;
    double kappa_min = -12.0;
    double kappa_max = -0.05;
    int n_alpha = 200;
    int n_kappa = 200;
    // Open sampling alpha_i = amin + (amax - amin)(i + 1)/(n + 1); otherwise
    // endpoints are included.
    bool alpha_open = true;
    double eps_boundary = 1e-3;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct RegionCell {
    double alpha = 0.0;
    double kappa = 0.0;
    RegionReport report;
    std::optional<SingularExponentResult> root;
    bool failed = false;
    std::string error;
};

// Cells ordered alpha-major.
std::vector<RegionCell> region_map(const RegionMapSpec& spec);

void write_region_csv(std::ostream& os, const std::vector<RegionCell>& cells);

}  // namespace sigmabilap
