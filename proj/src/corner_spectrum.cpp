#include "sigmabilap/corner_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "mp_dispersion.hpp"
#include "sigmabilap/errors.hpp"
#include "sigmabilap/format.hpp"
#include "sigmabilap/quadrature.hpp"

namespace sigmabilap {

namespace {

constexpr double pi = std::numbers::pi;

// alpha - sin(alpha) without cancellation for small alpha.
double alpha_minus_sin(double a) {
    if (a < 0.25) {
        const double a2 = a * a;
        double term = a * a2 / 6.0, sum = 0.0;
        for (int k = 1; k < 12; ++k) {
            sum += term;
            term *= -a2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        }
        return sum;
    }
    return a - std::sin(a);
}

double sinh_sq(double x) {
    const double s = std::sinh(x);
    return s * s;
}

// 2 sinh^2(x) exp(-2 pi eta), for x <= pi eta
double scaled_two_sinh_sq(double x, double eta) {
    const double e = -2.0 * pi * eta;
    return 0.5 * (std::exp(2.0 * x + e) - 2.0 * std::exp(e) + std::exp(-2.0 * x + e));
}

double sum_abs_terms(const CornerProblem& p, double eta) {
    const double s = std::sin(p.alpha);
    const double k = p.kappa;
    return 2.0 * s * s * (1.0 - k) * (1.0 - k) * eta * eta +
           2.0 * std::abs(k) * sinh_sq(pi * eta) +
           2.0 * std::abs(k * (k - 1.0)) * sinh_sq(p.alpha * eta) +
           2.0 * std::abs(k - 1.0) * sinh_sq((pi - p.alpha) * eta);
}

// Sign-faithful evaluation that never overflows.
double h_for_sign(const CornerProblem& p, double eta) {
    return eta <= 60.0 ? eval_h(p, eta) : eval_h_scaled(p, eta);
}

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

struct BasisJet {
    std::array<cplx, 5> u{};  // cos(l s) - cos((l-2) s)
    std::array<cplx, 5> w{};  // (l-2) sin(l s) - l sin((l-2) s)
};

BasisJet basis_jet(cplx l, double s) {
    const cplx n = l - 2.0;
    const cplx cl = std::cos(l * s), sl = std::sin(l * s);
    const cplx cn = std::cos(n * s), sn = std::sin(n * s);
    BasisJet j;
    // d^k cos(a s) cycles cos, -sin, -cos, sin with factor a^k
    const cplx l2 = l * l, n2 = n * n;
    j.u[0] = cl - cn;
    j.u[1] = -l * sl + n * sn;
    j.u[2] = -l2 * cl + n2 * cn;
    j.u[3] = l2 * l * sl - n2 * n * sn;
    j.u[4] = l2 * l2 * cl - n2 * n2 * cn;
    j.w[0] = n * sl - l * sn;
    j.w[1] = n * l * cl - l * n * cn;
    j.w[2] = -n * l2 * sl + l * n2 * sn;
    j.w[3] = -n * l2 * l * cl + l * n2 * n * cn;
    j.w[4] = n * l2 * l2 * sl - l * n2 * n2 * sn;
    return j;
}

}  // namespace

void CornerProblem::validate() const {
    if (!(alpha > 0.0 && alpha < pi))
        throw PreconditionViolation("alpha must lie in (0, pi)");
    if (!(kappa < 0.0)) throw PreconditionViolation("kappa must be negative");
}

std::string to_string(Membership m) {
    switch (m) {
        case Membership::Inside: return "Inside";
        case Membership::Outside: return "Outside";
        case Membership::Boundary: return "Boundary";
    }
    return "?";
}

double eval_h(const CornerProblem& p, double eta) {
    // cosh(2x) = 1 + 2 sinh^2(x) and cos(2a) - 1 = -2 sin^2(a); the constant
    // terms then cancel identically.
    const double s = std::sin(p.alpha);
    const double k = p.kappa;
    return -2.0 * s * s * (1.0 - k) * (1.0 - k) * eta * eta + 2.0 * k * sinh_sq(pi * eta) +
           2.0 * k * (k - 1.0) * sinh_sq(p.alpha * eta) -
           2.0 * (k - 1.0) * sinh_sq((pi - p.alpha) * eta);
}

double eval_h_scaled(const CornerProblem& p, double eta) {
    const double e = std::abs(eta);
    if (e <= 50.0) return 2.0 * eval_h(p, e) * std::exp(-2.0 * pi * e);
    const double s = std::sin(p.alpha);
    const double k = p.kappa;
    return -4.0 * s * s * (1.0 - k) * (1.0 - k) * e * e * std::exp(-2.0 * pi * e) +
           2.0 * k * scaled_two_sinh_sq(pi * e, e) +
           2.0 * k * (k - 1.0) * scaled_two_sinh_sq(p.alpha * e, e) -
           2.0 * (k - 1.0) * scaled_two_sinh_sq((pi - p.alpha) * e, e);
}

double eval_h_derivative(const CornerProblem& p, double eta) {
    const double s = std::sin(p.alpha);
    const double k = p.kappa;
    const double b = pi - p.alpha;
    return -4.0 * s * s * (1.0 - k) * (1.0 - k) * eta + 2.0 * k * pi * std::sinh(2.0 * pi * eta) +
           2.0 * k * (k - 1.0) * p.alpha * std::sinh(2.0 * p.alpha * eta) -
           2.0 * (k - 1.0) * b * std::sinh(2.0 * b * eta);
}

double eval_g(const CornerProblem& p) {
    const double a = p.alpha, k = p.kappa;
    const double d = alpha_minus_sin(a) * (a + std::sin(a));  // alpha^2 - sin^2(alpha)
    return 2.0 * d * k * k - 4.0 * (d - a * pi) * k + 2.0 * (d + pi * pi - 2.0 * a * pi);
}

double eval_g_tilde(double alpha, double kappa) {
    return even_derivative_at_zero(CornerProblem{alpha, kappa}, 2);
}

std::pair<double, double> interval_endpoints(double alpha) {
    const double s = std::sin(alpha);
    const double lm = -(pi - alpha + s) / alpha_minus_sin(alpha);
    const double lp = -(pi - alpha - s) / (alpha + s);
    return {lm, lp};
}

RegionReport classify_region(const CornerProblem& p, double eps_boundary) {
    if (!(eps_boundary > 0.0)) throw PreconditionViolation("eps_boundary must be positive");
    RegionReport r;
    r.g_value = eval_g(p);
    std::tie(r.ell_minus, r.ell_plus) = interval_endpoints(p.alpha);
    if (r.g_value > eps_boundary)
        r.membership = Membership::Inside;
    else if (r.g_value < -eps_boundary)
        r.membership = Membership::Outside;
    else
        r.membership = Membership::Boundary;
    return r;
}

std::optional<SingularExponentResult> find_eta0(const CornerProblem& p,
                                                const RootScanOptions& opts) {
    p.validate();
    double eta_max = opts.eta_max;
    int doublings = 0;
    while (h_for_sign(p, eta_max) >= 0.0) {
        if (++doublings > opts.max_doublings)
            throw NumericalFailure("find_eta0: tail sign of h not confirmed");
        eta_max *= 2.0;
    }

    int changes = 0;
    double lo = 0.0, hi = 0.0;
    double eta = opts.eta_min;
    int s_prev = sgn(h_for_sign(p, eta));
    while (eta < eta_max) {
        const double next = std::min(eta * opts.ratio, eta_max);
        const int s = sgn(h_for_sign(p, next));
        if (s != 0 && s_prev != 0 && s != s_prev) {
            if (changes == 0) {
                lo = eta;
                hi = next;
            }
            ++changes;
        }
        if (s != 0) s_prev = s;
        eta = next;
    }
    if (changes == 0) return std::nullopt;

    const double scan_lo = lo, scan_hi = hi;
    const int s_lo = sgn(h_for_sign(p, lo));
    while (hi - lo > 1e-14 * (1.0 + 0.5 * (lo + hi))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const int s = sgn(h_for_sign(p, mid));
        if (s == 0) {
            lo = hi = mid;
            break;
        }
        (s == s_lo ? lo : hi) = mid;
    }

    SingularExponentResult res;
    res.sign_changes_found = changes;
    const double cands[3] = {lo, 0.5 * (lo + hi), hi};
    double best = cands[1];
    double best_abs = std::numeric_limits<double>::infinity();
    for (double c : cands) {
        const double v = std::abs(h_for_sign(p, c));
        if (v < best_abs) {
            best_abs = v;
            best = c;
        }
    }
    res.eta0 = best;
    res.residual = std::abs(detail::h_mp(p.alpha, p.kappa, best));
    res.bracket = {lo, hi};

    double tol = opts.root_tol;
    res.slope = std::abs(eval_h_derivative(p, best));
    if (res.slope < 1e-10) {
        res.near_degenerate = true;
        tol = std::max(tol, 64.0 * std::numeric_limits<double>::epsilon() * sum_abs_terms(p, best));
    }

    if (res.residual > 1e-2 * tol) {
        // Root needs more digits than a double carries: widen to a bracket
        // verified in extended precision, then refine there.
        const double pad = 1e-12 * (1.0 + best);
        double a = std::max(scan_lo, lo - pad), b = std::min(scan_hi, hi + pad);
        auto mp_sign = [&](double x) { return sgn(detail::h_mp(p.alpha, p.kappa, x)); };
        if (mp_sign(a) * mp_sign(b) >= 0) {
            a = scan_lo;
            b = scan_hi;
        }
        const detail::MpRoot r = detail::refine_root_mp(p.alpha, p.kappa, a, b, tol);
        res.eta0 = r.eta0;
        res.residual = r.residual;
        res.extended_precision = true;
        res.bracket = {a, b};
        if (!r.converged)
            throw NumericalFailure("find_eta0: extended-precision refinement did not converge");
    }
    return res;
}

double even_derivative_at_zero(const CornerProblem& p, int k) {
    if (k < 0) throw PreconditionViolation("k must be non-negative");
    if (k == 0) return 0.0;
    if (k == 1) return 2.0 * eval_g(p);
    const double K = p.kappa;
    const int e = 2 * k;
    return K * std::pow(2.0 * pi, e) + K * (K - 1.0) * std::pow(2.0 * p.alpha, e) -
           (K - 1.0) * std::pow(2.0 * (pi - p.alpha), e);
}

Matrix4c transmission_matrix(const CornerProblem& p, cplx lambda) {
    for (double excluded : {0.0, 1.0, 2.0})
        if (std::abs(lambda - excluded) < 1e-14)
            throw PreconditionViolation("lambda must avoid {0, 1, 2}");
    const cplx l2 = lambda * lambda;
    const BasisJet left = basis_jet(lambda, p.alpha);
    const BasisJet right = basis_jet(lambda, p.alpha - pi);
    const double k = p.kappa;
    Matrix4c m;
    m(0, 0) = left.u[0];
    m(0, 1) = left.w[0];
    m(0, 2) = -right.u[0];
    m(0, 3) = -right.w[0];
    m(1, 0) = left.u[1];
    m(1, 1) = left.w[1];
    m(1, 2) = -right.u[1];
    m(1, 3) = -right.w[1];
    m(2, 0) = left.u[2] + l2 * left.u[0];
    m(2, 1) = left.w[2] + l2 * left.w[0];
    m(2, 2) = -k * (right.u[2] + l2 * right.u[0]);
    m(2, 3) = -k * (right.w[2] + l2 * right.w[0]);
    m(3, 0) = left.u[3] + l2 * left.u[1];
    m(3, 1) = left.w[3] + l2 * left.w[1];
    m(3, 2) = -k * (right.u[3] + l2 * right.u[1]);
    m(3, 3) = -k * (right.w[3] + l2 * right.w[1]);
    return m;
}

Matrix4c scaled_transmission_matrix(const CornerProblem& p, cplx lambda) {
    Matrix4c m = transmission_matrix(p, lambda);
    for (int i = 0; i < 4; ++i) {
        const double s = m.row(i).cwiseAbs().maxCoeff();
        if (s > 0.0) m.row(i) /= s;
    }
    return m;
}

cplx transmission_determinant(const CornerProblem& p, cplx lambda) {
    return scaled_transmission_matrix(p, lambda).partialPivLu().determinant();
}

double normalized_determinant(const CornerProblem& p, cplx lambda) {
    Matrix4c m = transmission_matrix(p, lambda);
    for (int i = 0; i < 4; ++i) {
        const double s = m.row(i).norm();
        if (s > 0.0) m.row(i) /= s;
    }
    return std::abs(m.partialPivLu().determinant());
}

AngularProfile angular_profile(const CornerProblem& p, cplx lambda, double singular_tol) {
    if (normalized_determinant(p, lambda) > singular_tol)
        throw NotSingular("angular_profile: transmission matrix is not singular at lambda");
    Matrix4c m = scaled_transmission_matrix(p, lambda);
    Eigen::Vector4d colscale;
    for (int j = 0; j < 4; ++j) {
        colscale(j) = m.col(j).cwiseAbs().maxCoeff();
        if (colscale(j) == 0.0) colscale(j) = 1.0;
        m.col(j) /= colscale(j);
    }

    Eigen::PartialPivLU<Matrix4c> lu(m);
    if (!std::isfinite(std::abs(lu.determinant())) || lu.matrixLU().diagonal().cwiseAbs().minCoeff() == 0.0) {
        Matrix4c shifted = m;
        shifted.diagonal().array() += cplx(1e-15, 0.0);
        lu.compute(shifted);
    }
    // inverse iteration on M^H M, seeded deterministically
    Eigen::Vector4cd x(1.0, 0.5, 0.25, 0.125);
    x.normalize();
    for (int it = 0; it < 3; ++it) {
        Eigen::Vector4cd y = lu.solve(lu.adjoint().solve(x));
        if (!y.allFinite()) break;
        x = y / y.norm();
    }

    AngularProfile ang;
    ang.lambda = lambda;
    ang.alpha = p.alpha;
    ang.kappa = p.kappa;
    int jmax = 0;
    for (int j = 0; j < 4; ++j) {
        ang.coeffs[j] = x(j) / colscale(j);
        if (std::abs(ang.coeffs[j]) > std::abs(ang.coeffs[jmax])) jmax = j;
    }
    const cplx piv = ang.coeffs[jmax];
    for (auto& c : ang.coeffs) c /= piv;
    ang.coeffs[jmax] = 1.0;
    return ang;
}

ProfileJet evaluate_profile(const AngularProfile& ang, double theta) {
    ProfileJet out;
    const bool left = theta <= ang.alpha;
    const BasisJet j = basis_jet(ang.lambda, left ? theta : theta - pi);
    const cplx a = left ? ang.coeffs[0] : ang.coeffs[2];
    const cplx b = left ? ang.coeffs[1] : ang.coeffs[3];
    for (int k = 0; k < 5; ++k) out.d[k] = a * j.u[k] + b * j.w[k];
    return out;
}

double interface_residual(const AngularProfile& ang) {
    const Matrix4c m = transmission_matrix(CornerProblem{ang.alpha, ang.kappa}, ang.lambda);
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
        cplx s = 0.0;
        double mag = 0.0;
        for (int j = 0; j < 4; ++j) {
            s += m(i, j) * ang.coeffs[j];
            mag += std::abs(m(i, j) * ang.coeffs[j]);
        }
        if (mag > 0.0) worst = std::max(worst, std::abs(s) / mag);
    }
    return worst;
}

double angular_biharmonic_residual(const AngularProfile& ang) {
    const cplx l2 = ang.lambda * ang.lambda;
    const cplx n2 = (ang.lambda - 2.0) * (ang.lambda - 2.0);
    const cplx c2 = l2 + n2, c0 = l2 * n2;
    double num = 0.0, den = 0.0;
    for (auto [a, b] : {std::pair{0.0, ang.alpha}, std::pair{ang.alpha, pi}}) {
        const GaussRule g = gauss_legendre(64, a, b);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const ProfileJet j = evaluate_profile(ang, g.nodes[i]);
            const cplx res = j.d[4] + c2 * j.d[2] + c0 * j.d[0];
            const double mag = std::abs(j.d[4]) + std::abs(c2 * j.d[2]) + std::abs(c0 * j.d[0]);
            num += g.weights[i] * std::norm(res);
            den += g.weights[i] * mag * mag;
        }
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

namespace {

// A = int |phi|^2, B = int phi conj(phi''), C = int |phi''|^2 over (0, pi)
std::array<cplx, 3> profile_moments(const AngularProfile& ang) {
    std::array<cplx, 3> mom{};
    for (auto [a, b] : {std::pair{0.0, ang.alpha}, std::pair{ang.alpha, pi}}) {
        const GaussRule g = gauss_legendre(64, a, b);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const ProfileJet j = evaluate_profile(ang, g.nodes[i]);
            mom[0] += g.weights[i] * std::norm(j.d[0]);
            mom[1] += g.weights[i] * j.d[0] * std::conj(j.d[2]);
            mom[2] += g.weights[i] * std::norm(j.d[2]);
        }
    }
    return mom;
}

// ||f^2 phi + phi''||^2 with f = 1 + 1/m + i eta0
double varsigma_from_moments(const std::array<cplx, 3>& mom, double eta0, int m) {
    const cplx f = cplx(1.0 + 1.0 / m, eta0);
    const cplx f2 = f * f;
    return std::norm(f2) * mom[0].real() + 2.0 * (f2 * mom[1]).real() + mom[2].real();
}

}  // namespace

double varsigma_norm_sq(const AngularProfile& ang, double eta0, int m) {
    if (m < 1) throw PreconditionViolation("m must be positive");
    return varsigma_from_moments(profile_moments(ang), eta0, m);
}

double singular_sequence_lower_bound(const AngularProfile& ang, double eta0, int m,
                                     double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionViolation("delta must lie in (0, 1]");
    return varsigma_norm_sq(ang, eta0, m) * (0.5 * m) * std::pow(delta, 2.0 / m);
}

std::vector<double> singular_sequence_lower_bounds(const AngularProfile& ang, double eta0,
                                                   int m_max, double delta) {
    if (m_max < 1) throw PreconditionViolation("m_max must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionViolation("delta must lie in (0, 1]");
    const auto mom = profile_moments(ang);
    std::vector<double> out(m_max);
    for (int m = 1; m <= m_max; ++m)
        out[m - 1] = varsigma_from_moments(mom, eta0, m) * (0.5 * m) * std::pow(delta, 2.0 / m);
    return out;
}

std::vector<RegionCell> region_map(const RegionMapSpec& spec) {
    if (spec.n_alpha < 2 || spec.n_kappa < 2)
        throw PreconditionViolation("region_map: grid sizes must be at least 2");
    if (!(spec.alpha_min >= 0.0 && spec.alpha_max <= pi && spec.alpha_min < spec.alpha_max))
        throw PreconditionViolation("region_map: alpha range must lie in [0, pi]");
    if (!spec.alpha_open && !(spec.alpha_min > 0.0 && spec.alpha_max < pi))
        throw PreconditionViolation("region_map: closed alpha range must lie in (0, pi)");
    if (!(spec.kappa_min <= spec.kappa_max && spec.kappa_max < 0.0))
        throw PreconditionViolation("region_map: kappa range must be negative");

    const int na = spec.n_alpha, nk = spec.n_kappa;
    std::vector<RegionCell> cells(static_cast<std::size_t>(na) * nk);
    for (int i = 0; i < na; ++i) {
        const double t = spec.alpha_open ? (i + 1.0) / (na + 1.0) : double(i) / (na - 1.0);
        const double a = spec.alpha_min + (spec.alpha_max - spec.alpha_min) * t;
        for (int j = 0; j < nk; ++j) {
            RegionCell& c = cells[static_cast<std::size_t>(i) * nk + j];
            c.alpha = a;
            c.kappa = spec.kappa_min + (spec.kappa_max - spec.kappa_min) * j / (nk - 1.0);
        }
    }

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t idx = begin; idx < cells.size(); idx += stride) {
            RegionCell& c = cells[idx];
            const CornerProblem p{c.alpha, c.kappa};
            c.report = classify_region(p, spec.eps_boundary);
            try {
                c.root = find_eta0(p);
            } catch (const NumericalFailure& e) {
                c.failed = true;
                c.error = e.what();
            }
        }
    };
    unsigned nt = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    nt = std::min<unsigned>(nt, 64);
    if (nt <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(work, t, nt);
        for (auto& th : pool) th.join();
    }
    return cells;
}

void write_region_csv(std::ostream& os, const std::vector<RegionCell>& cells) {
    os << "alpha,kappa,g,ell_minus,ell_plus,membership,eta0,residual\n";
    for (const RegionCell& c : cells) {
        os << fmt17(c.alpha) << ',' << fmt17(c.kappa) << ',' << fmt17(c.report.g_value) << ','
           << fmt17(c.report.ell_minus) << ',' << fmt17(c.report.ell_plus) << ','
           << to_string(c.report.membership) << ',';
        if (c.failed)
            os << ",failed";
        else if (c.root)
            os << fmt17(c.root->eta0) << ',' << fmt17(c.root->residual);
        else
            os << ',';
        os << '\n';
    }
}

}  // namespace sigmabilap
