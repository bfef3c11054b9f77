#include "sigmabilap/kernel1d.hpp"

#include <algorithm>
#include <cmath>

#include "sigmabilap/errors.hpp"

namespace sigmabilap {

namespace {

struct SegmentLayout {
    double x_left, x_right, anchor, sigma;
    std::vector<int> powers;  // monomials (x - anchor)^p carried as unknowns
};

std::vector<SegmentLayout> layout(const KernelDomain& dom, double kappa) {
    if (const auto* two = std::get_if<TwoSegmentDomain>(&dom)) {
        if (!(two->a < 0.0 && two->b > 0.0))
            throw PreconditionViolation("two-segment domain needs a < 0 < b");
        return {{two->a, 0.0, two->a, 1.0, {3, 2}}, {0.0, two->b, two->b, kappa, {3, 2}}};
    }
    const double d = std::get<ThreeSegmentDomain>(dom).delta;
    if (!(d > 0.0 && d < 1.0)) throw PreconditionViolation("delta must lie in (0, 1)");
    return {{-1.0, -d, -1.0, 1.0, {3, 2}},
            {-d, d, 0.0, kappa, {0, 1, 2, 3}},
            {d, 1.0, 1.0, 1.0, {3, 2}}};
}

// d^k/dx^k (x - anchor)^p
double monomial_derivative(int p, int k, double x, double anchor) {
    if (k > p) return 0.0;
    double coef = 1.0;
    for (int i = 0; i < k; ++i) coef *= p - i;
    return coef * std::pow(x - anchor, p - k);
}

double poly_derivative(const std::array<double, 4>& c, double x, double anchor, int k) {
    double s = 0.0;
    for (int p = 0; p < 4; ++p) s += c[p] * monomial_derivative(p, k, x, anchor);
    return s;
}

double interface_weight(int k, double sigma) { return k >= 2 ? sigma : 1.0; }

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

double PiecewiseCubic::eval(double x, int deriv) const {
    if (pieces.empty()) return 0.0;
    const CubicPiece* piece = &pieces.back();
    for (const CubicPiece& p : pieces)
        if (x <= p.x_right) {
            piece = &p;
            break;
        }
    return poly_derivative(piece->c, x, piece->anchor, deriv);
}

std::pair<double, double> quadratic_coefficients(double t) {
    if (!(t < 0.0)) throw PreconditionViolation("t must be negative");
    const double t2 = t * t;
    return {-4.0 * t + 6.0 * t2 - 4.0 * t2 * t, t2 * t2};
}

ContrastRoots critical_contrasts_two_segment(double t) {
    const auto [p, q] = quadratic_coefficients(t);
    if (!(p * p - 4.0 * q > 0.0))
        throw NumericalFailure("critical_contrasts_two_segment: non-positive discriminant");
    // (2 - 3t + 2t^2 +- 2|t - 1| sqrt(t^2 - t + 1)) t; the larger-magnitude
    // root directly, the other through the product t^4.
    const double big = (2.0 - 3.0 * t + 2.0 * t * t + 2.0 * std::abs(t - 1.0) *
                                                         std::sqrt(t * t - t + 1.0)) * t;
    ContrastRoots r;
    r.roots = {big, q / big};
    std::sort(r.roots.begin(), r.roots.end());
    r.source = RootSource::ClosedForm;
    return r;
}

ContrastRoots critical_contrasts_three_segment(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionViolation("delta must lie in (0, 1)");
    const double d3 = delta * delta * delta;
    ContrastRoots r;
    r.roots = {d3 / (d3 - 1.0), delta / (delta - 1.0)};
    std::sort(r.roots.begin(), r.roots.end());
    r.source = RootSource::ClosedForm;
    return r;
}

Eigen::MatrixXd build_kernel_system(const KernelDomain& dom, double kappa) {
    if (kappa == 0.0) throw PreconditionViolation("kappa must be nonzero");
    const auto segs = layout(dom, kappa);
    std::vector<int> offset(segs.size() + 1, 0);
    for (std::size_t s = 0; s < segs.size(); ++s)
        offset[s + 1] = offset[s] + static_cast<int>(segs[s].powers.size());
    const int n = offset.back();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    int row = 0;
    for (std::size_t s = 0; s + 1 < segs.size(); ++s) {
        const SegmentLayout& L = segs[s];
        const SegmentLayout& R = segs[s + 1];
        const double x = L.x_right;
        for (int k = 0; k < 4; ++k, ++row) {
            for (std::size_t j = 0; j < L.powers.size(); ++j)
                m(row, offset[s] + j) =
                    interface_weight(k, L.sigma) * monomial_derivative(L.powers[j], k, x, L.anchor);
            for (std::size_t j = 0; j < R.powers.size(); ++j)
                m(row, offset[s + 1] + j) = -interface_weight(k, R.sigma) *
                                            monomial_derivative(R.powers[j], k, x, R.anchor);
        }
    }
    return m;
}

double kernel_determinant(const KernelDomain& dom, double kappa) {
    return build_kernel_system(dom, kappa).partialPivLu().determinant();
}

double normalized_kernel_determinant(const KernelDomain& dom, double kappa) {
    Eigen::MatrixXd m = build_kernel_system(dom, kappa);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double s = m.row(i).norm();
        if (s > 0.0) m.row(i) /= s;
    }
    return std::abs(m.partialPivLu().determinant());
}

ContrastRoots scan_critical_contrasts(const KernelDomain& dom, const ScanOptions& opts) {
    if (!(opts.kappa_min < opts.kappa_max && opts.kappa_max < 0.0) || opts.points < 2)
        throw PreconditionViolation("scan range must be negative and non-empty");
    const double m_lo = -opts.kappa_max, m_hi = -opts.kappa_min;
    const double ratio = std::pow(m_hi / m_lo, 1.0 / (opts.points - 1));
    auto f = [&](double k) { return kernel_determinant(dom, k); };

    ContrastRoots out;
    out.source = RootSource::DeterminantScan;
    double mag = m_lo;
    double k_prev = -mag, f_prev = f(k_prev);
    for (int i = 1; i < opts.points; ++i) {
        mag = (i == opts.points - 1) ? m_hi : m_lo * std::pow(ratio, i);
        const double k = -mag, fk = f(k);
        if (fk == 0.0) {
            out.roots.push_back(k);
        } else if (f_prev != 0.0 && sign_of(fk) != sign_of(f_prev)) {
            double a = k_prev, b = k;  // a > b
            const int sa = sign_of(f_prev);
            for (int it = 0; it < 200 && std::abs(a - b) > 1e-16 * std::abs(a); ++it) {
                const double mid = 0.5 * (a + b);
                if (mid == a || mid == b) break;
                const int sm = sign_of(f(mid));
                if (sm == 0) {
                    a = b = mid;
                    break;
                }
                (sm == sa ? a : b) = mid;
            }
            out.roots.push_back(0.5 * (a + b));
        }
        k_prev = k;
        f_prev = fk;
    }
    std::sort(out.roots.begin(), out.roots.end());
    return out;
}

std::optional<PiecewiseCubic> kernel_basis(const KernelDomain& dom, double kappa, double tol) {
    if (normalized_kernel_determinant(dom, kappa) > tol) return std::nullopt;
    const Eigen::MatrixXd m = build_kernel_system(dom, kappa);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    Eigen::VectorXd x = svd.matrixV().col(m.cols() - 1);
    Eigen::Index jmax;
    x.cwiseAbs().maxCoeff(&jmax);
    x /= x(jmax);
    x(jmax) = 1.0;

    PiecewiseCubic v;
    int col = 0;
    for (const SegmentLayout& s : layout(dom, kappa)) {
        CubicPiece piece{s.x_left, s.x_right, s.anchor, s.sigma, {}};
        for (int p : s.powers) piece.c[p] = x(col++);
        v.pieces.push_back(piece);
    }
    return v;
}

Eigen::VectorXd kernel_conditions(const PiecewiseCubic& v) {
    const std::size_t n = v.pieces.size();
    if (n == 0) return {};
    Eigen::VectorXd r(4 + 4 * (n - 1));
    const CubicPiece& first = v.pieces.front();
    const CubicPiece& last = v.pieces.back();
    r(0) = poly_derivative(first.c, first.x_left, first.anchor, 0);
    r(1) = poly_derivative(first.c, first.x_left, first.anchor, 1);
    r(2) = poly_derivative(last.c, last.x_right, last.anchor, 0);
    r(3) = poly_derivative(last.c, last.x_right, last.anchor, 1);
    int row = 4;
    for (std::size_t s = 0; s + 1 < n; ++s) {
        const CubicPiece& L = v.pieces[s];
        const CubicPiece& R = v.pieces[s + 1];
        for (int k = 0; k < 4; ++k)
            r(row++) = interface_weight(k, L.sigma) * poly_derivative(L.c, L.x_right, L.anchor, k) -
                       interface_weight(k, R.sigma) * poly_derivative(R.c, L.x_right, R.anchor, k);
    }
    return r;
}

std::vector<KernelSample> sample_kernel(const PiecewiseCubic& v, int n) {
    std::vector<KernelSample> out;
    if (v.pieces.empty() || n < 2) return out;
    const double a = v.pieces.front().x_left, b = v.pieces.back().x_right;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double x = (i == n - 1) ? b : a + (b - a) * i / (n - 1.0);
        out.push_back({x, v.eval(x, 0), v.eval(x, 1), v.eval(x, 2)});
    }
    return out;
}

}  // namespace sigmabilap
