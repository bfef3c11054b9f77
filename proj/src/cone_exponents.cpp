#include "sigmabilap/cone_exponents.hpp"

#include <cmath>
#include <numbers>

#include "sigmabilap/errors.hpp"
#include "sigmabilap/quadrature.hpp"

namespace sigmabilap {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kTieTol = 1e-12;

}  // namespace

std::string to_string(FredholmClass c) {
    switch (c) {
        case FredholmClass::Isomorphism: return "Isomorphism";
        case FredholmClass::InjectiveNotOnto: return "InjectiveNotOnto";
        case FredholmClass::OntoNotInjective: return "OntoNotInjective";
        case FredholmClass::NotFredholm: return "NotFredholm";
    }
    return "?";
}

std::pair<double, double> lambda_pm(int d, double mu) {
    if (d < 2) throw PreconditionViolation("dimension must be at least 2");
    if (!(mu > 0.0)) throw PreconditionViolation("mu must be positive");
    const double c = 1.0 - 0.5 * d;
    const double root = std::sqrt(c * c + mu);
    // c <= 0 for d >= 2, so c - root has no cancellation; Lambda+ from the product -mu
    const double minus = c - root;
    return {minus, -mu / minus};
}

std::vector<std::pair<double, double>> cone_exponents(const ConeSpectrum& s) {
    std::vector<std::pair<double, double>> out;
    for (double m : s.mu) out.push_back(lambda_pm(s.d, m));
    return out;
}

double legendre_p(double nu, double x) {
    if (!(nu >= 0.0)) throw PreconditionViolation("nu must be non-negative");
    if (!(x > -1.0 && x <= 1.0)) throw PreconditionViolation("x must lie in (-1, 1]");
    // extended accumulation: the terms cancel heavily as x -> -1
    using ld = long double;
    const ld z = 0.5L * (1.0L - x);
    ld term = 1.0L, sum = 1.0L;
    for (int k = 0; k < 100000; ++k) {
        term *= (k - ld(nu)) * (k + ld(nu) + 1.0L) / ((k + 1.0L) * (k + 1.0L)) * z;
        sum += term;
        if (term == 0.0L) return double(sum);
        if (k + 1 > nu && std::abs(term) * z / (1.0L - z) <= 1e-17L * std::max(std::abs(sum), 1e-3L))
            return double(sum);
    }
    throw NoConvergence("legendre_p: term cap reached");
}

double legendre_p_mehler(double nu, double theta, int n) {
    if (!(theta >= 0.0 && theta < pi)) throw PreconditionViolation("theta must lie in [0, pi)");
    const GaussRule g = gauss_legendre(n, 0.0, 0.5 * pi);
    const double s = std::sin(0.5 * theta);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * std::asin(s * std::sin(g.nodes[i]));
        total += g.weights[i] * std::cos((nu + 0.5) * phi) / std::cos(0.5 * phi);
    }
    return 2.0 / pi * total;
}

double cap_mu1(double alpha) {
    if (!(alpha > 0.0 && alpha <= 0.9 * pi))
        throw PreconditionViolation("cap_mu1 needs 0 < alpha <= 0.9 pi");
    const double x = std::cos(alpha);
    auto f = [&](double nu) { return legendre_p(nu, x); };
    double a = 1e-3, fa = f(a);
    for (int k = 1;; ++k) {
        const double b = 1e-3 + 0.05 * k;
        if (b > 50.0) break;
        const double fb = f(b);
        if ((fa < 0.0) != (fb < 0.0) || fb == 0.0) {
            double lo = a, hi = b;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                const double fm = f(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((fm < 0.0) == (fa < 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            const double nu = 0.5 * (lo + hi);
            return nu * (nu + 1.0);
        }
        a = b;
        fa = fb;
    }
    throw BracketFailure("cap_mu1: no sign change of P_nu(cos alpha) for nu in (0, 50]");
}

double critical_aperture() {
    auto f = [](double a) { return legendre_p(0.5, std::cos(a)); };
    double lo = 0.5 * pi, hi = 0.9 * pi;
    double flo = f(lo);
    if ((flo < 0.0) == (f(hi) < 0.0))
        throw BracketFailure("critical_aperture: P_1/2(cos alpha) has no sign change");
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

FredholmClass fredholm_classify(const WeightedIndex& w, double lambda1_plus) {
    if (!(lambda1_plus > 0.0)) throw PreconditionViolation("Lambda1+ must be positive");
    if (w.l < 1) throw PreconditionViolation("l must be at least 1");
    if (w.d < 2) throw PreconditionViolation("dimension must be at least 2");
    const double x = w.beta - w.l + 0.5 * w.d;
    const double lo = 1.0 - lambda1_plus;
    const double hi = w.d - 1.0 + lambda1_plus;
    if (std::abs(x - lo) <= kTieTol || std::abs(x - hi) <= kTieTol) return FredholmClass::NotFredholm;
    if (x < lo) return FredholmClass::InjectiveNotOnto;
    if (x > hi) return FredholmClass::OntoNotInjective;
    return FredholmClass::Isomorphism;
}

bool high_dim_iso_check(int d, double lambda1_plus) {
    if (d < 2) throw PreconditionViolation("dimension must be at least 2");
    if (!(lambda1_plus > 0.0)) throw PreconditionViolation("Lambda1+ must be positive");
    // same tie tolerance as fredholm_classify with beta = 0, l = 1
    return 0.5 * d - 1.0 - (1.0 - lambda1_plus) > kTieTol;
}

}  // namespace sigmabilap
