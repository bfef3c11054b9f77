#include "mp_dispersion.hpp"

#include <cmath>

#include <mpfr.h>

namespace sigmabilap::detail {

namespace {

class Mp {
public:
    explicit Mp(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    Mp(mpfr_prec_t prec, double x) {
        mpfr_init2(v_, prec);
        mpfr_set_d(v_, x, MPFR_RNDN);
    }
    Mp(const Mp&) = delete;
    Mp& operator=(const Mp&) = delete;
    ~Mp() { mpfr_clear(v_); }
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

struct Dispersion {
    mpfr_prec_t prec;
    Mp alpha, kappa, pi, beta;         // beta = pi - alpha
    Mp c_poly, c1, c2, c3;             // coefficients of eta^2 and the sinh^2 terms

    Dispersion(double a, double k, mpfr_prec_t bits)
        : prec(bits), alpha(bits, a), kappa(bits, k), pi(bits), beta(bits),
          c_poly(bits), c1(bits), c2(bits), c3(bits) {
        mpfr_const_pi(pi.get(), MPFR_RNDN);
        mpfr_sub(beta.get(), pi.get(), alpha.get(), MPFR_RNDN);
        Mp t(bits), km1(bits);
        mpfr_sub_ui(km1.get(), kappa.get(), 1, MPFR_RNDN);
        // c_poly = -2 sin^2(alpha) (1 - kappa)^2
        mpfr_sin(t.get(), alpha.get(), MPFR_RNDN);
        mpfr_sqr(t.get(), t.get(), MPFR_RNDN);
        mpfr_sqr(c_poly.get(), km1.get(), MPFR_RNDN);
        mpfr_mul(c_poly.get(), c_poly.get(), t.get(), MPFR_RNDN);
        mpfr_mul_si(c_poly.get(), c_poly.get(), -2, MPFR_RNDN);
        mpfr_mul_ui(c1.get(), kappa.get(), 2, MPFR_RNDN);
        mpfr_mul(c2.get(), c1.get(), km1.get(), MPFR_RNDN);
        mpfr_mul_si(c3.get(), km1.get(), -2, MPFR_RNDN);
    }

    // f = h(x), df = h'(x)
    void eval(mpfr_srcptr x, mpfr_ptr f, mpfr_ptr df) {
        Mp arg(prec), s(prec), acc(prec), dacc(prec), tmp(prec);
        mpfr_sqr(acc.get(), x, MPFR_RNDN);
        mpfr_mul(acc.get(), acc.get(), c_poly.get(), MPFR_RNDN);
        mpfr_mul(dacc.get(), x, c_poly.get(), MPFR_RNDN);
        mpfr_mul_ui(dacc.get(), dacc.get(), 2, MPFR_RNDN);
        const Mp* rates[3] = {&pi, &alpha, &beta};
        const Mp* coefs[3] = {&c1, &c2, &c3};
        for (int i = 0; i < 3; ++i) {
            // c sinh^2(r x), derivative c r sinh(2 r x)
            mpfr_mul(arg.get(), x, rates[i]->get(), MPFR_RNDN);
            mpfr_sinh(s.get(), arg.get(), MPFR_RNDN);
            mpfr_sqr(tmp.get(), s.get(), MPFR_RNDN);
            mpfr_mul(tmp.get(), tmp.get(), coefs[i]->get(), MPFR_RNDN);
            mpfr_add(acc.get(), acc.get(), tmp.get(), MPFR_RNDN);
            mpfr_mul_ui(arg.get(), arg.get(), 2, MPFR_RNDN);
            mpfr_sinh(s.get(), arg.get(), MPFR_RNDN);
            mpfr_mul(tmp.get(), s.get(), rates[i]->get(), MPFR_RNDN);
            mpfr_mul(tmp.get(), tmp.get(), coefs[i]->get(), MPFR_RNDN);
            mpfr_add(dacc.get(), dacc.get(), tmp.get(), MPFR_RNDN);
        }
        mpfr_set(f, acc.get(), MPFR_RNDN);
        if (df) mpfr_set(df, dacc.get(), MPFR_RNDN);
    }
};

mpfr_prec_t precision_for(double eta_hi, double kappa) {
    const double k = std::abs(kappa);
    const double extra = 2.0 * std::log2(2.0 + k + 1.0 / k);
    return static_cast<mpfr_prec_t>(192.0 + 9.1 * std::abs(eta_hi) + extra);
}

}  // namespace

MpRoot refine_root_mp(double alpha, double kappa, double lo, double hi, double tol) {
    const mpfr_prec_t prec = precision_for(hi, kappa);
    Dispersion h(alpha, kappa, prec);
    Mp a(prec, lo), b(prec, hi), x(prec), f(prec), df(prec), fa(prec), step(prec), width(prec);
    h.eval(a.get(), fa.get(), nullptr);
    const int sign_a = mpfr_sgn(fa.get());

    mpfr_add(x.get(), a.get(), b.get(), MPFR_RNDN);
    mpfr_div_ui(x.get(), x.get(), 2, MPFR_RNDN);

    MpRoot out;
    const double target = tol * 1e-3;
    for (int it = 0; it < 400; ++it) {
        h.eval(x.get(), f.get(), df.get());
        if (std::abs(mpfr_get_d(f.get(), MPFR_RNDN)) <= target) {
            out.converged = true;
            break;
        }
        if (mpfr_sgn(f.get()) == sign_a)
            mpfr_set(a.get(), x.get(), MPFR_RNDN);
        else
            mpfr_set(b.get(), x.get(), MPFR_RNDN);
        mpfr_sub(width.get(), b.get(), a.get(), MPFR_RNDN);
        if (mpfr_zero_p(width.get()) ||
            mpfr_get_exp(width.get()) < mpfr_get_exp(x.get()) - static_cast<mpfr_exp_t>(prec) + 4)
            break;
        mpfr_div(step.get(), f.get(), df.get(), MPFR_RNDN);
        mpfr_sub(step.get(), x.get(), step.get(), MPFR_RNDN);
        if (!mpfr_number_p(step.get()) || mpfr_lessequal_p(step.get(), a.get()) ||
            mpfr_greaterequal_p(step.get(), b.get())) {
            mpfr_add(step.get(), a.get(), b.get(), MPFR_RNDN);
            mpfr_div_ui(step.get(), step.get(), 2, MPFR_RNDN);
        }
        mpfr_set(x.get(), step.get(), MPFR_RNDN);
    }
    h.eval(x.get(), f.get(), nullptr);
    out.residual = std::abs(mpfr_get_d(f.get(), MPFR_RNDN));
    out.eta0 = mpfr_get_d(x.get(), MPFR_RNDN);
    out.converged = out.converged || out.residual <= tol;
    return out;
}

double h_mp(double alpha, double kappa, double eta) {
    const mpfr_prec_t prec = precision_for(eta, kappa);
    Dispersion h(alpha, kappa, prec);
    Mp x(prec, eta), f(prec);
    h.eval(x.get(), f.get(), nullptr);
    return mpfr_get_d(f.get(), MPFR_RNDN);
}

}  // namespace sigmabilap::detail
