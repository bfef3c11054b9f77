#pragma once

namespace sigmabilap::detail {

struct MpRoot {
    double eta0 = 0.0;      // extended root rounded to double
    double residual = 0.0;  // |h| at the extended root
    bool converged = false;
};

// Safeguarded Newton on h in MPFR arithmetic inside [lo, hi], where h
// changes sign. Precision grows with hi so that cosh(2 pi eta) cancellation
// leaves enough digits for an absolute residual below tol.
MpRoot refine_root_mp(double alpha, double kappa, double lo, double hi, double tol);

// h(eta) with eta taken exactly as the given double.
double h_mp(double alpha, double kappa, double eta);

}  // namespace sigmabilap::detail
