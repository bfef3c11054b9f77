#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sigmabilap {

struct ConeSpectrum {
    int d = 3;
    std::vector<double> mu;  // Laplace-Beltrami eigenvalues, ascending
};

struct WeightedIndex {
    double beta = 0.0;
    int l = 1;
    int d = 3;
};

enum class FredholmClass { Isomorphism, InjectiveNotOnto, OntoNotInjective, NotFredholm };

std::string to_string(FredholmClass c);

// (Lambda^-, Lambda^+) = 1 - d/2 -+ sqrt((1 - d/2)^2 + mu)
std::pair<double, double> lambda_pm(int d, double mu);

// Exponent pairs for every eigenvalue of the spectrum.
std::vector<std::pair<double, double>> cone_exponents(const ConeSpectrum& s);

// P_nu(x) from 2F1(-nu, nu + 1; 1; (1 - x)/2).
double legendre_p(double nu, double x);

// P_nu(cos theta) via the Mehler-Dirichlet integral, Gauss-Legendre with n nodes.
double legendre_p_mehler(double nu, double theta, int n = 200);

// First Dirichlet eigenvalue of the spherical cap of half-aperture alpha in S^2.
double cap_mu1(double alpha);

// Half-aperture with mu1 = 3/4.
double critical_aperture();

FredholmClass fredholm_classify(const WeightedIndex& w, double lambda1_plus);

bool high_dim_iso_check(int d, double lambda1_plus);

}  // namespace sigmabilap
