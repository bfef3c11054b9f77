#pragma once

#include <vector>

namespace sigmabilap {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(int n);

// Same rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

}  // namespace sigmabilap
