#pragma once

#include <functional>
#include <vector>

namespace levitrap::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule of order n mapped onto [lo, hi].
Rule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

// Jacobi polynomial P_n^{(alpha,beta)}(x) by the three-term recurrence.
double jacobi(int n, double alpha, double beta, double x);

// Adaptive Gauss-Kronrod integral of f over [lo, hi]; throws NonConvergence
// when the error estimate stays above tol * |result|.
double adaptive(const std::function<double(double)>& f, double lo, double hi,
                double rel_tol = 1e-10);

}  // namespace levitrap::quad
