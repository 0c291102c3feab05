#include "levitrap/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"

namespace levitrap {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::SingularPoint: return "singular point";
    case ErrorCode::SolverSingular: return "singular solver";
    case ErrorCode::NonConvergence: return "no convergence";
    case ErrorCode::NoTrap: return "no trap";
    case ErrorCode::UnstableTrap: return "unstable trap";
    case ErrorCode::SingularMatrix: return "singular matrix";
    case ErrorCode::OutOfRange: return "out of range";
    case ErrorCode::NoCrossing: return "no crossing";
    case ErrorCode::TrapLost: return "trap lost";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

namespace quad {

Rule gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre order must be positive");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

double jacobi(int n, double alpha, double beta, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
  const double ab = alpha + beta;
  for (int k = 2; k <= n; ++k) {
    const double c = 2.0 * k + ab;
    const double a1 = 2.0 * k * (k + ab) * (c - 2.0);
    const double a2 = (c - 1.0) * (alpha * alpha - beta * beta);
    const double a3 = (c - 2.0) * (c - 1.0) * c;
    const double a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * c;
    const double p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double adaptive(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  // Boost's error estimate degrades on very short intervals, so every
  // integral is mapped onto [-1, 1] first.
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  auto g = [&](double u) { return f(mid + half * u); };
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      half * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, -1.0, 1.0, 20, rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > std::max(rel_tol * 100.0, 1e-6) * std::max(l1, 1e-300)) {
    throw Error(ErrorCode::NonConvergence, "adaptive quadrature error estimate too large");
  }
  return value;
}

}  // namespace quad
}  // namespace levitrap
