#pragma once

#include <functional>
#include <vector>

namespace dforms {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the standard normal weight: Σ w_i f(x_i) ≈ ∫ f(x) φ(x) dx,
/// exact for polynomials of degree ≤ 2·order - 1. Weights sum to 1.
Rule1D gauss_hermite(int order);

/// Gauss-Legendre rule on [a, b].
Rule1D gauss_legendre(int order, double a, double b);

/// Composite Simpson value of ∫_a^b fn(t)·density(t) dt with `resolution`
/// subintervals (rounded up to even). Serves as the brute-force reference for
/// closed-form constants; it shares no code with the Gauss rules.
double oracle_integrate_1d(const std::function<double(double)>& fn,
                           const std::function<double(double)>& density, double a, double b,
                           int resolution);

}  // namespace dforms
