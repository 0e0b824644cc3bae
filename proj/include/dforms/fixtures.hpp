#pragma once

#include <cstdint>
#include <random>

#include "dforms/alt_tensor.hpp"
#include "dforms/form_field.hpp"

namespace dforms::fixtures {

/// Seeded generator with platform-independent draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

/// Random index of the given length with entries in [1, dim].
MultiIndex random_index(Rng& rng, int length, int dim);

/// Tensor with up to `nnz` nonzero coefficients drawn from [-1, 1].
AltTensor random_tensor(Rng& rng, int degree, int dim, int nnz);

/// Polynomial in x_1..x_dim of total degree ≤ max_degree with up to `terms` monomials.
Expr random_polynomial(Rng& rng, int dim, int max_degree, int terms);

/// Form whose coefficients are random polynomials on up to `max_coeffs` indices.
FormField random_form(Rng& rng, int degree, int dim, int poly_degree, int max_coeffs);

}  // namespace dforms::fixtures
