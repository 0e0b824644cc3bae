#include "dforms/fixtures.hpp"

#include <algorithm>
#include <stdexcept>

namespace dforms::fixtures {

MultiIndex random_index(Rng& rng, int length, int dim) {
  if (length > dim) throw std::invalid_argument("random_index: length exceeds dimension");
  std::vector<int> pool(static_cast<std::size_t>(dim));
  for (int p = 0; p < dim; ++p) pool[static_cast<std::size_t>(p)] = p + 1;
  // partial Fisher-Yates
  for (int i = 0; i < length; ++i) {
    const int j = rng.integer(i, dim - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<int> v(pool.begin(), pool.begin() + length);
  std::sort(v.begin(), v.end());
  return MultiIndex(v);
}

AltTensor random_tensor(Rng& rng, int degree, int dim, int nnz) {
  AltTensor t(degree);
  for (int i = 0; i < nnz; ++i) t.add(random_index(rng, degree, dim), rng.uniform(-1.0, 1.0));
  return t;
}

Expr random_polynomial(Rng& rng, int dim, int max_degree, int terms) {
  std::vector<Expr> monomials;
  for (int t = 0; t < terms; ++t) {
    std::vector<Expr> factors{Expr::constant(rng.uniform(-1.0, 1.0))};
    const int deg = rng.integer(0, max_degree);
    for (int k = 0; k < deg; ++k) factors.push_back(Expr::coord(rng.integer(1, dim)));
    monomials.push_back(Expr::product(std::move(factors)));
  }
  return Expr::sum(std::move(monomials));
}

FormField random_form(Rng& rng, int degree, int dim, int poly_degree, int max_coeffs) {
  FormField f(degree, dim);
  if (degree > dim) return f;
  const int count = rng.integer(1, max_coeffs);
  for (int i = 0; i < count; ++i)
    f.add(random_index(rng, degree, dim), random_polynomial(rng, dim, poly_degree, rng.integer(1, 3)));
  return f;
}

}  // namespace dforms::fixtures
