#include "dforms/measure.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dforms {

GaussianProduct::GaussianProduct(std::vector<double> variances) : variances_(std::move(variances)) {
  if (variances_.empty()) throw std::invalid_argument("GaussianProduct needs dim >= 1");
  for (double v : variances_) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("GaussianProduct variances must be positive and finite");
    sigmas_.push_back(std::sqrt(v));
  }
}

GaussianProduct GaussianProduct::standard(int dim) {
  return GaussianProduct(std::vector<double>(static_cast<std::size_t>(dim), 1.0));
}

double GaussianProduct::log_density(std::span<const double> x) const {
  if (x.size() != variances_.size())
    throw std::invalid_argument("GaussianProduct: point dimension mismatch");
  double s = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p)
    s -= 0.5 * (x[p] * x[p] / variances_[p] + std::log(2.0 * std::numbers::pi * variances_[p]));
  return s;
}

double GaussianProduct::density(std::span<const double> x) const {
  return std::exp(log_density(x));
}

AltTensor GaussianProduct::log_derivative(std::span<const double> x) const {
  if (x.size() != variances_.size())
    throw std::invalid_argument("GaussianProduct: point dimension mismatch");
  // The Gaussian density is positive at every finite point.
  if (!std::isfinite(log_density(x)))
    throw std::domain_error("logarithmic derivative undefined where the density vanishes");
  AltTensor beta(1);
  for (std::size_t p = 0; p < x.size(); ++p)
    beta.add(MultiIndex::single(static_cast<int>(p) + 1), -x[p] / variances_[p]);
  return beta;
}

std::optional<VectorField> GaussianProduct::log_derivative_field() const {
  VectorField beta;
  for (std::size_t p = 0; p < variances_.size(); ++p)
    beta.push_back(Expr::scaled(-1.0 / variances_[p], Expr::coord(static_cast<int>(p) + 1)));
  return beta;
}

void GaussianProduct::sample(const CounterRng& rng, std::uint64_t first, std::size_t count,
                             double* out) const {
  const std::size_t d = variances_.size();
  std::vector<double> z(d);
  for (std::size_t i = 0; i < count; ++i) {
    rng.normals(first + i, 0, z);
    for (std::size_t p = 0; p < d; ++p) out[p * count + i] = sigmas_[p] * z[p];
  }
}

}  // namespace dforms
