#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dforms/alt_tensor.hpp"
#include "dforms/form_field.hpp"
#include "dforms/random.hpp"

namespace dforms {

class GaussianProduct;

/// Probability measure on R^D, differentiable along every basis direction.
///
/// The logarithmic derivative β^μ(x) = Σ_p β_p(x) e_p has components
/// β_p = ∂_p log ρ, where ρ is the Lebesgue density, so that the derivative
/// measure d_{e_p}(Fμ) has density ∂_p F + F β_p with respect to μ.
class DifferentiableMeasure {
 public:
  virtual ~DifferentiableMeasure() = default;

  virtual int dim() const = 0;
  virtual double density(std::span<const double> x) const = 0;
  virtual double log_density(std::span<const double> x) const = 0;

  /// β^μ(x); throws std::domain_error where the density vanishes.
  virtual AltTensor log_derivative(std::span<const double> x) const = 0;

  /// β^μ as expressions, when it lies in the coefficient class.
  virtual std::optional<VectorField> log_derivative_field() const = 0;

  /// Draws samples first..first+count-1 into a coordinate-major block
  /// (coordinate p of sample i at out[p * count + i]).
  virtual void sample(const CounterRng& rng, std::uint64_t first, std::size_t count,
                      double* out) const = 0;

  virtual const GaussianProduct* as_gaussian_product() const { return nullptr; }
};

/// Centered Gaussian with independent coordinates: N(0, diag(σ_1², ..., σ_D²)).
class GaussianProduct final : public DifferentiableMeasure {
 public:
  explicit GaussianProduct(std::vector<double> variances);
  static GaussianProduct standard(int dim);

  int dim() const override { return static_cast<int>(variances_.size()); }
  std::span<const double> variances() const { return variances_; }
  double variance(int p) const { return variances_[static_cast<std::size_t>(p - 1)]; }

  double density(std::span<const double> x) const override;
  double log_density(std::span<const double> x) const override;
  AltTensor log_derivative(std::span<const double> x) const override;
  std::optional<VectorField> log_derivative_field() const override;
  void sample(const CounterRng& rng, std::uint64_t first, std::size_t count,
              double* out) const override;
  const GaussianProduct* as_gaussian_product() const override { return this; }

 private:
  std::vector<double> variances_;
  std::vector<double> sigmas_;
};

/// Free-function spelling of β^μ(x).
inline AltTensor log_derivative(const DifferentiableMeasure& mu, std::span<const double> x) {
  return mu.log_derivative(x);
}

}  // namespace dforms
