#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dforms/expr.hpp"
#include "dforms/kernels.hpp"
#include "dforms/measure.hpp"

namespace dforms {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for deterministic quadrature
};

struct IntegrationSpec {
  enum class Method { quadrature, monte_carlo };

  Method method = Method::quadrature;
  int order = 12;                       // Gauss-Hermite nodes per axis
  std::uint64_t samples = 1'000'000;    // Monte Carlo sample count
  std::uint64_t seed = 42;
  unsigned workers = 0;                 // 0: one per hardware thread
  double abs_tol = 1e-10;               // quadrature pass threshold
  double z = 3.0;                       // Monte Carlo pass threshold in standard errors

  static IntegrationSpec quadrature(int order = 12);
  static IntegrationSpec monte_carlo(std::uint64_t samples, std::uint64_t seed);

  bool is_mc() const { return method == Method::monte_carlo; }
  /// Admissible |gap| for a difference whose standard error is `std_error`.
  double tolerance(double std_error) const { return is_mc() ? z * std_error : abs_tol; }
  unsigned worker_count() const;
  void validate() const;
};

/// Fills out[k * pts.count + i] with output k at point i.
using BatchIntegrand = std::function<void(const kernels::PointBlock& pts, std::span<double> out)>;

/// Linear combinations of base outputs that are estimated alongside them, sample
/// by sample, so their standard errors account for correlation.
using DerivedOutputs = std::vector<std::vector<double>>;

/// ∫ outputs dμ. Quadrature runs a tensor Gauss-Hermite rule (Gaussian-product
/// μ only); Monte Carlo returns sample means and standard errors.
std::vector<Estimate> integrate_batch(const DifferentiableMeasure& mu, const IntegrationSpec& spec,
                                      std::size_t outputs, const BatchIntegrand& integrand,
                                      const DerivedOutputs& derived = {});

Estimate integrate(const std::function<double(std::span<const double>)>& fn,
                   const DifferentiableMeasure& mu, const IntegrationSpec& spec);
Estimate integrate(const Expr& fn, const DifferentiableMeasure& mu, const IntegrationSpec& spec);

namespace detail {

struct SampleStats {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void merge(const SampleStats& other);
  Estimate estimate() const;
};

/// Splits [0, total) into fixed-size chunks processed by `workers` threads.
/// fill(first, count, values) writes values[k * count + i] for the first
/// `base_outputs` rows; derived rows are appended by the engine. Chunk results
/// merge in chunk order, so the outcome is independent of the worker count.
std::vector<SampleStats> sample_reduce(
    std::uint64_t total, std::size_t base_outputs, const DerivedOutputs& derived, unsigned workers,
    const std::function<void(std::uint64_t first, std::size_t count, std::span<double> values)>& fill);

/// As sample_reduce but forms Σ weight·value; fill also writes weights[i].
std::vector<double> weighted_reduce(
    std::uint64_t total, std::size_t base_outputs, const DerivedOutputs& derived, unsigned workers,
    const std::function<void(std::uint64_t first, std::size_t count, std::span<double> values,
                             std::span<double> weights)>& fill);

void parallel_chunks(std::size_t chunks, unsigned workers,
                     const std::function<void(std::size_t chunk)>& body);

}  // namespace detail

}  // namespace dforms
