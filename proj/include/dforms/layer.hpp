#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dforms/domain.hpp"
#include "dforms/form_field.hpp"
#include "dforms/integrate.hpp"

namespace dforms {

/// One integral ∫ w(τ(x)) φ(x or P x) ν(dx). The field φ is a 0-form, or a
/// 1-form paired with the outward normal: φ(x) = (n(x), F(x)).
struct LayerTerm {
  std::size_t field = 0;
  std::function<double(double tau)> weight;
  bool at_projection = false;
  /// Optional boundary subset B, tested on P x.
  std::function<bool(std::span<const double> y)> boundary;
};

struct LayerProblem {
  std::vector<FormField> fields;
  std::vector<LayerTerm> terms;
  /// τ values where some weight is not smooth.
  std::vector<double> breakpoints;
  DerivedOutputs derived;
};

/// Estimates every term (then every derived combination). With a chart the
/// normal coordinate is integrated by piecewise Gauss-Legendre and only the
/// transversal part is sampled or run through quadrature; otherwise plain
/// Monte Carlo over ν.
std::vector<Estimate> integrate_layer(const Domain& domain, const DifferentiableMeasure& nu,
                                      const LayerProblem& problem, const IntegrationSpec& spec);

/// Piecewise Gauss-Legendre nodes on [lo, hi] honoring the breakpoints; the
/// weights include the τ density.
struct TauGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
};
TauGrid build_tau_grid(const LayerChart& chart, std::span<const double> breakpoints);

}  // namespace dforms
