#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dforms/coform.hpp"
#include "dforms/domain.hpp"
#include "dforms/integrate.hpp"

namespace dforms {

/// Subset B of ∂V as a predicate on boundary points.
using BoundaryPredicate = std::function<bool(std::span<const double> y)>;

/// ε_k = 0.2·2^{−k}, k = 0..5.
std::vector<double> default_schedule();

/// Rejects empty, non-decreasing or out-of-range schedules.
void validate_schedule(std::span<const double> schedule, const Domain& domain,
                       RollOff rolloff = RollOff::linear);

struct LayerOptions {
  std::vector<double> schedule = default_schedule();
  RollOff rolloff = RollOff::linear;
  IntegrationSpec spec = IntegrationSpec::quadrature();
  /// Pass threshold for extrapolated gaps; defaults to 1e-6 (quadrature) or 1e-3 (Monte Carlo).
  std::optional<double> tolerance;

  double effective_tolerance() const { return tolerance.value_or(spec.is_mc() ? 1e-3 : 1e-6); }
};

struct TraceRow {
  double epsilon = 0.0;
  Estimate estimate;
  /// Richardson value from this row and the previous one (absent on the first row).
  std::optional<Estimate> extrapolated;
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  Estimate limit;
};

/// Combines ν(ε_a) and ν(ε_b) to cancel the ε² term.
double richardson(double eps_a, double value_a, double eps_b, double value_b);

/// ν^ε(B) = ν({|τ| < ε, P x ∈ B}) / (2ε).
Estimate layer_measure(const Domain& domain, const BoundaryPredicate& B, double epsilon,
                       const DifferentiableMeasure& nu, const IntegrationSpec& spec);

/// ν^∂V(B) as the extrapolated limit of ν^ε(B) over the schedule.
ConvergenceTrace surface_measure(const Domain& domain, const BoundaryPredicate& B,
                                 const DifferentiableMeasure& nu, const LayerOptions& opts);

struct BoundaryPairingReport {
  ConvergenceTrace lhs;  // ∫ (df^ε, g) dν
  ConvergenceTrace rhs;  // −(1/2ε) ∫ 1_layer (n, g)(P x) dν
  Estimate gap;
  double tolerance = 0.0;
  bool pass = false;
};

BoundaryPairingReport boundary_pairing(const Domain& domain, const DifferentiableMeasure& nu,
                                       const FormField& g, const LayerOptions& opts);

/// ∫_∂V ω for a codegree-1 measure ω = F·μ: lim (1/2ε) ∫ 1_layer (n, F)(P x) μ(dx).
ConvergenceTrace surface_integral(const CoForm& omega, const Domain& domain,
                                  const LayerOptions& opts);

struct IdentityRow {
  double epsilon = 0.0;
  Estimate boundary_term;  // (df^ε ∧ ω)(X)
  Estimate volume_term;    // (f^ε ∧ dω)(X)
  Estimate sum;
  bool pass = false;
};

struct StokesReport {
  ConvergenceTrace boundary;   // ∫_∂V ω
  ConvergenceTrace volume;     // (f^ε ∧ dω)(X) → ∫_V dω
  Estimate sharp_volume;       // ∫ 1_V density(dω) dμ
  Estimate gap;                // boundary − volume limits
  Estimate sharp_gap;          // volume limit − sharp_volume
  std::vector<double> gap_trace;  // |boundary − volume| per extrapolated row
  std::vector<IdentityRow> identity;
  double tolerance = 0.0;
  bool pass = false;
};

StokesReport stokes_check(const CoForm& omega, const Domain& domain, const LayerOptions& opts);

}  // namespace dforms
