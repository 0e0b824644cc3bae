#pragma once

#include <memory>
#include <vector>

#include "dforms/form_field.hpp"
#include "dforms/integrate.hpp"
#include "dforms/measure.hpp"

namespace dforms {

/// ⟨ω, f⟩ = ∫ (ω(x), f(x)) μ(dx).
Estimate pairing(const FormField& omega, const FormField& f, const DifferentiableMeasure& mu,
                 const IntegrationSpec& spec);

/// (∫ ‖f(x)‖^p μ(dx))^{1/p}; the error is propagated to first order.
Estimate lp_norm(const FormField& f, const DifferentiableMeasure& mu, double p,
                 const IntegrationSpec& spec);

struct SobolevNorm {
  double total = 0.0;
  double lp = 0.0;       // ‖f‖_{n,p}
  double codiff = 0.0;   // ‖δf‖_{n-1,p}
  double beta = 0.0;     // (∫ ‖β‖^p ‖f‖^p dμ)^{1/p}
  bool finite = false;
};

/// ‖f‖_{n,p} + ‖δf‖_{n-1,p} + (∫ ‖β‖^p ‖f‖^p dμ)^{1/p}; rejects 0-forms.
SobolevNorm sobolev_norm(const FormField& f, const DifferentiableMeasure& mu, double p,
                         const IntegrationSpec& spec);

/// d* f = −(β ⌟ f + δf).
FormField dstar(const FormField& f, const DifferentiableMeasure& mu);

/// Form measure of codegree n held as density × base measure: ω = F·μ.
class CoForm {
 public:
  CoForm(std::shared_ptr<const DifferentiableMeasure> base, FormField density);

  int codegree() const noexcept { return density_.degree(); }
  int dim() const noexcept { return density_.dim(); }
  const DifferentiableMeasure& base() const noexcept { return *base_; }
  const std::shared_ptr<const DifferentiableMeasure>& base_ptr() const noexcept { return base_; }
  const FormField& density() const noexcept { return density_; }

 private:
  std::shared_ptr<const DifferentiableMeasure> base_;
  FormField density_;
};

/// dω for codegree n ≥ 1: density (−1)^{n−1} Σ_{p∈γ} (∂_p F_γ + F_γ β_p) e_p ⌟ e_γ.
CoForm coform_differential(const CoForm& omega);

/// g ∧ ω with density g(x) ⌟ F(x).
CoForm wedge_measure(const FormField& g, const CoForm& omega);

/// ω(X) for a codegree-0 measure.
Estimate total_mass(const CoForm& omega, const IntegrationSpec& spec);

struct AdjointReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double std_error = 0.0;  // of the gap
  double tolerance = 0.0;
  bool pass = false;
};

/// Compares ⟨dω, f⟩ with ⟨ω, d*f⟩ for ω of degree n and f of degree n+1.
AdjointReport adjoint_check(const FormField& omega, const FormField& f,
                            const DifferentiableMeasure& mu, const IntegrationSpec& spec);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  bool contains(std::span<const double> x) const;
};

struct LeibnizOptions {
  std::size_t points = 100;
  std::uint64_t seed = 7;
  double pointwise_tol = 1e-10;
  std::vector<Box> boxes;
  IntegrationSpec spec = IntegrationSpec::monte_carlo(100'000, 7);
};

struct BoxGap {
  MultiIndex index;
  std::size_t box = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double std_error = 0.0;
};

struct LeibnizReport {
  double max_pointwise_gap = 0.0;
  std::vector<BoxGap> boxes;
  bool pass = false;
};

/// d(g ∧ ω) against g ∧ dω + (−1)^n dg ∧ ω, ω of codegree n+1.
LeibnizReport leibniz_check(const FormField& g, const CoForm& omega, const LeibnizOptions& opts);

/// Both sides of the Leibniz rule as densities (lhs, rhs).
std::pair<FormField, FormField> leibniz_sides(const FormField& g, const CoForm& omega);

}  // namespace dforms
