#pragma once

#include <map>
#include <span>
#include <vector>

#include "dforms/alt_tensor.hpp"
#include "dforms/expr.hpp"
#include "dforms/kernels.hpp"

namespace dforms {

/// Components of a vector field x ↦ Σ_p v_p(x) e_p; entry p-1 holds v_p.
using VectorField = std::vector<Expr>;

/// Differential form of degree n on the truncation R^D: x ↦ Σ_γ f_γ(x) e_γ,
/// with every index entry at most D.
class FormField {
 public:
  using Coeffs = std::map<MultiIndex, Expr>;

  FormField(int degree, int dim);
  FormField(int degree, int dim, const Coeffs& coeffs);

  static FormField scalar(int dim, const Expr& f);
  static FormField basis(int dim, const MultiIndex& idx, const Expr& coeff = Expr::constant(1.0));
  static FormField one_form(const VectorField& components);

  int degree() const noexcept { return degree_; }
  int dim() const noexcept { return dim_; }
  const Coeffs& coeffs() const noexcept { return coeffs_; }
  bool is_zero() const noexcept { return coeffs_.empty(); }
  Expr coeff(const MultiIndex& idx) const;

  /// Adds e to the coefficient at idx; coefficients that simplify to 0 are dropped.
  void add(const MultiIndex& idx, const Expr& e);

  AltTensor evaluate(std::span<const double> x) const;

  FormField& operator+=(const FormField& other);
  friend FormField operator+(FormField a, const FormField& b) { return a += b; }
  friend FormField operator-(const FormField& a, const FormField& b) { return a + (-1.0) * b; }
  friend FormField operator*(double s, const FormField& f) { return multiply(Expr::constant(s), f); }
  friend FormField operator-(const FormField& f) { return (-1.0) * f; }

  /// Pointwise product with a scalar function.
  static FormField multiply(const Expr& s, const FormField& f);

 private:
  int degree_;
  int dim_;
  Coeffs coeffs_;
};

/// df = Σ_{γ, p∉γ} ∂_p f_γ e_p ∧ e_γ (degree n+1).
FormField differential(const FormField& f);

/// δf = Σ_{p∈γ} ∂_p f_γ e_p ⌟ e_γ (degree n-1); rejects 0-forms.
FormField codifferential(const FormField& f);

/// Pointwise interior product g(x) ⌟ f(x), realized symbolically.
FormField contract_fields(const FormField& g, const FormField& f);

/// β ⌟ f for a vector field β; rejects 0-forms.
FormField contract_field(const VectorField& beta, const FormField& f);

/// Pointwise exterior product g(x) ∧ f(x).
FormField wedge_fields(const FormField& g, const FormField& f);

/// Σ_γ g_γ f_γ as a single expression.
Expr pointwise_inner(const FormField& g, const FormField& f);

/// A form whose coefficients are compiled to kernel programs for batched evaluation.
class CompiledForm {
 public:
  explicit CompiledForm(const FormField& f);

  int degree() const noexcept { return degree_; }
  int dim() const noexcept { return dim_; }
  std::span<const MultiIndex> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }

  /// Writes coefficient k at point i to out[k * pts.count + i].
  void eval_block(const kernels::PointBlock& pts, double* out) const;

 private:
  int degree_;
  int dim_;
  std::vector<MultiIndex> indices_;
  std::vector<kernels::Program> programs_;
};

}  // namespace dforms
