#include "dforms/form_field.hpp"

#include <stdexcept>
#include <string>

namespace dforms {

FormField::FormField(int degree, int dim) : degree_(degree), dim_(dim) {
  if (degree < 0) throw std::invalid_argument("FormField degree must be >= 0");
  if (dim < 1) throw std::invalid_argument("FormField dimension must be >= 1");
}

FormField::FormField(int degree, int dim, const Coeffs& coeffs) : FormField(degree, dim) {
  for (const auto& [idx, e] : coeffs) add(idx, e);
}

FormField FormField::scalar(int dim, const Expr& f) {
  FormField out(0, dim);
  out.add(MultiIndex{}, f);
  return out;
}

FormField FormField::basis(int dim, const MultiIndex& idx, const Expr& coeff) {
  FormField out(static_cast<int>(idx.size()), dim);
  out.add(idx, coeff);
  return out;
}

FormField FormField::one_form(const VectorField& components) {
  FormField out(1, static_cast<int>(components.size()));
  for (std::size_t p = 0; p < components.size(); ++p)
    out.add(MultiIndex::single(static_cast<int>(p) + 1), components[p]);
  return out;
}

Expr FormField::coeff(const MultiIndex& idx) const {
  auto it = coeffs_.find(idx);
  return it == coeffs_.end() ? Expr() : it->second;
}

void FormField::add(const MultiIndex& idx, const Expr& e) {
  if (static_cast<int>(idx.size()) != degree_)
    throw std::invalid_argument("FormField: index " + idx.to_string() + " does not have length " +
                                std::to_string(degree_));
  if (idx.max_entry() > dim_)
    throw std::invalid_argument("FormField: index " + idx.to_string() +
                                " exceeds truncation dimension " + std::to_string(dim_));
  if (e.max_coord() > dim_)
    throw std::invalid_argument("FormField: coefficient references x_" +
                                std::to_string(e.max_coord()) + " beyond dimension " +
                                std::to_string(dim_));
  if (e.is_zero()) return;
  auto it = coeffs_.find(idx);
  if (it == coeffs_.end()) {
    coeffs_.emplace(idx, e);
    return;
  }
  it->second = it->second + e;
  if (it->second.is_zero()) coeffs_.erase(it);
}

AltTensor FormField::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw std::invalid_argument("FormField::evaluate: point has dimension " +
                                std::to_string(x.size()) + ", expected " + std::to_string(dim_));
  AltTensor out(degree_);
  for (const auto& [idx, e] : coeffs_) out.add(idx, e.eval(x));
  return out;
}

FormField& FormField::operator+=(const FormField& other) {
  if (other.degree_ != degree_ || other.dim_ != dim_)
    throw std::invalid_argument("FormField sum: degree/dimension mismatch");
  for (const auto& [idx, e] : other.coeffs_) add(idx, e);
  return *this;
}

FormField FormField::multiply(const Expr& s, const FormField& f) {
  FormField out(f.degree_, f.dim_);
  if (s.is_zero()) return out;
  for (const auto& [idx, e] : f.coeffs_) out.add(idx, s * e);
  return out;
}

FormField differential(const FormField& f) {
  FormField out(f.degree() + 1, f.dim());
  for (const auto& [idx, e] : f.coeffs()) {
    for (int p = 1; p <= f.dim(); ++p) {
      if (idx.contains(p)) continue;
      Expr dp = e.derivative(p);
      if (dp.is_zero()) continue;
      auto merged = merge_with_sign(MultiIndex::single(p), idx);
      out.add(merged->index, Expr::scaled(merged->sign, dp));
    }
  }
  return out;
}

FormField codifferential(const FormField& f) {
  if (f.degree() == 0) throw std::invalid_argument("codifferential is undefined for 0-forms");
  FormField out(f.degree() - 1, f.dim());
  for (const auto& [idx, e] : f.coeffs()) {
    for (int p : idx.entries()) {
      Expr dp = e.derivative(p);
      if (dp.is_zero()) continue;
      // e_p ⌟ e_γ = (-1)^(k_p - 1) e_{γ∖p}
      const int sign = (idx.rank_of(p) % 2 == 1) ? 1 : -1;
      out.add(idx.without(p), Expr::scaled(sign, dp));
    }
  }
  return out;
}

FormField contract_fields(const FormField& g, const FormField& f) {
  if (g.dim() != f.dim()) throw std::invalid_argument("contract_fields: dimension mismatch");
  if (g.degree() > f.degree())
    throw std::invalid_argument("contract_fields: degree of g exceeds degree of f");
  FormField out(f.degree() - g.degree(), f.dim());
  for (const auto& [big, fe] : f.coeffs()) {
    for (const auto& [small, ge] : g.coeffs()) {
      if (!small.is_subset_of(big)) continue;
      MultiIndex rest = big.set_difference(small);
      auto merged = merge_with_sign(small, rest);
      out.add(rest, Expr::scaled(merged->sign, ge * fe));
    }
  }
  return out;
}

FormField contract_field(const VectorField& beta, const FormField& f) {
  if (f.degree() == 0) throw std::invalid_argument("contract_field: f must have degree >= 1");
  if (static_cast<int>(beta.size()) != f.dim())
    throw std::invalid_argument("contract_field: vector field has " + std::to_string(beta.size()) +
                                " components, form dimension is " + std::to_string(f.dim()));
  return contract_fields(FormField::one_form(beta), f);
}

FormField wedge_fields(const FormField& g, const FormField& f) {
  if (g.dim() != f.dim()) throw std::invalid_argument("wedge_fields: dimension mismatch");
  const int deg = g.degree() + f.degree();
  FormField out(deg, f.dim());
  for (const auto& [a, ge] : g.coeffs()) {
    for (const auto& [b, fe] : f.coeffs()) {
      auto merged = merge_with_sign(a, b);
      if (merged) out.add(merged->index, Expr::scaled(merged->sign, ge * fe));
    }
  }
  return out;
}

Expr pointwise_inner(const FormField& g, const FormField& f) {
  if (g.degree() != f.degree() || g.dim() != f.dim())
    throw std::invalid_argument("pointwise_inner: degree/dimension mismatch");
  std::vector<Expr> terms;
  for (const auto& [idx, ge] : g.coeffs()) {
    Expr fe = f.coeff(idx);
    if (!fe.is_zero()) terms.push_back(ge * fe);
  }
  return Expr::sum(std::move(terms));
}

CompiledForm::CompiledForm(const FormField& f) : degree_(f.degree()), dim_(f.dim()) {
  for (const auto& [idx, e] : f.coeffs()) {
    indices_.push_back(idx);
    programs_.push_back(e.compile());
  }
}

void CompiledForm::eval_block(const kernels::PointBlock& pts, double* out) const {
  for (std::size_t k = 0; k < programs_.size(); ++k)
    kernels::eval_program(programs_[k], pts, out + k * pts.count);
}

}  // namespace dforms
