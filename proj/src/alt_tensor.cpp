#include "dforms/alt_tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dforms {

AltTensor::AltTensor(int degree) : degree_(degree) {
  if (degree < 0) throw std::invalid_argument("AltTensor degree must be >= 0");
}

AltTensor::AltTensor(int degree, Coeffs coeffs) : AltTensor(degree) {
  for (auto& [idx, c] : coeffs) add(idx, c);
}

AltTensor AltTensor::scalar(double c) {
  AltTensor t(0);
  t.add(MultiIndex{}, c);
  return t;
}

AltTensor AltTensor::basis(const MultiIndex& idx, double c) {
  AltTensor t(static_cast<int>(idx.size()));
  t.add(idx, c);
  return t;
}

void AltTensor::check_index(const MultiIndex& idx) const {
  if (static_cast<int>(idx.size()) != degree_)
    throw std::invalid_argument("index " + idx.to_string() + " does not match degree " +
                                std::to_string(degree_));
}

double AltTensor::operator[](const MultiIndex& idx) const {
  auto it = coeffs_.find(idx);
  return it == coeffs_.end() ? 0.0 : it->second;
}

void AltTensor::add(const MultiIndex& idx, double c) {
  check_index(idx);
  if (c == 0.0) return;
  auto [it, inserted] = coeffs_.try_emplace(idx, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) coeffs_.erase(it);
  }
}

void AltTensor::set(const MultiIndex& idx, double c) {
  check_index(idx);
  if (c == 0.0)
    coeffs_.erase(idx);
  else
    coeffs_[idx] = c;
}

AltTensor& AltTensor::operator+=(const AltTensor& other) {
  if (other.degree_ != degree_) throw std::invalid_argument("AltTensor degree mismatch in +");
  for (const auto& [idx, c] : other.coeffs_) add(idx, c);
  return *this;
}

AltTensor& AltTensor::operator-=(const AltTensor& other) {
  if (other.degree_ != degree_) throw std::invalid_argument("AltTensor degree mismatch in -");
  for (const auto& [idx, c] : other.coeffs_) add(idx, -c);
  return *this;
}

AltTensor& AltTensor::operator*=(double s) {
  if (s == 0.0) {
    coeffs_.clear();
    return *this;
  }
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    it->second *= s;
    if (it->second == 0.0)
      it = coeffs_.erase(it);
    else
      ++it;
  }
  return *this;
}

double AltTensor::max_abs() const {
  double m = 0.0;
  for (const auto& [idx, c] : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

std::string AltTensor::to_string() const {
  if (coeffs_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [idx, c] : coeffs_) {
    if (!first) os << " + ";
    os << c << "*e" << idx.to_string();
    first = false;
  }
  return os.str();
}

AltTensor wedge(const AltTensor& f, const AltTensor& g) {
  AltTensor out(f.degree() + g.degree());
  for (const auto& [a, fa] : f.coeffs()) {
    for (const auto& [b, gb] : g.coeffs()) {
      auto merged = merge_with_sign(a, b);
      if (merged) out.add(merged->index, merged->sign * fa * gb);
    }
  }
  return out;
}

AltTensor contract(const AltTensor& g, const AltTensor& f) {
  if (g.degree() > f.degree())
    throw std::invalid_argument("contract: degree of g (" + std::to_string(g.degree()) +
                                ") exceeds degree of f (" + std::to_string(f.degree()) + ")");
  AltTensor out(f.degree() - g.degree());
  for (const auto& [big, fc] : f.coeffs()) {
    for (const auto& [small, gc] : g.coeffs()) {
      if (!small.is_subset_of(big)) continue;
      MultiIndex rest = big.set_difference(small);
      // (g ∧ e_rest)(e_big) carries the sign of sorting (small, rest).
      auto merged = merge_with_sign(small, rest);
      out.add(rest, merged->sign * gc * fc);
    }
  }
  return out;
}

double inner(const AltTensor& f, const AltTensor& g) {
  if (f.degree() != g.degree())
    throw std::invalid_argument("inner: degree mismatch (" + std::to_string(f.degree()) +
                                " vs " + std::to_string(g.degree()) + ")");
  const auto& small = f.nnz() <= g.nnz() ? f : g;
  const auto& large = f.nnz() <= g.nnz() ? g : f;
  double s = 0.0;
  for (const auto& [idx, c] : small.coeffs()) s += c * large[idx];
  return s;
}

double hs_norm(const AltTensor& f) { return std::sqrt(inner(f, f)); }

}  // namespace dforms
