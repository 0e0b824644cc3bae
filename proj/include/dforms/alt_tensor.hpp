#pragma once

#include <map>
#include <string>

#include "dforms/multi_index.hpp"

namespace dforms {

/// Finitely supported element of L_n(H): coefficients on the orthonormal
/// basis {e_gamma}. Exact zeros are never stored.
class AltTensor {
 public:
  using Coeffs = std::map<MultiIndex, double>;

  explicit AltTensor(int degree = 0);
  AltTensor(int degree, Coeffs coeffs);

  static AltTensor scalar(double c);
  static AltTensor basis(const MultiIndex& idx, double c = 1.0);

  int degree() const noexcept { return degree_; }
  const Coeffs& coeffs() const noexcept { return coeffs_; }
  bool is_zero() const noexcept { return coeffs_.empty(); }
  std::size_t nnz() const noexcept { return coeffs_.size(); }

  double operator[](const MultiIndex& idx) const;
  /// Adds c to the coefficient at idx, dropping the entry if it becomes exactly zero.
  void add(const MultiIndex& idx, double c);
  void set(const MultiIndex& idx, double c);

  AltTensor& operator+=(const AltTensor& other);
  AltTensor& operator-=(const AltTensor& other);
  AltTensor& operator*=(double s);

  friend AltTensor operator+(AltTensor a, const AltTensor& b) { return a += b; }
  friend AltTensor operator-(AltTensor a, const AltTensor& b) { return a -= b; }
  friend AltTensor operator*(double s, AltTensor a) { return a *= s; }
  friend AltTensor operator-(AltTensor a) { return a *= -1.0; }
  friend bool operator==(const AltTensor&, const AltTensor&) = default;

  double max_abs() const;
  std::string to_string() const;

 private:
  void check_index(const MultiIndex& idx) const;

  int degree_;
  Coeffs coeffs_;
};

/// Exterior product; degree m + n.
AltTensor wedge(const AltTensor& f, const AltTensor& g);

/// Interior product g ⌟ f of degree m - n, defined by (g⌟f, h) = (f, g∧h).
/// Throws std::invalid_argument when deg g > deg f.
AltTensor contract(const AltTensor& g, const AltTensor& f);

/// Hilbert-Schmidt scalar product; degrees must agree.
double inner(const AltTensor& f, const AltTensor& g);
double hs_norm(const AltTensor& f);

}  // namespace dforms
