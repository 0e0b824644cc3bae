#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dforms/kernels.hpp"

namespace dforms {

enum class ExprKind { constant, coord, add, mul, scale, expquad };

/// exp(c + Σ_p (a_p x_p² + b_p x_p)); vectors are indexed by 0-based coordinate.
struct ExpQuadParams {
  std::vector<double> a;
  std::vector<double> b;
  double c = 0.0;
};

/// Coefficient function built from constants, coordinates, sums, products,
/// scalar multiples and Gaussian-type envelopes. The class is closed under
/// partial differentiation, so derivatives are exact expressions.
///
/// Coordinates are 1-based to match basis numbering: coord(p) is x_p.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr constant(double c);
  static Expr coord(int p);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr scaled(double factor, const Expr& e);
  static Expr exp_quadratic(ExpQuadParams params);

  ExprKind kind() const;
  double constant_value() const;  // only for constants
  int coord_index() const;        // only for coords (1-based)
  double factor() const;          // only for scale
  std::span<const Expr> args() const;
  const ExpQuadParams& expquad() const;

  bool is_zero() const;
  bool is_constant() const { return kind() == ExprKind::constant; }

  double eval(std::span<const double> x) const;
  /// Exact partial derivative ∂/∂x_p.
  Expr derivative(int p) const;
  double deriv(int p, std::span<const double> x) const { return derivative(p).eval(x); }

  /// Largest coordinate index referenced (0 for constants).
  int max_coord() const;
  /// Highest total polynomial degree, ignoring exponential envelopes.
  int poly_degree() const;
  std::size_t node_count() const;
  std::string to_string() const;

  kernels::Program compile() const;

  friend Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b) { return sum({a, scaled(-1.0, b)}); }
  friend Expr operator-(const Expr& a) { return scaled(-1.0, a); }
  friend Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
  friend Expr operator*(double s, const Expr& a) { return scaled(s, a); }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);

  std::shared_ptr<const Node> node_;
};

}  // namespace dforms
