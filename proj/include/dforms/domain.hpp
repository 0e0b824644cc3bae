#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dforms/alt_tensor.hpp"
#include "dforms/measure.hpp"
#include "dforms/quadrature_rules.hpp"

namespace dforms {

class LayerChart;

/// Region V ⊂ R^D with a codimension-1 boundary. Points near ∂V are written
/// x = y + τ n(y) with y ∈ ∂V, n the outward unit normal and τ < 0 inside V.
class Domain {
 public:
  virtual ~Domain() = default;

  virtual int dim() const = 0;
  virtual double reach() const = 0;
  virtual std::string describe() const = 0;

  /// Signed normal coordinate, extended beyond the reach where the formula allows.
  virtual double signed_coordinate(std::span<const double> x) const = 0;
  /// Boundary point P x; throws std::domain_error where the projection is undefined.
  virtual std::vector<double> project(std::span<const double> x) const = 0;
  /// Outward unit normal at the projection of x.
  virtual AltTensor normal(std::span<const double> x) const = 0;

  bool contains(std::span<const double> x) const { return signed_coordinate(x) < 0.0; }
  /// τ(x) inside the reach layer, nothing elsewhere.
  std::optional<double> tau(std::span<const double> x) const;

  /// Coordinates adapted to (V, ν) in which the normal coordinate can be
  /// integrated separately; nullptr when the pair has no such chart.
  virtual std::unique_ptr<LayerChart> chart(const DifferentiableMeasure& nu) const = 0;

 protected:
  void check_point(std::span<const double> x) const;
};

/// V = {x : (a, x) < c}.
class HalfSpace final : public Domain {
 public:
  HalfSpace(std::vector<double> axis, double offset, double reach_cap = 1e6);

  int dim() const override { return static_cast<int>(axis_.size()); }
  double reach() const override { return reach_; }
  std::string describe() const override;
  double signed_coordinate(std::span<const double> x) const override;
  std::vector<double> project(std::span<const double> x) const override;
  AltTensor normal(std::span<const double> x) const override;
  std::unique_ptr<LayerChart> chart(const DifferentiableMeasure& nu) const override;

  std::span<const double> axis() const { return axis_; }
  double offset() const { return offset_; }

 private:
  std::vector<double> axis_;
  double offset_;
  double reach_;
};

/// Cylindrical ball V = {x : x_1² + … + x_k² < r²} in R^D.
class Ball final : public Domain {
 public:
  Ball(int dim, int k, double radius);

  int dim() const override { return dim_; }
  double reach() const override { return radius_; }
  std::string describe() const override;
  double signed_coordinate(std::span<const double> x) const override;
  std::vector<double> project(std::span<const double> x) const override;
  AltTensor normal(std::span<const double> x) const override;
  std::unique_ptr<LayerChart> chart(const DifferentiableMeasure& nu) const override;

  int k() const { return k_; }
  double radius() const { return radius_; }

 private:
  double radial(std::span<const double> x) const;

  int dim_;
  int k_;
  double radius_;
};

std::unique_ptr<Domain> make_halfspace(int dim, std::vector<double> axis, double offset,
                                       double reach_cap = 1e6);
std::unique_ptr<Domain> make_ball(int dim, int k, double radius);

/// Shape of the transition band of h^ε outside the linear core.
enum class RollOff {
  linear,   // h^ε stays affine on (−ε, ε); kinks at ±ε
  quintic,  // C² blend on ε − ε² < |τ| < ε
};

/// h^ε: 1 for τ ≤ −ε, 1/2 − τ/(2ε) on the core, 0 for τ ≥ ε.
class MollifierProfile {
 public:
  MollifierProfile(double epsilon, RollOff rolloff = RollOff::linear);

  double epsilon() const { return eps_; }
  RollOff rolloff() const { return rolloff_; }
  double value(double tau) const;
  double slope(double tau) const;
  /// Points where h^ε fails to be smooth, ascending.
  std::vector<double> breakpoints() const;

 private:
  double eps_;
  RollOff rolloff_;
};

/// f^ε = h^ε ∘ τ and its differential df^ε = (h^ε)′(τ) n.
class Mollifier {
 public:
  Mollifier(const Domain& domain, double epsilon, RollOff rolloff = RollOff::linear);

  const MollifierProfile& profile() const { return profile_; }
  double value(std::span<const double> x) const;
  AltTensor differential(std::span<const double> x) const;

 private:
  const Domain& domain_;
  MollifierProfile profile_;
};

/// Parametrizes x = X(τ, θ) so that under ν the normal coordinate τ is
/// independent of the transversal parameter θ with a known density.
class LayerChart {
 public:
  virtual ~LayerChart() = default;

  int dim() const { return dim_; }
  /// Length of θ.
  virtual std::size_t theta_size() const = 0;
  /// Number of standard normals consumed per Monte Carlo draw of θ.
  virtual std::size_t normals_per_draw() const = 0;

  virtual double tau_density(double tau) const = 0;
  virtual double tau_min() const = 0;
  virtual double tau_max() const = 0;
  /// Length scale of τ used to size quadrature pieces.
  virtual double tau_scale() const = 0;

  /// θ from standard normals z.
  virtual void draw_theta(std::span<const double> z, std::span<double> theta) const = 0;
  /// Deterministic θ rule: node count, or nothing if only sampling is available.
  virtual std::optional<std::uint64_t> theta_rule_size(int order) const = 0;
  virtual double theta_rule_node(int order, std::uint64_t i, std::span<double> theta) const = 0;

  virtual void embed(std::span<const double> theta, double tau, std::span<double> x) const = 0;
  /// P X(τ, θ).
  virtual void project(std::span<const double> theta, double tau, std::span<double> y) const = 0;
  virtual bool projection_depends_on_tau() const = 0;
  /// Outward normal along the fibre of θ (constant in τ).
  virtual void normal(std::span<const double> theta, std::span<double> n) const = 0;

 protected:
  explicit LayerChart(int dim) : dim_(dim) {}

 private:
  int dim_;
};

}  // namespace dforms
