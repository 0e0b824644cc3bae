#include "dforms/domain.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dforms {

namespace {

constexpr double kTail = 9.0;  // standard deviations kept in τ

std::uint64_t checked_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    r *= base;
    if (r > 50'000'000) throw std::invalid_argument("transversal quadrature grid too large");
  }
  return r;
}

// Tensor Gauss-Hermite node i for standard normals, written to out.
double hermite_node(const Rule1D& rule, std::uint64_t i, std::span<double> out) {
  double w = 1.0;
  const auto n = static_cast<std::uint64_t>(rule.nodes.size());
  for (double& v : out) {
    const auto digit = static_cast<std::size_t>(i % n);
    i /= n;
    v = rule.nodes[digit];
    w *= rule.weights[digit];
  }
  return w;
}

class HalfSpaceChart final : public LayerChart {
 public:
  HalfSpaceChart(const HalfSpace& h, const GaussianProduct& g)
      : LayerChart(h.dim()), axis_(h.axis().begin(), h.axis().end()), offset_(h.offset()) {
    const auto d = axis_.size();
    sigma_.resize(d);
    std::vector<double> v(d);
    for (std::size_t p = 0; p < d; ++p) {
      sigma_[p] = std::sqrt(g.variances()[p]);
      v[p] = sigma_[p] * axis_[p];
    }
    double s2 = 0.0;
    for (double c : v) s2 += c * c;
    scale_ = std::sqrt(s2);
    // Householder reflection swapping e_1 and u = L a / S.
    w_.assign(d, 0.0);
    for (std::size_t p = 0; p < d; ++p) w_[p] = v[p] / scale_;
    w_[0] -= 1.0;
    ww_ = 0.0;
    for (double c : w_) ww_ += c * c;
    if (ww_ < 1e-30) ww_ = 0.0;
    // P x is τ-free when L² a is parallel to a
    for (std::size_t p = 0; p < d; ++p)
      if (std::abs(sigma_[p] * sigma_[p] * axis_[p] / s2 - axis_[p]) > 1e-14) tau_free_ = false;
  }

  std::size_t theta_size() const override { return axis_.size() - 1; }
  std::size_t normals_per_draw() const override { return axis_.size() - 1; }

  double tau_density(double tau) const override {
    const double z = (tau + offset_) / scale_;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * scale_);
  }
  double tau_min() const override { return -offset_ - kTail * scale_; }
  double tau_max() const override { return -offset_ + kTail * scale_; }
  double tau_scale() const override { return scale_; }

  void draw_theta(std::span<const double> z, std::span<double> theta) const override {
    std::copy(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(theta.size()), theta.begin());
  }
  std::optional<std::uint64_t> theta_rule_size(int order) const override {
    return checked_pow(static_cast<std::uint64_t>(order), theta_size());
  }
  double theta_rule_node(int order, std::uint64_t i, std::span<double> theta) const override {
    return hermite_node(gauss_hermite(order), i, theta);
  }

  void embed(std::span<const double> theta, double tau, std::span<double> x) const override {
    const auto d = axis_.size();
    // y = H (w_1, θ), x = L y
    double w1 = (tau + offset_) / scale_;
    double dotw = w_[0] * w1;
    for (std::size_t p = 1; p < d; ++p) dotw += w_[p] * theta[p - 1];
    const double f = ww_ > 0.0 ? 2.0 * dotw / ww_ : 0.0;
    x[0] = sigma_[0] * (w1 - f * w_[0]);
    for (std::size_t p = 1; p < d; ++p) x[p] = sigma_[p] * (theta[p - 1] - f * w_[p]);
  }
  void project(std::span<const double> theta, double tau, std::span<double> y) const override {
    embed(theta, tau, y);
    for (std::size_t p = 0; p < axis_.size(); ++p) y[p] -= tau * axis_[p];
  }
  bool projection_depends_on_tau() const override { return !tau_free_; }
  void normal(std::span<const double>, std::span<double> n) const override {
    std::copy(axis_.begin(), axis_.end(), n.begin());
  }

 private:
  std::vector<double> axis_;
  double offset_;
  std::vector<double> sigma_;
  std::vector<double> w_;
  double ww_ = 0.0;
  double scale_ = 1.0;
  bool tau_free_ = true;
};

class BallChart final : public LayerChart {
 public:
  BallChart(const Ball& b, const GaussianProduct& g)
      : LayerChart(b.dim()), k_(b.k()), radius_(b.radius()) {
    sigma_.resize(static_cast<std::size_t>(b.dim()));
    for (std::size_t p = 0; p < sigma_.size(); ++p) sigma_[p] = std::sqrt(g.variances()[p]);
    const double kk = k_;
    log_norm_ = -((0.5 * kk - 1.0) * std::numbers::ln2 + std::lgamma(0.5 * kk) +
                  kk * std::log(sigma_[0]));
  }

  std::size_t theta_size() const override { return sigma_.size(); }
  std::size_t normals_per_draw() const override { return sigma_.size(); }

  // ρ = r + τ follows σ·χ_k
  double tau_density(double tau) const override {
    const double rho = radius_ + tau;
    if (rho <= 0.0) return 0.0;
    const double s = sigma_[0];
    return std::exp(log_norm_ + (k_ - 1) * std::log(rho) - 0.5 * rho * rho / (s * s));
  }
  double tau_min() const override { return -radius_; }
  double tau_max() const override { return sigma_[0] * (kTail + std::sqrt(double(k_))) - radius_; }
  double tau_scale() const override { return sigma_[0]; }

  void draw_theta(std::span<const double> z, std::span<double> theta) const override {
    const auto k = static_cast<std::size_t>(k_);
    double n2 = 0.0;
    for (std::size_t p = 0; p < k; ++p) n2 += z[p] * z[p];
    const double inv = n2 > 0.0 ? 1.0 / std::sqrt(n2) : 0.0;
    for (std::size_t p = 0; p < k; ++p) theta[p] = n2 > 0.0 ? z[p] * inv : (p == 0 ? 1.0 : 0.0);
    for (std::size_t p = k; p < sigma_.size(); ++p) theta[p] = sigma_[p] * z[p];
  }
  std::optional<std::uint64_t> theta_rule_size(int order) const override {
    const std::size_t rest = sigma_.size() - static_cast<std::size_t>(k_);
    if (k_ == 1) return 2 * checked_pow(static_cast<std::uint64_t>(order), rest);
    if (k_ == 2) return angles(order) * checked_pow(static_cast<std::uint64_t>(order), rest);
    return std::nullopt;
  }
  double theta_rule_node(int order, std::uint64_t i, std::span<double> theta) const override {
    const auto k = static_cast<std::size_t>(k_);
    double w = 1.0;
    if (k_ == 1) {
      theta[0] = (i % 2) ? -1.0 : 1.0;
      w = 0.5;
      i /= 2;
    } else {
      const std::uint64_t m = angles(order);
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(i % m) / static_cast<double>(m);
      theta[0] = std::cos(phi);
      theta[1] = std::sin(phi);
      w = 1.0 / static_cast<double>(m);
      i /= m;
    }
    w *= hermite_node(gauss_hermite(order), i, theta.subspan(k));
    for (std::size_t p = k; p < sigma_.size(); ++p) theta[p] *= sigma_[p];
    return w;
  }

  void embed(std::span<const double> theta, double tau, std::span<double> x) const override {
    const double rho = radius_ + tau;
    const auto k = static_cast<std::size_t>(k_);
    for (std::size_t p = 0; p < k; ++p) x[p] = rho * theta[p];
    for (std::size_t p = k; p < sigma_.size(); ++p) x[p] = theta[p];
  }
  void project(std::span<const double> theta, double, std::span<double> y) const override {
    embed(theta, 0.0, y);
  }
  bool projection_depends_on_tau() const override { return false; }
  void normal(std::span<const double> theta, std::span<double> n) const override {
    const auto k = static_cast<std::size_t>(k_);
    for (std::size_t p = 0; p < sigma_.size(); ++p) n[p] = p < k ? theta[p] : 0.0;
  }

 private:
  static std::uint64_t angles(int order) { return 4 * static_cast<std::uint64_t>(order); }

  int k_;
  double radius_;
  std::vector<double> sigma_;
  double log_norm_ = 0.0;
};

}  // namespace

std::optional<double> Domain::tau(std::span<const double> x) const {
  const double t = signed_coordinate(x);
  if (std::abs(t) < reach()) return t;
  return std::nullopt;
}

void Domain::check_point(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim()))
    throw std::invalid_argument("domain: point dimension mismatch");
}

HalfSpace::HalfSpace(std::vector<double> axis, double offset, double reach_cap)
    : axis_(std::move(axis)), offset_(offset), reach_(reach_cap) {
  if (axis_.empty()) throw std::invalid_argument("halfspace: empty axis");
  double n2 = 0.0;
  for (double a : axis_) n2 += a * a;
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-9)
    throw std::invalid_argument("halfspace: axis must be a unit vector");
  if (!std::isfinite(offset_)) throw std::invalid_argument("halfspace: offset must be finite");
  if (!(reach_cap > 0.0)) throw std::invalid_argument("halfspace: reach cap must be positive");
}

std::string HalfSpace::describe() const {
  std::ostringstream os;
  os << "halfspace(D=" << axis_.size() << ", c=" << offset_ << ")";
  return os.str();
}

double HalfSpace::signed_coordinate(std::span<const double> x) const {
  check_point(x);
  double s = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p) s += axis_[p] * x[p];
  return s - offset_;
}

std::vector<double> HalfSpace::project(std::span<const double> x) const {
  const double t = signed_coordinate(x);
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t p = 0; p < y.size(); ++p) y[p] -= t * axis_[p];
  return y;
}

AltTensor HalfSpace::normal(std::span<const double> x) const {
  check_point(x);
  AltTensor n(1);
  for (std::size_t p = 0; p < axis_.size(); ++p) n.add(MultiIndex::single(int(p) + 1), axis_[p]);
  return n;
}

std::unique_ptr<LayerChart> HalfSpace::chart(const DifferentiableMeasure& nu) const {
  const GaussianProduct* g = nu.as_gaussian_product();
  if (!g || g->dim() != dim()) return nullptr;
  return std::make_unique<HalfSpaceChart>(*this, *g);
}

Ball::Ball(int dim, int k, double radius) : dim_(dim), k_(k), radius_(radius) {
  if (dim < 1) throw std::invalid_argument("ball: dimension must be >= 1");
  if (k < 1 || k > dim) throw std::invalid_argument("ball: need 1 <= k <= D");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball: radius must be positive");
}

std::string Ball::describe() const {
  std::ostringstream os;
  os << "ball(D=" << dim_ << ", k=" << k_ << ", r=" << radius_ << ")";
  return os.str();
}

double Ball::radial(std::span<const double> x) const {
  check_point(x);
  double s = 0.0;
  for (int p = 0; p < k_; ++p) s += x[static_cast<std::size_t>(p)] * x[static_cast<std::size_t>(p)];
  return std::sqrt(s);
}

double Ball::signed_coordinate(std::span<const double> x) const { return radial(x) - radius_; }

std::vector<double> Ball::project(std::span<const double> x) const {
  const double rho = radial(x);
  if (rho == 0.0) throw std::domain_error("ball: projection undefined on the axis");
  std::vector<double> y(x.begin(), x.end());
  for (int p = 0; p < k_; ++p) y[static_cast<std::size_t>(p)] *= radius_ / rho;
  return y;
}

AltTensor Ball::normal(std::span<const double> x) const {
  const double rho = radial(x);
  if (rho == 0.0) throw std::domain_error("ball: normal undefined on the axis");
  AltTensor n(1);
  for (int p = 0; p < k_; ++p) n.add(MultiIndex::single(p + 1), x[static_cast<std::size_t>(p)] / rho);
  return n;
}

std::unique_ptr<LayerChart> Ball::chart(const DifferentiableMeasure& nu) const {
  const GaussianProduct* g = nu.as_gaussian_product();
  if (!g || g->dim() != dim_) return nullptr;
  for (int p = 1; p < k_; ++p)
    if (std::abs(g->variance(p + 1) - g->variance(1)) > 1e-12 * g->variance(1)) return nullptr;
  return std::make_unique<BallChart>(*this, *g);
}

std::unique_ptr<Domain> make_halfspace(int dim, std::vector<double> axis, double offset,
                                       double reach_cap) {
  if (static_cast<int>(axis.size()) != dim)
    throw std::invalid_argument("halfspace: axis length must equal D");
  return std::make_unique<HalfSpace>(std::move(axis), offset, reach_cap);
}

std::unique_ptr<Domain> make_ball(int dim, int k, double radius) {
  return std::make_unique<Ball>(dim, k, radius);
}

// quintic band: s(0) = 1, s(1) = 0, s'(0) = -1, s'(1) = s''(0) = s''(1) = 0
namespace {
double band(double t) { return 1.0 - t - 4.0 * t * t * t + 7.0 * t * t * t * t - 3.0 * t * t * t * t * t; }
double band_slope(double t) { return -1.0 - 12.0 * t * t + 28.0 * t * t * t - 15.0 * t * t * t * t; }
}  // namespace

MollifierProfile::MollifierProfile(double epsilon, RollOff rolloff) : eps_(epsilon), rolloff_(rolloff) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("mollifier: epsilon must be positive");
  if (rolloff == RollOff::quintic && !(epsilon < 1.0))
    throw std::invalid_argument("mollifier: quintic roll-off needs epsilon < 1");
}

double MollifierProfile::value(double tau) const {
  const double a = std::abs(tau);
  if (a >= eps_) return tau > 0.0 ? 0.0 : 1.0;
  const double core = rolloff_ == RollOff::linear ? eps_ : eps_ - eps_ * eps_;
  if (a < core) return 0.5 - tau / (2.0 * eps_);
  const double g = 0.5 * eps_ * band((a - core) / (eps_ * eps_));
  return tau > 0.0 ? g : 1.0 - g;
}

double MollifierProfile::slope(double tau) const {
  const double a = std::abs(tau);
  if (a >= eps_) return 0.0;
  const double core = rolloff_ == RollOff::linear ? eps_ : eps_ - eps_ * eps_;
  if (a < core) return -1.0 / (2.0 * eps_);
  return band_slope((a - core) / (eps_ * eps_)) / (2.0 * eps_);
}

std::vector<double> MollifierProfile::breakpoints() const {
  if (rolloff_ == RollOff::linear) return {-eps_, eps_};
  const double core = eps_ - eps_ * eps_;
  return {-eps_, -core, core, eps_};
}

Mollifier::Mollifier(const Domain& domain, double epsilon, RollOff rolloff)
    : domain_(domain), profile_(epsilon, rolloff) {
  if (!(epsilon < domain.reach()))
    throw std::invalid_argument("mollifier: epsilon must be below the reach");
}

double Mollifier::value(std::span<const double> x) const {
  return profile_.value(domain_.signed_coordinate(x));
}

AltTensor Mollifier::differential(std::span<const double> x) const {
  const double t = domain_.signed_coordinate(x);
  if (std::abs(t) >= profile_.epsilon()) return AltTensor(1);
  AltTensor n = domain_.normal(x);
  n *= profile_.slope(t);
  return n;
}

}  // namespace dforms
