#include "dforms/quadrature_rules.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace dforms {

namespace {

// Newton iteration on the orthonormal Hermite recurrence (weight e^{-t²}).
Rule1D physicists_hermite(int n) {
  Rule1D r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * r.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * r.nodes[1];
    else
      z = 2.0 * z - r.nodes[static_cast<std::size_t>(i - 2)];
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    r.nodes[static_cast<std::size_t>(i)] = z;
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
    r.weights[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
    r.weights[static_cast<std::size_t>(n - 1 - i)] = r.weights[static_cast<std::size_t>(i)];
  }
  return r;
}

}  // namespace

Rule1D gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("Gauss-Hermite order must be >= 1");
  static std::mutex mutex;
  static std::map<int, Rule1D> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(order); it != cache.end()) return it->second;

  Rule1D r = physicists_hermite(order);
  // t ↦ √2 t maps e^{-t²} to the standard normal weight; weights normalized by √π.
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] *= std::numbers::sqrt2;
    r.weights[i] /= std::sqrt(std::numbers::pi);
  }
  // Ascending order.
  for (std::size_t i = 0, j = r.nodes.size() - 1; i < j; ++i, --j) {
    std::swap(r.nodes[i], r.nodes[j]);
    std::swap(r.weights[i], r.weights[j]);
  }
  cache.emplace(order, r);
  return r;
}

Rule1D gauss_legendre(int order, double a, double b) {
  if (order < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
  static std::mutex mutex;
  static std::map<int, Rule1D> cache;  // reference rule on [-1, 1]
  Rule1D ref;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) {
      const int n = order;
      Rule1D r;
      r.nodes.resize(static_cast<std::size_t>(n));
      r.weights.resize(static_cast<std::size_t>(n));
      const int m = (n + 1) / 2;
      for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
          double p1 = 1.0;
          double p2 = 0.0;
          for (int j = 0; j < n; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
          }
          pp = n * (z * p1 - p2) / (z * z - 1.0);
          const double z1 = z;
          z = z1 - p1 / pp;
          if (std::abs(z - z1) <= 1e-16) break;
        }
        r.nodes[static_cast<std::size_t>(i)] = -z;
        r.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        r.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
        r.weights[static_cast<std::size_t>(n - 1 - i)] = r.weights[static_cast<std::size_t>(i)];
      }
      it = cache.emplace(order, std::move(r)).first;
    }
    ref = it->second;
  }
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
    ref.nodes[i] = mid + half * ref.nodes[i];
    ref.weights[i] *= half;
  }
  return ref;
}

double oracle_integrate_1d(const std::function<double(double)>& fn,
                           const std::function<double(double)>& density, double a, double b,
                           int resolution) {
  int n = std::max(resolution, 2);
  if (n % 2) ++n;
  const double h = (b - a) / n;
  auto g = [&](double t) { return fn(t) * density(t); };
  double odd = 0.0;
  double even = 0.0;
  for (int i = 1; i < n; ++i) {
    const double t = a + i * h;
    (i % 2 ? odd : even) += g(t);
  }
  return h / 3.0 * (g(a) + g(b) + 4.0 * odd + 2.0 * even);
}

}  // namespace dforms
