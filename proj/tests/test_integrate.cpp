#include <doctest.h>

#include <cmath>

#include "dforms/integrate.hpp"
#include "dforms/quadrature_rules.hpp"
#include "support/oracles.hpp"

using namespace dforms;

namespace {

Expr x(int p) { return Expr::coord(p); }

}  // namespace

TEST_CASE("Gauss-Hermite rules integrate Gaussian moments exactly") {
  for (int order : {2, 5, 12, 20}) {
    const Rule1D r = gauss_hermite(order);
    for (int k = 0; k <= 2 * order - 1; ++k) {
      double s = 0.0, mag = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        s += r.weights[i] * std::pow(r.nodes[i], k);
        mag += r.weights[i] * std::pow(std::abs(r.nodes[i]), k);
      }
      // odd moments cancel; measure the error against the size of the terms
      CHECK(std::abs(s - oracle::gaussian_moment(k)) <= 1e-11 * std::max(1.0, mag));
    }
  }
}

TEST_CASE("Gauss-Legendre matches Simpson on smooth integrands") {
  const auto g = [](double t) { return std::exp(-t) * std::cos(3 * t); };
  const Rule1D r = gauss_legendre(16, -0.5, 1.25);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * g(r.nodes[i]);
  CHECK(s == doctest::Approx(oracle::simpson(g, -0.5, 1.25, 20000)).epsilon(1e-12));
}

TEST_CASE("library Simpson helper agrees with the standalone one") {
  const auto one = [](double) { return 1.0; };
  const double a = oracle_integrate_1d([](double t) { return t * t; }, oracle::phi, -12.0, 12.0, 20000);
  CHECK(a == doctest::Approx(1.0).epsilon(1e-10));
  const double b = oracle_integrate_1d(one, oracle::phi, 0.0, 12.0, 20000);
  CHECK(b == doctest::Approx(oracle::simpson(oracle::phi, 0.0, 12.0, 20000)).epsilon(1e-14));
}

TEST_CASE("quadrature examples") {
  const auto mu2 = GaussianProduct::standard(2);
  const auto q = IntegrationSpec::quadrature(12);
  CHECK(integrate(Expr::constant(1.0), mu2, q).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(integrate(x(1) * x(2), mu2, q).value) < 1e-14);
  CHECK(integrate(x(1) * x(1) * x(1) * x(1), mu2, q).value == doctest::Approx(3.0).epsilon(1e-12));
  const GaussianProduct wide({4.0, 0.25});
  CHECK(integrate(x(1) * x(1) + x(2) * x(2), wide, q).value == doctest::Approx(4.25).epsilon(1e-12));
}

TEST_CASE("Monte Carlo lands within a few standard errors and is reproducible") {
  const auto mu = GaussianProduct::standard(3);
  auto spec = IntegrationSpec::monte_carlo(200'000, 11);
  const Expr f = x(1) * x(1) + x(2) * x(3) + Expr::constant(0.5);
  spec.workers = 1;
  const Estimate a = integrate(f, mu, spec);
  CHECK(a.std_error > 0.0);
  CHECK(std::abs(a.value - 1.5) <= 4.0 * a.std_error);
  spec.workers = 3;
  const Estimate b = integrate(f, mu, spec);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  spec.seed = 12;
  CHECK(integrate(f, mu, spec).value != a.value);
}

TEST_CASE("function and expression paths agree") {
  const auto mu = GaussianProduct::standard(2);
  const Expr f = x(1) * x(2) * x(2) + Expr::constant(2.0) * x(1) * x(1);
  const auto q = IntegrationSpec::quadrature(8);
  const double a = integrate(f, mu, q).value;
  const double b = integrate([&](std::span<const double> y) { return f.eval(y); }, mu, q).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
  CHECK(a == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("derived outputs carry their own standard error") {
  const auto mu = GaussianProduct::standard(1);
  auto spec = IntegrationSpec::monte_carlo(100'000, 5);
  const auto est = integrate_batch(
      mu, spec, 2,
      [](const kernels::PointBlock& pts, std::span<double> out) {
        for (std::size_t i = 0; i < pts.count; ++i) {
          const double v = pts.coord(0)[i];
          out[i] = v * v;
          out[pts.count + i] = v * v + 1e-3 * v;
        }
      },
      {{1.0, -1.0}});
  REQUIRE(est.size() == 3);
  CHECK(est[2].value == doctest::Approx(est[0].value - est[1].value).epsilon(1e-9));
  // the difference is 1e-3·x, far less noisy than either term
  CHECK(est[2].std_error < 1e-2 * est[0].std_error);
}

TEST_CASE("integration specs are validated") {
  const auto mu = GaussianProduct::standard(2);
  auto bad = IntegrationSpec::quadrature(0);
  CHECK_THROWS_AS(integrate(Expr::constant(1.0), mu, bad), std::invalid_argument);
  auto none = IntegrationSpec::monte_carlo(0, 1);
  CHECK_THROWS_AS(integrate(Expr::constant(1.0), mu, none), std::invalid_argument);
  CHECK_THROWS(GaussianProduct({1.0, -1.0}));
}

TEST_CASE("sampled Gaussian moments sit within four standard errors almost always") {
  const auto mu = GaussianProduct::standard(2);
  const auto q = IntegrationSpec::quadrature(8);
  const std::vector<Expr> moments{x(1) * x(1), x(1) * x(1) * x(2) * x(2), x(2) * x(2) * x(2) * x(2), x(1) * x(2)};
  int inside = 0, trials = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    for (const auto& m : moments) {
      const Estimate est = integrate(m, mu, IntegrationSpec::monte_carlo(4000, seed));
      inside += std::abs(est.value - integrate(m, mu, q).value) <= 4 * est.std_error;
      ++trials;
    }
  }
  // expected misses at 4σ are well under one in a thousand; allow 1%
  CHECK(inside >= 0.99 * trials);
}
