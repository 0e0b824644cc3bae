#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "dforms/fixtures.hpp"
#include "dforms/surface.hpp"
#include "support/oracles.hpp"

using namespace dforms;

namespace {

Expr x(int p) { return Expr::coord(p); }
AltTensor e(std::initializer_list<int> idx, double c = 1.0) { return AltTensor::basis(MultiIndex(idx), c); }
FormField b(int dim, std::initializer_list<int> idx, const Expr& c = Expr::constant(1.0)) {
  return FormField::basis(dim, MultiIndex(idx), c);
}
std::shared_ptr<const GaussianProduct> gauss(int dim) {
  return std::make_shared<GaussianProduct>(GaussianProduct::standard(dim));
}
const BoundaryPredicate kAll = [](std::span<const double>) { return true; };
double Phi(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

// ν(1 − ε < r < 1 + ε) for the planar standard Gaussian: P(r < a) = 1 − e^{−a²/2}
double ball_layer(double eps) {
  return (std::exp(-0.5 * (1 - eps) * (1 - eps)) - std::exp(-0.5 * (1 + eps) * (1 + eps))) / (2 * eps);
}

}  // namespace

TEST_CASE("domain examples") {
  const auto h = make_halfspace(2, {1.0, 0.0}, 0.0);
  const std::vector<double> p{0.3, 7.0};
  CHECK(h->tau(p).value() == doctest::Approx(0.3));
  CHECK(h->normal(p) == e({1}));
  CHECK_FALSE(h->contains(p));

  const auto ball = make_ball(2, 2, 1.0);
  const std::vector<double> q{0.6, 0.8};
  CHECK(std::abs(ball->tau(q).value()) < 1e-15);
  CHECK((ball->normal(q) - (e({1}, 0.6) + e({2}, 0.8))).max_abs() < 1e-15);
  CHECK_FALSE(ball->tau(std::vector<double>{0.0, 0.0}).has_value());
  CHECK(ball->contains(std::vector<double>{0.1, 0.1}));

  const auto cyl = make_ball(3, 2, 1.0);
  const auto y = cyl->project(std::vector<double>{2.0, 0.0, 5.0});
  CHECK(y == std::vector<double>{1.0, 0.0, 5.0});
  CHECK_THROWS_AS(cyl->project(std::vector<double>{0.0, 0.0, 5.0}), std::domain_error);

  CHECK_THROWS_AS(make_halfspace(2, {1.0, 1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_ball(2, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_ball(2, 2, -1.0), std::invalid_argument);
}

TEST_CASE("boundary coordinates reconstruct the point") {
  fixtures::Rng rng(10);
  const double s = std::sqrt(0.5);
  std::vector<std::unique_ptr<Domain>> domains;
  domains.push_back(make_halfspace(3, {s, 0.0, -s}, 0.4));
  domains.push_back(make_ball(3, 2, 1.5));
  domains.push_back(make_ball(3, 3, 0.8));
  for (const auto& d : domains) {
    for (int t = 0; t < 200; ++t) {
      std::vector<double> p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      const auto tau = d->tau(p);
      if (!tau) continue;
      const auto y = d->project(p);
      const AltTensor n = d->normal(p);
      for (int k = 0; k < 3; ++k)
        CHECK(y[k] + *tau * n[MultiIndex{k + 1}] == doctest::Approx(p[k]).epsilon(1e-9).scale(1.0));
      CHECK(std::abs(d->signed_coordinate(y)) < 1e-9);
      CHECK(hs_norm(n) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("stepping off the boundary along the normal") {
  fixtures::Rng rng(12);
  std::vector<std::unique_ptr<Domain>> domains;
  domains.push_back(make_halfspace(2, {0.6, 0.8}, -0.3, 5.0));
  domains.push_back(make_ball(3, 2, 1.2));
  for (const auto& d : domains) {
    for (int k = 0; k < 300; ++k) {
      std::vector<double> p(static_cast<std::size_t>(d->dim()));
      for (auto& c : p) c = rng.uniform(-2, 2);
      if (!d->tau(p)) continue;
      const auto y = d->project(p);
      const AltTensor n = d->normal(y);
      const double t = rng.uniform(-0.99, 0.99) * std::min(d->reach(), 1.0);
      std::vector<double> z = y;
      for (int i = 0; i < d->dim(); ++i) z[static_cast<std::size_t>(i)] += t * n[MultiIndex{i + 1}];
      CHECK(d->tau(z).value() == doctest::Approx(t).epsilon(1e-9).scale(1.0));
      const auto back = d->project(z);
      for (std::size_t i = 0; i < y.size(); ++i) CHECK(back[i] == doctest::Approx(y[i]).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("mollifier examples") {
  const auto h = make_halfspace(1, {1.0}, 0.0);
  const Mollifier m(*h, 0.1);
  CHECK(m.value(std::vector<double>{-1.0}) == 1.0);
  CHECK(m.value(std::vector<double>{1.0}) == 0.0);
  CHECK(m.value(std::vector<double>{0.0}) == 0.5);
  CHECK((m.differential(std::vector<double>{0.0}) - e({1}, -5.0)).max_abs() < 1e-12);
  CHECK(m.differential(std::vector<double>{0.1}).is_zero());
  CHECK(m.differential(std::vector<double>{-0.3}).is_zero());
  CHECK_THROWS_AS(Mollifier(*make_ball(2, 2, 1.0), 1.0), std::invalid_argument);
}

TEST_CASE("mollifier slope bound and pointwise convergence") {
  for (RollOff r : {RollOff::linear, RollOff::quintic}) {
    const double eps = 0.2;
    const MollifierProfile h(eps, r);
    const double cap = r == RollOff::linear ? 1.0 / (2 * eps) : 1.52 / (2 * eps);
    double prev = 1.0;
    for (int i = 0; i <= 4000; ++i) {
      const double t = -0.3 + 0.6 * i / 4000.0;
      CHECK(std::abs(h.slope(t)) <= cap);
      CHECK(h.value(t) <= prev + 1e-15);  // nonincreasing
      CHECK(h.value(t) >= 0.0);
      CHECK(h.value(t) <= 1.0);
      prev = h.value(t);
    }
    CHECK(h.value(0.0) == doctest::Approx(0.5));
    CHECK(h.slope(0.0) == doctest::Approx(-1.0 / (2 * eps)));
  }
  const auto dom = make_halfspace(2, {0.0, 1.0}, 0.0);
  const std::vector<double> inside{3.0, -0.05}, outside{-1.0, 0.02};
  for (double eps : {0.015, 0.01, 0.001}) {
    CHECK(Mollifier(*dom, eps).value(inside) == 1.0);
    CHECK(Mollifier(*dom, eps).value(outside) == 0.0);
  }
}

TEST_CASE("quintic roll-off is continuous with matching slopes") {
  const double eps = 0.1;
  const MollifierProfile h(eps, RollOff::quintic);
  for (double t : h.breakpoints()) {
    const double d = 1e-9;
    CHECK(h.value(t - d) == doctest::Approx(h.value(t + d)).epsilon(1e-7).scale(1.0));
    CHECK(h.slope(t - d) == doctest::Approx(h.slope(t + d)).epsilon(1e-5).scale(1.0));
  }
  // the slope agrees with differences of the value everywhere
  for (int i = 1; i < 200; ++i) {
    const double t = -0.12 + 0.24 * i / 200.0;
    const double fd = (h.value(t + 1e-7) - h.value(t - 1e-7)) / 2e-7;
    CHECK(h.slope(t) == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
  }
  CHECK_THROWS_AS(MollifierProfile(1.0, RollOff::quintic), std::invalid_argument);
}

TEST_CASE("layer measure matches the Gaussian layer mass") {
  const auto mu = GaussianProduct::standard(1);
  const auto h = make_halfspace(1, {1.0}, 0.0);
  const auto q = IntegrationSpec::quadrature();
  // tabulated six-digit value; the exact mass is 0.3982784
  CHECK(layer_measure(*h, kAll, 0.1, mu, q).value == doctest::Approx(0.398276).epsilon(5e-6).scale(1.0));
  for (double eps : {0.2, 0.05, 0.01}) {
    const double want = (Phi(eps) - Phi(-eps)) / (2 * eps);
    CHECK(layer_measure(*h, kAll, eps, mu, q).value == doctest::Approx(want).epsilon(1e-12).scale(1.0));
  }
  CHECK(layer_measure(*h, [](auto) { return false; }, 0.1, mu, q).value == 0.0);

  const auto mu2 = GaussianProduct::standard(2);
  const auto ball = make_ball(2, 2, 1.0);
  for (double eps : {0.2, 0.05})
    CHECK(layer_measure(*ball, kAll, eps, mu2, q).value == doctest::Approx(ball_layer(eps)).epsilon(1e-9).scale(1.0));
  const auto mu3 = GaussianProduct::standard(3);
  CHECK(layer_measure(*make_ball(3, 2, 1.0), kAll, 0.1, mu3, q).value ==
        doctest::Approx(ball_layer(0.1)).epsilon(1e-9).scale(1.0));
}

TEST_CASE("layer measure is additive in the boundary set") {
  const auto mu = GaussianProduct::standard(2);
  const auto ball = make_ball(2, 2, 1.0);
  const auto q = IntegrationSpec::quadrature();
  const BoundaryPredicate upper = [](std::span<const double> y) { return y[1] > 0.3; };
  const BoundaryPredicate lower = [](std::span<const double> y) { return !(y[1] > 0.3); };
  const double a = layer_measure(*ball, upper, 0.1, mu, IntegrationSpec::monte_carlo(100'000, 2)).value;
  const double c = layer_measure(*ball, lower, 0.1, mu, IntegrationSpec::monte_carlo(100'000, 2)).value;
  const double all = layer_measure(*ball, kAll, 0.1, mu, IntegrationSpec::monte_carlo(100'000, 2)).value;
  CHECK(a + c == doctest::Approx(all).epsilon(1e-12));
  // the upper arc y₂ > 0.3 has angular share (π − 2 asin 0.3)/(2π)
  const double share = (std::numbers::pi - 2 * std::asin(0.3)) / (2 * std::numbers::pi);
  // angular rules don't resolve a cut arc; sample instead
  const Estimate arc = layer_measure(*ball, upper, 0.1, mu, IntegrationSpec::monte_carlo(400'000, 4));
  CHECK(std::abs(arc.value - share * ball_layer(0.1)) <= 4 * arc.std_error);
  CHECK(layer_measure(*ball, upper, 0.1, mu, q).value == doctest::Approx(share * ball_layer(0.1)).epsilon(0.05));
}

TEST_CASE("layer bias is quadratic in epsilon") {
  const auto mu = GaussianProduct::standard(1);
  const auto h = make_halfspace(1, {1.0}, 0.0);
  const auto q = IntegrationSpec::quadrature();
  // average of φ over (−ε, ε) is φ(0)(1 − ε²/6 + …)
  for (double eps : {0.05, 0.025}) {
    const double c = (layer_measure(*h, kAll, eps, mu, q).value - oracle::phi(0)) / (eps * eps);
    CHECK(c == doctest::Approx(-oracle::phi(0) / 6).epsilon(2e-3));
  }
}

TEST_CASE("surface measure limits") {
  const LayerOptions opts;
  const auto mu1 = GaussianProduct::standard(1);
  const auto t0 = surface_measure(*make_halfspace(1, {1.0}, 0.0), kAll, mu1, opts);
  CHECK(t0.limit.value == doctest::Approx(oracle::phi(0)).epsilon(1e-7).scale(1.0));
  CHECK(t0.rows.size() == 6);
  CHECK_FALSE(t0.rows[0].extrapolated.has_value());
  CHECK(t0.rows[5].extrapolated.has_value());
  const auto t1 = surface_measure(*make_halfspace(1, {1.0}, 1.0), kAll, mu1, opts);
  CHECK(t1.limit.value == doctest::Approx(oracle::phi(1)).epsilon(1e-7).scale(1.0));
  const auto tb = surface_measure(*make_ball(2, 2, 1.0), kAll, GaussianProduct::standard(2), opts);
  CHECK(tb.limit.value == doctest::Approx(std::exp(-0.5)).epsilon(1e-7).scale(1.0));

  LayerOptions quintic = opts;
  quintic.rolloff = RollOff::quintic;
  quintic.schedule = {0.1, 0.05, 0.025, 0.0125};
  const auto tq = surface_measure(*make_halfspace(1, {1.0}, 0.0), kAll, mu1, quintic);
  CHECK(tq.limit.value == doctest::Approx(oracle::phi(0)).epsilon(1e-4).scale(1.0));
}

TEST_CASE("Richardson combination cancels a pure quadratic") {
  const auto v = [](double eps) { return 2.0 + 3.0 * eps * eps; };
  CHECK(richardson(0.2, v(0.2), 0.1, v(0.1)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("schedules are validated") {
  const auto ball = make_ball(2, 2, 1.0);
  CHECK_NOTHROW(validate_schedule(default_schedule(), *ball));
  CHECK_THROWS_AS(validate_schedule(std::vector<double>{}, *ball), std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule(std::vector<double>{0.1, 0.2}, *ball), std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule(std::vector<double>{1.5, 0.5}, *ball), std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule(std::vector<double>{0.1, -0.1}, *ball), std::invalid_argument);
}

TEST_CASE("pairs without a chart fall back to plain sampling") {
  const GaussianProduct mu({1.0, 2.0});
  const auto ball = make_ball(2, 2, 1.0);
  CHECK(ball->chart(mu) == nullptr);
  const double eps = 0.1;
  // polar oracle: ∫_{1−ε}^{1+ε} r ∫ ρ(r cos θ, r sin θ) dθ dr / 2ε
  const auto ring = [&](double r) {
    return r * oracle::simpson([&](double th) { return mu.density(std::vector<double>{r * std::cos(th), r * std::sin(th)}); },
                               0.0, 2 * std::numbers::pi, 400);
  };
  const double want = oracle::simpson(ring, 1 - eps, 1 + eps, 200) / (2 * eps);
  const Estimate got = layer_measure(*ball, kAll, eps, mu, IntegrationSpec::monte_carlo(400'000, 6));
  CHECK(std::abs(got.value - want) <= 4 * got.std_error);
  CHECK_THROWS_AS(layer_measure(*ball, kAll, eps, mu, IntegrationSpec::quadrature()), std::invalid_argument);
}

TEST_CASE("spherical layers need sampling") {
  const auto mu = GaussianProduct::standard(3);
  const auto sphere = make_ball(3, 3, 1.0);
  CHECK_THROWS_AS(layer_measure(*sphere, kAll, 0.1, mu, IntegrationSpec::quadrature()), std::invalid_argument);
  // ν(1 − ε < ‖x‖ < 1 + ε) from the χ₃ density r² e^{−r²/2} √(2/π)
  const auto chi3 = [](double r) { return std::sqrt(2 / std::numbers::pi) * r * r * std::exp(-0.5 * r * r); };
  const double want = oracle::simpson(chi3, 0.9, 1.1, 2000) / 0.2;
  const Estimate got = layer_measure(*sphere, kAll, 0.1, mu, IntegrationSpec::monte_carlo(20'000, 1));
  CHECK(std::abs(got.value - want) <= 1e-9 + 4 * got.std_error);
}

TEST_CASE("boundary pairing examples") {
  const LayerOptions opts;
  const auto mu1 = GaussianProduct::standard(1);
  const auto mu2 = GaussianProduct::standard(2);
  const auto r1 = boundary_pairing(*make_halfspace(1, {1.0}, 0.0), mu1, b(1, {1}), opts);
  CHECK(r1.lhs.limit.value == doctest::Approx(-oracle::phi(0)).epsilon(1e-6).scale(1.0));
  CHECK(r1.rhs.limit.value == doctest::Approx(-oracle::phi(0)).epsilon(1e-6).scale(1.0));
  CHECK(r1.pass);
  const auto h2 = make_halfspace(2, {1.0, 0.0}, 0.0);
  const auto r2 = boundary_pairing(*h2, mu2, b(2, {2}), opts);
  CHECK(std::abs(r2.lhs.limit.value) < 1e-12);
  CHECK(r2.pass);
  const auto r3 = boundary_pairing(*h2, mu2, b(2, {1}, x(2)), opts);
  CHECK(std::abs(r3.rhs.limit.value) < 1e-12);
  CHECK(r3.pass);
  CHECK_THROWS_AS(boundary_pairing(*h2, mu2, b(2, {1, 2}), opts), std::invalid_argument);
}

TEST_CASE("surface integral examples") {
  const LayerOptions opts;
  const auto s1 = surface_integral(CoForm(gauss(1), b(1, {1})), *make_halfspace(1, {1.0}, 0.0), opts);
  CHECK(s1.limit.value == doctest::Approx(oracle::phi(0)).epsilon(1e-7).scale(1.0));
  const auto s2 = surface_integral(CoForm(gauss(2), b(2, {2})), *make_halfspace(2, {1.0, 0.0}, 0.0), opts);
  CHECK(std::abs(s2.limit.value) < 1e-12);
  const auto s3 = surface_integral(CoForm(gauss(2), b(2, {1}, x(1))), *make_ball(2, 2, 1.0), opts);
  CHECK(s3.limit.value == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-7).scale(1.0));
}

TEST_CASE("Stokes on the half-line") {
  const auto r = stokes_check(CoForm(gauss(1), b(1, {1})), *make_halfspace(1, {1.0}, 0.0), LayerOptions{});
  CHECK(r.boundary.limit.value == doctest::Approx(oracle::phi(0)).epsilon(1e-7).scale(1.0));
  CHECK(r.volume.limit.value == doctest::Approx(oracle::phi(0)).epsilon(1e-7).scale(1.0));
  // volume side as a direct integral: ∫_{−∞}^0 (−t) φ(t) dt
  const double vol = oracle::simpson([](double t) { return -t * oracle::phi(t); }, -12.0, 0.0, 20000);
  CHECK(r.sharp_volume.value == doctest::Approx(vol).epsilon(1e-9).scale(1.0));
  CHECK(r.identity.size() == 6);
  for (const auto& row : r.identity) CHECK(row.pass);
  CHECK(r.gap_trace.size() == 5);
  CHECK(r.pass);
}

TEST_CASE("Stokes on a disc with a polar oracle") {
  const auto r = stokes_check(CoForm(gauss(2), b(2, {1}, x(1))), *make_ball(2, 2, 1.0), LayerOptions{});
  // ∫_{r<1} (1 − x₁²) dμ in polar coordinates
  const double vol = oracle::simpson(
      [](double rr) { return rr * std::exp(-0.5 * rr * rr) * (1 - 0.5 * rr * rr); }, 0.0, 1.0, 2000);
  CHECK(vol == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-10));
  CHECK(r.boundary.limit.value == doctest::Approx(vol).epsilon(1e-7).scale(1.0));
  CHECK(r.sharp_volume.value == doctest::Approx(vol).epsilon(1e-6).scale(1.0));
  CHECK(r.pass);
  for (std::size_t i = 1; i < r.gap_trace.size(); ++i) CHECK(r.gap_trace[i] <= r.gap_trace[i - 1] + 1e-12);
}
