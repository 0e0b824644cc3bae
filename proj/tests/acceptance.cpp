// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dforms/coform.hpp"
#include "dforms/fixtures.hpp"
#include "dforms/quadrature_rules.hpp"
#include "dforms/surface.hpp"
#include "experiment.hpp"
#include "support/oracles.hpp"

using namespace dforms;

namespace {

struct Line {
  std::string id;
  std::string title;
  bool pass = true;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double Phi(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

const BoundaryPredicate kAll = [](std::span<const double>) { return true; };

std::shared_ptr<const GaussianProduct> gauss(int dim) {
  return std::make_shared<GaussianProduct>(GaussianProduct::standard(dim));
}

std::shared_ptr<const GaussianProduct> random_gaussian(fixtures::Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (auto& s : v) s = rng.uniform(0.5, 2.0);
  return std::make_shared<GaussianProduct>(v);
}

std::vector<double> random_point(fixtures::Rng& rng, int dim, double r = 2.0) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (auto& c : v) c = rng.uniform(-r, r);
  return v;
}

// One member of the randomized adjoint suite: D ≤ 4, ω of degree ≤ 2, f of degree deg ω + 1,
// coefficients polynomial of degree ≤ 2.
struct AdjointCase {
  std::shared_ptr<const GaussianProduct> mu;
  FormField omega;
  FormField f;
};

AdjointCase adjoint_case(fixtures::Rng& rng) {
  const int dim = rng.integer(1, 4);
  const int n = rng.integer(0, std::min(2, dim - 1));
  auto mu = random_gaussian(rng, dim);
  return {mu, fixtures::random_form(rng, n, dim, 2, 3), fixtures::random_form(rng, n + 1, dim, 2, 3)};
}

Line ac1() {
  Line l{"AC1", "algebra exactness", true, {}};
  Clock clock;
  fixtures::Rng rng(1001);
  double worst = 0.0;
  int wedge_viol = 0, contract_viol = 0;
  for (int t = 0; t < 1000; ++t) {
    const int dim = rng.integer(2, 8);
    const int m = rng.integer(1, std::min(5, dim));
    const int n = rng.integer(0, m);
    const AltTensor g = fixtures::random_tensor(rng, n, dim, 4);
    const AltTensor h = fixtures::random_tensor(rng, m - n, dim, 4);
    const AltTensor f = fixtures::random_tensor(rng, m, dim, 6);
    const double lhs = inner(contract(g, f), h);
    const double rhs = inner(f, wedge(g, h));
    const double scale = std::max(hs_norm(g) * hs_norm(h) * hs_norm(f), 1e-300);
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
    const double w = hs_norm(wedge(g, h));
    if (w * w > binomial(m, n) * std::pow(hs_norm(g) * hs_norm(h), 2) * (1 + 1e-12)) ++wedge_viol;
    const double c = hs_norm(contract(g, f));
    if (c * c > binomial(m, n) * std::pow(hs_norm(g) * hs_norm(f), 2) * (1 + 1e-12)) ++contract_viol;
  }
  const double secs = clock.seconds();
  l.pass = worst <= 1e-12 && wedge_viol == 0 && contract_viol == 0 && secs < 5.0;
  l.detail = fmt("1000 triples, max rel adjunction error %.2e, bound violations %d/%d, %.2f s", worst,
                 wedge_viol, contract_viol, secs);
  return l;
}

Line ac2() {
  Line l{"AC2", "adjoint identity", true, {}};
  Clock clock;
  fixtures::Rng rng(2002);
  auto quad = IntegrationSpec::quadrature(12);
  quad.abs_tol = 1e-10;
  double worst = 0.0;
  int fails = 0;
  const int cases = 300;
  for (int t = 0; t < cases; ++t) {
    const AdjointCase c = adjoint_case(rng);
    const AdjointReport r = adjoint_check(c.omega, c.f, *c.mu, quad);
    worst = std::max(worst, std::abs(r.gap));
    if (!(std::abs(r.gap) <= 1e-10)) ++fails;
  }
  int mc_fails = 0;
  double worst_z = 0.0;
  const int mc_cases = 4;
  for (int t = 0; t < mc_cases; ++t) {
    const AdjointCase c = adjoint_case(rng);
    const AdjointReport r =
        adjoint_check(c.omega, c.f, *c.mu, IntegrationSpec::monte_carlo(1'000'000, 40 + t));
    const double z = r.std_error > 0 ? std::abs(r.gap) / r.std_error : (r.gap == 0 ? 0.0 : INFINITY);
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++mc_fails;
  }
  const double secs = clock.seconds();
  l.pass = fails == 0 && mc_fails == 0 && secs < 60.0;
  l.detail = fmt("quadrature: %d pairs, max |gap| %.2e; MC N=1e6: %d pairs, max |gap|/stderr %.2f; %.1f s",
                 cases, worst, mc_cases, worst_z, secs);
  return l;
}

Line ac3() {
  Line l{"AC3", "pointwise contraction bound", true, {}};
  fixtures::Rng rng(3003);
  int points = 0, violations = 0;
  while (points < 100'000) {
    const AdjointCase c = adjoint_case(rng);
    const int n = c.f.degree() - 1;
    for (int k = 0; k < 200; ++k, ++points) {
      const auto x = random_point(rng, c.f.dim(), 3.0);
      const AltTensor beta = c.mu->log_derivative(x);
      const AltTensor fx = c.f.evaluate(x);
      if (hs_norm(contract(beta, fx)) > std::sqrt(n + 1.0) * hs_norm(beta) * hs_norm(fx) * (1 + 1e-12))
        ++violations;
    }
  }
  l.pass = violations == 0;
  l.detail = fmt("%d points, %d violations", points, violations);
  return l;
}

Line ac4() {
  Line l{"AC4", "layer convergence", true, {}};
  const auto mu = GaussianProduct::standard(1);
  const auto h0 = make_halfspace(1, {1.0}, 0.0);
  const auto h1 = make_halfspace(1, {1.0}, 1.0);
  const double at = layer_measure(*h0, kAll, 0.1, mu, IntegrationSpec::quadrature()).value;
  const double cdf = (Phi(0.1) - Phi(-0.1)) / 0.2;
  const double lim0 = surface_measure(*h0, kAll, mu, LayerOptions{}).limit.value;
  const double lim1 = surface_measure(*h1, kAll, mu, LayerOptions{}).limit.value;
  l.pass = std::abs(at - 0.398276) <= 1e-4 && std::abs(at - cdf) <= 1e-10 &&
           std::abs(lim0 - oracle::phi(0)) <= 5e-5 && std::abs(lim1 - oracle::phi(1)) <= 5e-5;
  l.detail = fmt("eps=0.1: %.7f (cdf oracle %.7f); limit c=0 %.7f vs %.7f; c=1 %.7f vs %.7f", at, cdf, lim0,
                 oracle::phi(0), lim1, oracle::phi(1));
  return l;
}

Line ac5() {
  Line l{"AC5", "boundary pairing", true, {}};
  const auto mu = GaussianProduct::standard(2);
  const auto h = make_halfspace(2, {1.0, 0.0}, 0.0);
  const FormField g = FormField::basis(2, MultiIndex{1});
  const double want = -oracle::phi(0);
  const auto q = boundary_pairing(*h, mu, g, LayerOptions{});
  LayerOptions mc;
  mc.spec = IntegrationSpec::monte_carlo(1'000'000, 5);
  const auto s = boundary_pairing(*h, mu, g, mc);
  const double vq = q.lhs.limit.value, vs = s.lhs.limit.value;
  l.pass = std::abs(vq - want) <= 1e-6 && std::abs(vs - want) <= 1e-3 && vq < 0 && vs < 0 &&
           std::abs(q.rhs.limit.value - want) <= 1e-6;
  l.detail = fmt("quadrature %.9f, MC %.6f, target %.9f", vq, vs, want);
  return l;
}

Line ac6() {
  Line l{"AC6", "Stokes, half-space", true, {}};
  const CoForm omega(gauss(1), FormField::basis(1, MultiIndex{1}));
  const auto h = make_halfspace(1, {1.0}, 0.0);
  const double want = oracle::phi(0);
  bool ok = true;
  std::string d;
  for (const bool use_mc : {false, true}) {
    LayerOptions opts;
    if (use_mc) opts.spec = IntegrationSpec::monte_carlo(1'000'000, 6);
    const double tol = use_mc ? 1e-3 : 1e-6;
    const StokesReport r = stokes_check(omega, *h, opts);
    double worst_identity = 0.0;
    for (const auto& row : r.identity) worst_identity = std::max(worst_identity, std::abs(row.sum.value));
    ok = ok && std::abs(r.boundary.limit.value - want) <= tol && std::abs(r.volume.limit.value - want) <= tol &&
         worst_identity <= tol && r.identity.size() == opts.schedule.size();
    d += fmt("%s: boundary %.7f, volume %.7f, max identity %.1e; ", use_mc ? "MC" : "quadrature",
             r.boundary.limit.value, r.volume.limit.value, worst_identity);
  }
  l.pass = ok;
  l.detail = d + fmt("target %.7f", want);
  return l;
}

Line ac7() {
  Line l{"AC7", "Stokes, disc", true, {}};
  // certify the polar oracle first: ∫_{r<1} (1 − x₁²) dμ = ∫₀¹ r e^{−r²/2} (1 − r²/2) dr
  const double closed = 0.5 * std::exp(-0.5);
  const double lib = oracle_integrate_1d([](double r) { return r * (1 - 0.5 * r * r); },
                                         [](double r) { return std::exp(-0.5 * r * r); }, 0.0, 1.0, 4000);
  const double own = oracle::simpson([](double r) { return r * std::exp(-0.5 * r * r) * (1 - 0.5 * r * r); }, 0.0,
                                     1.0, 4000);
  const bool certified = std::abs(lib - closed) <= 1e-12 && std::abs(own - closed) <= 1e-12;
  const CoForm omega(gauss(2), FormField::basis(2, MultiIndex{1}, Expr::coord(1)));
  LayerOptions opts;
  opts.spec = IntegrationSpec::monte_carlo(1'000'000, 7);
  const StokesReport r = stokes_check(omega, *make_ball(2, 2, 1.0), opts);
  l.pass = certified && std::abs(r.boundary.limit.value - closed) <= 2e-3 &&
           std::abs(r.volume.limit.value - closed) <= 2e-3;
  l.detail = fmt("oracle %.7f (certified %s); MC boundary %.6f, volume %.6f", closed, certified ? "yes" : "no",
                 r.boundary.limit.value, r.volume.limit.value);
  return l;
}

Line ac8() {
  Line l{"AC8", "Leibniz rule", true, {}};
  Clock clock;
  fixtures::Rng rng(8008);
  LeibnizOptions opts;
  opts.points = 100;
  double worst = 0.0;
  int fails = 0;
  for (int t = 0; t < 200; ++t) {
    const int dim = rng.integer(1, 5);
    const int n = rng.integer(0, dim - 1);       // ω has codegree n + 1
    const int m = rng.integer(0, n);             // g has degree m < n + 1
    const FormField g = fixtures::random_form(rng, m, dim, 2, 3);
    FormField density = fixtures::random_form(rng, n + 1, dim, 3, 3);
    if (t % 4 == 0) density = FormField::multiply(Expr::exp_quadratic({std::vector<double>(dim, -0.1), std::vector<double>(dim, 0.05), 0.0}), density);
    const CoForm omega(random_gaussian(rng, dim), density);
    opts.seed = 100 + t;
    const LeibnizReport r = leibniz_check(g, omega, opts);
    worst = std::max(worst, r.max_pointwise_gap);
    if (!r.pass) ++fails;
  }
  const double secs = clock.seconds();
  l.pass = fails == 0 && worst <= 1e-10 && secs < 30.0;
  l.detail = fmt("200 pairs x 100 points, max gap %.2e, %.2f s", worst, secs);
  return l;
}

Line ac9() {
  Line l{"AC9", "soundness", true, {}};
  fixtures::Rng rng(9009);
  double dd = 0.0, cc = 0.0, mass = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int dim = rng.integer(1, 6);
    const int deg = rng.integer(0, std::min(3, dim));
    const FormField f = fixtures::random_form(rng, deg, dim, 3, 4);
    const FormField ddf = differential(differential(f));
    std::optional<FormField> ccf;
    if (deg >= 2) ccf = codifferential(codifferential(f));
    for (int k = 0; k < 20; ++k) {
      const auto x = random_point(rng, dim);
      dd = std::max(dd, ddf.evaluate(x).max_abs());
      if (ccf) cc = std::max(cc, ccf->evaluate(x).max_abs());
    }
    if (deg >= 1) {
      // codegree-1 measures only: the total derivative is then a scalar measure
      const FormField w = fixtures::random_form(rng, 1, dim, 3, 4);
      const CoForm omega(random_gaussian(rng, dim), w);
      mass = std::max(mass, std::abs(total_mass(coform_differential(omega), IntegrationSpec::quadrature(8)).value));
    }
  }
  l.pass = dd <= 1e-10 && cc <= 1e-10 && mass <= 1e-10;
  l.detail = fmt("max |d∘d| %.1e, max |δ∘δ| %.1e, max |∫ d ω| %.1e", dd, cc, mass);
  return l;
}

Line ac10(const std::filesystem::path& root) {
  Line l{"AC10", "determinism", true, {}};
  const std::vector<std::string> configs{"adjoint_x2e1.json", "pairing_halfspace_mc.json", "layer_ball.json"};
  bool same = true;
  for (const auto& name : configs) {
    std::string first;
    for (int k = 0; k < 2; ++k) {
      const auto dir = std::filesystem::temp_directory_path() / ("dforms_acceptance_" + std::to_string(k));
      std::filesystem::remove_all(dir);
      std::ostringstream out, err;
      cli::run((root / "configs" / name).string(), dir.string(), {}, out, err);
      std::ifstream in(dir / "report.json");
      auto report = cli::json::parse(in);
      report.erase("generated_at");
      if (k == 0) first = report.dump();
      else same = same && report.dump() == first;
    }
  }
  // worker count must not change a sampled estimate
  const auto mu = GaussianProduct::standard(3);
  auto spec = IntegrationSpec::monte_carlo(300'000, 10);
  const Expr f = Expr::coord(1) * Expr::coord(2) + Expr::coord(3) * Expr::coord(3);
  spec.workers = 1;
  const Estimate a = integrate(f, mu, spec);
  spec.workers = 4;
  const Estimate b = integrate(f, mu, spec);
  same = same && a.value == b.value && a.std_error == b.std_error;
  l.pass = same;
  l.detail = fmt("%zu configs rerun, reports identical apart from the timestamp; 1 vs 4 workers %s",
                 configs.size(), a.value == b.value ? "bit-identical" : "differ");
  return l;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path root = argc > 1 ? argv[1] : DFORMS_SOURCE_DIR;
  std::printf("kernels: %s\n", kernels::isa_name(kernels::active_isa()));
  const std::vector<std::function<Line()>> checks{ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9,
                                                  [&] { return ac10(root); }};
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Line l;
    try {
      l = checks[i]();
    } catch (const std::exception& e) {
      l = {"AC" + std::to_string(i + 1), "criterion", false, std::string("exception: ") + e.what()};
    }
    if (!l.pass) ++failed;
    std::printf("%-5s %s  %s: %s\n", l.id.c_str(), l.pass ? "PASS" : "FAIL", l.title.c_str(), l.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(checks.size()) - failed, checks.size());
  return failed == 0 ? 0 : 1;
}
