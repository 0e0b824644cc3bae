#include "dforms/surface.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "dforms/layer.hpp"

namespace dforms {

namespace {

using Combo = std::map<std::size_t, double>;

Combo operator-(Combo a, const Combo& b) {
  for (const auto& [k, v] : b) a[k] -= v;
  return a;
}
Combo operator+(Combo a, const Combo& b) {
  for (const auto& [k, v] : b) a[k] += v;
  return a;
}

class ProblemBuilder {
 public:
  explicit ProblemBuilder(const LayerOptions& opts) {
    problem_.breakpoints.push_back(0.0);
    for (double e : opts.schedule) {
      const MollifierProfile prof(e, opts.rolloff);
      for (double b : prof.breakpoints()) problem_.breakpoints.push_back(b);
    }
  }
  explicit ProblemBuilder(double epsilon) { problem_.breakpoints = {-epsilon, 0.0, epsilon}; }

  std::size_t field(FormField f) {
    problem_.fields.push_back(std::move(f));
    return problem_.fields.size() - 1;
  }
  Combo term(LayerTerm t) {
    problem_.terms.push_back(std::move(t));
    return {{problem_.terms.size() - 1, 1.0}};
  }
  // Index of the derived output for a combination; call after all terms.
  std::size_t derive(const Combo& c) {
    derived_.push_back(c);
    return problem_.terms.size() + derived_.size() - 1;
  }

  std::vector<Estimate> run(const Domain& domain, const DifferentiableMeasure& nu,
                            const IntegrationSpec& spec) {
    for (const auto& c : derived_) {
      std::vector<double> row(problem_.terms.size(), 0.0);
      for (const auto& [k, v] : c) row[k] += v;
      problem_.derived.push_back(std::move(row));
    }
    return integrate_layer(domain, nu, problem_, spec);
  }

  std::size_t index(const Combo& c) const { return c.begin()->first; }

 private:
  LayerProblem problem_;
  std::vector<Combo> derived_;
};

// Per-ε raw terms plus the Richardson rows built from them.
struct TracePlan {
  std::vector<double> eps;
  std::vector<Combo> raw;
  std::vector<Combo> extrap;  // extrap[k] pairs rows k-1 and k; extrap[0] = raw[0]
  std::vector<std::size_t> raw_out;
  std::vector<std::size_t> extrap_out;

  const Combo& limit() const { return extrap.back(); }
};

void plan_extrapolation(TracePlan& t) {
  t.extrap.push_back(t.raw[0]);
  for (std::size_t k = 1; k < t.raw.size(); ++k) {
    const double a2 = t.eps[k - 1] * t.eps[k - 1];
    const double b2 = t.eps[k] * t.eps[k];
    Combo c;
    c[t.raw[k].begin()->first] += a2 / (a2 - b2);
    c[t.raw[k - 1].begin()->first] -= b2 / (a2 - b2);
    t.extrap.push_back(std::move(c));
  }
}

void register_trace(ProblemBuilder& pb, TracePlan& t) {
  for (const auto& r : t.raw) t.raw_out.push_back(pb.index(r));
  t.extrap_out.push_back(t.raw_out[0]);
  for (std::size_t k = 1; k < t.extrap.size(); ++k) t.extrap_out.push_back(pb.derive(t.extrap[k]));
}

ConvergenceTrace collect(const TracePlan& t, const std::vector<Estimate>& est) {
  ConvergenceTrace tr;
  for (std::size_t k = 0; k < t.eps.size(); ++k) {
    TraceRow row;
    row.epsilon = t.eps[k];
    row.estimate = est[t.raw_out[k]];
    if (k > 0) row.extrapolated = est[t.extrap_out[k]];
    tr.rows.push_back(row);
  }
  tr.limit = est[t.extrap_out.back()];
  return tr;
}

std::function<double(double)> layer_indicator(double eps, double scale) {
  return [eps, scale](double tau) { return std::abs(tau) < eps ? scale / (2.0 * eps) : 0.0; };
}

FormField unit_scalar(int dim) { return FormField::scalar(dim, Expr::constant(1.0)); }

void require_one_form(const FormField& f, const Domain& domain, const char* what) {
  if (f.degree() != 1) throw std::invalid_argument(std::string(what) + ": expected degree 1");
  if (f.dim() != domain.dim()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

std::vector<double> default_schedule() {
  std::vector<double> s;
  for (int k = 0; k <= 5; ++k) s.push_back(0.2 * std::ldexp(1.0, -k));
  return s;
}

void validate_schedule(std::span<const double> schedule, const Domain& domain, RollOff rolloff) {
  if (schedule.empty()) throw std::invalid_argument("epsilon schedule is empty");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const double e = schedule[k];
    if (!(e > 0.0) || !(e < domain.reach()))
      throw std::invalid_argument("epsilon " + std::to_string(e) + " outside (0, reach)");
    if (rolloff == RollOff::quintic && !(e < 1.0))
      throw std::invalid_argument("quintic roll-off needs epsilon < 1");
    if (k > 0 && !(e < schedule[k - 1]))
      throw std::invalid_argument("epsilon schedule must be strictly decreasing");
  }
}

double richardson(double eps_a, double value_a, double eps_b, double value_b) {
  const double a2 = eps_a * eps_a;
  const double b2 = eps_b * eps_b;
  return (a2 * value_b - b2 * value_a) / (a2 - b2);
}

Estimate layer_measure(const Domain& domain, const BoundaryPredicate& B, double epsilon,
                       const DifferentiableMeasure& nu, const IntegrationSpec& spec) {
  const double e[] = {epsilon};
  validate_schedule(e, domain);
  ProblemBuilder pb(epsilon);
  const std::size_t one = pb.field(unit_scalar(domain.dim()));
  pb.term({one, layer_indicator(epsilon, 1.0), false, B});
  return pb.run(domain, nu, spec).front();
}

ConvergenceTrace surface_measure(const Domain& domain, const BoundaryPredicate& B,
                                 const DifferentiableMeasure& nu, const LayerOptions& opts) {
  validate_schedule(opts.schedule, domain, opts.rolloff);
  ProblemBuilder pb(opts);
  const std::size_t one = pb.field(unit_scalar(domain.dim()));
  TracePlan t;
  t.eps = opts.schedule;
  for (double e : t.eps) t.raw.push_back(pb.term({one, layer_indicator(e, 1.0), false, B}));
  plan_extrapolation(t);
  register_trace(pb, t);
  return collect(t, pb.run(domain, nu, opts.spec));
}

BoundaryPairingReport boundary_pairing(const Domain& domain, const DifferentiableMeasure& nu,
                                       const FormField& g, const LayerOptions& opts) {
  require_one_form(g, domain, "boundary_pairing");
  validate_schedule(opts.schedule, domain, opts.rolloff);
  ProblemBuilder pb(opts);
  const std::size_t gf = pb.field(g);
  TracePlan lhs, rhs;
  lhs.eps = rhs.eps = opts.schedule;
  for (double e : opts.schedule) {
    const MollifierProfile prof(e, opts.rolloff);
    lhs.raw.push_back(pb.term({gf, [prof](double tau) { return prof.slope(tau); }, false, {}}));
    rhs.raw.push_back(pb.term({gf, layer_indicator(e, -1.0), true, {}}));
  }
  plan_extrapolation(lhs);
  plan_extrapolation(rhs);
  register_trace(pb, lhs);
  register_trace(pb, rhs);
  const std::size_t gap = pb.derive(lhs.limit() - rhs.limit());
  const auto est = pb.run(domain, nu, opts.spec);

  BoundaryPairingReport r;
  r.lhs = collect(lhs, est);
  r.rhs = collect(rhs, est);
  r.gap = est[gap];
  r.tolerance = opts.effective_tolerance();
  r.pass = std::abs(r.gap.value) <= r.tolerance;
  return r;
}

ConvergenceTrace surface_integral(const CoForm& omega, const Domain& domain,
                                  const LayerOptions& opts) {
  if (omega.codegree() != 1) throw std::invalid_argument("surface_integral: codegree must be 1");
  require_one_form(omega.density(), domain, "surface_integral");
  validate_schedule(opts.schedule, domain, opts.rolloff);
  ProblemBuilder pb(opts);
  const std::size_t F = pb.field(omega.density());
  TracePlan t;
  t.eps = opts.schedule;
  for (double e : t.eps) t.raw.push_back(pb.term({F, layer_indicator(e, 1.0), true, {}}));
  plan_extrapolation(t);
  register_trace(pb, t);
  return collect(t, pb.run(domain, omega.base(), opts.spec));
}

StokesReport stokes_check(const CoForm& omega, const Domain& domain, const LayerOptions& opts) {
  if (omega.codegree() != 1) throw std::invalid_argument("stokes_check: codegree must be 1");
  require_one_form(omega.density(), domain, "stokes_check");
  validate_schedule(opts.schedule, domain, opts.rolloff);

  const CoForm d_omega = coform_differential(omega);
  ProblemBuilder pb(opts);
  const std::size_t F = pb.field(omega.density());
  const std::size_t D = pb.field(d_omega.density());

  TracePlan bnd, vol;
  bnd.eps = vol.eps = opts.schedule;
  std::vector<Combo> slope_terms;
  for (double e : opts.schedule) {
    const MollifierProfile prof(e, opts.rolloff);
    bnd.raw.push_back(pb.term({F, layer_indicator(e, 1.0), true, {}}));
    vol.raw.push_back(pb.term({D, [prof](double tau) { return prof.value(tau); }, false, {}}));
    slope_terms.push_back(pb.term({F, [prof](double tau) { return prof.slope(tau); }, false, {}}));
  }
  const Combo sharp = pb.term({D, [](double tau) { return tau < 0.0 ? 1.0 : 0.0; }, false, {}});

  plan_extrapolation(bnd);
  plan_extrapolation(vol);
  register_trace(pb, bnd);
  register_trace(pb, vol);
  std::vector<std::size_t> sums, row_gaps;
  for (std::size_t k = 0; k < opts.schedule.size(); ++k) {
    sums.push_back(pb.derive(slope_terms[k] + vol.raw[k]));
    row_gaps.push_back(pb.derive(bnd.extrap[k] - vol.extrap[k]));
  }
  const std::size_t gap = pb.derive(bnd.limit() - vol.limit());
  const std::size_t sharp_gap = pb.derive(vol.limit() - sharp);
  const auto est = pb.run(domain, omega.base(), opts.spec);

  StokesReport r;
  r.tolerance = opts.effective_tolerance();
  r.boundary = collect(bnd, est);
  r.volume = collect(vol, est);
  r.sharp_volume = est[pb.index(sharp)];
  r.gap = est[gap];
  r.sharp_gap = est[sharp_gap];
  r.pass = std::abs(r.gap.value) <= r.tolerance && std::abs(r.sharp_gap.value) <= r.tolerance;
  for (std::size_t k = 0; k < opts.schedule.size(); ++k) {
    IdentityRow row;
    row.epsilon = opts.schedule[k];
    row.boundary_term = est[pb.index(slope_terms[k])];
    row.volume_term = est[pb.index(vol.raw[k])];
    row.sum = est[sums[k]];
    row.pass = std::abs(row.sum.value) <= r.tolerance;
    r.pass = r.pass && row.pass;
    r.identity.push_back(row);
    if (k > 0) r.gap_trace.push_back(std::abs(est[row_gaps[k]].value));
  }
  return r;
}

}  // namespace dforms
