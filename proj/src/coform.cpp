#include "dforms/coform.hpp"

#include <cmath>
#include <stdexcept>

namespace dforms {

namespace {

void require_dim(const FormField& f, const DifferentiableMeasure& mu, const char* what) {
  if (f.dim() != mu.dim())
    throw std::invalid_argument(std::string(what) + ": form dimension " + std::to_string(f.dim()) +
                                " does not match measure dimension " + std::to_string(mu.dim()));
}

VectorField beta_field(const DifferentiableMeasure& mu) {
  auto beta = mu.log_derivative_field();
  if (!beta)
    throw std::invalid_argument("logarithmic derivative is not available in closed form");
  return *beta;
}

// Squared HS norms of a compiled form at every point of the block.
void squared_norms(const CompiledForm& f, const kernels::PointBlock& pts, std::vector<double>& coeffs,
                   double* out) {
  std::fill(out, out + pts.count, 0.0);
  if (f.size() == 0) return;
  coeffs.resize(f.size() * pts.count);
  f.eval_block(pts, coeffs.data());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double* c = coeffs.data() + k * pts.count;
    for (std::size_t i = 0; i < pts.count; ++i) out[i] += c[i] * c[i];
  }
}

Estimate pth_root(const Estimate& m, double p) {
  Estimate r;
  r.value = std::pow(std::max(m.value, 0.0), 1.0 / p);
  r.std_error = m.value > 0.0 ? m.std_error * r.value / (p * m.value) : 0.0;
  return r;
}

// ∫ (‖β‖^p if with_beta) ‖f‖^p dμ.
Estimate norm_moment(const FormField& f, const DifferentiableMeasure& mu, double p, bool with_beta,
                     const IntegrationSpec& spec) {
  const CompiledForm cf(f);
  std::optional<CompiledForm> beta;
  if (with_beta) beta.emplace(FormField::one_form(beta_field(mu)));
  return integrate_batch(mu, spec, 1, [&](const kernels::PointBlock& pts, std::span<double> out) {
    std::vector<double> scratch;
    squared_norms(cf, pts, scratch, out.data());
    std::vector<double> b;
    if (beta) {
      b.resize(pts.count);
      squared_norms(*beta, pts, scratch, b.data());
    }
    for (std::size_t i = 0; i < pts.count; ++i) {
      double v = std::pow(out[i], 0.5 * p);
      if (beta) v *= std::pow(b[i], 0.5 * p);
      out[i] = v;
    }
  }).front();
}

}  // namespace

Estimate pairing(const FormField& omega, const FormField& f, const DifferentiableMeasure& mu,
                 const IntegrationSpec& spec) {
  if (omega.degree() != f.degree())
    throw std::invalid_argument("pairing: degree mismatch (" + std::to_string(omega.degree()) +
                                " vs " + std::to_string(f.degree()) + ")");
  if (omega.dim() != f.dim()) throw std::invalid_argument("pairing: dimension mismatch");
  require_dim(f, mu, "pairing");
  return integrate(pointwise_inner(omega, f), mu, spec);
}

Estimate lp_norm(const FormField& f, const DifferentiableMeasure& mu, double p,
                 const IntegrationSpec& spec) {
  if (!(p > 1.0)) throw std::invalid_argument("lp_norm: exponent must exceed 1");
  require_dim(f, mu, "lp_norm");
  return pth_root(norm_moment(f, mu, p, false, spec), p);
}

SobolevNorm sobolev_norm(const FormField& f, const DifferentiableMeasure& mu, double p,
                         const IntegrationSpec& spec) {
  if (!(p > 1.0)) throw std::invalid_argument("sobolev_norm: exponent must exceed 1");
  if (f.degree() == 0) throw std::invalid_argument("sobolev_norm: codifferential of a 0-form");
  require_dim(f, mu, "sobolev_norm");
  SobolevNorm s;
  s.lp = lp_norm(f, mu, p, spec).value;
  s.codiff = lp_norm(codifferential(f), mu, p, spec).value;
  s.beta = pth_root(norm_moment(f, mu, p, true, spec), p).value;
  s.total = s.lp + s.codiff + s.beta;
  s.finite = std::isfinite(s.total);
  return s;
}

FormField dstar(const FormField& f, const DifferentiableMeasure& mu) {
  require_dim(f, mu, "dstar");
  return -(contract_field(beta_field(mu), f) + codifferential(f));
}

CoForm::CoForm(std::shared_ptr<const DifferentiableMeasure> base, FormField density)
    : base_(std::move(base)), density_(std::move(density)) {
  if (!base_) throw std::invalid_argument("CoForm needs a base measure");
  require_dim(density_, *base_, "CoForm");
}

CoForm coform_differential(const CoForm& omega) {
  const int n = omega.codegree();
  if (n == 0) throw std::invalid_argument("coform_differential: codegree 0 has no differential");
  const FormField& F = omega.density();
  FormField d = codifferential(F) + contract_field(beta_field(omega.base()), F);
  if ((n - 1) % 2) d = -d;
  return CoForm(omega.base_ptr(), std::move(d));
}

CoForm wedge_measure(const FormField& g, const CoForm& omega) {
  if (g.degree() > omega.codegree())
    throw std::invalid_argument("wedge_measure: form degree exceeds codegree");
  if (g.dim() != omega.dim()) throw std::invalid_argument("wedge_measure: dimension mismatch");
  return CoForm(omega.base_ptr(), contract_fields(g, omega.density()));
}

Estimate total_mass(const CoForm& omega, const IntegrationSpec& spec) {
  if (omega.codegree() != 0) throw std::invalid_argument("total_mass: codegree must be 0");
  return integrate(omega.density().coeff(MultiIndex{}), omega.base(), spec);
}

AdjointReport adjoint_check(const FormField& omega, const FormField& f,
                            const DifferentiableMeasure& mu, const IntegrationSpec& spec) {
  if (f.degree() != omega.degree() + 1)
    throw std::invalid_argument("adjoint_check: f must have degree deg(omega) + 1");
  if (omega.dim() != f.dim()) throw std::invalid_argument("adjoint_check: dimension mismatch");
  require_dim(f, mu, "adjoint_check");

  const Expr lhs = pointwise_inner(differential(omega), f);
  const Expr rhs = pointwise_inner(omega, dstar(f, mu));
  const kernels::Program pl = lhs.compile();
  const kernels::Program pr = rhs.compile();
  auto est = integrate_batch(
      mu, spec, 2,
      [&](const kernels::PointBlock& pts, std::span<double> out) {
        kernels::eval_program(pl, pts, out.data());
        kernels::eval_program(pr, pts, out.data() + pts.count);
      },
      {{1.0, -1.0}});

  AdjointReport r;
  r.lhs = est[0].value;
  r.rhs = est[1].value;
  r.gap = est[2].value;
  r.std_error = est[2].std_error;
  r.tolerance = spec.tolerance(r.std_error);
  r.pass = std::abs(r.gap) <= r.tolerance;
  return r;
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t p = 0; p < x.size(); ++p) {
    if (p < lo.size() && x[p] < lo[p]) return false;
    if (p < hi.size() && x[p] >= hi[p]) return false;
  }
  return true;
}

std::pair<FormField, FormField> leibniz_sides(const FormField& g, const CoForm& omega) {
  const int n = omega.codegree() - 1;
  if (n < 0) throw std::invalid_argument("leibniz_check: codegree must be at least 1");
  if (g.degree() >= omega.codegree())
    throw std::invalid_argument("leibniz_check: form degree must be below the codegree");
  FormField lhs = coform_differential(wedge_measure(g, omega)).density();
  FormField rhs = wedge_measure(g, coform_differential(omega)).density();
  const FormField dg_part = wedge_measure(differential(g), omega).density();
  rhs += (n % 2 ? -1.0 : 1.0) * dg_part;
  return {std::move(lhs), std::move(rhs)};
}

LeibnizReport leibniz_check(const FormField& g, const CoForm& omega, const LeibnizOptions& opts) {
  auto [lhs, rhs] = leibniz_sides(g, omega);
  const auto& mu = omega.base();
  const auto dim = static_cast<std::size_t>(mu.dim());

  LeibnizReport r;
  {
    const CounterRng rng(opts.seed);
    std::vector<double> pts(dim * opts.points);
    mu.sample(rng, 0, opts.points, pts.data());
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < opts.points; ++i) {
      for (std::size_t p = 0; p < dim; ++p) x[p] = pts[p * opts.points + i];
      r.max_pointwise_gap =
          std::max(r.max_pointwise_gap, (lhs.evaluate(x) - rhs.evaluate(x)).max_abs());
    }
  }
  r.pass = r.max_pointwise_gap <= opts.pointwise_tol;

  if (!opts.boxes.empty()) {
    std::vector<MultiIndex> indices;
    for (const auto& [idx, e] : lhs.coeffs()) indices.push_back(idx);
    for (const auto& [idx, e] : rhs.coeffs())
      if (!lhs.coeffs().contains(idx)) indices.push_back(idx);

    std::vector<kernels::Program> progs;
    for (const auto& idx : indices) {
      progs.push_back(lhs.coeff(idx).compile());
      progs.push_back(rhs.coeff(idx).compile());
    }
    const std::size_t per_box = 2 * indices.size();
    const std::size_t base = per_box * opts.boxes.size();
    DerivedOutputs derived;
    for (std::size_t k = 0; k < base; k += 2) {
      std::vector<double> row(base, 0.0);
      row[k] = 1.0;
      row[k + 1] = -1.0;
      derived.push_back(std::move(row));
    }
    auto est = integrate_batch(
        mu, opts.spec, base,
        [&](const kernels::PointBlock& pts, std::span<double> out) {
          std::vector<double> vals(progs.size() * pts.count);
          for (std::size_t j = 0; j < progs.size(); ++j)
            kernels::eval_program(progs[j], pts, vals.data() + j * pts.count);
          std::vector<double> x(dim);
          for (std::size_t i = 0; i < pts.count; ++i) {
            for (std::size_t p = 0; p < dim; ++p) x[p] = pts.coord(p)[i];
            for (std::size_t b = 0; b < opts.boxes.size(); ++b) {
              const double ind = opts.boxes[b].contains(x) ? 1.0 : 0.0;
              for (std::size_t j = 0; j < progs.size(); ++j)
                out[(b * per_box + j) * pts.count + i] = ind * vals[j * pts.count + i];
            }
          }
        },
        derived);
    for (std::size_t b = 0; b < opts.boxes.size(); ++b) {
      for (std::size_t j = 0; j < indices.size(); ++j) {
        const std::size_t k = b * per_box + 2 * j;
        BoxGap bg;
        bg.index = indices[j];
        bg.box = b;
        bg.lhs = est[k].value;
        bg.rhs = est[k + 1].value;
        const Estimate& gap = est[base + k / 2];
        bg.gap = gap.value;
        bg.std_error = gap.std_error;
        // identical densities leave only rounding in the gap
        const double tol = std::max(opts.spec.tolerance(bg.std_error), opts.pointwise_tol);
        if (std::abs(bg.gap) > tol) r.pass = false;
        r.boxes.push_back(bg);
      }
    }
  }
  return r;
}

}  // namespace dforms
