#include "dforms/layer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dforms/random.hpp"

namespace dforms {

namespace {

// A field compiled for block evaluation; 1-forms are contracted with the normal.
struct FieldProgram {
  explicit FieldProgram(const FormField& f) : form(f), degree(f.degree()) {
    if (degree > 1) throw std::invalid_argument("layer field must be a 0-form or a 1-form");
    for (const auto& idx : form.indices()) axis.push_back(degree == 1 ? std::size_t(idx[0] - 1) : 0);
  }

  // out[i] for every point of the block; n is the normal shared by all points.
  void eval(const kernels::PointBlock& pts, std::span<const double> n, std::vector<double>& scratch,
            double* out) const {
    std::fill(out, out + pts.count, 0.0);
    if (form.size() == 0) return;
    scratch.resize(form.size() * pts.count);
    form.eval_block(pts, scratch.data());
    for (std::size_t k = 0; k < form.size(); ++k) {
      const double s = degree == 1 ? n[axis[k]] : 1.0;
      if (s == 0.0) continue;
      const double* c = scratch.data() + k * pts.count;
      for (std::size_t i = 0; i < pts.count; ++i) out[i] += s * c[i];
    }
  }

  CompiledForm form;
  int degree;
  std::vector<std::size_t> axis;
};

struct Plan {
  TauGrid grid;
  std::vector<FieldProgram> fields;
  bool projection_fixed = true;
  // per term: weights aligned with its field's node list, and their sum
  std::vector<std::vector<double>> term_weights;
  std::vector<double> term_weight_sum;
  // per field: node indices evaluated at x, and at P x when P x moves with τ
  std::vector<std::vector<std::size_t>> direct_nodes;
  std::vector<std::vector<std::size_t>> projected_nodes;
  std::vector<bool> needs_fixed_projection;
  std::vector<std::size_t> union_nodes;
  std::vector<std::size_t> union_projected;
};

Plan make_plan(const LayerChart& chart, const LayerProblem& problem) {
  Plan plan;
  plan.grid = build_tau_grid(chart, problem.breakpoints);
  plan.projection_fixed = !chart.projection_depends_on_tau();
  for (const auto& f : problem.fields) plan.fields.emplace_back(f);

  const std::size_t T = plan.grid.nodes.size();
  const std::size_t F = problem.fields.size();
  std::vector<std::vector<char>> direct(F, std::vector<char>(T, 0));
  std::vector<std::vector<char>> projected(F, std::vector<char>(T, 0));
  plan.needs_fixed_projection.assign(F, false);
  std::vector<std::vector<double>> full(problem.terms.size());

  for (std::size_t t = 0; t < problem.terms.size(); ++t) {
    const LayerTerm& term = problem.terms[t];
    if (term.field >= F) throw std::invalid_argument("layer term references a missing field");
    full[t].resize(T);
    double sum = 0.0;
    for (std::size_t j = 0; j < T; ++j) {
      full[t][j] = term.weight(plan.grid.nodes[j]) * plan.grid.weights[j];
      sum += full[t][j];
      if (full[t][j] == 0.0) continue;
      if (!term.at_projection) direct[term.field][j] = 1;
      else if (!plan.projection_fixed) projected[term.field][j] = 1;
    }
    if (term.at_projection && plan.projection_fixed) plan.needs_fixed_projection[term.field] = true;
    plan.term_weight_sum.push_back(sum);
  }

  std::vector<char> any_direct(T, 0), any_projected(T, 0);
  plan.direct_nodes.resize(F);
  plan.projected_nodes.resize(F);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t j = 0; j < T; ++j) {
      if (direct[f][j]) plan.direct_nodes[f].push_back(j), any_direct[j] = 1;
      if (projected[f][j]) plan.projected_nodes[f].push_back(j), any_projected[j] = 1;
    }
  }
  for (std::size_t j = 0; j < T; ++j) {
    if (any_direct[j]) plan.union_nodes.push_back(j);
    if (any_projected[j]) plan.union_projected.push_back(j);
  }

  for (std::size_t t = 0; t < problem.terms.size(); ++t) {
    const LayerTerm& term = problem.terms[t];
    std::vector<double> aligned;
    if (!term.at_projection) {
      for (std::size_t j : plan.direct_nodes[term.field]) aligned.push_back(full[t][j]);
    } else if (!plan.projection_fixed) {
      for (std::size_t j : plan.projected_nodes[term.field]) aligned.push_back(full[t][j]);
    }
    plan.term_weights.push_back(std::move(aligned));
  }
  return plan;
}

// Evaluates every term for one transversal parameter θ.
class FibreEvaluator {
 public:
  FibreEvaluator(const LayerChart& chart, const LayerProblem& problem, const Plan& plan)
      : chart_(chart), problem_(problem), plan_(plan), dim_(static_cast<std::size_t>(chart.dim())) {
    normal_.resize(dim_);
    y_.resize(dim_);
    direct_vals_.resize(plan.fields.size());
    projected_vals_.resize(plan.fields.size());
    fixed_vals_.assign(plan.fields.size(), 0.0);
  }

  void run(std::span<const double> theta, double* out, std::size_t stride) {
    chart_.normal(theta, normal_);
    const std::size_t F = plan_.fields.size();

    embed_nodes(theta, plan_.union_nodes, false, x_);
    for (std::size_t f = 0; f < F; ++f)
      eval_subset(f, plan_.direct_nodes[f], plan_.union_nodes, x_, direct_vals_[f]);

    if (!plan_.union_projected.empty()) {
      embed_nodes(theta, plan_.union_projected, true, px_);
      for (std::size_t f = 0; f < F; ++f)
        eval_subset(f, plan_.projected_nodes[f], plan_.union_projected, px_, projected_vals_[f]);
    }
    bool fixed_ready = false;
    auto fixed_point = [&] {
      if (!fixed_ready) chart_.project(theta, 0.0, y_);
      fixed_ready = true;
    };
    for (std::size_t f = 0; f < F; ++f) {
      if (!plan_.needs_fixed_projection[f]) continue;
      fixed_point();
      const kernels::PointBlock blk{y_.data(), 1, 1, dim_};
      plan_.fields[f].eval(blk, normal_, scratch_, &fixed_vals_[f]);
    }

    for (std::size_t t = 0; t < problem_.terms.size(); ++t) {
      const LayerTerm& term = problem_.terms[t];
      const auto& w = plan_.term_weights[t];
      double v = 0.0;
      if (term.at_projection && plan_.projection_fixed) {
        v = plan_.term_weight_sum[t] * fixed_vals_[term.field];
        if (term.boundary) {
          fixed_point();
          if (!term.boundary(y_)) v = 0.0;
        }
      } else {
        const bool at_p = term.at_projection;
        const auto& vals = at_p ? projected_vals_[term.field] : direct_vals_[term.field];
        if (!term.boundary) {
          v = kernels::compensated_dot(w, vals);
        } else {
          const auto& nodes = at_p ? plan_.projected_nodes[term.field] : plan_.direct_nodes[term.field];
          masked_.assign(vals.begin(), vals.end());
          for (std::size_t m = 0; m < nodes.size(); ++m) {
            if (plan_.projection_fixed) fixed_point();
            else chart_.project(theta, plan_.grid.nodes[nodes[m]], y_);
            if (!term.boundary(y_)) masked_[m] = 0.0;
          }
          v = kernels::compensated_dot(w, masked_);
        }
      }
      out[t * stride] = v;
    }
  }

 private:
  void embed_nodes(std::span<const double> theta, const std::vector<std::size_t>& nodes,
                   bool projected, std::vector<double>& block) {
    const std::size_t n = nodes.size();
    block.resize(dim_ * n);
    point_.resize(dim_);
    for (std::size_t m = 0; m < n; ++m) {
      const double tau = plan_.grid.nodes[nodes[m]];
      if (projected) chart_.project(theta, tau, point_);
      else chart_.embed(theta, tau, point_);
      for (std::size_t p = 0; p < dim_; ++p) block[p * n + m] = point_[p];
    }
  }

  void eval_subset(std::size_t f, const std::vector<std::size_t>& nodes,
                   const std::vector<std::size_t>& all, const std::vector<double>& block,
                   std::vector<double>& vals) {
    vals.resize(nodes.size());
    if (nodes.empty()) return;
    if (nodes.size() == all.size()) {
      plan_.fields[f].eval(kernels::PointBlock{block.data(), all.size(), all.size(), dim_}, normal_,
                           scratch_, vals.data());
      return;
    }
    // gather the subset; both lists are ascending
    const std::size_t n = nodes.size();
    sub_.resize(dim_ * n);
    std::size_t pos = 0;
    for (std::size_t m = 0; m < n; ++m) {
      while (all[pos] != nodes[m]) ++pos;
      for (std::size_t p = 0; p < dim_; ++p) sub_[p * n + m] = block[p * all.size() + pos];
    }
    plan_.fields[f].eval(kernels::PointBlock{sub_.data(), n, n, dim_}, normal_, scratch_, vals.data());
  }

  const LayerChart& chart_;
  const LayerProblem& problem_;
  const Plan& plan_;
  std::size_t dim_;
  std::vector<double> normal_, y_, point_, x_, px_, sub_, scratch_, masked_;
  std::vector<std::vector<double>> direct_vals_, projected_vals_;
  std::vector<double> fixed_vals_;
};

std::vector<Estimate> integrate_with_chart(const LayerChart& chart, const LayerProblem& problem,
                                           const IntegrationSpec& spec) {
  const Plan plan = make_plan(chart, problem);
  const std::size_t terms = problem.terms.size();
  const std::size_t ts = chart.theta_size();

  auto fibre_batch = [&](std::size_t count, auto&& theta_of, std::span<double> values) {
    FibreEvaluator fe(chart, problem, plan);
    std::vector<double> theta(ts);
    for (std::size_t i = 0; i < count; ++i) {
      theta_of(i, std::span<double>(theta));
      fe.run(theta, values.data() + i, count);
    }
  };

  std::optional<std::uint64_t> rule_size;
  if (ts == 0) rule_size = 1;
  else if (!spec.is_mc()) {
    rule_size = chart.theta_rule_size(spec.order);
    if (!rule_size)
      throw std::invalid_argument("transversal quadrature unavailable for this domain; use Monte Carlo");
  }

  if (rule_size) {
    auto sums = detail::weighted_reduce(
        *rule_size, terms, problem.derived, spec.worker_count(),
        [&](std::uint64_t first, std::size_t count, std::span<double> values,
            std::span<double> weights) {
          fibre_batch(count,
                      [&](std::size_t i, std::span<double> theta) {
                        weights[i] = ts == 0 ? 1.0 : chart.theta_rule_node(spec.order, first + i, theta);
                      },
                      values);
        });
    std::vector<Estimate> out;
    for (double s : sums) out.push_back({s, 0.0});
    return out;
  }

  const CounterRng rng(spec.seed);
  const std::size_t nz = chart.normals_per_draw();
  auto stats = detail::sample_reduce(
      spec.samples, terms, problem.derived, spec.worker_count(),
      [&](std::uint64_t first, std::size_t count, std::span<double> values) {
        std::vector<double> z(nz);
        fibre_batch(count,
                    [&](std::size_t i, std::span<double> theta) {
                      rng.normals(first + i, 0, z);
                      chart.draw_theta(z, theta);
                    },
                    values);
      });
  std::vector<Estimate> out;
  for (const auto& s : stats) out.push_back(s.estimate());
  return out;
}

std::vector<Estimate> integrate_plain(const Domain& domain, const DifferentiableMeasure& nu,
                                      const LayerProblem& problem, const IntegrationSpec& spec) {
  if (!spec.is_mc())
    throw std::invalid_argument("layer quadrature needs a Gaussian-product measure; use Monte Carlo");
  const auto dim = static_cast<std::size_t>(nu.dim());
  return integrate_batch(
      nu, spec, problem.terms.size(),
      [&](const kernels::PointBlock& pts, std::span<double> out) {
        std::vector<double> x(dim);
        for (std::size_t i = 0; i < pts.count; ++i) {
          for (std::size_t p = 0; p < dim; ++p) x[p] = pts.coord(p)[i];
          const double tau = domain.signed_coordinate(x);
          for (std::size_t t = 0; t < problem.terms.size(); ++t) {
            const LayerTerm& term = problem.terms[t];
            double v = term.weight(tau);
            if (v != 0.0) {
              const FormField& f = problem.fields[term.field];
              std::vector<double> y = term.at_projection || term.boundary ? domain.project(x) : x;
              if (term.boundary && !term.boundary(y)) v = 0.0;
              const std::span<const double> at = term.at_projection ? std::span<const double>(y) : x;
              if (v != 0.0) {
                const AltTensor val = f.evaluate(at);
                v *= f.degree() == 0 ? val[MultiIndex{}] : inner(domain.normal(x), val);
              }
            }
            out[t * pts.count + i] = v;
          }
        }
      },
      problem.derived);
}

}  // namespace

TauGrid build_tau_grid(const LayerChart& chart, std::span<const double> breakpoints) {
  const double lo = chart.tau_min();
  const double hi = chart.tau_max();
  const double scale = chart.tau_scale();
  std::vector<double> cuts{lo, hi};
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  TauGrid g;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    const auto pieces = static_cast<int>(std::ceil((b - a) / scale));
    const double h = (b - a) / pieces;
    const int order = h <= 0.25 * scale ? 6 : 12;
    for (int k = 0; k < pieces; ++k) {
      const Rule1D r = gauss_legendre(order, a + k * h, k + 1 == pieces ? b : a + (k + 1) * h);
      for (std::size_t j = 0; j < r.nodes.size(); ++j) {
        g.nodes.push_back(r.nodes[j]);
        g.weights.push_back(r.weights[j] * chart.tau_density(r.nodes[j]));
      }
    }
  }
  return g;
}

std::vector<Estimate> integrate_layer(const Domain& domain, const DifferentiableMeasure& nu,
                                      const LayerProblem& problem, const IntegrationSpec& spec) {
  spec.validate();
  if (domain.dim() != nu.dim()) throw std::invalid_argument("domain and measure dimensions differ");
  for (const auto& f : problem.fields)
    if (f.dim() != domain.dim()) throw std::invalid_argument("layer field dimension mismatch");
  for (const auto& t : problem.terms)
    if (!t.weight) throw std::invalid_argument("layer term without a weight");
  if (auto chart = domain.chart(nu)) return integrate_with_chart(*chart, problem, spec);
  return integrate_plain(domain, nu, problem, spec);
}

}  // namespace dforms
