#include "dforms/integrate.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dforms/quadrature_rules.hpp"

namespace dforms {

namespace {

constexpr std::size_t kChunk = 4096;
constexpr std::uint64_t kMaxQuadratureNodes = 50'000'000;

void append_derived(const DerivedOutputs& derived, std::size_t base_outputs, std::size_t count,
                    std::span<double> values) {
  for (std::size_t m = 0; m < derived.size(); ++m) {
    double* row = values.data() + (base_outputs + m) * count;
    std::fill(row, row + count, 0.0);
    for (std::size_t k = 0; k < base_outputs && k < derived[m].size(); ++k) {
      const double w = derived[m][k];
      if (w == 0.0) continue;
      const double* src = values.data() + k * count;
      for (std::size_t i = 0; i < count; ++i) row[i] = row[i] + w * src[i];
    }
  }
}

}  // namespace

IntegrationSpec IntegrationSpec::quadrature(int order) {
  IntegrationSpec s;
  s.method = Method::quadrature;
  s.order = order;
  return s;
}

IntegrationSpec IntegrationSpec::monte_carlo(std::uint64_t samples, std::uint64_t seed) {
  IntegrationSpec s;
  s.method = Method::monte_carlo;
  s.samples = samples;
  s.seed = seed;
  return s;
}

unsigned IntegrationSpec::worker_count() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

void IntegrationSpec::validate() const {
  if (method == Method::quadrature && order < 1)
    throw std::invalid_argument("quadrature order must be >= 1");
  if (method == Method::monte_carlo && samples < 1)
    throw std::invalid_argument("Monte Carlo sample count must be >= 1");
  if (!(abs_tol >= 0.0) || !(z > 0.0)) throw std::invalid_argument("invalid tolerance policy");
}

namespace detail {

void SampleStats::merge(const SampleStats& other) {
  if (other.count == 0.0) return;
  if (count == 0.0) {
    *this = other;
    return;
  }
  const double n = count + other.count;
  const double delta = other.mean - mean;
  mean = mean + delta * (other.count / n);
  m2 = m2 + other.m2 + delta * delta * (count * other.count / n);
  count = n;
}

Estimate SampleStats::estimate() const {
  Estimate e;
  e.value = mean;
  e.std_error = count > 1.0 ? std::sqrt(m2 / (count - 1.0) / count) : 0.0;
  return e;
}

void parallel_chunks(std::size_t chunks, unsigned workers,
                     const std::function<void(std::size_t chunk)>& body) {
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), chunks));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      try {
        body(c);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(chunks);
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::vector<SampleStats> sample_reduce(
    std::uint64_t total, std::size_t base_outputs, const DerivedOutputs& derived, unsigned workers,
    const std::function<void(std::uint64_t, std::size_t, std::span<double>)>& fill) {
  const std::size_t outputs = base_outputs + derived.size();
  const std::size_t chunks = static_cast<std::size_t>((total + kChunk - 1) / kChunk);
  std::vector<SampleStats> per_chunk(chunks * outputs);

  parallel_chunks(chunks, workers, [&](std::size_t c) {
    thread_local std::vector<double> values;
    thread_local std::vector<double> dev;
    const std::uint64_t first = c * kChunk;
    const auto count = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, total - first));
    values.assign(outputs * count, 0.0);
    fill(first, count, std::span<double>(values.data(), base_outputs * count));
    append_derived(derived, base_outputs, count, values);
    dev.resize(count);
    for (std::size_t k = 0; k < outputs; ++k) {
      std::span<const double> row(values.data() + k * count, count);
      const double mean = kernels::compensated_sum(row) / static_cast<double>(count);
      for (std::size_t i = 0; i < count; ++i) dev[i] = row[i] - mean;
      SampleStats& s = per_chunk[c * outputs + k];
      s.count = static_cast<double>(count);
      s.mean = mean;
      s.m2 = kernels::compensated_dot(dev, dev);
    }
  });

  std::vector<SampleStats> result(outputs);
  for (std::size_t c = 0; c < chunks; ++c)
    for (std::size_t k = 0; k < outputs; ++k) result[k].merge(per_chunk[c * outputs + k]);
  return result;
}

std::vector<double> weighted_reduce(
    std::uint64_t total, std::size_t base_outputs, const DerivedOutputs& derived, unsigned workers,
    const std::function<void(std::uint64_t, std::size_t, std::span<double>, std::span<double>)>&
        fill) {
  const std::size_t outputs = base_outputs + derived.size();
  const std::size_t chunks = static_cast<std::size_t>((total + kChunk - 1) / kChunk);
  std::vector<double> per_chunk(chunks * outputs, 0.0);

  parallel_chunks(chunks, workers, [&](std::size_t c) {
    thread_local std::vector<double> values;
    thread_local std::vector<double> weights;
    const std::uint64_t first = c * kChunk;
    const auto count = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, total - first));
    values.assign(outputs * count, 0.0);
    weights.assign(count, 0.0);
    fill(first, count, std::span<double>(values.data(), base_outputs * count), weights);
    append_derived(derived, base_outputs, count, values);
    for (std::size_t k = 0; k < outputs; ++k)
      per_chunk[c * outputs + k] =
          kernels::compensated_dot(std::span<const double>(values.data() + k * count, count), weights);
  });

  std::vector<double> result(outputs, 0.0);
  std::vector<double> comp(outputs, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t k = 0; k < outputs; ++k) {
      const double y = per_chunk[c * outputs + k] - comp[k];
      const double t = result[k] + y;
      comp[k] = (t - result[k]) - y;
      result[k] = t;
    }
  }
  return result;
}

}  // namespace detail

std::vector<Estimate> integrate_batch(const DifferentiableMeasure& mu, const IntegrationSpec& spec,
                                      std::size_t outputs, const BatchIntegrand& integrand,
                                      const DerivedOutputs& derived) {
  spec.validate();
  const auto dim = static_cast<std::size_t>(mu.dim());

  if (!spec.is_mc()) {
    const GaussianProduct* g = mu.as_gaussian_product();
    if (!g) throw std::invalid_argument("quadrature integration requires a Gaussian-product measure");
    const Rule1D rule = gauss_hermite(spec.order);
    const auto order = static_cast<std::uint64_t>(spec.order);
    std::uint64_t total = 1;
    for (std::size_t p = 0; p < dim; ++p) {
      total *= order;
      if (total > kMaxQuadratureNodes)
        throw std::invalid_argument("tensor quadrature grid too large; use Monte Carlo");
    }
    std::vector<double> sigma(dim);
    for (std::size_t p = 0; p < dim; ++p) sigma[p] = std::sqrt(g->variances()[p]);

    auto sums = detail::weighted_reduce(
        total, outputs, derived, spec.worker_count(),
        [&](std::uint64_t first, std::size_t count, std::span<double> values,
            std::span<double> weights) {
          thread_local std::vector<double> pts;
          pts.resize(dim * count);
          for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t node = first + i;
            double w = 1.0;
            for (std::size_t p = 0; p < dim; ++p) {
              const auto digit = static_cast<std::size_t>(node % order);
              node /= order;
              pts[p * count + i] = sigma[p] * rule.nodes[digit];
              w *= rule.weights[digit];
            }
            weights[i] = w;
          }
          integrand(kernels::PointBlock{pts.data(), count, count, dim}, values);
        });
    std::vector<Estimate> out;
    for (double s : sums) out.push_back({s, 0.0});
    return out;
  }

  const CounterRng rng(spec.seed);
  auto stats = detail::sample_reduce(
      spec.samples, outputs, derived, spec.worker_count(),
      [&](std::uint64_t first, std::size_t count, std::span<double> values) {
        thread_local std::vector<double> pts;
        pts.resize(dim * count);
        mu.sample(rng, first, count, pts.data());
        integrand(kernels::PointBlock{pts.data(), count, count, dim}, values);
      });
  std::vector<Estimate> out;
  for (const auto& s : stats) out.push_back(s.estimate());
  return out;
}

Estimate integrate(const std::function<double(std::span<const double>)>& fn,
                   const DifferentiableMeasure& mu, const IntegrationSpec& spec) {
  const auto dim = static_cast<std::size_t>(mu.dim());
  return integrate_batch(mu, spec, 1, [&](const kernels::PointBlock& pts, std::span<double> out) {
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < pts.count; ++i) {
      for (std::size_t p = 0; p < dim; ++p) x[p] = pts.coord(p)[i];
      out[i] = fn(x);
    }
  }).front();
}

Estimate integrate(const Expr& fn, const DifferentiableMeasure& mu, const IntegrationSpec& spec) {
  if (fn.max_coord() > mu.dim())
    throw std::invalid_argument("integrand references coordinates beyond the measure dimension");
  const kernels::Program prog = fn.compile();
  return integrate_batch(mu, spec, 1, [&](const kernels::PointBlock& pts, std::span<double> out) {
    kernels::eval_program(prog, pts, out.data());
  }).front();
}

}  // namespace dforms
