#include "dforms/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string_view>

namespace dforms::kernels {

namespace {

constexpr std::size_t kTile = 256;

Isa detect_isa() {
  if (const char* env = std::getenv("DFORMS_ISA"); env && std::string_view(env) == "scalar")
    return Isa::scalar;
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{detect_isa()};
  return slot;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::runtime_error(std::string("ISA not supported: ") + isa_name(isa));
  active_slot().store(isa, std::memory_order_relaxed);
}

void eval_program(const Program& prog, const PointBlock& pts, double* out, Isa isa) {
  if (pts.dim < prog.dim_required)
    throw std::invalid_argument("eval_program: point dimension smaller than program requires");
  if (isa == Isa::avx2 && isa_supported(Isa::avx2))
    detail::eval_program_avx2(prog, pts, out);
  else
    detail::eval_program_scalar(prog, pts, out);
}

double compensated_sum(std::span<const double> x, Isa isa) {
  double s[4] = {0, 0, 0, 0};
  double c[4] = {0, 0, 0, 0};
  if (isa == Isa::avx2 && isa_supported(Isa::avx2))
    detail::lane_accumulate_avx2(x.data(), nullptr, x.size(), s, c);
  else
    detail::lane_accumulate_scalar(x.data(), nullptr, x.size(), s, c);
  return detail::finish_lanes(s, c);
}

double compensated_dot(std::span<const double> a, std::span<const double> b, Isa isa) {
  if (a.size() != b.size()) throw std::invalid_argument("compensated_dot: length mismatch");
  double s[4] = {0, 0, 0, 0};
  double c[4] = {0, 0, 0, 0};
  if (isa == Isa::avx2 && isa_supported(Isa::avx2))
    detail::lane_accumulate_avx2(a.data(), b.data(), a.size(), s, c);
  else
    detail::lane_accumulate_scalar(a.data(), b.data(), a.size(), s, c);
  return detail::finish_lanes(s, c);
}

namespace detail {

void eval_program_scalar(const Program& prog, const PointBlock& pts, double* out) {
  thread_local std::vector<double> stack;
  stack.resize(std::max<std::size_t>(prog.max_depth, 1) * kTile);

  for (std::size_t base = 0; base < pts.count; base += kTile) {
    const std::size_t n = std::min(kTile, pts.count - base);
    std::size_t top = 0;  // number of occupied slots
    auto slot = [&](std::size_t k) { return stack.data() + k * kTile; };

    for (const Instr& ins : prog.code) {
      switch (ins.op) {
        case Op::push_const: {
          double* d = slot(top++);
          std::fill(d, d + n, ins.v);
          break;
        }
        case Op::push_coord: {
          double* d = slot(top++);
          std::memcpy(d, pts.coord(ins.a) + base, n * sizeof(double));
          break;
        }
        case Op::add: {
          double* d = slot(top - ins.a);
          for (std::uint32_t k = 1; k < ins.a; ++k) {
            const double* s = slot(top - ins.a + k);
            for (std::size_t i = 0; i < n; ++i) d[i] = d[i] + s[i];
          }
          top -= ins.a - 1;
          break;
        }
        case Op::mul: {
          double* d = slot(top - ins.a);
          for (std::uint32_t k = 1; k < ins.a; ++k) {
            const double* s = slot(top - ins.a + k);
            for (std::size_t i = 0; i < n; ++i) d[i] = d[i] * s[i];
          }
          top -= ins.a - 1;
          break;
        }
        case Op::scale: {
          double* d = slot(top - 1);
          for (std::size_t i = 0; i < n; ++i) d[i] = ins.v * d[i];
          break;
        }
        case Op::exp_quad: {
          double* d = slot(top++);
          const double c0 = prog.pool[ins.a];
          std::fill(d, d + n, c0);
          for (std::uint32_t t = 0; t < ins.b; ++t) {
            const double* term = prog.pool.data() + ins.a + 1 + 3 * t;
            const double* x = pts.coord(static_cast<std::size_t>(term[0])) + base;
            const double q = term[1];
            const double l = term[2];
            for (std::size_t i = 0; i < n; ++i) d[i] = d[i] + (q * x[i] + l) * x[i];
          }
          for (std::size_t i = 0; i < n; ++i) d[i] = std::exp(d[i]);
          break;
        }
      }
    }
    std::memcpy(out + base, slot(0), n * sizeof(double));
  }
}

void lane_accumulate_scalar(const double* a, const double* b, std::size_t n, double* s,
                            double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i & 3u;
    const double x = b ? a[i] * b[i] : a[i];
    const double t = s[j] + x;
    const double bp = t - s[j];
    c[j] += (s[j] - (t - bp)) + (x - bp);
    s[j] = t;
  }
}

double finish_lanes(const double* s, const double* c) {
  double sum = 0.0;
  double comp = 0.0;
  // Neumaier: lane totals can be large and cancel each other
  auto push = [&](double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  };
  for (int j = 0; j < 4; ++j) push(s[j]);
  for (int j = 0; j < 4; ++j) push(c[j]);
  return sum + comp;
}

}  // namespace detail
}  // namespace dforms::kernels
