#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "dforms/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define DFORMS_HAVE_X86 1
#else
#define DFORMS_HAVE_X86 0
#endif

namespace dforms::kernels::detail {

#if DFORMS_HAVE_X86

namespace {

constexpr std::size_t kTile = 256;

// Only avx2 is enabled (no fma) so products and sums round exactly like the scalar path.
__attribute__((target("avx2"))) void add_into(double* d, const double* s, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(d + i, _mm256_add_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(s + i)));
  for (; i < n; ++i) d[i] = d[i] + s[i];
}

__attribute__((target("avx2"))) void mul_into(double* d, const double* s, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(d + i, _mm256_mul_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(s + i)));
  for (; i < n; ++i) d[i] = d[i] * s[i];
}

__attribute__((target("avx2"))) void scale_into(double* d, double v, std::size_t n) {
  const __m256d vv = _mm256_set1_pd(v);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(d + i, _mm256_mul_pd(vv, _mm256_loadu_pd(d + i)));
  for (; i < n; ++i) d[i] = v * d[i];
}

__attribute__((target("avx2"))) void quad_term(double* d, const double* x, double q, double l,
                                               std::size_t n) {
  const __m256d qq = _mm256_set1_pd(q);
  const __m256d ll = _mm256_set1_pd(l);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d inner = _mm256_add_pd(_mm256_mul_pd(qq, xv), ll);
    _mm256_storeu_pd(d + i, _mm256_add_pd(_mm256_loadu_pd(d + i), _mm256_mul_pd(inner, xv)));
  }
  for (; i < n; ++i) d[i] = d[i] + (q * x[i] + l) * x[i];
}

}  // namespace

__attribute__((target("avx2"))) void eval_program_avx2(const Program& prog,
                                                       const PointBlock& pts, double* out) {
  thread_local std::vector<double> stack;
  stack.resize(std::max<std::size_t>(prog.max_depth, 1) * kTile);

  for (std::size_t base = 0; base < pts.count; base += kTile) {
    const std::size_t n = std::min(kTile, pts.count - base);
    std::size_t top = 0;
    auto slot = [&](std::size_t k) { return stack.data() + k * kTile; };

    for (const Instr& ins : prog.code) {
      switch (ins.op) {
        case Op::push_const: {
          double* d = slot(top++);
          const __m256d v = _mm256_set1_pd(ins.v);
          std::size_t i = 0;
          for (; i + 4 <= n; i += 4) _mm256_storeu_pd(d + i, v);
          for (; i < n; ++i) d[i] = ins.v;
          break;
        }
        case Op::push_coord:
          std::memcpy(slot(top++), pts.coord(ins.a) + base, n * sizeof(double));
          break;
        case Op::add: {
          double* d = slot(top - ins.a);
          for (std::uint32_t k = 1; k < ins.a; ++k) add_into(d, slot(top - ins.a + k), n);
          top -= ins.a - 1;
          break;
        }
        case Op::mul: {
          double* d = slot(top - ins.a);
          for (std::uint32_t k = 1; k < ins.a; ++k) mul_into(d, slot(top - ins.a + k), n);
          top -= ins.a - 1;
          break;
        }
        case Op::scale:
          scale_into(slot(top - 1), ins.v, n);
          break;
        case Op::exp_quad: {
          double* d = slot(top++);
          std::fill(d, d + n, prog.pool[ins.a]);
          for (std::uint32_t t = 0; t < ins.b; ++t) {
            const double* term = prog.pool.data() + ins.a + 1 + 3 * t;
            quad_term(d, pts.coord(static_cast<std::size_t>(term[0])) + base, term[1], term[2], n);
          }
          // No vector exp in AVX2; per-lane libm keeps results identical to the reference.
          for (std::size_t i = 0; i < n; ++i) d[i] = std::exp(d[i]);
          break;
        }
      }
    }
    std::memcpy(out + base, slot(0), n * sizeof(double));
  }
}

__attribute__((target("avx2"))) void lane_accumulate_avx2(const double* a, const double* b,
                                                          std::size_t n, double* s, double* c) {
  __m256d sv = _mm256_loadu_pd(s);
  __m256d cv = _mm256_loadu_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(a + i);
    if (b) x = _mm256_mul_pd(x, _mm256_loadu_pd(b + i));
    const __m256d t = _mm256_add_pd(sv, x);
    const __m256d bp = _mm256_sub_pd(t, sv);
    const __m256d err = _mm256_add_pd(_mm256_sub_pd(sv, _mm256_sub_pd(t, bp)), _mm256_sub_pd(x, bp));
    cv = _mm256_add_pd(cv, err);
    sv = t;
  }
  _mm256_storeu_pd(s, sv);
  _mm256_storeu_pd(c, cv);
  for (; i < n; ++i) {
    const std::size_t j = i & 3u;
    const double x = b ? a[i] * b[i] : a[i];
    const double t = s[j] + x;
    const double bp = t - s[j];
    c[j] += (s[j] - (t - bp)) + (x - bp);
    s[j] = t;
  }
}

#else

void eval_program_avx2(const Program& prog, const PointBlock& pts, double* out) {
  eval_program_scalar(prog, pts, out);
}

void lane_accumulate_avx2(const double* a, const double* b, std::size_t n, double* s, double* c) {
  lane_accumulate_scalar(a, b, n, s, c);
}

#endif

}  // namespace dforms::kernels::detail
