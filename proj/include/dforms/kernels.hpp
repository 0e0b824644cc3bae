#pragma once

// Data-parallel inner loops: batched evaluation of compiled coefficient
// programs and compensated reductions. Every kernel has a scalar reference and
// an AVX2 variant that performs the same IEEE operations in the same order,
// so the two produce bit-identical results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dforms::kernels {

enum class Isa { scalar, avx2 };

bool isa_supported(Isa isa);
const char* isa_name(Isa isa);

/// The ISA used when callers don't pass one explicitly. Defaults to the best
/// supported one; the environment variable DFORMS_ISA=scalar forces the reference path.
Isa active_isa();
void set_active_isa(Isa isa);

enum class Op : std::uint8_t { push_const, push_coord, add, mul, scale, exp_quad };

struct Instr {
  Op op = Op::push_const;
  std::uint32_t a = 0;  // coordinate (0-based), operand count, or pool offset
  std::uint32_t b = 0;  // number of exp_quad terms
  double v = 0.0;       // constant or scale factor
};

/// Postfix program over a value stack. exp_quad reads pool[a] = c followed by
/// b triples (coordinate, quadratic, linear) and pushes exp(c + Σ (q x + l) x).
struct Program {
  std::vector<Instr> code;
  std::vector<double> pool;
  std::size_t max_depth = 0;
  std::size_t dim_required = 0;
};

/// Coordinate-major block: coordinate p of point i lives at data[p * stride + i].
struct PointBlock {
  const double* data = nullptr;
  std::size_t stride = 0;
  std::size_t count = 0;
  std::size_t dim = 0;

  const double* coord(std::size_t p) const { return data + p * stride; }
};

void eval_program(const Program& prog, const PointBlock& pts, double* out, Isa isa);
inline void eval_program(const Program& prog, const PointBlock& pts, double* out) {
  eval_program(prog, pts, out, active_isa());
}

/// Four interleaved TwoSum accumulators (lane = i mod 4), combined in a fixed order.
double compensated_sum(std::span<const double> x, Isa isa);
inline double compensated_sum(std::span<const double> x) {
  return compensated_sum(x, active_isa());
}

/// compensated_sum of the elementwise products a[i] * b[i].
double compensated_dot(std::span<const double> a, std::span<const double> b, Isa isa);
inline double compensated_dot(std::span<const double> a, std::span<const double> b) {
  return compensated_dot(a, b, active_isa());
}

namespace detail {
void eval_program_scalar(const Program& prog, const PointBlock& pts, double* out);
void eval_program_avx2(const Program& prog, const PointBlock& pts, double* out);
void lane_accumulate_scalar(const double* a, const double* b, std::size_t n, double* s,
                            double* c);
void lane_accumulate_avx2(const double* a, const double* b, std::size_t n, double* s,
                          double* c);
double finish_lanes(const double* s, const double* c);
}  // namespace detail

}  // namespace dforms::kernels
