#pragma once

// Reference computations that avoid the library code paths they check.

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "dforms/alt_tensor.hpp"
#include "dforms/form_field.hpp"

namespace oracle {

// Parity of the permutation that sorts seq (distinct entries), via cycle decomposition.
inline int parity_by_cycles(const std::vector<int>& seq) {
  const std::size_t n = seq.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rank = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (seq[j] < seq[i]) ++rank;
    order[i] = rank;
  }
  std::vector<bool> seen(n, false);
  int sign = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = order[j]) seen[j] = true, ++len;
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

// All subsets of `set` with k elements, in lexicographic order.
inline void subsets(const std::vector<int>& set, std::size_t k, std::size_t start, std::vector<int>& cur,
                    std::vector<std::vector<int>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < set.size(); ++i) {
    cur.push_back(set[i]);
    subsets(set, k, i + 1, cur, out);
    cur.pop_back();
  }
}

inline std::vector<int> complement(const std::vector<int>& set, const std::vector<int>& part) {
  std::vector<int> r;
  for (int v : set) {
    bool in = false;
    for (int p : part) in = in || p == v;
    if (!in) r.push_back(v);
  }
  return r;
}

// Wedge by the shuffle formula: (f∧g)(e_γ) = Σ_{γ1 ⊂ γ} ε(γ1, γ∖γ1) f(e_γ1) g(e_{γ∖γ1}).
inline double wedge_coeff(const dforms::AltTensor& f, const dforms::AltTensor& g, const std::vector<int>& gamma) {
  std::vector<std::vector<int>> parts;
  std::vector<int> cur;
  subsets(gamma, static_cast<std::size_t>(f.degree()), 0, cur, parts);
  double s = 0.0;
  for (const auto& p1 : parts) {
    const auto p2 = complement(gamma, p1);
    std::vector<int> cat = p1;
    cat.insert(cat.end(), p2.begin(), p2.end());
    s += parity_by_cycles(cat) * f[dforms::MultiIndex(p1)] * g[dforms::MultiIndex(p2)];
  }
  return s;
}

// Central difference of a scalar function along coordinate p (0-based).
inline double central_difference(const std::function<double(std::span<const double>)>& fn,
                                 std::vector<double> x, std::size_t p, double h = 1e-5) {
  const double x0 = x[p];
  x[p] = x0 + h;
  const double up = fn(x);
  x[p] = x0 - h;
  const double down = fn(x);
  return (up - down) / (2.0 * h);
}

// E x^k for x ~ N(0, σ²): (k-1)!! σ^k for even k, zero for odd k.
inline double gaussian_moment(int k, double variance = 1.0) {
  if (k % 2) return 0.0;
  double r = 1.0;
  for (int j = k - 1; j > 0; j -= 2) r *= j;
  return r * std::pow(variance, 0.5 * k);
}

inline double phi(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }

// Plain composite Simpson rule, kept separate from the library's copy.
inline double simpson(const std::function<double(double)>& g, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = g(a) + g(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

// Density of dω for ω = F·μ at x, expanded term by term with numeric
// derivatives: (−1)^{n−1} Σ_{γ, p∈γ} (∂_p F_γ + F_γ β_p) e_p ⌟ e_γ.
inline dforms::AltTensor coform_differential_at(const dforms::FormField& F,
                                                const std::function<double(std::span<const double>, int)>& beta,
                                                std::span<const double> xs) {
  const int n = F.degree();
  dforms::AltTensor out(n - 1);
  std::vector<double> x(xs.begin(), xs.end());
  for (const auto& [gamma, expr] : F.coeffs()) {
    const auto fn = [&](std::span<const double> y) { return expr.eval(y); };
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      const int p = gamma[k];
      const double d = central_difference(fn, x, static_cast<std::size_t>(p - 1)) + expr.eval(x) * beta(x, p);
      // e_p ⌟ e_γ = (−1)^{k} e_{γ∖p} with k the zero-based position of p
      std::vector<int> rest;
      for (std::size_t j = 0; j < gamma.size(); ++j)
        if (j != k) rest.push_back(gamma[j]);
      const double sign = (k % 2 ? -1.0 : 1.0) * ((n - 1) % 2 ? -1.0 : 1.0);
      out.add(dforms::MultiIndex(rest), sign * d);
    }
  }
  return out;
}

}  // namespace oracle
