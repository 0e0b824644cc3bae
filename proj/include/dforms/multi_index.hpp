#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dforms {

/// Strictly increasing tuple of 1-based basis indices (i_1 < ... < i_n).
/// The empty index stands for e_0 = 1.
class MultiIndex {
 public:
  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> entries);
  explicit MultiIndex(std::vector<int> entries);

  static MultiIndex single(int p);
  /// (1, 2, ..., n)
  static MultiIndex range(int n);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  std::span<const int> entries() const noexcept { return entries_; }
  int max_entry() const noexcept { return entries_.empty() ? 0 : entries_.back(); }

  bool contains(int p) const;
  bool is_subset_of(const MultiIndex& other) const;
  bool disjoint(const MultiIndex& other) const;

  /// 1 + |{q in this : q < p}|, the position p takes (or would take) in the sorted index.
  int rank_of(int p) const;

  /// Unsigned set operations; the result is sorted.
  MultiIndex set_union(const MultiIndex& other) const;
  MultiIndex set_difference(const MultiIndex& other) const;
  MultiIndex without(int p) const;
  MultiIndex with(int p) const;

  std::string to_string() const;

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  struct Trusted {};
  MultiIndex(Trusted, std::vector<int> entries) : entries_(std::move(entries)) {}

  std::vector<int> entries_;
};

struct SignedIndex {
  MultiIndex index;
  int sign = 1;
};

/// Sorted union of two disjoint indices together with the parity of the
/// permutation sorting the concatenation (a, b). Empty if the indices overlap.
std::optional<SignedIndex> merge_with_sign(const MultiIndex& a, const MultiIndex& b);

/// Every strictly increasing index of length n with entries in [1, dim].
std::vector<MultiIndex> all_indices(int n, int dim);

/// Binomial coefficient C(n, k) as a double; zero when k is out of range.
double binomial(int n, int k);

}  // namespace dforms
