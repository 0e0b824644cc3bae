#include "dforms/multi_index.hpp"

#include <algorithm>
#include <stdexcept>

namespace dforms {

namespace {

void validate(const std::vector<int>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i] < 1)
      throw std::invalid_argument("MultiIndex entries must be >= 1, got " +
                                  std::to_string(entries[i]));
    if (i > 0 && entries[i] <= entries[i - 1])
      throw std::invalid_argument("MultiIndex entries must be strictly increasing");
  }
}

}  // namespace

MultiIndex::MultiIndex(std::initializer_list<int> entries) : entries_(entries) {
  validate(entries_);
}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  validate(entries_);
}

MultiIndex MultiIndex::single(int p) { return MultiIndex{p}; }

MultiIndex MultiIndex::range(int n) {
  std::vector<int> e(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] = i + 1;
  return MultiIndex(Trusted{}, std::move(e));
}

bool MultiIndex::contains(int p) const {
  return std::binary_search(entries_.begin(), entries_.end(), p);
}

bool MultiIndex::is_subset_of(const MultiIndex& other) const {
  return std::includes(other.entries_.begin(), other.entries_.end(), entries_.begin(),
                       entries_.end());
}

bool MultiIndex::disjoint(const MultiIndex& other) const {
  auto i = entries_.begin();
  auto j = other.entries_.begin();
  while (i != entries_.end() && j != other.entries_.end()) {
    if (*i == *j) return false;
    if (*i < *j)
      ++i;
    else
      ++j;
  }
  return true;
}

int MultiIndex::rank_of(int p) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), p);
  return 1 + static_cast<int>(it - entries_.begin());
}

MultiIndex MultiIndex::set_union(const MultiIndex& other) const {
  std::vector<int> out;
  out.reserve(size() + other.size());
  std::set_union(entries_.begin(), entries_.end(), other.entries_.begin(),
                 other.entries_.end(), std::back_inserter(out));
  return MultiIndex(Trusted{}, std::move(out));
}

MultiIndex MultiIndex::set_difference(const MultiIndex& other) const {
  std::vector<int> out;
  std::set_difference(entries_.begin(), entries_.end(), other.entries_.begin(),
                      other.entries_.end(), std::back_inserter(out));
  return MultiIndex(Trusted{}, std::move(out));
}

MultiIndex MultiIndex::without(int p) const { return set_difference(MultiIndex{p}); }

MultiIndex MultiIndex::with(int p) const { return set_union(MultiIndex{p}); }

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(entries_[i]);
  }
  return s + ")";
}

std::optional<SignedIndex> merge_with_sign(const MultiIndex& a, const MultiIndex& b) {
  std::vector<int> merged;
  merged.reserve(a.size() + b.size());
  // Each element of b jumps over the elements of a that are larger than it.
  std::size_t inversions = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i] < b[j])) {
      merged.push_back(a[i++]);
    } else if (i == a.size() || b[j] < a[i]) {
      inversions += a.size() - i;
      merged.push_back(b[j++]);
    } else {
      return std::nullopt;
    }
  }
  return SignedIndex{MultiIndex(std::move(merged)), (inversions % 2 == 0) ? 1 : -1};
}

std::vector<MultiIndex> all_indices(int n, int dim) {
  std::vector<MultiIndex> out;
  if (n < 0 || n > dim) return out;
  std::vector<int> cur(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) cur[static_cast<std::size_t>(i)] = i + 1;
  while (true) {
    out.emplace_back(cur);
    int pos = n - 1;
    while (pos >= 0 && cur[static_cast<std::size_t>(pos)] == dim - (n - 1 - pos)) --pos;
    if (pos < 0) break;
    ++cur[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < n; ++q)
      cur[static_cast<std::size_t>(q)] = cur[static_cast<std::size_t>(q - 1)] + 1;
  }
  return out;
}

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace dforms
