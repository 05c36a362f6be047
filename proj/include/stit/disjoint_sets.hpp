#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace stit {

/// Union-find over dense indices with path halving and union by size.
/// Grows on demand; indices never seen are singletons.
class DisjointSets {
 public:
  DisjointSets() = default;
  explicit DisjointSets(std::size_t n) { reserve(n); }

  void reserve(std::size_t n) {
    std::size_t old = parent_.size();
    if (n <= old) return;
    parent_.resize(n);
    size_.resize(n, 1);
    std::iota(parent_.begin() + static_cast<std::ptrdiff_t>(old), parent_.end(), static_cast<std::uint32_t>(old));
  }

  std::uint32_t find(std::uint32_t x) {
    reserve(x + 1);
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  /// Returns true when two distinct classes were merged.
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  bool same(std::uint32_t a, std::uint32_t b) { return find(a) == find(b); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

}  // namespace stit
