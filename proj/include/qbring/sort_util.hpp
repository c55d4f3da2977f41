#pragma once

// LSD radix sort for nonnegative doubles. The IEEE-754 bit pattern of a
// nonnegative double is order-preserving as an unsigned integer, so four
// 16-bit counting passes sort exactly. Used on the 2^22-entry population
// vectors of the large-N scans, where comparison sorting dominates the
// per-time-point cost.

#include <cstdint>
#include <cstring>
#include <vector>

namespace qbring {

inline void radix_sort_nonneg(std::vector<double>& v, std::vector<double>& scratch) {
  const std::size_t n = v.size();
  if (n < 2) return;
  scratch.resize(n);
  static_assert(sizeof(double) == sizeof(std::uint64_t));

  auto* a = v.data();
  auto* b = scratch.data();
  std::vector<std::size_t> count(1 << 16);
  for (int pass = 0; pass < 4; ++pass) {
    const int shift = pass * 16;
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t k;
      std::memcpy(&k, &a[i], 8);
      ++count[(k >> shift) & 0xffffu];
    }
    std::size_t sum = 0;
    for (auto& c : count) {
      const std::size_t t = c;
      c = sum;
      sum += t;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t k;
      std::memcpy(&k, &a[i], 8);
      b[count[(k >> shift) & 0xffffu]++] = a[i];
    }
    std::swap(a, b);
  }
  // four passes land the result back in v.data()
}

}  // namespace qbring
