#pragma once

#include <complex>
#include <cstddef>
#include <span>

// Order-insensitive ensemble reduction: pairwise summation over an indexed
// buffer gives the same bits no matter how many threads filled it.
namespace shotnoise {

template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.size() <= 32) {
    T s{};
    for (const auto& x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

template <class T>
T pairwise_mean(std::span<const T> v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace shotnoise
