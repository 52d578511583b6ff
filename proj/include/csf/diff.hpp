#pragma once

// Derivative drivers: seed, evaluate, extract. A gradient over a 6-vector
// costs 6 complex passes; a Hessian costs 21 bicomplex passes (upper
// triangle, mirrored). Also the deterministic summation primitive used by
// every parallel reduction in the toolkit.

#include <cstddef>
#include <iterator>
#include <vector>

#include "csf/csfd.hpp"

namespace csf {

namespace detail {
template <typename It>
typename std::iterator_traits<It>::value_type pairwise_block(It first,
                                                             std::size_t n) {
  using T = typename std::iterator_traits<It>::value_type;
  if (n <= 8) {
    T acc = *first;
    for (std::size_t k = 1; k < n; ++k) acc = acc + *(first + k);
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_block(first, half) + pairwise_block(first + half, n - half);
}
}  // namespace detail

// Fixed-shape reduction tree over a materialized term buffer: the result is
// independent of how the terms were produced (thread count, scheduling).
template <typename T>
T pairwise_sum(const std::vector<T>& terms, T init = T{}) {
  if (terms.empty()) return init;
  return init + detail::pairwise_block(terms.begin(), terms.size());
}

// f: generic callable, invocable on Vec6<S> for S in {double, Complex,
// Bicomplex}, returning S.
template <typename F>
double csfd_value(F&& f, const Vec6d& x) {
  return f(x);
}

template <typename F>
Vec6d csfd_gradient(F&& f, const Vec6d& x, const StepSize& step = {}) {
  Vec6d g;
  for (int i = 0; i < 6; ++i) {
    Vec6<Complex> xs;
    for (int k = 0; k < 6; ++k)
      xs[k] = Complex(x[k], k == i ? step.h : 0.0);
    g[i] = extract_derivative(f(xs), step);
  }
  return g;
}

template <typename F>
Mat6d csfd_hessian(F&& f, const Vec6d& x, const StepSize& step = {}) {
  Mat6d h;
  for (int i = 0; i < 6; ++i) {
    for (int j = i; j < 6; ++j) {
      Vec6<Bicomplex> xs;
      for (int k = 0; k < 6; ++k)
        xs[k] = Bicomplex(x[k], k == i ? step.h : 0.0, k == j ? step.h : 0.0, 0.0);
      const double hij = extract_hessian(f(xs), step);
      h(i, j) = hij;
      h(j, i) = hij;
    }
  }
  return h;
}

}  // namespace csf
