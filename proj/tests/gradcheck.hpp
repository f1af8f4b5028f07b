// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The FANAL Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace fanal::check {

/// Central differences of f at x. The step actually taken (after rounding
/// x +/- h to double) is used as the denominator.
template <typename Vec, typename Fn>
Vec central_difference(Fn&& f, const Vec& x, double h) {
  Vec g = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec up = x, down = x;
    up[i] += h;
    down[i] -= h;
    const long double span = static_cast<long double>(up[i]) - static_cast<long double>(down[i]);
    g[i] = static_cast<double>((static_cast<long double>(f(up)) - static_cast<long double>(f(down))) / span);
  }
  return g;
}

/// ||a - b||_2 / max(||a||_2 + ||b||_2, 1e-12).
template <typename Vec>
double relative_error(const Vec& a, const Vec& b) {
  long double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (static_cast<long double>(a[i]) - b[i]) * (static_cast<long double>(a[i]) - b[i]);
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  const long double denom = std::max<long double>(std::sqrt(na) + std::sqrt(nb), 1e-12L);
  return static_cast<double>(std::sqrt(diff) / denom);
}

}  // namespace fanal::check
