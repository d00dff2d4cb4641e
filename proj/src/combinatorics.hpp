// Copyright 2026 The Stokes Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STOKES_SRC_COMBINATORICS_HPP
#define STOKES_SRC_COMBINATORICS_HPP

#include <cmath>

namespace stokes::detail {

// Zero outside 0 <= k <= n.
inline double binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c < 9e15 ? std::round(c) : c;
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

inline double ipow(double x, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

}  // namespace stokes::detail

#endif  // STOKES_SRC_COMBINATORICS_HPP
