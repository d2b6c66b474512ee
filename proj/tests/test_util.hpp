// Copyright 2026 The flowprint Authors
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


// Independent reference routines used by the tests. None of them calls into
// the library's numeric kernels.

#pragma once

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace flowprint::testing {

// Root of a monotone function on [lo, hi] by plain bisection.
inline double bisect(const std::function<double(double)>& f, double lo,
                     double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// W(y) by Newton on w e^w - y from below, falling back to bisection for
// large arguments where Newton from a fixed start overshoots.
inline double newton_lambert_w(double y) {
  if (y > 3.0) {
    const double ly = std::log(y);
    return bisect([ly](double w) { return w + std::log(w) - ly; }, 0.5,
                  ly + 1.0);
  }
  double w = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double ew = std::exp(w);
    const double next = w - (w * ew - y) / (ew * (w + 1.0));
    if (next == w) break;
    w = next;
  }
  return w;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  }
  return g;
}

// Exponential service log-likelihood of a FIFO departure sequence, written
// without reference to the decoder.
inline double fifo_log_lik(const std::vector<double>& dep,
                           const std::vector<double>& arr, double mu,
                           double prev) {
  double ll = 0.0;
  for (std::size_t k = 0; k < dep.size() && k < arr.size(); ++k) {
    const double start = std::max(prev, arr[k]);
    const double s = dep[k] - start;
    if (!(s > 0.0) || arr[k] > dep[k]) {
      return -std::numeric_limits<double>::infinity();
    }
    ll += std::log(mu) - mu * s;
    prev = dep[k];
  }
  return ll;
}

}  // namespace flowprint::testing
