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

// The secret fingerprint codebook shared by the embedder and the decoder.
//
// Each codeword is one realization of a rate-lambda Poisson process on
// [0, T2): N ~ Poisson(lambda T2) points placed uniformly, sorted, and
// differenced. A codeword with N delays releases N + 1 packets, the first at
// the start of the fingerprinting phase.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace flowprint {

// Exact rational time-scale factor num/den built from two rates. Composition
// multiplies numerators and denominators, so scaling by a/b and then by b/a
// collapses to the identity without rounding.
struct ScaleRatio {
  double num = 1.0;
  double den = 1.0;

  bool is_identity() const noexcept { return num == den; }
  double value() const noexcept { return num / den; }
  ScaleRatio inverse() const noexcept { return {den, num}; }
  ScaleRatio compose(const ScaleRatio& o) const noexcept {
    return {num * o.num, den * o.den};
  }

  friend bool operator==(const ScaleRatio&, const ScaleRatio&) = default;
};

class Codeword {
 public:
  Codeword() = default;
  Codeword(std::vector<double> delays, double rate, double horizon);

  // Effective delays, i.e. the base delays times the scale ratio.
  std::vector<double> delays() const;
  std::span<const double> base_delays() const noexcept { return delays_; }

  // Release offsets from the start of phase 2: 0 followed by the prefix sums
  // of the effective delays. Size is packet_count().
  std::vector<double> release_offsets() const;

  std::size_t delay_count() const noexcept { return delays_.size(); }
  std::size_t packet_count() const noexcept { return delays_.size() + 1; }
  double rate() const noexcept { return rate_; }
  double horizon() const noexcept { return horizon_; }
  const ScaleRatio& scale() const noexcept { return scale_; }

  // Span of time the scaled codeword occupies: horizon * scale.
  double effective_horizon() const noexcept {
    return horizon_ * scale_.value();
  }

  Codeword scaled(const ScaleRatio& r) const;

  friend bool operator==(const Codeword&, const Codeword&) = default;

 private:
  std::vector<double> delays_;
  double rate_ = 0.0;
  double horizon_ = 0.0;
  ScaleRatio scale_{};
};

struct Codebook {
  std::vector<Codeword> codewords;
  std::uint64_t seed = 0;
  double rate = 0.0;
  double horizon = 0.0;

  std::size_t size() const noexcept { return codewords.size(); }
  const Codeword& operator[](std::size_t i) const { return codewords[i]; }
};

// Codeword i is drawn from its own stream derived from (seed, i), so the
// codebook can be generated in any order and prefixes are stable.
Codebook generate_codebook(std::uint64_t M, double lambda, double T2,
                           std::uint64_t seed);
Codeword generate_codeword(double lambda, double T2, std::uint64_t seed,
                           std::uint64_t index);

// Compress every delay by lambda_min / lambda_i, so the delays have mean
// 1 / lambda_i and the codeword spans horizon * lambda_min / lambda_i.
Codeword scale_codeword(const Codeword& cw, double lambda_i,
                        double lambda_min);
// Inverse of scale_codeword; exact on any scale_codeword output.
Codeword unscale_codeword(const Codeword& cw, double lambda_i,
                          double lambda_min);

// Binary format, all fields little-endian:
//   "FPCB" | u32 version=1 | u64 M | f64 rate | f64 horizon | u64 seed
//   then per codeword: u64 N | N x f64 delay
void write_codebook(std::ostream& os, const Codebook& cb);
Codebook read_codebook(std::istream& is);

// Human-readable export; doubles are printed with default precision, so this
// is not a canonical encoding.
nlohmann::json codebook_to_json(const Codebook& cb);

}  // namespace flowprint
