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

#include "flowprint/codebook.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "flowprint/rng.hpp"

namespace flowprint {
namespace {

constexpr std::array<char, 4> kMagic{'F', 'P', 'C', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), b.size());
}

void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), b.size());
}

void put_f64(std::ostream& os, double v) {
  put_u64(os, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw std::runtime_error("codebook: truncated file");
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw std::runtime_error("codebook: truncated file");
  }
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace

Codeword::Codeword(std::vector<double> delays, double rate, double horizon)
    : delays_(std::move(delays)), rate_(rate), horizon_(horizon) {}

std::vector<double> Codeword::delays() const {
  if (scale_.is_identity()) return delays_;
  std::vector<double> out(delays_.size());
  std::transform(delays_.begin(), delays_.end(), out.begin(),
                 [this](double d) { return d * scale_.num / scale_.den; });
  return out;
}

std::vector<double> Codeword::release_offsets() const {
  const std::vector<double> d = delays();
  std::vector<double> out(d.size() + 1);
  out[0] = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) out[k + 1] = out[k] + d[k];
  return out;
}

Codeword Codeword::scaled(const ScaleRatio& r) const {
  Codeword out = *this;
  out.scale_ = scale_.compose(r);
  if (out.scale_.is_identity()) out.scale_ = ScaleRatio{};
  return out;
}

Codeword generate_codeword(double lambda, double T2, std::uint64_t seed,
                           std::uint64_t index) {
  Rng rng(derive_seed(seed, index, 0, StreamRole::kCodeword));
  std::poisson_distribution<std::uint64_t> count(lambda * T2);
  const std::uint64_t n = count(rng);
  std::uniform_real_distribution<double> place(0.0, T2);
  std::vector<double> points(n);
  for (double& p : points) p = place(rng);
  std::sort(points.begin(), points.end());

  // Coincident points would give a zero delay; nudge them apart.
  double prev = 0.0;
  for (double& p : points) {
    if (p <= prev) p = std::nextafter(prev, std::numeric_limits<double>::max());
    prev = p;
  }
  std::vector<double> delays(n);
  prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    delays[k] = points[k] - prev;
    prev = points[k];
  }
  return Codeword(std::move(delays), lambda, T2);
}

Codebook generate_codebook(std::uint64_t M, double lambda, double T2,
                           std::uint64_t seed) {
  if (M < 1) throw std::invalid_argument("codebook size must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(T2 > 0.0)) throw std::invalid_argument("T2 must be > 0");
  Codebook cb;
  cb.seed = seed;
  cb.rate = lambda;
  cb.horizon = T2;
  cb.codewords.reserve(M);
  for (std::uint64_t i = 0; i < M; ++i) {
    cb.codewords.push_back(generate_codeword(lambda, T2, seed, i));
  }
  return cb;
}

Codeword scale_codeword(const Codeword& cw, double lambda_i,
                        double lambda_min) {
  if (!(lambda_min > 0.0) || !(lambda_i >= lambda_min)) {
    throw std::invalid_argument("scale_codeword: need lambda_i >= lambda_min > 0");
  }
  return cw.scaled({lambda_min, lambda_i});
}

Codeword unscale_codeword(const Codeword& cw, double lambda_i,
                          double lambda_min) {
  if (!(lambda_min > 0.0) || !(lambda_i >= lambda_min)) {
    throw std::invalid_argument(
        "unscale_codeword: need lambda_i >= lambda_min > 0");
  }
  return cw.scaled({lambda_i, lambda_min});
}

void write_codebook(std::ostream& os, const Codebook& cb) {
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, kVersion);
  put_u64(os, cb.size());
  put_f64(os, cb.rate);
  put_f64(os, cb.horizon);
  put_u64(os, cb.seed);
  for (const Codeword& cw : cb.codewords) {
    put_u64(os, cw.delay_count());
    for (double d : cw.base_delays()) put_f64(os, d);
  }
}

Codebook read_codebook(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("codebook: bad magic");
  }
  if (const std::uint32_t v = get_u32(is); v != kVersion) {
    throw std::runtime_error("codebook: unsupported version " +
                             std::to_string(v));
  }
  Codebook cb;
  const std::uint64_t m = get_u64(is);
  cb.rate = get_f64(is);
  cb.horizon = get_f64(is);
  cb.seed = get_u64(is);
  cb.codewords.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(m, 1u << 20)));
  for (std::uint64_t i = 0; i < m; ++i) {
    const std::uint64_t n = get_u64(is);
    std::vector<double> delays;
    delays.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 20)));
    for (std::uint64_t k = 0; k < n; ++k) delays.push_back(get_f64(is));
    cb.codewords.emplace_back(std::move(delays), cb.rate, cb.horizon);
  }
  return cb;
}

nlohmann::json codebook_to_json(const Codebook& cb) {
  nlohmann::json j;
  j["canonical"] = false;
  j["M"] = cb.size();
  j["rate"] = cb.rate;
  j["horizon"] = cb.horizon;
  j["seed"] = cb.seed;
  auto& words = j["codewords"] = nlohmann::json::array();
  for (const Codeword& cw : cb.codewords) {
    words.push_back(std::vector<double>(cw.base_delays().begin(),
                                        cw.base_delays().end()));
  }
  return j;
}

}  // namespace flowprint
