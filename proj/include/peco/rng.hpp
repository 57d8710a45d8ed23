// Copyright 2026 The Pecograph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace peco {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Used both as a bit mixer
// for deriving per-node RNG streams and as a cheap standalone generator.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives the seed of an independent stream from a base seed and a stream
// index (e.g. a user index). Streams must not depend on scheduling order:
// sampling user u with base seed s yields the same draws no matter which
// worker runs it.
inline std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t stream) {
  return splitmix64(splitmix64(base_seed) ^ (stream + 0x9e3779b97f4a7c15ULL));
}

// mt19937_64 with hand-rolled uniform helpers. The std:: distributions are
// not bit-stable across standard library implementations; these helpers are,
// which keeps serialized sampler output reproducible everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t next_index(std::uint64_t bound) {
    const std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Fills `out` with `k` distinct elements of `pool`, uniformly without
  // replacement (partial Fisher-Yates on a scratch copy).
  void sample_without_replacement(std::span<const std::uint32_t> pool,
                                  std::size_t k,
                                  std::vector<std::uint32_t>& out) {
    scratch_.assign(pool.begin(), pool.end());
    out.clear();
    for (std::size_t j = 0; j < k && j < scratch_.size(); ++j) {
      const std::size_t pick = j + next_index(scratch_.size() - j);
      std::swap(scratch_[j], scratch_[pick]);
      out.push_back(scratch_[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::vector<std::uint32_t> scratch_;
};

}  // namespace peco
