/*
 * Copyright 2026 The attrgen Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string_view>

namespace attrgen {

// Seedable, splittable generator with a fully specified output sequence so
// sampled configurations can be reproduced in any language:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// `split(key)` derives an independent child stream whose seed is
// mix64(seed ^ mix64(key + 1)), so child streams depend only on the parent
// seed and the key, never on how many values the parent has produced.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64";

  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next();

  // Uniform integer in [0, bound). Unbiased (rejection on the top range).
  // bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound);

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform_real();

  Rng split(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  static std::uint64_t mix64(std::uint64_t z);

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  std::uint64_t draws_ = 0;
};

}  // namespace attrgen
