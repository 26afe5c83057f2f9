/*
 * Copyright 2026 The setfair Authors.
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

#ifndef SETFAIR_RANDOM_H_
#define SETFAIR_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace setfair {

// Counter-based streams: every draw is a pure function of (seed, key, counter)
// so results never depend on evaluation order or thread scheduling.

uint64_t SplitMix64(uint64_t x);
uint64_t Fnv1a64(std::string_view bytes);

// Mixes a seed, a string key and an integer counter into one 64-bit word.
uint64_t StreamKey(uint64_t seed, std::string_view key, uint64_t counter);
uint64_t StreamKey(uint64_t seed, uint64_t key, uint64_t counter);

// Uniform in [0, 1) with 53 random bits.
double KeyedUniform(uint64_t seed, std::string_view key, uint64_t counter);

// Sequential engine for bulk sampling, seeded from a derived key.
std::mt19937_64 MakeEngine(uint64_t seed, uint64_t stream);

}  // namespace setfair

#endif  // SETFAIR_RANDOM_H_
