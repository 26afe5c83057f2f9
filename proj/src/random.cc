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

#include "setfair/random.h"

namespace setfair {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t StreamKey(uint64_t seed, uint64_t key, uint64_t counter) {
  uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ key);
  return SplitMix64(h ^ SplitMix64(counter + 0x632be59bd9b4e019ULL));
}

uint64_t StreamKey(uint64_t seed, std::string_view key, uint64_t counter) {
  return StreamKey(seed, Fnv1a64(key), counter);
}

double KeyedUniform(uint64_t seed, std::string_view key, uint64_t counter) {
  return static_cast<double>(StreamKey(seed, key, counter) >> 11) * 0x1.0p-53;
}

std::mt19937_64 MakeEngine(uint64_t seed, uint64_t stream) {
  return std::mt19937_64(StreamKey(seed, stream, 0));
}

}  // namespace setfair
