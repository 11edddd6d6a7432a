/* Copyright 2026 The CAPad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef CAPAD_HASH_HPP_
#define CAPAD_HASH_HPP_

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>

namespace capad {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// 64-bit FNV-1a, continuing from `state`.
inline std::uint64_t Fnv1a(const void* data, std::size_t size,
                           std::uint64_t state = kFnvOffset) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state ^= bytes[i];
    state *= kFnvPrime;
  }
  return state;
}

inline std::uint64_t Fnv1a(std::span<const double> values,
                           std::uint64_t state = kFnvOffset) {
  return Fnv1a(values.data(), values.size_bytes(), state);
}

}  // namespace capad

#endif  // CAPAD_HASH_HPP_
