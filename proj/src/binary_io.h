/* Copyright 2026 The AnyProp Authors. All Rights Reserved.

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

#ifndef ANYPROP_SRC_BINARY_IO_H_
#define ANYPROP_SRC_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "anyprop/status.h"

namespace anyprop::internal {

// Little-endian encode/decode of fixed-width scalars, independent of host
// byte order.
template <typename T>
void WriteLe(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  using U = std::conditional_t<
      sizeof(T) == 1, std::uint8_t,
      std::conditional_t<sizeof(T) == 2, std::uint16_t,
                         std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                            std::uint64_t>>>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T ReadLe(std::istream& in, std::string_view what) {
  static_assert(std::is_trivially_copyable_v<T>);
  const std::int64_t offset = static_cast<std::int64_t>(in.tellg());
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw ParseError("truncated input while reading " + std::string(what) +
                         " at byte " + std::to_string(offset),
                     offset);
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  }
  T value;
  if constexpr (sizeof(T) == 1) {
    const auto b = static_cast<std::uint8_t>(bits);
    std::memcpy(&value, &b, 1);
  } else if constexpr (sizeof(T) == 2) {
    const auto b = static_cast<std::uint16_t>(bits);
    std::memcpy(&value, &b, 2);
  } else if constexpr (sizeof(T) == 4) {
    const auto b = static_cast<std::uint32_t>(bits);
    std::memcpy(&value, &b, 4);
  } else {
    std::memcpy(&value, &bits, 8);
  }
  return value;
}

inline void ExpectMagic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(magic.size())) ||
      got != magic) {
    throw FormatError("bad magic: expected '" + std::string(magic) + "'");
  }
}

}  // namespace anyprop::internal

#endif  // ANYPROP_SRC_BINARY_IO_H_
