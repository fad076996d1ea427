/* Copyright 2026 The jamcomp Authors

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

#ifndef JAMCOMP_COMMON_BINARY_IO_H_
#define JAMCOMP_COMMON_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "common/error.h"

namespace jamcomp {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

template <typename T>
void WritePod(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) Fail(ErrorCode::kFormat, "unexpected end of file");
  return value;
}

inline void WriteMagic(std::ostream& out, const char (&magic)[5]) {
  out.write(magic, 4);
}

inline void ExpectMagic(std::istream& in, const char (&magic)[5]) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) {
    Fail(ErrorCode::kFormat, std::string("bad magic, expected ") + magic);
  }
}

inline void WriteString(std::ostream& out, const std::string& s) {
  WritePod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string ReadString(std::istream& in) {
  const uint32_t n = ReadPod<uint32_t>(in);
  if (n > (1u << 28)) Fail(ErrorCode::kFormat, "string length out of range");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) Fail(ErrorCode::kFormat, "unexpected end of file");
  return s;
}

}  // namespace jamcomp

#endif  // JAMCOMP_COMMON_BINARY_IO_H_
