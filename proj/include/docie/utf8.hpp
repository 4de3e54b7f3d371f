// Copyright 2026 The docie Authors. All Rights Reserved.
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

#include <cstddef>
#include <string>
#include <string_view>

namespace docie::utf8 {

// Character offsets throughout the library count Unicode code points, not
// bytes. Malformed input is counted byte-by-byte for continuation bytes that
// appear without a lead byte.

inline bool is_continuation(unsigned char c) { return (c & 0xC0u) == 0x80u; }

inline std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if (!is_continuation(c)) ++n;
  }
  return n;
}

// Byte offset of the code point with index `cp`; s.size() when cp == length.
inline std::size_t byte_offset(std::string_view s, std::size_t cp) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_continuation(static_cast<unsigned char>(s[i]))) continue;
    if (seen == cp) return i;
    ++seen;
  }
  return s.size();
}

inline std::string substr(std::string_view s, std::size_t cp_start, std::size_t cp_len) {
  const std::size_t b0 = byte_offset(s, cp_start);
  const std::size_t b1 = byte_offset(s.substr(b0), cp_len) + b0;
  return std::string(s.substr(b0, b1 - b0));
}

}  // namespace docie::utf8
