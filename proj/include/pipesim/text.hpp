// Copyright 2026 The pipesim Authors
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

#ifndef PIPESIM_TEXT_HPP_
#define PIPESIM_TEXT_HPP_

#include <cstdint>
#include <string>

namespace pipesim {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);

// Exact inverse of format_double; throws io_error on malformed input.
double parse_double(const std::string& text);

// FNV-1a 64-bit over the bytes of `data`, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& data);

}  // namespace pipesim

#endif  // PIPESIM_TEXT_HPP_
