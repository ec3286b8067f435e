// Copyright 2026 The uwtwin Authors
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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uwtwin::base64 {

std::string encode(std::span<const std::uint8_t> bytes);

/// Standard alphabet with '=' padding. Returns nullopt on malformed input.
std::optional<std::vector<std::uint8_t>> decode(std::string_view text);

constexpr std::size_t encoded_size(std::size_t n) { return (n + 2) / 3 * 4; }

}  // namespace uwtwin::base64
