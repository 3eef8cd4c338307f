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

// Small string helpers shared by the parsers, the renderer and the metrics.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attrgen::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);  // ASCII only

// Splits on '\n' and drops a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(std::span<const std::string> parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);
bool equals_ci(std::string_view a, std::string_view b);

// Lowercases and collapses every whitespace run into one space, trimmed.
std::string normalize_space(std::string_view s);

// Number of maximal non-whitespace runs; the mock provider's token count.
std::size_t whitespace_token_count(std::string_view s);

// Decodes UTF-8 into code points. Invalid bytes decode to themselves so the
// function never fails.
std::u32string utf8_decode(std::string_view s);

// The corpus tokenizer: ASCII lowercase, split on maximal runs of
// non-alphanumeric characters, drop empties. Bytes >= 0x80 count as
// alphanumeric so UTF-8 words stay whole.
inline constexpr std::string_view kTokenizerId = "lower-alnum-runs-v1";
std::vector<std::string> tokenize(std::string_view s);

}  // namespace attrgen::text
