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


// The attrgen command line: propose, curate, filter, generate, metrics,
// bias and eval-metrics subcommands.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace attrgen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name. Never throws.
int dispatch(const std::vector<std::string>& args, std::istream& in,
             std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace attrgen::cli
