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


// Test scaffolding: temporary directories, shipped data paths and mock
// provider construction.

#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <unistd.h>

#include "attrgen/provider.h"

namespace test {

inline std::filesystem::path data_dir() { return ATTRGEN_DATA_DIR; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("attrgen-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Retries without sleeping.
inline attrgen::RetryPolicy no_sleep(int retries = 3) {
  attrgen::RetryPolicy r;
  r.max_retries = retries;
  r.sleep = [](std::chrono::milliseconds) {};
  return r;
}

inline std::unique_ptr<attrgen::MockProvider> mock(
    const std::string& script_json, attrgen::Pricing pricing = {}) {
  return std::make_unique<attrgen::MockProvider>(
      attrgen::MockScript::parse(script_json, "<test>"), pricing, no_sleep());
}

}  // namespace test
