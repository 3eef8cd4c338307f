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

#include "attrgen/log.h"

#include <iostream>
#include <mutex>

namespace attrgen::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink;
  return sink;
}

}  // namespace

void warn(std::string_view message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (current_sink()) {
    current_sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

ScopedSink::ScopedSink(Sink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  previous_ = std::move(current_sink());
  current_sink() = std::move(sink);
}

ScopedSink::~ScopedSink() {
  std::lock_guard<std::mutex> lock(sink_mutex());
  current_sink() = std::move(previous_);
}

Capture::Capture()
    : guard_([this](std::string_view m) { messages_.emplace_back(m); }) {}

}  // namespace attrgen::log
