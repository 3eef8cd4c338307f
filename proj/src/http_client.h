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

// Thin JSON-over-HTTP helper shared by the remote provider and the remote
// embedder. Keeps cpp-httplib out of every other translation unit.

#pragma once

#include <chrono>
#include <string>

namespace attrgen::http {

struct Response {
  int status = 0;  // 0 when no response was received
  std::string body;
  std::string transport_error;
};

// POSTs `body` as application/json to `url` (http:// or https://) with a
// bearer token. Never throws for transport problems; see transport_error.
Response post_json(const std::string& url, const std::string& bearer_token,
                   const std::string& body, std::chrono::seconds timeout);

}  // namespace attrgen::http
