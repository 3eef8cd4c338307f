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

#include "http_client.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

namespace attrgen::http {

Response post_json(const std::string& url, const std::string& bearer_token,
                   const std::string& body, std::chrono::seconds timeout) {
  Response out;
  // Split "scheme://host[:port]/path" into origin and path.
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    out.transport_error = "url without scheme: " + url;
    return out;
  }
  std::size_t path_start = url.find('/', scheme_end + 3);
  std::string origin =
      path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path =
      path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  if (!client.is_valid()) {
    out.transport_error = "unsupported url: " + url;
    return out;
  }
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + bearer_token);
  }
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    out.transport_error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace attrgen::http
