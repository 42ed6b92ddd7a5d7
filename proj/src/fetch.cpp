// Copyright 2026 The dpcspell Authors. All Rights Reserved.
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

#include <httplib.h>

#include <regex>

#include "dpcspell/charlex.hpp"
#include "dpcspell/errors.hpp"
#include "io_util.hpp"

namespace dpcspell {

std::size_t fetch_wordlist(const std::string& url,
                           const std::filesystem::path& dest,
                           int timeout_seconds) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw FetchError("unsupported URL: " + url, 0);
  }
  const std::string origin = m[1].str();
  const std::string target = m[2].matched ? m[2].str() : "/";
  if (origin.rfind("https://", 0) == 0) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    throw FetchError("https is not available in this build: " + url, 0);
#endif
  }
  httplib::Client client(origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_follow_location(true);
  auto res = client.Get(target);
  if (!res) {
    throw FetchError("fetch " + url + " failed: " +
                         httplib::to_string(res.error()),
                     0);
  }
  if (res->status < 200 || res->status >= 300) {
    throw FetchError(
        "fetch " + url + " returned HTTP " + std::to_string(res->status),
        res->status);
  }
  detail::write_file(dest, res->body);
  return res->body.size();
}

}  // namespace dpcspell
