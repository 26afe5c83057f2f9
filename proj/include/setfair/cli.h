/*
 * Copyright 2026 The setfair Authors.
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

#ifndef SETFAIR_CLI_H_
#define SETFAIR_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace setfair {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

// 16 hex digits of FNV-1a over the canonical (sorted-key, compact) dump.
std::string ConfigHash(const nlohmann::json& config);

// Full command line, argv[0] included. Returns the process exit code.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace setfair

#endif  // SETFAIR_CLI_H_
