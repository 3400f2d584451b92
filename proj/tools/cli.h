/*
 * Copyright 2026 The cofollow Authors.
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

#ifndef COFOLLOW_TOOLS_CLI_H_
#define COFOLLOW_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace cofollow::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,  // bad flags and unparsable input files
  kIo = 3,
  kDomain = 4,  // missing ids, single-class labels, invalid values
};

// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace cofollow::cli

#endif  // COFOLLOW_TOOLS_CLI_H_
