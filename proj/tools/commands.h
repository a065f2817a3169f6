/*
 * Copyright 2026 The MWE Authors.
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

#ifndef MWE_TOOLS_COMMANDS_H_
#define MWE_TOOLS_COMMANDS_H_

#include <iostream>

namespace mwe::cli {

// Parses argv and runs one subcommand. Returns the process exit code: 0 on
// success, 2 for usage, configuration, input and I/O errors, 1 otherwise.
int RunCli(int argc, const char* const* argv, std::ostream& out = std::cout,
           std::ostream& err = std::cerr);

}  // namespace mwe::cli

#endif  // MWE_TOOLS_COMMANDS_H_
