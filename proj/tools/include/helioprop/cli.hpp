// Copyright 2026 The helioprop Authors.
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


#ifndef HELIOPROP_CLI_HPP
#define HELIOPROP_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace helioprop::cli {

/// Exit codes of the helioprop tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;  // bad flags, missing inputs, out-of-range selections
inline constexpr int kExitDiverged = 3;

/// Runs one command line (args excludes the program name). Normal output goes
/// to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace helioprop::cli

#endif  // HELIOPROP_CLI_HPP
