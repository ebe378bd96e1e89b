// Copyright 2026 The Paireval Authors.
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

// The paireval command line, callable in-process.
//
// Exit codes:
//   0  success
//   1  unexpected internal error
//   2  usage error (bad or missing flags)
//   3  configuration error
//   4  input data error (unreadable, malformed or empty input)
//   5  numerical failure (fit did not converge, singular curvature,
//      value outside a ladder)
//   6  missing capability (external encoder not enabled or not installed)
//   7  I/O error

#ifndef PAIREVAL_TOOLS_CLI_H_
#define PAIREVAL_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace paireval {

// `args` excludes the program name. Machine-readable output goes to `out`,
// diagnostics to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

// Exit code for an Error kind.
int ExitCodeForError(const std::string& kind);

}  // namespace paireval

#endif  // PAIREVAL_TOOLS_CLI_H_
