// Copyright (c) 2026 The nvsr Authors. All Rights Reserved.
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


#pragma once

// The `nvsr` command line.
//
//   nvsr <subcommand> [--config PATH] [--out DIR] [--seed N] [--threads N]
//
// Subcommands: pretrain-sr, fit, eval, ablate, degrade, make-synthetic,
// compare. Every artifact lands under --out (default: paths.output, then
// "nvsr-out").

#include <iosfwd>
#include <string>
#include <vector>

namespace nvsr {

/// `args` excludes the program name. Returns 0 on success, 2 on a usage
/// error (with usage text on `err`) and 1 on any other failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nvsr
