/**
 * Copyright 2026 The BNCL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BNCL_CLI_HPP_
#define BNCL_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace bncl::cli {

/// Runs one subcommand (graph, train, eval, gradcheck, synth, ablate) and
/// returns the process exit code: 0 success, 1 failed check, 2 numeric or
/// configuration degeneracy, 3 I/O, 4 validation.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace bncl::cli

#endif  // BNCL_CLI_HPP_
