// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace upfi::cli {

/// Runs one command line (without the program name). Returns the process
/// exit code; errors are reported as a single "error: <kind>: <reason>" line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace upfi::cli
