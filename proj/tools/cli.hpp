// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace visref::cli {

/// Runs the command line; returns the process exit code.
/// 0 ok, 1 replay check failed, 2 parse, 3 shape, 4 infeasible, 5 numerical.
int run(int argc, char** argv);

}  // namespace visref::cli
