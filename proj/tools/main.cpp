// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

int main(int argc, char** argv) { return visref::cli::run(argc, argv); }
