// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/cli.hpp"

int main(int argc, char** argv) { return ddsyn::cli::run(argc, argv); }
