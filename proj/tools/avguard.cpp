// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/commands.hpp"

int main(int argc, char** argv) { return avguard::run_cli(argc, argv); }
