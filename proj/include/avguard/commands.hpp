// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "avguard/config.hpp"
#include "avguard/metrics.hpp"
#include "avguard/sfe_localizer.hpp"
#include "avguard/training.hpp"

namespace avguard {

void cmd_gen_data(const ExperimentConfig& cfg);
MetricReport cmd_embed(const ExperimentConfig& cfg);
MetricReport cmd_recover(const ExperimentConfig& cfg);
TamperReport cmd_localize(const ExperimentConfig& cfg);
void cmd_simulate(const ExperimentConfig& cfg);
TrainOutcome cmd_train(const ExperimentConfig& cfg);
MetricReport cmd_evaluate(const ExperimentConfig& cfg);

// Full command-line entry: parses argv, dispatches, maps library errors to
// the documented exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace avguard
