#ifndef NLQ_EXPERIMENT_RUN_HPP
#define NLQ_EXPERIMENT_RUN_HPP

#include "nlq/experiment/config.hpp"
#include "nlq/experiment/report.hpp"

namespace nlq::experiment {

/// Runs the configured experiment. Deterministic given config + seed.
/// Runtime instabilities produce a failed report (exit code 3), not a throw.
ReportBundle run_experiment(const ExperimentConfig& cfg);

}  // namespace nlq::experiment

#endif
