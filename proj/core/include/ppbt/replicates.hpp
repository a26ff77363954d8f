#pragma once

#include <vector>

#include "ppbt/bayes.hpp"
#include "ppbt/designs.hpp"
#include "ppbt/rng.hpp"
#include "ppbt/scenario.hpp"

namespace ppbt {

/*
 * Simulates n_reps independent trials. Replicate i draws only from the
 * substreams of (policy, i), and results are stored by index, so the output
 * is identical for any worker count.
 */
std::vector<TrialOutcome> run_replicates(const DesignConfig& design,
                                         const ThresholdPair& thresholds,
                                         const ScenarioRates& scenario,
                                         int n_reps, const RngPolicy& policy,
                                         const PPPEngine& engine,
                                         int workers = 1);

std::vector<TrialOutcome> run_replicates(const DesignConfig& design,
                                         const ThresholdPair& thresholds,
                                         const ScenarioRates& scenario,
                                         int n_reps, const RngPolicy& policy,
                                         int workers = 1);

}  // namespace ppbt
