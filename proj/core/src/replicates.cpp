#include "ppbt/replicates.hpp"

#include "ppbt/error.hpp"
#include "ppbt/parallel.hpp"

namespace ppbt {

std::vector<TrialOutcome> run_replicates(const DesignConfig& design,
                                         const ThresholdPair& thresholds,
                                         const ScenarioRates& scenario,
                                         int n_reps, const RngPolicy& policy,
                                         const PPPEngine& engine,
                                         int workers) {
    if (n_reps < 1) throw ConfigError("replicate count must be at least 1");
    design.validate();
    scenario.validate();
    if (!(engine.prior() == design.prior)) {
        throw ConfigError("PPP engine prior differs from the design prior");
    }
    const LivePPPMonitor monitor(engine, thresholds);
    std::vector<TrialOutcome> out(static_cast<std::size_t>(n_reps));
    parallel_for(out.size(), workers, [&](std::size_t i) {
        out[i] = run_trial(design, scenario, ReplicateStreams{policy, i},
                           monitor);
    });
    return out;
}

std::vector<TrialOutcome> run_replicates(const DesignConfig& design,
                                         const ThresholdPair& thresholds,
                                         const ScenarioRates& scenario,
                                         int n_reps, const RngPolicy& policy,
                                         int workers) {
    const PPPEngine engine(design.prior);
    return run_replicates(design, thresholds, scenario, n_reps, policy, engine,
                          workers);
}

}  // namespace ppbt
