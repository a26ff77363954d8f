#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ppbt/bayes.hpp"
#include "ppbt/calibration.hpp"
#include "ppbt/designs.hpp"
#include "ppbt/scenario.hpp"

namespace ppbt {

/*
 * Everything a CLI run needs. Serialized as "key = value" lines; '#' starts a
 * comment. Unknown or repeated keys are rejected.
 *
 *   design          pooled | stratified | enrichment
 *   seed            master seed (u64)
 *   reps            replicates per scenario
 *   workers         worker threads
 *   out             output directory
 *   prior_a/prior_b Beta prior shared by all arms
 *   block_size, max_per_arm, stage2_per_arm
 *   control_rate    control response rate (both scenarios)
 *   null_rates      IC0,IC1,IC23 treatment rates under the null
 *   alt_rates       IC0,IC1,IC23 treatment rates under the alternative
 *   prevalence      IC0,IC1,IC23 prevalences
 *   posterior_grid, predictive_grid   comma-separated thresholds
 *   t1_min, t1_max, power_min         acceptance window
 *   theta, theta_star                 thresholds for simulate / table
 *   lower_bound     auto | real (enrichment simulate)
 */
struct RunConfig {
    DesignKind design = DesignKind::Pooled;
    std::uint64_t seed = 20230101;
    int reps = 1000;
    int workers = 1;
    std::string out = "ppbt-out";
    BetaParams prior{0.5, 0.5};
    int block_size = 10;
    int max_per_arm = 50;
    int stage2_per_arm = 50;
    double control_rate = 0.1;
    PerSubgroup<double> null_rates{0.1, 0.1, 0.1};
    PerSubgroup<double> alt_rates{0.1, 0.2, 0.3};
    PerSubgroup<double> prevalence{1.0 / 3, 1.0 / 3, 1.0 / 3};
    ThresholdGrid grid = ThresholdGrid::paper_default();
    ConstraintBounds bounds{};
    ThresholdPair thresholds{0.9, 0.1};
    std::optional<double> lower_bound;

    /// Checks every embedded invariant; throws ConfigError naming the field.
    void validate() const;

    DesignConfig design_config() const;
    ScenarioRates null_scenario() const;
    ScenarioRates alt_scenario() const;
    RngPolicy policy() const { return RngPolicy{seed, stream_domain::kEvaluation}; }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses "key = value" text. Errors carry "<source>:<line>: field '<key>'".
RunConfig parse_config(std::istream& in, const std::string& source = "config");
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

}  // namespace ppbt
