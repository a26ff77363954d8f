#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ppbt/bayes.hpp"
#include "ppbt/designs.hpp"
#include "ppbt/rng.hpp"
#include "ppbt/scenario.hpp"

namespace ppbt {

struct ThresholdGrid {
    std::vector<double> posterior_values;
    std::vector<double> predictive_values;

    /// 14 posterior x 4 predictive thresholds.
    static ThresholdGrid paper_default();

    void validate() const;
    /// Posterior-major order.
    std::vector<ThresholdPair> pairs() const;

    friend bool operator==(const ThresholdGrid&,
                           const ThresholdGrid&) = default;
};

/// Acceptance window on the calibration type I error and power.
struct ConstraintBounds {
    double t1_min = 0.05;
    double t1_max = 0.10;
    double power_min = 0.80;

    void validate() const;

    friend bool operator==(const ConstraintBounds&,
                           const ConstraintBounds&) = default;
};

/*
 * Operating characteristics of one threshold pair, aggregated over null and
 * alternative replicates. Rates without any eligible replicate are NaN.
 */
struct OCRecord {
    DesignKind kind = DesignKind::Pooled;
    ThresholdPair thresholds;
    int n_reps = 0;

    /// Positive rate of each subgroup under the null / alternative.
    PerSubgroup<double> type1{};
    PerSubgroup<double> power{};

    /// Quantities used for the acceptance filter. Pooled/stratified: IC0
    /// under the null and IC2/3 under the alternative. Enrichment: stage-2
    /// positive rate among replicates that reached stage 2.
    double calib_type1 = 0.0;
    double calib_power = 0.0;

    double avg_total_n_null = 0.0;
    double avg_total_n_alt = 0.0;
    double avg_control_n_null = 0.0;
    double avg_control_n_alt = 0.0;
    PerSubgroup<double> avg_treatment_n_null{};
    PerSubgroup<double> avg_treatment_n_alt{};
    double avg_treatment_total_null = 0.0;
    double avg_treatment_total_alt = 0.0;
    double avg_tested_null = 0.0;
    double avg_tested_alt = 0.0;

    // Enrichment only.
    double lower_bound = kNoSelectionSentinel;
    double stage1_type1 = 0.0;  ///< any subgroup selected under the null
    double stage1_power = 0.0;  ///< IC2/3 selected under the alternative
    double stage2_type1 = 0.0;  ///< conditional on reaching stage 2
    double stage2_power = 0.0;  ///< conditional on reaching stage 2
    double stage2_type1_unconditional = 0.0;
    double stage2_power_unconditional = 0.0;
    PerSubgroup<double> selected_null{};
    PerSubgroup<double> selected_alt{};
};

OCRecord aggregate(const DesignConfig& design, const ThresholdPair& thresholds,
                   std::span<const TrialOutcome> null_outcomes,
                   std::span<const TrialOutcome> alt_outcomes);

/// Value at rank ceil(q * n) (1-based) of the sorted sample.
double nearest_rank_percentile(std::vector<double> values, double q);

inline constexpr double kLowerBoundQuantile = 0.8;

/*
 * Stage-1-only null simulations in the lower-bound stream domain; returns the
 * nearest-rank 80th percentile of the per-replicate maximum stage-1 PPP over
 * surviving subgroups (kNoSelectionSentinel when none survive).
 */
double calibrate_enrichment_bound(const DesignConfig& design,
                                  const ThresholdPair& thresholds,
                                  const ScenarioRates& scenario_null,
                                  int n_reps, RngPolicy policy,
                                  const PPPEngine& engine, int workers = 1);

/// Per-replicate stage-1 maxima behind calibrate_enrichment_bound.
std::vector<double> stage1_max_ppp_sample(const DesignConfig& design,
                                          const ThresholdPair& thresholds,
                                          const ScenarioRates& scenario_null,
                                          int n_reps, RngPolicy policy,
                                          const PPPEngine& engine,
                                          int workers = 1);

struct SweepOptions {
    int n_reps = 1000;
    RngPolicy policy{};
    int workers = 1;
};

/// OCRecord for one threshold pair. Enrichment designs get a freshly
/// calibrated lower bound first.
OCRecord evaluate(const DesignConfig& design, const ThresholdPair& thresholds,
                  const ScenarioRates& scenario_null,
                  const ScenarioRates& scenario_alt,
                  const SweepOptions& options, const PPPEngine& engine);

std::vector<OCRecord> sweep(const DesignConfig& design,
                            const ThresholdGrid& grid,
                            const ScenarioRates& scenario_null,
                            const ScenarioRates& scenario_alt,
                            const SweepOptions& options,
                            const PPPEngine& engine);

std::vector<std::size_t> filter_acceptable(std::span<const OCRecord> records,
                                           const ConstraintBounds& bounds);

/// Euclidean distance in (avg N null, avg N alt) to the utopia point
/// (min null N, max alt N) over `acceptable`.
double efficiency_distance(const OCRecord& record,
                           std::span<const OCRecord> acceptable);

struct CalibrationResult {
    std::vector<OCRecord> records;
    std::vector<std::size_t> acceptable;
    /// Distance of each acceptable record, parallel to `acceptable`.
    std::vector<double> distances;
    std::optional<std::size_t> optimal;
    ConstraintBounds bounds;

    /// Acceptable indices sorted by (distance, null N, theta, theta*).
    std::vector<std::size_t> ranking() const;
};

CalibrationResult select_optimal(std::vector<OCRecord> records,
                                 const ConstraintBounds& bounds);

}  // namespace ppbt
