#include "ppbt/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "ppbt/error.hpp"
#include "ppbt/parallel.hpp"
#include "ppbt/replicates.hpp"

namespace ppbt {

ThresholdGrid ThresholdGrid::paper_default() {
    return ThresholdGrid{{0.7, 0.74, 0.78, 0.82, 0.86, 0.9, 0.92, 0.93, 0.94,
                          0.95, 0.96, 0.97, 0.98, 0.99},
                         {0.05, 0.1, 0.15, 0.2}};
}

void ThresholdGrid::validate() const {
    if (posterior_values.empty() || predictive_values.empty()) {
        throw ConfigError("threshold grid must be non-empty");
    }
    for (double t : posterior_values) ThresholdPair(t, 0.5);
    for (double t : predictive_values) ThresholdPair(0.5, t);
}

std::vector<ThresholdPair> ThresholdGrid::pairs() const {
    std::vector<ThresholdPair> out;
    for (double post : posterior_values) {
        for (double pred : predictive_values) out.emplace_back(post, pred);
    }
    return out;
}

void ConstraintBounds::validate() const {
    if (!(t1_min >= 0.0 && t1_min <= t1_max && t1_max <= 1.0)) {
        throw ConfigError("type I error bounds must satisfy 0 <= t1_min <= "
                          "t1_max <= 1");
    }
    if (!(power_min >= 0.0 && power_min <= 1.0)) {
        throw ConfigError("power_min must lie in [0, 1]");
    }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(double num, double den) { return den > 0.0 ? num / den : kNaN; }

struct ScenarioSums {
    double reps = 0;
    PerSubgroup<double> positive{};
    double total_n = 0;
    double control_n = 0;
    PerSubgroup<double> treatment_n{};
    double treatment_total = 0;
    double tested = 0;
    double proceeded = 0;
    double stage2_positive = 0;
    PerSubgroup<double> selected{};
};

ScenarioSums sum_outcomes(std::span<const TrialOutcome> outcomes) {
    ScenarioSums s;
    for (const auto& o : outcomes) {
        s.reps += 1;
        s.total_n += o.total_enrolled();
        s.control_n += o.control_total();
        s.treatment_total += o.treatment_total();
        s.tested += o.tested;
        for (auto g : kAllSubgroups) {
            if (o.decision[index(g)] == SubgroupDecision::Positive) {
                s.positive[index(g)] += 1;
            }
            s.treatment_n[index(g)] += o.treatment[index(g)].n;
        }
        if (o.selected) {
            s.proceeded += 1;
            s.selected[index(*o.selected)] += 1;
            // Stage-2 treatment enrollees beyond the carried stage-1 data.
            s.treatment_n[index(*o.selected)] +=
                o.stage2_treatment.n - o.stage2_carried_n;
            if (o.stage2_decision == SubgroupDecision::Positive) {
                s.stage2_positive += 1;
            }
        }
    }
    return s;
}

}  // namespace

OCRecord aggregate(const DesignConfig& design, const ThresholdPair& thresholds,
                   std::span<const TrialOutcome> null_outcomes,
                   std::span<const TrialOutcome> alt_outcomes) {
    const auto null = sum_outcomes(null_outcomes);
    const auto alt = sum_outcomes(alt_outcomes);
    OCRecord r;
    r.kind = design.kind;
    r.thresholds = thresholds;
    r.n_reps = static_cast<int>(std::max(null.reps, alt.reps));
    r.lower_bound = design.lower_bound;
    for (auto g : kAllSubgroups) {
        const auto i = index(g);
        r.type1[i] = ratio(null.positive[i], null.reps);
        r.power[i] = ratio(alt.positive[i], alt.reps);
        r.avg_treatment_n_null[i] = ratio(null.treatment_n[i], null.reps);
        r.avg_treatment_n_alt[i] = ratio(alt.treatment_n[i], alt.reps);
        r.selected_null[i] = ratio(null.selected[i], null.reps);
        r.selected_alt[i] = ratio(alt.selected[i], alt.reps);
    }
    r.avg_total_n_null = ratio(null.total_n, null.reps);
    r.avg_total_n_alt = ratio(alt.total_n, alt.reps);
    r.avg_control_n_null = ratio(null.control_n, null.reps);
    r.avg_control_n_alt = ratio(alt.control_n, alt.reps);
    r.avg_treatment_total_null = ratio(null.treatment_total, null.reps);
    r.avg_treatment_total_alt = ratio(alt.treatment_total, alt.reps);
    r.avg_tested_null = ratio(null.tested, null.reps);
    r.avg_tested_alt = ratio(alt.tested, alt.reps);

    if (design.kind == DesignKind::Enrichment) {
        r.stage1_type1 = ratio(null.proceeded, null.reps);
        r.stage1_power =
            ratio(alt.selected[index(Subgroup::IC23)], alt.reps);
        r.stage2_type1 = ratio(null.stage2_positive, null.proceeded);
        r.stage2_power = ratio(alt.stage2_positive, alt.proceeded);
        r.stage2_type1_unconditional = ratio(null.stage2_positive, null.reps);
        r.stage2_power_unconditional = ratio(alt.stage2_positive, alt.reps);
        r.calib_type1 = r.stage2_type1;
        r.calib_power = r.stage2_power;
    } else {
        r.stage1_type1 = r.stage1_power = kNaN;
        r.stage2_type1 = r.stage2_power = kNaN;
        r.stage2_type1_unconditional = r.stage2_power_unconditional = kNaN;
        r.calib_type1 = r.type1[index(Subgroup::IC0)];
        r.calib_power = r.power[index(Subgroup::IC23)];
    }
    return r;
}

double nearest_rank_percentile(std::vector<double> values, double q) {
    if (values.empty()) throw ConfigError("percentile of an empty sample");
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("percentile outside (0, 1]");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

std::vector<double> stage1_max_ppp_sample(const DesignConfig& design,
                                          const ThresholdPair& thresholds,
                                          const ScenarioRates& scenario_null,
                                          int n_reps, RngPolicy policy,
                                          const PPPEngine& engine,
                                          int workers) {
    if (design.kind != DesignKind::Enrichment) {
        throw ConfigError("lower-bound calibration requires an enrichment design");
    }
    if (n_reps < 1) throw ConfigError("replicate count must be at least 1");
    policy.domain = stream_domain::kLowerBound;
    const LivePPPMonitor monitor(engine, thresholds);
    std::vector<double> maxima(static_cast<std::size_t>(n_reps));
    parallel_for(maxima.size(), workers, [&](std::size_t i) {
        maxima[i] = run_enrichment_stage1(design, scenario_null,
                                          ReplicateStreams{policy, i}, monitor)
                        .stage1_max_ppp;
    });
    return maxima;
}

double calibrate_enrichment_bound(const DesignConfig& design,
                                  const ThresholdPair& thresholds,
                                  const ScenarioRates& scenario_null,
                                  int n_reps, RngPolicy policy,
                                  const PPPEngine& engine, int workers) {
    return nearest_rank_percentile(
        stage1_max_ppp_sample(design, thresholds, scenario_null, n_reps,
                              policy, engine, workers),
        kLowerBoundQuantile);
}

OCRecord evaluate(const DesignConfig& design, const ThresholdPair& thresholds,
                  const ScenarioRates& scenario_null,
                  const ScenarioRates& scenario_alt,
                  const SweepOptions& options, const PPPEngine& engine) {
    DesignConfig config = design;
    RngPolicy policy = options.policy;
    policy.domain = stream_domain::kEvaluation;
    if (config.kind == DesignKind::Enrichment) {
        config.lower_bound = calibrate_enrichment_bound(
            config, thresholds, scenario_null, options.n_reps, policy, engine,
            options.workers);
    }
    const auto null = run_replicates(config, thresholds, scenario_null,
                                     options.n_reps, policy, engine,
                                     options.workers);
    const auto alt = run_replicates(config, thresholds, scenario_alt,
                                    options.n_reps, policy, engine,
                                    options.workers);
    return aggregate(config, thresholds, null, alt);
}

std::vector<OCRecord> sweep(const DesignConfig& design,
                            const ThresholdGrid& grid,
                            const ScenarioRates& scenario_null,
                            const ScenarioRates& scenario_alt,
                            const SweepOptions& options,
                            const PPPEngine& engine) {
    grid.validate();
    std::vector<OCRecord> out;
    for (const auto& pair : grid.pairs()) {
        out.push_back(evaluate(design, pair, scenario_null, scenario_alt,
                               options, engine));
    }
    return out;
}

std::vector<std::size_t> filter_acceptable(std::span<const OCRecord> records,
                                           const ConstraintBounds& bounds) {
    bounds.validate();
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        // NaN rates (no eligible replicates) fail every comparison.
        if (r.calib_type1 >= bounds.t1_min && r.calib_type1 <= bounds.t1_max &&
            r.calib_power >= bounds.power_min) {
            out.push_back(i);
        }
    }
    return out;
}

double efficiency_distance(const OCRecord& record,
                           std::span<const OCRecord> acceptable) {
    if (acceptable.empty()) {
        throw ConfigError("efficiency distance needs a non-empty acceptable set");
    }
    double best_null = std::numeric_limits<double>::infinity();
    double best_alt = -std::numeric_limits<double>::infinity();
    for (const auto& r : acceptable) {
        best_null = std::min(best_null, r.avg_total_n_null);
        best_alt = std::max(best_alt, r.avg_total_n_alt);
    }
    return std::hypot(record.avg_total_n_null - best_null,
                      record.avg_total_n_alt - best_alt);
}

std::vector<std::size_t> CalibrationResult::ranking() const {
    std::vector<std::size_t> order(acceptable.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = records[acceptable[a]];
        const auto& rb = records[acceptable[b]];
        return std::tie(distances[a], ra.avg_total_n_null,
                        ra.thresholds.posterior, ra.thresholds.predictive) <
               std::tie(distances[b], rb.avg_total_n_null,
                        rb.thresholds.posterior, rb.thresholds.predictive);
    });
    std::vector<std::size_t> out;
    for (auto k : order) out.push_back(acceptable[k]);
    return out;
}

CalibrationResult select_optimal(std::vector<OCRecord> records,
                                 const ConstraintBounds& bounds) {
    CalibrationResult result;
    result.bounds = bounds;
    result.records = std::move(records);
    result.acceptable = filter_acceptable(result.records, bounds);
    std::vector<OCRecord> accepted;
    for (auto i : result.acceptable) accepted.push_back(result.records[i]);
    for (const auto& r : accepted) {
        result.distances.push_back(efficiency_distance(r, accepted));
    }
    if (!result.acceptable.empty()) result.optimal = result.ranking().front();
    return result;
}

}  // namespace ppbt
