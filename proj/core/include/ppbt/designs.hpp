#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "ppbt/bayes.hpp"
#include "ppbt/rng.hpp"
#include "ppbt/scenario.hpp"

namespace ppbt {

enum class DesignKind : std::uint8_t { Pooled, Stratified, Enrichment };

std::string_view to_string(DesignKind kind);
std::optional<DesignKind> parse_design_kind(std::string_view text);

/// Lower bound that every stage-1 PPP clears; also the value recorded when no
/// subgroup survives stage 1.
inline constexpr double kNoSelectionSentinel = -1.0;

/*
 * Trial structure shared by the three designs.
 *
 *  Pooled:     one control arm (max_per_arm) shared by three subgroup
 *              treatment arms (max_per_arm each), 3:1 randomization.
 *  Stratified: an independent 1:1 control/treatment pair per subgroup.
 *  Enrichment: stage 1 as Pooled, then `stage2_per_arm` treatment and
 *              `stage2_per_arm` control patients in the selected subgroup.
 */
struct DesignConfig {
    DesignKind kind = DesignKind::Pooled;
    LookSchedule schedule{};
    int stage2_per_arm = 50;
    BetaParams prior{0.5, 0.5};
    double lower_bound = kNoSelectionSentinel;

    static DesignConfig pooled();
    static DesignConfig stratified();
    static DesignConfig enrichment(double lower_bound = kNoSelectionSentinel);

    void validate() const;

    /// Maximum number of enrolled (randomized) patients.
    int max_total() const;
    /// Maximum number of biomarker-tested patients at full enrollment.
    int max_tested(const ScenarioRates& scenario) const;

    friend bool operator==(const DesignConfig&, const DesignConfig&) = default;
};

enum class SubgroupDecision : std::uint8_t {
    Negative = 0,
    Positive = 1,
    StoppedFutility = 2
};

std::string_view to_string(SubgroupDecision d);

inline constexpr int kNotEvaluated = 0;

struct TrialOutcome {
    DesignKind kind = DesignKind::Pooled;
    /// Final status of each subgroup's comparison. For enrichment: stage-1
    /// futility stops, the stage-2 result for the selected subgroup, and
    /// Negative for surviving but unselected subgroups.
    PerSubgroup<SubgroupDecision> decision{};
    /// Look at which each comparison ended (stage-1 look for enrichment).
    PerSubgroup<int> stop_look{};
    /// Stage-1 / per-subgroup treatment arms.
    PerSubgroup<ArmData> treatment{};
    /// One entry for pooled and enrichment (stage-1 pooled control), one per
    /// stratum for stratified.
    std::vector<ArmData> controls;
    int tested = 0;

    // Enrichment only.
    PerSubgroup<double> stage1_ppp{
        kNoSelectionSentinel, kNoSelectionSentinel, kNoSelectionSentinel};
    double stage1_max_ppp = kNoSelectionSentinel;
    std::optional<Subgroup> selected;
    std::optional<SubgroupDecision> stage2_decision;
    int stage2_stop_look = kNotEvaluated;
    /// Cumulative stage-2 treatment data including the carried stage-1 data.
    ArmData stage2_treatment{};
    ArmData stage2_control{};
    int stage2_carried_n = 0;

    int control_total() const;
    int treatment_total() const;
    int total_enrolled() const;

    friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

/*
 * Per-look futility and final-analysis rule. The live implementation
 * evaluates PPP; decision tables provide a lookup-based one.
 */
class FutilityMonitor {
   public:
    virtual ~FutilityMonitor() = default;

    virtual Decision interim(const ArmData& trt, const ArmData& ctl,
                             int n_trt_max, int n_ctl_max) const = 0;
    /// Efficacy at full enrollment: prob_greater on complete data > theta.
    virtual bool final_success(const ArmData& trt,
                               const ArmData& ctl) const = 0;
};

class LivePPPMonitor final : public FutilityMonitor {
   public:
    LivePPPMonitor(const PPPEngine& engine, ThresholdPair thresholds)
        : engine_(engine), thresholds_(thresholds) {}

    Decision interim(const ArmData& trt, const ArmData& ctl, int n_trt_max,
                     int n_ctl_max) const override;
    bool final_success(const ArmData& trt, const ArmData& ctl) const override;

    double ppp(const ArmData& trt, const ArmData& ctl, int n_trt_max,
               int n_ctl_max) const;

    const PPPEngine& engine() const { return engine_; }
    const ThresholdPair& thresholds() const { return thresholds_; }

   private:
    const PPPEngine& engine_;
    ThresholdPair thresholds_;
};

/// Substream arm identifiers. Enrichment stage 1 reuses the pooled ids so a
/// replicate's stage-1 path matches the pooled design's path.
namespace stream_arm {
inline constexpr std::uint32_t kPooledControl = 0;
inline constexpr std::uint32_t kPooledTreatment = 1;  // + subgroup index
inline constexpr std::uint32_t kStratumControl = 4;   // + subgroup index
inline constexpr std::uint32_t kStratumTreatment = 7; // + subgroup index
inline constexpr std::uint32_t kStage2Treatment = 10;
inline constexpr std::uint32_t kStage2Control = 11;
inline constexpr std::uint32_t kTieBreak = 12;
}  // namespace stream_arm

/// Identifies a replicate's family of substreams.
struct ReplicateStreams {
    RngPolicy policy;
    std::uint64_t replicate = 0;

    Stream at(std::uint32_t arm, std::uint32_t block) const {
        return Stream(policy, replicate, arm, block);
    }
};

TrialOutcome run_pooled(const DesignConfig& config,
                        const ScenarioRates& scenario,
                        const ReplicateStreams& streams,
                        const FutilityMonitor& monitor);

TrialOutcome run_stratified(const DesignConfig& config,
                            const ScenarioRates& scenario,
                            const ReplicateStreams& streams,
                            const FutilityMonitor& monitor);

/// Stage 1 only (pooled), with stage-1-end PPPs for surviving subgroups.
TrialOutcome run_enrichment_stage1(const DesignConfig& config,
                                   const ScenarioRates& scenario,
                                   const ReplicateStreams& streams,
                                   const LivePPPMonitor& monitor);

TrialOutcome run_enrichment(const DesignConfig& config,
                            const ScenarioRates& scenario,
                            const ReplicateStreams& streams,
                            const LivePPPMonitor& monitor);

/// Dispatches on config.kind.
TrialOutcome run_trial(const DesignConfig& config,
                       const ScenarioRates& scenario,
                       const ReplicateStreams& streams,
                       const LivePPPMonitor& monitor);

}  // namespace ppbt
