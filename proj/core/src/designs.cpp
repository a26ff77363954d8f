#include "ppbt/designs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppbt/error.hpp"

namespace ppbt {

std::string_view to_string(DesignKind kind) {
    switch (kind) {
        case DesignKind::Pooled:
            return "pooled";
        case DesignKind::Stratified:
            return "stratified";
        case DesignKind::Enrichment:
            return "enrichment";
    }
    return "?";
}

std::optional<DesignKind> parse_design_kind(std::string_view text) {
    for (auto k : {DesignKind::Pooled, DesignKind::Stratified,
                   DesignKind::Enrichment}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

std::string_view to_string(SubgroupDecision d) {
    switch (d) {
        case SubgroupDecision::Negative:
            return "negative";
        case SubgroupDecision::Positive:
            return "positive";
        case SubgroupDecision::StoppedFutility:
            return "futility";
    }
    return "?";
}

DesignConfig DesignConfig::pooled() { return DesignConfig{}; }

DesignConfig DesignConfig::stratified() {
    DesignConfig c;
    c.kind = DesignKind::Stratified;
    return c;
}

DesignConfig DesignConfig::enrichment(double lower_bound) {
    DesignConfig c;
    c.kind = DesignKind::Enrichment;
    c.lower_bound = lower_bound;
    return c;
}

void DesignConfig::validate() const {
    schedule.validate();
    if (kind == DesignKind::Enrichment) {
        if (stage2_per_arm < schedule.block_size ||
            stage2_per_arm % schedule.block_size != 0) {
            throw ConfigError(
                "stage2_per_arm must be a positive multiple of block_size");
        }
        if (!std::isfinite(lower_bound) || lower_bound > 1.0) {
            throw ConfigError("lower_bound must be finite and at most 1");
        }
    }
    BetaParams(prior.a, prior.b);
}

int DesignConfig::max_total() const {
    const int n = schedule.max_per_arm;
    switch (kind) {
        case DesignKind::Pooled:
            return n + 3 * n;
        case DesignKind::Stratified:
            return 2 * 3 * n;
        case DesignKind::Enrichment:
            return n + 3 * n + 2 * stage2_per_arm;
    }
    return 0;
}

namespace {

int screened_for(int enrolled, double prevalence) {
    return static_cast<int>(std::llround(enrolled / prevalence));
}

}  // namespace

int DesignConfig::max_tested(const ScenarioRates& scenario) const {
    const int n = schedule.max_per_arm;
    switch (kind) {
        case DesignKind::Pooled:
            return 3 * n;
        case DesignKind::Stratified:
            return 2 * 3 * n;
        case DesignKind::Enrichment: {
            int worst = 0;
            for (auto s : kAllSubgroups) {
                worst = std::max(worst, screened_for(2 * stage2_per_arm,
                                                     scenario.prevalence[index(s)]));
            }
            return 3 * n + worst;
        }
    }
    return 0;
}

int TrialOutcome::control_total() const {
    int n = stage2_control.n;
    for (const auto& c : controls) n += c.n;
    return n;
}

int TrialOutcome::treatment_total() const {
    int n = stage2_treatment.n - stage2_carried_n;
    for (const auto& t : treatment) n += t.n;
    return n;
}

int TrialOutcome::total_enrolled() const {
    return control_total() + treatment_total();
}

Decision LivePPPMonitor::interim(const ArmData& trt, const ArmData& ctl,
                                 int n_trt_max, int n_ctl_max) const {
    return futility_decision(ppp(trt, ctl, n_trt_max, n_ctl_max), thresholds_);
}

bool LivePPPMonitor::final_success(const ArmData& trt,
                                   const ArmData& ctl) const {
    return engine_.grid(trt.n, ctl.n).success(trt.x, ctl.x,
                                              thresholds_.posterior);
}

double LivePPPMonitor::ppp(const ArmData& trt, const ArmData& ctl,
                           int n_trt_max, int n_ctl_max) const {
    return engine_.ppp(trt, ctl, n_trt_max, n_ctl_max, thresholds_.posterior);
}

namespace {

struct ArmPlan {
    std::uint32_t stream_arm;
    double rate;
    ArmData initial;
};

struct ArmResult {
    ArmData data;
    SubgroupDecision decision = SubgroupDecision::Negative;
    int stop_look = kNotEvaluated;
    bool survived = false;
};

struct SharedControlResult {
    ArmData control;
    std::vector<ArmResult> arms;
};

/*
 * Treatment arms compared against one concurrent control. At look t every
 * active arm (control included) receives one block. Treatment arm maxima are
 * initial.n + control_max. The control accrues while any treatment arm is
 * active. With `declare_final` false, arms that reach the last look are left
 * undecided (survived = true, decision Negative).
 */
SharedControlResult run_shared_control(int block_size, int control_max,
                                       double control_rate,
                                       std::uint32_t control_stream,
                                       const std::vector<ArmPlan>& plans,
                                       const ReplicateStreams& streams,
                                       const FutilityMonitor& monitor,
                                       bool declare_final) {
    SharedControlResult out;
    out.arms.resize(plans.size());
    std::vector<bool> active(plans.size(), true);
    for (std::size_t i = 0; i < plans.size(); ++i) {
        out.arms[i].data = plans[i].initial;
    }
    const int looks = control_max / block_size;
    for (int t = 1; t <= looks; ++t) {
        if (std::none_of(active.begin(), active.end(),
                         [](bool a) { return a; })) {
            break;
        }
        auto cs = streams.at(control_stream, static_cast<std::uint32_t>(t));
        const int xc = generate_block(control_rate, block_size, cs);
        out.control = ArmData(out.control.n + block_size, out.control.x + xc);
        for (std::size_t i = 0; i < plans.size(); ++i) {
            if (!active[i]) continue;
            auto ts = streams.at(plans[i].stream_arm,
                                 static_cast<std::uint32_t>(t));
            const int xt = generate_block(plans[i].rate, block_size, ts);
            auto& arm = out.arms[i];
            arm.data = ArmData(arm.data.n + block_size, arm.data.x + xt);
        }
        for (std::size_t i = 0; i < plans.size(); ++i) {
            if (!active[i]) continue;
            auto& arm = out.arms[i];
            const int trt_max = plans[i].initial.n + control_max;
            if (t < looks) {
                if (monitor.interim(arm.data, out.control, trt_max,
                                    control_max) == Decision::Stop) {
                    arm.decision = SubgroupDecision::StoppedFutility;
                    arm.stop_look = t;
                    active[i] = false;
                }
            } else {
                arm.stop_look = t;
                arm.survived = true;
                if (declare_final) {
                    arm.decision = monitor.final_success(arm.data, out.control)
                                       ? SubgroupDecision::Positive
                                       : SubgroupDecision::Negative;
                }
                active[i] = false;
            }
        }
    }
    return out;
}

std::vector<ArmPlan> pooled_plans(const ScenarioRates& scenario) {
    std::vector<ArmPlan> plans;
    for (auto s : kAllSubgroups) {
        plans.push_back({stream_arm::kPooledTreatment +
                             static_cast<std::uint32_t>(index(s)),
                         scenario.rate(s), ArmData{}});
    }
    return plans;
}

void require_kind(const DesignConfig& config, DesignKind kind) {
    if (config.kind != kind) {
        throw ConfigError("design runner called with a " +
                          std::string(to_string(config.kind)) + " config");
    }
}

}  // namespace

TrialOutcome run_pooled(const DesignConfig& config,
                        const ScenarioRates& scenario,
                        const ReplicateStreams& streams,
                        const FutilityMonitor& monitor) {
    require_kind(config, DesignKind::Pooled);
    const auto result = run_shared_control(
        config.schedule.block_size, config.schedule.max_per_arm,
        scenario.control_rate, stream_arm::kPooledControl,
        pooled_plans(scenario), streams, monitor, true);
    TrialOutcome out;
    out.kind = DesignKind::Pooled;
    out.controls = {result.control};
    for (auto s : kAllSubgroups) {
        const auto& arm = result.arms[index(s)];
        out.treatment[index(s)] = arm.data;
        out.decision[index(s)] = arm.decision;
        out.stop_look[index(s)] = arm.stop_look;
        out.tested += arm.data.n;
    }
    return out;
}

TrialOutcome run_stratified(const DesignConfig& config,
                            const ScenarioRates& scenario,
                            const ReplicateStreams& streams,
                            const FutilityMonitor& monitor) {
    require_kind(config, DesignKind::Stratified);
    TrialOutcome out;
    out.kind = DesignKind::Stratified;
    for (auto s : kAllSubgroups) {
        const auto k = static_cast<std::uint32_t>(index(s));
        const auto result = run_shared_control(
            config.schedule.block_size, config.schedule.max_per_arm,
            scenario.control_rate, stream_arm::kStratumControl + k,
            {{stream_arm::kStratumTreatment + k, scenario.rate(s), ArmData{}}},
            streams, monitor, true);
        const auto& arm = result.arms.front();
        out.controls.push_back(result.control);
        out.treatment[index(s)] = arm.data;
        out.decision[index(s)] = arm.decision;
        out.stop_look[index(s)] = arm.stop_look;
        out.tested += arm.data.n + result.control.n;
    }
    return out;
}

TrialOutcome run_enrichment_stage1(const DesignConfig& config,
                                   const ScenarioRates& scenario,
                                   const ReplicateStreams& streams,
                                   const LivePPPMonitor& monitor) {
    require_kind(config, DesignKind::Enrichment);
    const int n_max = config.schedule.max_per_arm;
    const auto result = run_shared_control(
        config.schedule.block_size, n_max, scenario.control_rate,
        stream_arm::kPooledControl, pooled_plans(scenario), streams, monitor,
        false);
    TrialOutcome out;
    out.kind = DesignKind::Enrichment;
    out.controls = {result.control};
    for (auto s : kAllSubgroups) {
        const auto& arm = result.arms[index(s)];
        out.treatment[index(s)] = arm.data;
        out.decision[index(s)] = arm.decision;
        out.stop_look[index(s)] = arm.stop_look;
        out.tested += arm.data.n;
        if (arm.survived) {
            // Stage-1 horizon: the pooled maxima.
            const double ppp =
                monitor.ppp(arm.data, result.control, n_max, n_max);
            out.stage1_ppp[index(s)] = ppp;
            out.stage1_max_ppp = std::max(out.stage1_max_ppp, ppp);
        }
    }
    return out;
}

namespace {

// Highest stage-1 PPP; ties go to the higher observed treatment response
// rate, then to a uniform draw from the replicate's tie-break substream.
std::optional<Subgroup> select_subgroup(const TrialOutcome& stage1,
                                        double lower_bound,
                                        const ReplicateStreams& streams) {
    std::vector<Subgroup> best;
    for (auto s : kAllSubgroups) {
        if (stage1.decision[index(s)] == SubgroupDecision::StoppedFutility) {
            continue;
        }
        const double ppp = stage1.stage1_ppp[index(s)];
        if (ppp < lower_bound) continue;
        if (best.empty() || ppp > stage1.stage1_ppp[index(best.front())]) {
            best = {s};
        } else if (ppp == stage1.stage1_ppp[index(best.front())]) {
            best.push_back(s);
        }
    }
    if (best.size() > 1) {
        auto rate_cmp = [&](Subgroup a, Subgroup b) {
            const auto& da = stage1.treatment[index(a)];
            const auto& db = stage1.treatment[index(b)];
            // x_a / n_a vs x_b / n_b without division.
            return static_cast<long>(da.x) * db.n <
                   static_cast<long>(db.x) * da.n;
        };
        const auto top = *std::max_element(best.begin(), best.end(), rate_cmp);
        std::erase_if(best, [&](Subgroup s) {
            return rate_cmp(s, top) || rate_cmp(top, s);
        });
    }
    if (best.empty()) return std::nullopt;
    if (best.size() == 1) return best.front();
    auto tie = streams.at(stream_arm::kTieBreak, 0);
    const auto pick = static_cast<std::size_t>(tie.uniform() *
                                               static_cast<double>(best.size()));
    return best[std::min(pick, best.size() - 1)];
}

}  // namespace

TrialOutcome run_enrichment(const DesignConfig& config,
                            const ScenarioRates& scenario,
                            const ReplicateStreams& streams,
                            const LivePPPMonitor& monitor) {
    TrialOutcome out = run_enrichment_stage1(config, scenario, streams, monitor);
    out.selected = select_subgroup(out, config.lower_bound, streams);
    if (!out.selected) return out;

    const Subgroup sel = *out.selected;
    const ArmData carried = out.treatment[index(sel)];
    out.stage2_carried_n = carried.n;
    const auto result = run_shared_control(
        config.schedule.block_size, config.stage2_per_arm,
        scenario.control_rate, stream_arm::kStage2Control,
        {{stream_arm::kStage2Treatment, scenario.rate(sel), carried}}, streams,
        monitor, true);
    const auto& arm = result.arms.front();
    out.stage2_treatment = arm.data;
    out.stage2_control = result.control;
    out.stage2_decision = arm.decision;
    out.stage2_stop_look = arm.stop_look;
    out.decision[index(sel)] = arm.decision;
    out.tested += screened_for(result.control.n + arm.data.n - carried.n,
                               scenario.prevalence[index(sel)]);
    return out;
}

TrialOutcome run_trial(const DesignConfig& config,
                       const ScenarioRates& scenario,
                       const ReplicateStreams& streams,
                       const LivePPPMonitor& monitor) {
    switch (config.kind) {
        case DesignKind::Pooled:
            return run_pooled(config, scenario, streams, monitor);
        case DesignKind::Stratified:
            return run_stratified(config, scenario, streams, monitor);
        case DesignKind::Enrichment:
            return run_enrichment(config, scenario, streams, monitor);
    }
    throw ConfigError("unknown design kind");
}

}  // namespace ppbt
