#include "ppbt/commands.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ppbt/decision_table.hpp"
#include "ppbt/error.hpp"
#include "ppbt/format.hpp"
#include "ppbt/replicates.hpp"

namespace ppbt {

namespace fs = std::filesystem;

std::string header_block(const RunConfig& c, const std::string& command) {
    std::ostringstream out;
    out << "# ppbt version: " << kVersion << "\n";
    out << "# command: " << command << "\n";
    out << "# design: " << to_string(c.design) << "\n";
    out << "# seed: " << c.seed << "\n";
    out << "# reps: " << c.reps << "\n";
    out << "# prior: " << format_double(c.prior.a) << ","
        << format_double(c.prior.b) << "\n";
    out << "# posterior_grid: " << format_double_list(c.grid.posterior_values)
        << "\n";
    out << "# predictive_grid: "
        << format_double_list(c.grid.predictive_values) << "\n";
    out << "# bounds: t1_min=" << format_double(c.bounds.t1_min)
        << " t1_max=" << format_double(c.bounds.t1_max)
        << " power_min=" << format_double(c.bounds.power_min) << "\n";
    return out.str();
}

namespace {

std::string subgroup_columns(const std::string& prefix) {
    std::string out;
    for (auto s : kAllSubgroups) {
        out += "," + prefix + std::string(to_string(s));
    }
    return out;
}

void put_triple(std::ostream& out, const PerSubgroup<double>& v) {
    for (double x : v) out << ',' << format_double(x);
}

}  // namespace

std::string oc_records_csv(std::span<const OCRecord> records,
                           std::span<const double> distances) {
    std::ostringstream out;
    out << "design,theta,theta_star,reps,calib_type1,calib_power"
        << subgroup_columns("type1_") << subgroup_columns("power_")
        << ",avg_total_n_null,avg_total_n_alt,avg_control_n_null,"
           "avg_control_n_alt"
        << subgroup_columns("avg_trt_n_null_")
        << subgroup_columns("avg_trt_n_alt_")
        << ",avg_trt_total_null,avg_trt_total_alt,avg_tested_null,"
           "avg_tested_alt,lower_bound,stage1_type1,stage1_power,stage2_type1,"
           "stage2_power,stage2_type1_unconditional,stage2_power_unconditional"
        << subgroup_columns("selected_null_") << subgroup_columns("selected_alt_");
    if (!distances.empty()) out << ",efficiency_distance";
    out << "\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const bool enrich = r.kind == DesignKind::Enrichment;
        out << to_string(r.kind) << ',' << format_double(r.thresholds.posterior)
            << ',' << format_double(r.thresholds.predictive) << ',' << r.n_reps
            << ',' << format_double(r.calib_type1) << ','
            << format_double(r.calib_power);
        put_triple(out, r.type1);
        put_triple(out, r.power);
        out << ',' << format_double(r.avg_total_n_null) << ','
            << format_double(r.avg_total_n_alt) << ','
            << format_double(r.avg_control_n_null) << ','
            << format_double(r.avg_control_n_alt);
        put_triple(out, r.avg_treatment_n_null);
        put_triple(out, r.avg_treatment_n_alt);
        out << ',' << format_double(r.avg_treatment_total_null) << ','
            << format_double(r.avg_treatment_total_alt) << ','
            << format_double(r.avg_tested_null) << ','
            << format_double(r.avg_tested_alt) << ','
            << (enrich ? format_double(r.lower_bound) : "NA") << ','
            << format_double(r.stage1_type1) << ','
            << format_double(r.stage1_power) << ','
            << format_double(r.stage2_type1) << ','
            << format_double(r.stage2_power) << ','
            << format_double(r.stage2_type1_unconditional) << ','
            << format_double(r.stage2_power_unconditional);
        if (enrich) {
            put_triple(out, r.selected_null);
            put_triple(out, r.selected_alt);
        } else {
            out << ",NA,NA,NA,NA,NA,NA";
        }
        if (!distances.empty()) out << ',' << format_double(distances[i]);
        out << "\n";
    }
    return out.str();
}

std::string outcomes_csv(std::span<const TrialOutcome> outcomes) {
    std::ostringstream out;
    out << "replicate,design,total_enrolled,control_n,treatment_n,tested";
    for (auto s : kAllSubgroups) {
        const auto name = std::string(to_string(s));
        out << ",decision_" << name << ",stop_look_" << name << ",n_trt_"
            << name << ",x_trt_" << name;
    }
    out << ",n_ctl,x_ctl" << subgroup_columns("n_ctl_")
        << subgroup_columns("x_ctl_")
        << ",selected,stage1_max_ppp" << subgroup_columns("stage1_ppp_")
        << ",stage2_decision,stage2_stop_look,stage2_n_trt,stage2_x_trt,"
           "stage2_n_ctl,stage2_x_ctl\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        const bool enrich = o.kind == DesignKind::Enrichment;
        out << i << ',' << to_string(o.kind) << ',' << o.total_enrolled() << ','
            << o.control_total() << ',' << o.treatment_total() << ','
            << o.tested;
        for (auto s : kAllSubgroups) {
            const auto k = index(s);
            out << ',' << to_string(o.decision[k]) << ',' << o.stop_look[k]
                << ',' << o.treatment[k].n << ',' << o.treatment[k].x;
        }
        int n_ctl = 0, x_ctl = 0;
        for (const auto& c : o.controls) {
            n_ctl += c.n;
            x_ctl += c.x;
        }
        out << ',' << n_ctl << ',' << x_ctl;
        if (o.controls.size() == kNumSubgroups) {
            for (const auto& c : o.controls) out << ',' << c.n;
            for (const auto& c : o.controls) out << ',' << c.x;
        } else {
            out << ",NA,NA,NA,NA,NA,NA";
        }
        if (enrich) {
            out << ','
                << (o.selected ? std::string(to_string(*o.selected)) : "none")
                << ',' << format_double(o.stage1_max_ppp);
            put_triple(out, o.stage1_ppp);
            if (o.selected) {
                out << ',' << to_string(*o.stage2_decision) << ','
                    << o.stage2_stop_look << ',' << o.stage2_treatment.n << ','
                    << o.stage2_treatment.x << ',' << o.stage2_control.n << ','
                    << o.stage2_control.x;
            } else {
                out << ",NA,NA,NA,NA,NA,NA";
            }
        } else {
            out << ",NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA";
        }
        out << "\n";
    }
    return out.str();
}

namespace {

std::string prefix(const RunConfig& c) { return std::string(to_string(c.design)); }

std::string scatter_csv(const CalibrationResult& result) {
    std::ostringstream out;
    out << "theta,theta_star,type1,power,avg_total_n_null,avg_total_n_alt,"
           "avg_trt_total_null,avg_trt_total_alt,avg_control_n_null,"
           "avg_control_n_alt,acceptable,optimal,reached_stage2\n";
    std::vector<bool> accepted(result.records.size(), false);
    for (auto i : result.acceptable) accepted[i] = true;
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const auto& r = result.records[i];
        const bool reached =
            r.kind != DesignKind::Enrichment ||
            r.stage1_type1 > 0.0 || r.selected_alt[0] + r.selected_alt[1] +
                                            r.selected_alt[2] >
                                        0.0;
        out << format_double(r.thresholds.posterior) << ','
            << format_double(r.thresholds.predictive) << ','
            << format_double(r.calib_type1) << ','
            << format_double(r.calib_power) << ','
            << format_double(r.avg_total_n_null) << ','
            << format_double(r.avg_total_n_alt) << ','
            << format_double(r.avg_treatment_total_null) << ','
            << format_double(r.avg_treatment_total_alt) << ','
            << format_double(r.avg_control_n_null) << ','
            << format_double(r.avg_control_n_alt) << ','
            << (accepted[i] ? 1 : 0) << ','
            << (result.optimal == i ? 1 : 0) << ',' << (reached ? 1 : 0)
            << "\n";
    }
    return out.str();
}

std::string optimal_summary(const CalibrationResult& result) {
    std::ostringstream out;
    out << "acceptable_count: " << result.acceptable.size() << "\n";
    if (!result.optimal) {
        out << "status: no acceptable design\n";
        return out.str();
    }
    const auto& r = result.records[*result.optimal];
    double distance = 0.0;
    for (std::size_t k = 0; k < result.acceptable.size(); ++k) {
        if (result.acceptable[k] == *result.optimal) {
            distance = result.distances[k];
        }
    }
    out << "status: optimal\n";
    out << "theta: " << format_double(r.thresholds.posterior) << "\n";
    out << "theta_star: " << format_double(r.thresholds.predictive) << "\n";
    out << "efficiency_distance: " << format_double(distance) << "\n";
    out << "type1: " << format_double(r.calib_type1) << "\n";
    out << "power: " << format_double(r.calib_power) << "\n";
    out << "avg_total_n_null: " << format_double(r.avg_total_n_null) << "\n";
    out << "avg_total_n_alt: " << format_double(r.avg_total_n_alt) << "\n";
    if (r.kind == DesignKind::Enrichment) {
        out << "lower_bound: " << format_double(r.lower_bound) << "\n";
        out << "stage1_type1: " << format_double(r.stage1_type1) << "\n";
        out << "stage1_power: " << format_double(r.stage1_power) << "\n";
    }
    return out.str();
}

}  // namespace

OutputSet cmd_calibrate(const RunConfig& config) {
    config.validate();
    const PPPEngine engine(config.prior);
    SweepOptions options{config.reps, config.policy(), config.workers};
    auto records = sweep(config.design_config(), config.grid,
                         config.null_scenario(), config.alt_scenario(), options,
                         engine);
    const auto result = select_optimal(std::move(records), config.bounds);

    std::vector<OCRecord> accepted;
    std::vector<double> distances;
    std::vector<std::size_t> position(result.records.size());
    for (std::size_t k = 0; k < result.acceptable.size(); ++k) {
        position[result.acceptable[k]] = k;
    }
    for (auto i : result.ranking()) {
        accepted.push_back(result.records[i]);
        distances.push_back(result.distances[position[i]]);
    }

    const auto head = header_block(config, "calibrate");
    const auto p = prefix(config);
    return {
        {p + "_oc_records.csv", head + oc_records_csv(result.records)},
        {p + "_acceptable.csv", head + oc_records_csv(accepted, distances)},
        {p + "_optimal.txt", head + optimal_summary(result)},
        {p + "_scatter.csv", head + scatter_csv(result)},
    };
}

OutputSet cmd_simulate(const RunConfig& config) {
    config.validate();
    const PPPEngine engine(config.prior);
    auto design = config.design_config();
    const auto null = config.null_scenario();
    const auto alt = config.alt_scenario();
    if (design.kind == DesignKind::Enrichment && !config.lower_bound) {
        design.lower_bound =
            calibrate_enrichment_bound(design, config.thresholds, null,
                                       config.reps, config.policy(), engine,
                                       config.workers);
    }
    const auto null_out = run_replicates(design, config.thresholds, null,
                                         config.reps, config.policy(), engine,
                                         config.workers);
    const auto alt_out = run_replicates(design, config.thresholds, alt,
                                        config.reps, config.policy(), engine,
                                        config.workers);
    const OCRecord record = aggregate(design, config.thresholds, null_out, alt_out);

    auto head = header_block(config, "simulate");
    head += "# theta: " + format_double(config.thresholds.posterior) + "\n";
    head += "# theta_star: " + format_double(config.thresholds.predictive) + "\n";
    if (design.kind == DesignKind::Enrichment) {
        head += "# lower_bound: " + format_double(design.lower_bound) + "\n";
    }
    const auto p = prefix(config);
    return {
        {p + "_replicates_null.csv", head + outcomes_csv(null_out)},
        {p + "_replicates_alt.csv", head + outcomes_csv(alt_out)},
        {p + "_summary.csv", head + oc_records_csv(std::span(&record, 1))},
    };
}

OutputSet cmd_table(const RunConfig& config) {
    config.validate();
    const PPPEngine engine(config.prior);
    const int n = config.max_per_arm;
    const int b = config.block_size;
    std::vector<std::pair<std::string, TableSchedule>> contexts;
    switch (config.design) {
        case DesignKind::Pooled:
            contexts.push_back({"pooled", {b, 0, n, n}});
            break;
        case DesignKind::Stratified:
            contexts.push_back({"stratified", {b, 0, n, n}});
            break;
        case DesignKind::Enrichment:
            contexts.push_back({"enrichment_stage1", {b, 0, n, n}});
            // Only subgroups that complete stage 1 are selected, so the
            // carried treatment data always has n = max_per_arm.
            contexts.push_back({"enrichment_stage2",
                                {b, n, n + config.stage2_per_arm,
                                 config.stage2_per_arm}});
            break;
    }
    OutputSet files;
    const auto head = header_block(config, "table");
    for (const auto& [name, schedule] : contexts) {
        const auto table = build_table(name, schedule, config.thresholds,
                                       engine, config.workers);
        std::ostringstream text;
        write_text(text, table);
        std::ostringstream bin;
        write_binary(bin, table);
        files.push_back({name + "_table.csv", head + text.str()});
        files.push_back({name + "_table.bin", bin.str()});
    }
    return files;
}

PPPReport cmd_ppp(const PPPQuery& q) {
    if (q.trt.n > q.n_trt_max || q.ctl.n > q.n_ctl_max) {
        throw ConfigError("current enrollment exceeds the arm maximum");
    }
    if (!(q.theta > 0.0 && q.theta < 1.0)) {
        throw ConfigError("theta must lie strictly inside (0, 1)");
    }
    const PPPEngine engine(q.prior);
    PPPReport r;
    r.ppp = engine.ppp(q.trt, q.ctl, q.n_trt_max, q.n_ctl_max, q.theta);
    r.prob_greater = engine.current_prob_greater(q.trt, q.ctl);
    return r;
}

std::string format_ppp_report(const PPPReport& report) {
    return "ppp: " + format_double(report.ppp) +
           "\nprob_greater: " + format_double(report.prob_greater) + "\n";
}

void write_outputs(const std::string& dir, const OutputSet& files) {
    const fs::path root(dir);
    fs::create_directories(root);
    std::vector<fs::path> staged;
    try {
        for (const auto& f : files) {
            const auto tmp = root / (f.name + ".partial");
            std::ofstream out(tmp, std::ios::binary);
            staged.push_back(tmp);
            out << f.contents;
            out.close();
            if (!out) throw std::runtime_error("cannot write " + tmp.string());
        }
    } catch (...) {
        for (const auto& p : staged) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        throw;
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        fs::rename(staged[i], root / files[i].name);
    }
}

}  // namespace ppbt
