#pragma once

#include <span>
#include <string>
#include <vector>

#include "ppbt/bayes.hpp"
#include "ppbt/calibration.hpp"
#include "ppbt/config.hpp"
#include "ppbt/designs.hpp"

namespace ppbt {

struct OutputFile {
    std::string name;
    std::string contents;
};

using OutputSet = std::vector<OutputFile>;

/// '#'-prefixed header block: tool version, command, design, seed, replicate
/// count, grid and constraint bounds.
std::string header_block(const RunConfig& config, const std::string& command);

std::string oc_records_csv(std::span<const OCRecord> records,
                           std::span<const double> distances = {});
std::string outcomes_csv(std::span<const TrialOutcome> outcomes);

/*
 * Full OC table, acceptable-set table, optimal-design summary and scatter
 * data (type I error vs power, average N null vs alternative).
 */
OutputSet cmd_calibrate(const RunConfig& config);

/// Per-replicate outcome tables under both scenarios plus the aggregate.
OutputSet cmd_simulate(const RunConfig& config);

/// Decision tables for every comparison context of the design, as text and
/// binary.
OutputSet cmd_table(const RunConfig& config);

struct PPPQuery {
    ArmData trt;
    ArmData ctl;
    int n_trt_max = 50;
    int n_ctl_max = 50;
    BetaParams prior{0.5, 0.5};
    double theta = 0.9;
};

struct PPPReport {
    double ppp = 0.0;
    double prob_greater = 0.0;
};

PPPReport cmd_ppp(const PPPQuery& query);
std::string format_ppp_report(const PPPReport& report);

/// Writes every file into `dir` (created if needed). Files are staged under
/// temporary names and renamed only after all of them were written.
void write_outputs(const std::string& dir, const OutputSet& files);

}  // namespace ppbt
