#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppbt/bayes.hpp"
#include "ppbt/designs.hpp"

namespace ppbt {

/*
 * One comparison context: look t (1-based) has n_ctl = t * block_size and
 * n_trt = n_trt_start + t * block_size, up to the maxima. n_trt_start is the
 * carried treatment data (enrichment stage 2), zero otherwise.
 */
struct TableSchedule {
    int block_size = 10;
    int n_trt_start = 0;
    int n_trt_max = 50;
    int n_ctl_max = 50;

    void validate() const;
    int looks() const { return n_ctl_max / block_size; }

    friend bool operator==(const TableSchedule&,
                           const TableSchedule&) = default;
};

/*
 * Precomputed futility decisions. Each look stores a dense
 * (n_ctl + 1) x (n_trt + 1) matrix indexed by (x_ctl, x_trt). The last look
 * is the final analysis: Continue there means efficacy is declared.
 */
struct DecisionTable {
    struct Look {
        int n_ctl = 0;
        int n_trt = 0;
        std::vector<std::uint8_t> cells;

        friend bool operator==(const Look&, const Look&) = default;
    };

    std::string design;
    ThresholdPair thresholds;
    BetaParams prior;
    TableSchedule schedule;
    std::vector<Look> looks;

    int num_looks() const { return static_cast<int>(looks.size()); }

    /// Smallest x_trt that continues at (look, x_ctl); n_trt + 1 if every
    /// x_trt stops.
    int min_continue_trt(int look, int x_ctl) const;

    friend bool operator==(const DecisionTable&,
                           const DecisionTable&) = default;
};

DecisionTable build_table(const std::string& design,
                          const TableSchedule& schedule,
                          const ThresholdPair& thresholds,
                          const PPPEngine& engine, int workers = 1);

/// Constant-time read. Throws std::out_of_range for indices outside the
/// table.
Decision lookup(const DecisionTable& table, int look, int x_ctl, int x_trt);

/*
 * Text format: '#'-prefixed "key: value" header lines, then the CSV header
 * "look,n_ctl,x_ctl,n_trt,x_trt,decision" and one row per entry with
 * decision "stop" or "continue".
 */
void write_text(std::ostream& out, const DecisionTable& table);
DecisionTable read_text(std::istream& in);

/// Little-endian binary cache with magic "PPBTDT01".
void write_binary(std::ostream& out, const DecisionTable& table);
DecisionTable read_binary(std::istream& in);

/// Futility monitor backed by a decision table.
class TableMonitor final : public FutilityMonitor {
   public:
    explicit TableMonitor(const DecisionTable& table) : table_(table) {}

    Decision interim(const ArmData& trt, const ArmData& ctl, int n_trt_max,
                     int n_ctl_max) const override;
    bool final_success(const ArmData& trt, const ArmData& ctl) const override;

   private:
    int look_for(const ArmData& trt, const ArmData& ctl) const;

    const DecisionTable& table_;
};

}  // namespace ppbt
