#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace ppbt {

/// Biomarker subgroups, ordered by increasing PD-L1 expression.
enum class Subgroup : std::uint8_t { IC0 = 0, IC1 = 1, IC23 = 2 };

inline constexpr std::size_t kNumSubgroups = 3;
inline constexpr std::array<Subgroup, kNumSubgroups> kAllSubgroups = {
    Subgroup::IC0, Subgroup::IC1, Subgroup::IC23};

constexpr std::size_t index(Subgroup s) { return static_cast<std::size_t>(s); }

std::string_view to_string(Subgroup s);
std::optional<Subgroup> parse_subgroup(std::string_view text);

template <class T>
using PerSubgroup = std::array<T, kNumSubgroups>;

/*
 * True response rates for one simulation scenario. The control rate applies
 * to every control arm (pooled, per-stratum, stage 2).
 */
struct ScenarioRates {
    double control_rate = 0.1;
    PerSubgroup<double> treatment_rates = {0.1, 0.1, 0.1};
    PerSubgroup<double> prevalence = {1.0 / 3, 1.0 / 3, 1.0 / 3};

    /// Throws ConfigError unless all rates are in [0, 1] and prevalences are
    /// positive and sum to 1.
    void validate() const;

    double rate(Subgroup s) const { return treatment_rates[index(s)]; }

    static ScenarioRates global_null(double rate = 0.1);
    static ScenarioRates paper_alternative();

    friend bool operator==(const ScenarioRates&,
                           const ScenarioRates&) = default;
};

/// Interim looks every `block_size` patients per arm up to `max_per_arm`.
struct LookSchedule {
    int block_size = 10;
    int max_per_arm = 50;

    void validate() const;
    int looks() const { return max_per_arm / block_size; }

    friend bool operator==(const LookSchedule&, const LookSchedule&) = default;
};

}  // namespace ppbt
