#include "ppbt/scenario.hpp"

#include <cmath>
#include <string>

#include "ppbt/error.hpp"

namespace ppbt {

std::string_view to_string(Subgroup s) {
    switch (s) {
        case Subgroup::IC0:
            return "IC0";
        case Subgroup::IC1:
            return "IC1";
        case Subgroup::IC23:
            return "IC23";
    }
    return "?";
}

std::optional<Subgroup> parse_subgroup(std::string_view text) {
    for (auto s : kAllSubgroups) {
        if (text == to_string(s)) return s;
    }
    if (text == "IC2/3") return Subgroup::IC23;
    return std::nullopt;
}

void ScenarioRates::validate() const {
    auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!is_prob(control_rate)) {
        throw ConfigError("control_rate must lie in [0, 1]");
    }
    double total = 0.0;
    for (auto s : kAllSubgroups) {
        if (!is_prob(treatment_rates[index(s)])) {
            throw ConfigError("treatment rate for " + std::string(to_string(s)) +
                              " must lie in [0, 1]");
        }
        if (!(prevalence[index(s)] > 0.0)) {
            throw ConfigError("prevalence for " + std::string(to_string(s)) +
                              " must be positive");
        }
        total += prevalence[index(s)];
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("subgroup prevalences must sum to 1");
    }
}

ScenarioRates ScenarioRates::global_null(double rate) {
    ScenarioRates s;
    s.control_rate = rate;
    s.treatment_rates = {rate, rate, rate};
    return s;
}

ScenarioRates ScenarioRates::paper_alternative() {
    ScenarioRates s;
    s.control_rate = 0.1;
    s.treatment_rates = {0.1, 0.2, 0.3};
    return s;
}

void LookSchedule::validate() const {
    if (block_size < 1) throw ConfigError("block_size must be at least 1");
    if (max_per_arm < block_size || max_per_arm % block_size != 0) {
        throw ConfigError("max_per_arm must be a positive multiple of block_size");
    }
}

}  // namespace ppbt
