#include "ppbt/config.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "ppbt/error.hpp"
#include "ppbt/format.hpp"

namespace ppbt {

namespace {

PerSubgroup<double> parse_triple(std::string_view text) {
    const auto values = parse_double_list(text);
    if (values.size() != kNumSubgroups) {
        throw ConfigError("expected three comma-separated values (IC0,IC1,IC23)");
    }
    return {values[0], values[1], values[2]};
}

std::string format_triple(const PerSubgroup<double>& v) {
    return format_double_list({v[0], v[1], v[2]});
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"design",
         [](RunConfig& c, std::string_view v) {
             auto kind = parse_design_kind(v);
             if (!kind) {
                 throw ConfigError("expected pooled, stratified or enrichment");
             }
             c.design = *kind;
         }},
        {"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_u64(v); }},
        {"reps", [](RunConfig& c, std::string_view v) { c.reps = parse_int(v); }},
        {"workers",
         [](RunConfig& c, std::string_view v) { c.workers = parse_int(v); }},
        {"out",
         [](RunConfig& c, std::string_view v) {
             if (v.empty()) throw ConfigError("output directory is empty");
             c.out = std::string(v);
         }},
        {"prior_a",
         [](RunConfig& c, std::string_view v) { c.prior.a = parse_double(v); }},
        {"prior_b",
         [](RunConfig& c, std::string_view v) { c.prior.b = parse_double(v); }},
        {"block_size",
         [](RunConfig& c, std::string_view v) { c.block_size = parse_int(v); }},
        {"max_per_arm",
         [](RunConfig& c, std::string_view v) { c.max_per_arm = parse_int(v); }},
        {"stage2_per_arm",
         [](RunConfig& c, std::string_view v) {
             c.stage2_per_arm = parse_int(v);
         }},
        {"control_rate",
         [](RunConfig& c, std::string_view v) {
             c.control_rate = parse_double(v);
         }},
        {"null_rates",
         [](RunConfig& c, std::string_view v) { c.null_rates = parse_triple(v); }},
        {"alt_rates",
         [](RunConfig& c, std::string_view v) { c.alt_rates = parse_triple(v); }},
        {"prevalence",
         [](RunConfig& c, std::string_view v) { c.prevalence = parse_triple(v); }},
        {"posterior_grid",
         [](RunConfig& c, std::string_view v) {
             c.grid.posterior_values = parse_double_list(v);
         }},
        {"predictive_grid",
         [](RunConfig& c, std::string_view v) {
             c.grid.predictive_values = parse_double_list(v);
         }},
        {"t1_min",
         [](RunConfig& c, std::string_view v) { c.bounds.t1_min = parse_double(v); }},
        {"t1_max",
         [](RunConfig& c, std::string_view v) { c.bounds.t1_max = parse_double(v); }},
        {"power_min",
         [](RunConfig& c, std::string_view v) {
             c.bounds.power_min = parse_double(v);
         }},
        {"theta",
         [](RunConfig& c, std::string_view v) {
             c.thresholds.posterior = parse_double(v);
         }},
        {"theta_star",
         [](RunConfig& c, std::string_view v) {
             c.thresholds.predictive = parse_double(v);
         }},
        {"lower_bound",
         [](RunConfig& c, std::string_view v) {
             if (v == "auto") {
                 c.lower_bound.reset();
             } else {
                 c.lower_bound = parse_double(v);
             }
         }},
    };
    return table;
}

}  // namespace

void RunConfig::validate() const {
    auto check = [](const char* field, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("field '") + field + "': " + e.what());
        }
    };
    check("reps", [&] {
        if (reps < 1) throw ConfigError("must be at least 1");
    });
    check("workers", [&] {
        if (workers < 1) throw ConfigError("must be at least 1");
    });
    check("out", [&] {
        if (out.empty()) throw ConfigError("must not be empty");
    });
    check("prior_a", [&] { BetaParams(prior.a, prior.b); });
    check("block_size", [&] {
        LookSchedule{block_size, max_per_arm}.validate();
    });
    check("stage2_per_arm", [&] { design_config().validate(); });
    check("null_rates", [&] { null_scenario().validate(); });
    check("alt_rates", [&] { alt_scenario().validate(); });
    check("posterior_grid", [&] { grid.validate(); });
    check("t1_min", [&] { bounds.validate(); });
    check("theta", [&] {
        ThresholdPair(thresholds.posterior, thresholds.predictive);
    });
    check("lower_bound", [&] {
        if (lower_bound && !(*lower_bound <= 1.0)) {
            throw ConfigError("must be 'auto' or a real number <= 1");
        }
    });
}

DesignConfig RunConfig::design_config() const {
    DesignConfig d;
    d.kind = design;
    d.schedule = LookSchedule{block_size, max_per_arm};
    d.stage2_per_arm = stage2_per_arm;
    d.prior = prior;
    d.lower_bound = lower_bound.value_or(kNoSelectionSentinel);
    return d;
}

ScenarioRates RunConfig::null_scenario() const {
    return ScenarioRates{control_rate, null_rates, prevalence};
}

ScenarioRates RunConfig::alt_scenario() const {
    return ScenarioRates{control_rate, alt_rates, prevalence};
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig config;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = std::string_view(line);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) continue;
        const auto where = source + ":" + std::to_string(line_no) + ": ";
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(where + "expected 'key = value'");
        }
        const auto key = std::string(trim(text.substr(0, eq)));
        const auto value = trim(text.substr(eq + 1));
        const auto& table = setters();
        const auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError(where + "field '" + key + "': unknown field");
        }
        if (!seen.insert(key).second) {
            throw ConfigError(where + "field '" + key + "': repeated field");
        }
        try {
            it->second(config, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + "field '" + key + "': " + e.what());
        }
    }
    try {
        config.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    return parse_config(in, path);
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "design = " << to_string(c.design) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "reps = " << c.reps << "\n";
    out << "workers = " << c.workers << "\n";
    out << "out = " << c.out << "\n";
    out << "prior_a = " << format_double(c.prior.a) << "\n";
    out << "prior_b = " << format_double(c.prior.b) << "\n";
    out << "block_size = " << c.block_size << "\n";
    out << "max_per_arm = " << c.max_per_arm << "\n";
    out << "stage2_per_arm = " << c.stage2_per_arm << "\n";
    out << "control_rate = " << format_double(c.control_rate) << "\n";
    out << "null_rates = " << format_triple(c.null_rates) << "\n";
    out << "alt_rates = " << format_triple(c.alt_rates) << "\n";
    out << "prevalence = " << format_triple(c.prevalence) << "\n";
    out << "posterior_grid = " << format_double_list(c.grid.posterior_values)
        << "\n";
    out << "predictive_grid = " << format_double_list(c.grid.predictive_values)
        << "\n";
    out << "t1_min = " << format_double(c.bounds.t1_min) << "\n";
    out << "t1_max = " << format_double(c.bounds.t1_max) << "\n";
    out << "power_min = " << format_double(c.bounds.power_min) << "\n";
    out << "theta = " << format_double(c.thresholds.posterior) << "\n";
    out << "theta_star = " << format_double(c.thresholds.predictive) << "\n";
    out << "lower_bound = "
        << (c.lower_bound ? format_double(*c.lower_bound) : std::string("auto"))
        << "\n";
    return out.str();
}

}  // namespace ppbt
