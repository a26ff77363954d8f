// ppbt: calibrate, simulate and tabulate predictive-probability designs.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "ppbt/commands.hpp"
#include "ppbt/config.hpp"
#include "ppbt/error.hpp"
#include "ppbt/format.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::string> design;
    std::optional<double> theta;
    std::optional<double> theta_star;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "Config file (key = value lines)");
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--reps", o.reps, "Replicates per scenario");
    cmd->add_option("--workers", o.workers, "Worker threads");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--design", o.design, "pooled | stratified | enrichment");
    cmd->add_option("--theta", o.theta, "Posterior threshold");
    cmd->add_option("--theta-star", o.theta_star, "Predictive threshold");
}

ppbt::RunConfig resolve(const Overrides& o) {
    ppbt::RunConfig c =
        o.config_path.empty() ? ppbt::RunConfig{} : ppbt::load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (o.reps) c.reps = *o.reps;
    if (o.workers) c.workers = *o.workers;
    if (o.out) c.out = *o.out;
    if (o.design) {
        auto kind = ppbt::parse_design_kind(*o.design);
        if (!kind) {
            throw ppbt::ConfigError("field 'design': expected pooled, "
                                    "stratified or enrichment");
        }
        c.design = *kind;
    }
    if (o.theta) c.thresholds.posterior = *o.theta;
    if (o.theta_star) c.thresholds.predictive = *o.theta_star;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Predictive-probability basket trial designs"};
    app.set_version_flag("--version", std::string(ppbt::kVersion));
    app.require_subcommand(1);

    Overrides run;
    auto* calibrate = app.add_subcommand(
        "calibrate", "Sweep the threshold grid and select the optimal pair");
    auto* simulate = app.add_subcommand(
        "simulate", "Simulate one threshold pair under both scenarios");
    auto* table = app.add_subcommand("table", "Write stop/continue decision tables");
    for (auto* cmd : {calibrate, simulate, table}) add_run_options(cmd, run);

    ppbt::PPPQuery query;
    double prior_a = 0.5, prior_b = 0.5;
    int n_trt = 0, x_trt = 0, n_ctl = 0, x_ctl = 0;
    auto* ppp = app.add_subcommand("ppp", "Posterior predictive probability of success");
    ppp->add_option("--n-trt", n_trt, "Treatment patients so far")->required();
    ppp->add_option("--x-trt", x_trt, "Treatment responses so far")->required();
    ppp->add_option("--n-ctl", n_ctl, "Control patients so far")->required();
    ppp->add_option("--x-ctl", x_ctl, "Control responses so far")->required();
    ppp->add_option("--n-trt-max", query.n_trt_max, "Treatment maximum")
        ->capture_default_str();
    ppp->add_option("--n-ctl-max", query.n_ctl_max, "Control maximum")
        ->capture_default_str();
    ppp->add_option("--prior-a", prior_a, "Beta prior a")->capture_default_str();
    ppp->add_option("--prior-b", prior_b, "Beta prior b")->capture_default_str();
    ppp->add_option("--theta", query.theta, "Posterior threshold")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (ppp->parsed()) {
            query.trt = ppbt::ArmData(n_trt, x_trt);
            query.ctl = ppbt::ArmData(n_ctl, x_ctl);
            query.prior = ppbt::BetaParams(prior_a, prior_b);
            std::cout << ppbt::format_ppp_report(ppbt::cmd_ppp(query));
            return kExitOk;
        }
        const auto config = resolve(run);
        ppbt::OutputSet files;
        if (calibrate->parsed()) {
            files = ppbt::cmd_calibrate(config);
        } else if (simulate->parsed()) {
            files = ppbt::cmd_simulate(config);
        } else {
            files = ppbt::cmd_table(config);
        }
        ppbt::write_outputs(config.out, files);
        for (const auto& f : files) std::cout << config.out << "/" << f.name << "\n";
        return kExitOk;
    } catch (const ppbt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ppbt::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
