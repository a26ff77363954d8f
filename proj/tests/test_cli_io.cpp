#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ppbt/commands.hpp"
#include "ppbt/config.hpp"
#include "ppbt/decision_table.hpp"
#include "ppbt/error.hpp"
#include "ppbt/format.hpp"

using namespace ppbt;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_config(in, "run.cfg");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("ppbt_test_" + name);
    fs::remove_all(p);
    return p;
}

RunConfig small_config(DesignKind kind) {
    RunConfig c;
    c.design = kind;
    c.reps = 60;
    c.grid = ThresholdGrid{{0.86, 0.9, 0.96}, {0.1, 0.2}};
    c.thresholds = ThresholdPair(0.9, 0.1);
    return c;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3, 113.2, 1e-300, 0.0, 20230101.0}) {
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(std::nan("")) == "NA");
    CHECK(std::isnan(parse_double("NA")));
    CHECK_THROWS_AS(parse_double("0.1x"), ConfigError);
    CHECK_THROWS_AS(parse_int("3.5"), ConfigError);
    CHECK_THROWS_AS(parse_u64("-1"), ConfigError);
    CHECK(parse_double_list(" 0.1, 0.2 ,0.3") == std::vector<double>{0.1, 0.2, 0.3});
    CHECK_THROWS_AS(parse_double_list("0.1,,0.3"), ConfigError);
}

TEST_CASE("config parsing") {
    const auto text =
        "# calibration run\n"
        "design = stratified\n"
        "seed = 99   # trailing comment\n"
        "reps = 250\n"
        "workers = 3\n"
        "posterior_grid = 0.8, 0.9\n"
        "predictive_grid = 0.1\n"
        "lower_bound = 0.25\n";
    std::istringstream in(text);
    const auto c = parse_config(in);
    CHECK(c.design == DesignKind::Stratified);
    CHECK(c.seed == 99);
    CHECK(c.reps == 250);
    CHECK(c.workers == 3);
    CHECK(c.grid.posterior_values == std::vector<double>{0.8, 0.9});
    CHECK(c.lower_bound == 0.25);
    CHECK(c.prior == BetaParams{0.5, 0.5});
}

TEST_CASE("config errors name the line and the field") {
    CHECK(error_of("reps = 10\nbogus = 1\n").find("run.cfg:2: field 'bogus'") !=
          std::string::npos);
    CHECK(error_of("reps = 10\nreps = 11\n").find("run.cfg:2: field 'reps': repeated") !=
          std::string::npos);
    CHECK(error_of("\n\nreps = ten\n").find("run.cfg:3: field 'reps'") !=
          std::string::npos);
    CHECK(error_of("design = crossover\n").find("field 'design'") != std::string::npos);
    CHECK(error_of("null_rates = 0.1,0.2\n").find("field 'null_rates'") !=
          std::string::npos);
    CHECK(error_of("just text\n").find("run.cfg:1:") != std::string::npos);
    // Invariants checked after parsing still name the field.
    CHECK(error_of("reps = 0\n").find("field 'reps'") != std::string::npos);
    CHECK(error_of("prior_a = -1\n").find("field 'prior_a'") != std::string::npos);
    CHECK(error_of("theta = 1.2\n").find("field 'theta'") != std::string::npos);
    CHECK(error_of("block_size = 7\n").find("field 'block_size'") != std::string::npos);
    CHECK(error_of("alt_rates = 0.1,0.2,1.3\n").find("field 'alt_rates'") !=
          std::string::npos);
    CHECK(error_of("t1_min = 0.2\n").find("field 't1_min'") != std::string::npos);
}

TEST_CASE("property: config round-trip is the identity") {
    RunConfig c;
    c.design = DesignKind::Enrichment;
    c.seed = 18446744073709551615ULL;
    c.reps = 2000;
    c.workers = 8;
    c.out = "results/dir";
    c.prior = BetaParams(1, 2.5);
    c.control_rate = 0.15;
    c.alt_rates = {0.12, 0.25, 1.0 / 3};
    c.prevalence = {0.2, 0.3, 0.5};
    c.grid = ThresholdGrid{{0.7, 0.93}, {0.05}};
    c.bounds = ConstraintBounds{0.04, 0.11, 0.75};
    c.thresholds = ThresholdPair(0.96, 0.15);
    c.lower_bound = 0.4;
    for (const auto& cfg : {RunConfig{}, c}) {
        std::istringstream in(serialize_config(cfg));
        const auto back = parse_config(in);
        CHECK(back == cfg);
        CHECK(serialize_config(back) == serialize_config(cfg));
    }
}

TEST_CASE("every output carries the header block") {
    for (auto kind : {DesignKind::Pooled, DesignKind::Enrichment}) {
        auto c = small_config(kind);
        c.seed = 4242;
        for (const auto& files : {cmd_calibrate(c), cmd_simulate(c), cmd_table(c)}) {
            for (const auto& f : files) {
                if (f.name.ends_with(".bin")) continue;
                CHECK(f.contents.rfind("# ppbt version: 0.1.0\n", 0) == 0);
                CHECK(f.contents.find("# seed: 4242\n") != std::string::npos);
                CHECK(f.contents.find("# reps: 60\n") != std::string::npos);
                CHECK(f.contents.find("# posterior_grid: 0.86,0.9,0.96\n") !=
                      std::string::npos);
            }
        }
    }
}

TEST_CASE("calibrate output set") {
    const auto files = cmd_calibrate(small_config(DesignKind::Pooled));
    REQUIRE(files.size() == 4);
    CHECK(files[0].name == "pooled_oc_records.csv");
    CHECK(files[1].name == "pooled_acceptable.csv");
    CHECK(files[2].name == "pooled_optimal.txt");
    CHECK(files[3].name == "pooled_scatter.csv");
    // 6 records plus the column header.
    std::istringstream in(files[0].contents);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) rows += line.empty() || line[0] != '#';
    CHECK(rows == 7);
}

TEST_CASE("empty acceptable set is reported, not an error") {
    auto c = small_config(DesignKind::Stratified);
    c.bounds.power_min = 0.999;
    const auto files = cmd_calibrate(c);
    CHECK(files[2].contents.find("status: no acceptable design") != std::string::npos);
    CHECK(files[2].contents.find("acceptable_count: 0") != std::string::npos);
}

TEST_CASE("reruns are byte-identical and independent of worker count") {
    for (auto kind : {DesignKind::Pooled, DesignKind::Stratified, DesignKind::Enrichment}) {
        auto c = small_config(kind);
        c.workers = 1;
        const auto cal1 = cmd_calibrate(c);
        const auto sim1 = cmd_simulate(c);
        const auto tab1 = cmd_table(c);
        for (int w : {1, 4, 8}) {
            c.workers = w;
            const auto cal = cmd_calibrate(c);
            const auto sim = cmd_simulate(c);
            const auto tab = cmd_table(c);
            REQUIRE(cal.size() == cal1.size());
            for (std::size_t i = 0; i < cal.size(); ++i) {
                CHECK(cal[i].contents == cal1[i].contents);
            }
            for (std::size_t i = 0; i < sim.size(); ++i) {
                CHECK(sim[i].contents == sim1[i].contents);
            }
            for (std::size_t i = 0; i < tab.size(); ++i) {
                CHECK(tab[i].contents == tab1[i].contents);
            }
        }
    }
}

TEST_CASE("table files read back into the built table") {
    const auto c = small_config(DesignKind::Enrichment);
    const auto files = cmd_table(c);
    REQUIRE(files.size() == 4);
    const PPPEngine engine(c.prior);
    const auto stage2 =
        build_table("enrichment_stage2", {10, 50, 100, 50}, c.thresholds, engine);
    std::istringstream text(files[2].contents);
    CHECK(read_text(text) == stage2);
    std::istringstream bin(files[3].contents);
    CHECK(read_binary(bin) == stage2);
}

TEST_CASE("simulate with one replicate matches the golden file") {
    RunConfig c;
    c.design = DesignKind::Enrichment;
    c.reps = 1;
    c.thresholds = ThresholdPair(0.96, 0.15);
    c.lower_bound = 0.0;
    const auto files = cmd_simulate(c);
    const auto golden = read_file(fs::path(PPBT_TEST_DATA_DIR) / "enrichment_1rep_alt.csv");
    REQUIRE_FALSE(golden.empty());
    CHECK(files[1].contents == golden);
}

TEST_CASE("write_outputs stages files and leaves nothing behind on failure") {
    const auto dir = scratch_dir("write");
    write_outputs(dir.string(), {{"a.csv", "1\n"}, {"b.txt", "2\n"}});
    CHECK(read_file(dir / "a.csv") == "1\n");
    CHECK(read_file(dir / "b.txt") == "2\n");
    int count = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++count;
    CHECK(count == 2);

    // A name pointing into a missing subdirectory cannot be written.
    const auto dir2 = scratch_dir("write_fail");
    CHECK_THROWS(write_outputs(dir2.string(), {{"ok.csv", "1\n"}, {"no/such/x.csv", "2"}}));
    CHECK_FALSE(fs::exists(dir2 / "ok.csv"));
    CHECK_FALSE(fs::exists(dir2 / "ok.csv.partial"));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("cmd_ppp") {
    PPPQuery q;
    q.trt = {10, 10};
    q.ctl = {10, 0};
    const auto r = cmd_ppp(q);
    CHECK(r.ppp > 0.99);
    CHECK(r.ppp == ppp_two_sample({10, 10}, {10, 0}, 50, 50, {0.5, 0.5}, 0.9));
    CHECK(r.prob_greater ==
          prob_greater(posterior({0.5, 0.5}, {10, 10}), posterior({0.5, 0.5}, {10, 0})));

    q.trt = {50, 12};
    q.ctl = {50, 5};
    const auto end = cmd_ppp(q);
    CHECK((end.ppp == 0.0 || end.ppp == 1.0));

    q.trt = {60, 1};
    CHECK_THROWS_AS(cmd_ppp(q), ConfigError);
    CHECK(format_ppp_report({0.25, 0.5}) == "ppp: 0.25\nprob_greater: 0.5\n");
}

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const auto capture = fs::temp_directory_path() / "ppbt_cli_stdout.txt";
    const auto cmd = std::string(PPBT_CLI_PATH) + " " + args + " > " +
                     capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(capture);
    return r;
}

}  // namespace

TEST_CASE("cli: ppp prints full-precision values matching the library") {
    const auto r = run_cli(
        "ppp --n-trt 10 --x-trt 1 --n-ctl 10 --x-ctl 1 --n-trt-max 50 --n-ctl-max 50");
    CHECK(r.code == 0);
    PPPQuery q;
    q.trt = {10, 1};
    q.ctl = {10, 1};
    CHECK(r.out == format_ppp_report(cmd_ppp(q)));

    const auto done = run_cli("ppp --n-trt 50 --x-trt 30 --n-ctl 50 --x-ctl 5");
    CHECK(done.code == 0);
    CHECK(done.out.rfind("ppp: 1\n", 0) == 0);
}

TEST_CASE("cli: exit codes and diagnostics") {
    CHECK(run_cli("ppp --n-trt 10 --x-trt 11 --n-ctl 10 --x-ctl 1").code == 2);
    CHECK(run_cli("simulate --design crossover").code == 2);
    CHECK(run_cli("simulate --theta 1.5").code == 2);
    CHECK(run_cli("frobnicate").code == 2);

    const auto dir = scratch_dir("cli_cfg");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "reps = 10\ncolour = blue\n";
    }
    const auto bad = run_cli("calibrate --config " + (dir / "bad.cfg").string() +
                             " --out " + (dir / "out").string());
    CHECK(bad.code == 2);
    CHECK(bad.out.find("bad.cfg:2: field 'colour'") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));
    fs::remove_all(dir);
}

TEST_CASE("cli: calibrate writes outputs and flags override the config") {
    const auto dir = scratch_dir("cli_run");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "design = pooled\nreps = 5\nposterior_grid = 0.9\npredictive_grid = 0.1\n"
               "power_min = 0.999\n";
    }
    const auto r = run_cli("calibrate --config " + (dir / "run.cfg").string() +
                           " --design stratified --reps 40 --seed 3 --workers 2 --out " +
                           (dir / "out").string());
    CHECK(r.code == 0);
    const auto summary = read_file(dir / "out" / "stratified_optimal.txt");
    CHECK(summary.find("# reps: 40\n") != std::string::npos);
    CHECK(summary.find("# seed: 3\n") != std::string::npos);
    CHECK(summary.find("status: no acceptable design") != std::string::npos);

    const auto t = run_cli("table --design pooled --theta 0.9 --theta-star 0.1 --out " +
                           (dir / "tab").string());
    CHECK(t.code == 0);
    CHECK(fs::exists(dir / "tab" / "pooled_table.csv"));
    CHECK(fs::exists(dir / "tab" / "pooled_table.bin"));
    fs::remove_all(dir);
}
