#include "ppbt/decision_table.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ppbt/error.hpp"
#include "ppbt/format.hpp"
#include "ppbt/parallel.hpp"

namespace ppbt {

void TableSchedule::validate() const {
    if (block_size < 1) throw ConfigError("table block_size must be >= 1");
    if (n_trt_start < 0) throw ConfigError("table n_trt_start must be >= 0");
    if (n_ctl_max < block_size || n_ctl_max % block_size != 0) {
        throw ConfigError("table n_ctl_max must be a multiple of block_size");
    }
    if (n_trt_max != n_trt_start + n_ctl_max) {
        throw ConfigError("table n_trt_max must equal n_trt_start + n_ctl_max");
    }
}

int DecisionTable::min_continue_trt(int look, int x_ctl) const {
    const auto& l = looks.at(static_cast<std::size_t>(look - 1));
    for (int xt = 0; xt <= l.n_trt; ++xt) {
        if (lookup(*this, look, x_ctl, xt) == Decision::Continue) return xt;
    }
    return l.n_trt + 1;
}

DecisionTable build_table(const std::string& design,
                          const TableSchedule& schedule,
                          const ThresholdPair& thresholds,
                          const PPPEngine& engine, int workers) {
    schedule.validate();
    DecisionTable table;
    table.design = design;
    table.thresholds = thresholds;
    table.prior = engine.prior();
    table.schedule = schedule;
    table.looks.resize(static_cast<std::size_t>(schedule.looks()));
    // Build the shared final-analysis grid before fanning out.
    engine.grid(schedule.n_trt_max, schedule.n_ctl_max);
    parallel_for(table.looks.size(), workers, [&](std::size_t i) {
        auto& look = table.looks[i];
        const int t = static_cast<int>(i) + 1;
        look.n_ctl = t * schedule.block_size;
        look.n_trt = schedule.n_trt_start + t * schedule.block_size;
        look.cells.resize(static_cast<std::size_t>(look.n_ctl + 1) *
                          (look.n_trt + 1));
        for (int xc = 0; xc <= look.n_ctl; ++xc) {
            for (int xt = 0; xt <= look.n_trt; ++xt) {
                const double ppp =
                    engine.ppp(ArmData(look.n_trt, xt), ArmData(look.n_ctl, xc),
                               schedule.n_trt_max, schedule.n_ctl_max,
                               thresholds.posterior);
                look.cells[static_cast<std::size_t>(xc) * (look.n_trt + 1) +
                           xt] = static_cast<std::uint8_t>(
                    futility_decision(ppp, thresholds));
            }
        }
    });
    return table;
}

Decision lookup(const DecisionTable& table, int look, int x_ctl, int x_trt) {
    if (look < 1 || look > table.num_looks()) {
        throw std::out_of_range("decision table: look out of range");
    }
    const auto& l = table.looks[static_cast<std::size_t>(look - 1)];
    if (x_ctl < 0 || x_ctl > l.n_ctl || x_trt < 0 || x_trt > l.n_trt) {
        throw std::out_of_range("decision table: response count out of range");
    }
    return static_cast<Decision>(
        l.cells[static_cast<std::size_t>(x_ctl) * (l.n_trt + 1) + x_trt]);
}

namespace {

constexpr const char* kRowHeader = "look,n_ctl,x_ctl,n_trt,x_trt,decision";

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    return out;
}

void allocate_looks(DecisionTable& table) {
    table.schedule.validate();
    table.looks.assign(static_cast<std::size_t>(table.schedule.looks()), {});
    for (int t = 1; t <= table.schedule.looks(); ++t) {
        auto& l = table.looks[static_cast<std::size_t>(t - 1)];
        l.n_ctl = t * table.schedule.block_size;
        l.n_trt = table.schedule.n_trt_start + t * table.schedule.block_size;
        l.cells.assign(static_cast<std::size_t>(l.n_ctl + 1) * (l.n_trt + 1),
                       0xff);
    }
}

}  // namespace

void write_text(std::ostream& out, const DecisionTable& table) {
    out << "# ppbt decision table\n";
    out << "# version: " << kVersion << "\n";
    out << "# design: " << table.design << "\n";
    out << "# theta: " << format_double(table.thresholds.posterior) << "\n";
    out << "# theta_star: " << format_double(table.thresholds.predictive)
        << "\n";
    out << "# prior_a: " << format_double(table.prior.a) << "\n";
    out << "# prior_b: " << format_double(table.prior.b) << "\n";
    out << "# block_size: " << table.schedule.block_size << "\n";
    out << "# n_trt_start: " << table.schedule.n_trt_start << "\n";
    out << "# n_trt_max: " << table.schedule.n_trt_max << "\n";
    out << "# n_ctl_max: " << table.schedule.n_ctl_max << "\n";
    out << kRowHeader << "\n";
    for (int t = 1; t <= table.num_looks(); ++t) {
        const auto& l = table.looks[static_cast<std::size_t>(t - 1)];
        for (int xc = 0; xc <= l.n_ctl; ++xc) {
            for (int xt = 0; xt <= l.n_trt; ++xt) {
                out << t << ',' << l.n_ctl << ',' << xc << ',' << l.n_trt
                    << ',' << xt << ','
                    << (lookup(table, t, xc, xt) == Decision::Stop ? "stop"
                                                                   : "continue")
                    << '\n';
            }
        }
    }
}

DecisionTable read_text(std::istream& in) {
    std::map<std::string, std::string> header;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw ConfigError("decision table line " + std::to_string(line_no) +
                          ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ");
            if (colon != std::string::npos) {
                header[line.substr(2, colon - 2)] = line.substr(colon + 2);
            }
            continue;
        }
        if (line == kRowHeader) break;
        fail("expected '" + std::string(kRowHeader) + "'");
    }
    auto field = [&](const std::string& key) -> const std::string& {
        auto it = header.find(key);
        if (it == header.end()) fail("missing header field '" + key + "'");
        return it->second;
    };
    DecisionTable table;
    table.design = field("design");
    table.thresholds = ThresholdPair(parse_double(field("theta")),
                                     parse_double(field("theta_star")));
    table.prior =
        BetaParams(parse_double(field("prior_a")), parse_double(field("prior_b")));
    table.schedule.block_size = parse_int(field("block_size"));
    table.schedule.n_trt_start = parse_int(field("n_trt_start"));
    table.schedule.n_trt_max = parse_int(field("n_trt_max"));
    table.schedule.n_ctl_max = parse_int(field("n_ctl_max"));
    allocate_looks(table);

    std::size_t filled = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 6) fail("expected 6 columns");
        const int t = parse_int(cols[0]);
        const int xc = parse_int(cols[2]);
        const int xt = parse_int(cols[4]);
        if (t < 1 || t > table.num_looks()) fail("look out of range");
        auto& l = table.looks[static_cast<std::size_t>(t - 1)];
        if (parse_int(cols[1]) != l.n_ctl || parse_int(cols[3]) != l.n_trt) {
            fail("arm sizes do not match the schedule");
        }
        if (xc < 0 || xc > l.n_ctl || xt < 0 || xt > l.n_trt) {
            fail("response count out of range");
        }
        std::uint8_t value;
        if (cols[5] == "stop") {
            value = static_cast<std::uint8_t>(Decision::Stop);
        } else if (cols[5] == "continue") {
            value = static_cast<std::uint8_t>(Decision::Continue);
        } else {
            fail("decision must be 'stop' or 'continue'");
        }
        auto& cell = l.cells[static_cast<std::size_t>(xc) * (l.n_trt + 1) + xt];
        if (cell != 0xff) fail("duplicate entry");
        cell = value;
        ++filled;
    }
    std::size_t expected = 0;
    for (const auto& l : table.looks) expected += l.cells.size();
    if (filled != expected) {
        throw ConfigError("decision table: " + std::to_string(expected - filled) +
                          " entries missing");
    }
    return table;
}

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'P', 'B', 'T', 'D', 'T', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> bytes;
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw ConfigError("decision table binary: truncated input");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
    return v;
}

void put_i32(std::ostream& out, int v) {
    put_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
}

int get_i32(std::istream& in) {
    const auto v = static_cast<std::int64_t>(get_u64(in));
    if (v < INT32_MIN || v > INT32_MAX) {
        throw ConfigError("decision table binary: integer out of range");
    }
    return static_cast<int>(v);
}

void put_f64(std::ostream& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_binary(std::ostream& out, const DecisionTable& table) {
    out.write(kMagic.data(), kMagic.size());
    put_u64(out, table.design.size());
    out.write(table.design.data(),
              static_cast<std::streamsize>(table.design.size()));
    put_f64(out, table.thresholds.posterior);
    put_f64(out, table.thresholds.predictive);
    put_f64(out, table.prior.a);
    put_f64(out, table.prior.b);
    put_i32(out, table.schedule.block_size);
    put_i32(out, table.schedule.n_trt_start);
    put_i32(out, table.schedule.n_trt_max);
    put_i32(out, table.schedule.n_ctl_max);
    for (const auto& l : table.looks) {
        out.write(reinterpret_cast<const char*>(l.cells.data()),
                  static_cast<std::streamsize>(l.cells.size()));
    }
}

DecisionTable read_binary(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw ConfigError("decision table binary: bad magic");
    }
    DecisionTable table;
    const auto name_len = get_u64(in);
    if (name_len > 4096) throw ConfigError("decision table binary: bad name");
    table.design.resize(name_len);
    in.read(table.design.data(), static_cast<std::streamsize>(name_len));
    const double theta = get_f64(in);
    const double theta_star = get_f64(in);
    table.thresholds = ThresholdPair(theta, theta_star);
    const double a = get_f64(in);
    const double b = get_f64(in);
    table.prior = BetaParams(a, b);
    table.schedule.block_size = get_i32(in);
    table.schedule.n_trt_start = get_i32(in);
    table.schedule.n_trt_max = get_i32(in);
    table.schedule.n_ctl_max = get_i32(in);
    allocate_looks(table);
    for (auto& l : table.looks) {
        in.read(reinterpret_cast<char*>(l.cells.data()),
                static_cast<std::streamsize>(l.cells.size()));
        if (!in) throw ConfigError("decision table binary: truncated input");
        for (auto c : l.cells) {
            if (c > 1) throw ConfigError("decision table binary: bad cell");
        }
    }
    return table;
}

int TableMonitor::look_for(const ArmData& trt, const ArmData& ctl) const {
    const auto& s = table_.schedule;
    if (ctl.n % s.block_size != 0) {
        throw std::out_of_range("table monitor: control size off schedule");
    }
    const int t = ctl.n / s.block_size;
    if (t < 1 || t > table_.num_looks() ||
        table_.looks[static_cast<std::size_t>(t - 1)].n_trt != trt.n) {
        throw std::out_of_range("table monitor: arm sizes off schedule");
    }
    return t;
}

Decision TableMonitor::interim(const ArmData& trt, const ArmData& ctl,
                               int n_trt_max, int n_ctl_max) const {
    if (n_trt_max != table_.schedule.n_trt_max ||
        n_ctl_max != table_.schedule.n_ctl_max) {
        throw std::out_of_range("table monitor: maxima differ from the table");
    }
    return lookup(table_, look_for(trt, ctl), ctl.x, trt.x);
}

bool TableMonitor::final_success(const ArmData& trt, const ArmData& ctl) const {
    const int t = look_for(trt, ctl);
    if (t != table_.num_looks()) {
        throw std::out_of_range("table monitor: final analysis before last look");
    }
    return lookup(table_, t, ctl.x, trt.x) == Decision::Continue;
}

}  // namespace ppbt
