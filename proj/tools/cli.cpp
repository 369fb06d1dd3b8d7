#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef GRIDFLUX_HAVE_SPDLOG
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#endif

#include "gridflux/agreement.hpp"
#include "gridflux/comparison.hpp"
#include "gridflux/feeder_io.hpp"
#include "gridflux/results_io.hpp"
#include "gridflux/sim_engine.hpp"
#include "gridflux/sweep.hpp"

namespace gridflux::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// logging

void setup_logging() {
#ifdef GRIDFLUX_HAVE_SPDLOG
    static bool done = false;
    if (done) return;
    done = true;
    auto logger = spdlog::stderr_color_mt("gridflux");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("GRIDFLUX_LOG")) spdlog::set_level(spdlog::level::from_str(env));
#endif
}

void log_info(const std::string& msg) {
#ifdef GRIDFLUX_HAVE_SPDLOG
    spdlog::info(msg);
#else
    (void)msg;
#endif
}

// ---------------------------------------------------------------------------
// inputs

struct UsageError : Error {
    using Error::Error;
};

fs::path resolve_feeder(const std::string& arg) {
    fs::path p(arg);
    if (fs::exists(p)) return p;
#ifdef GRIDFLUX_FEEDER_DIR
    if (!p.has_parent_path()) {
        fs::path bundled = fs::path(GRIDFLUX_FEEDER_DIR) / p;
        if (fs::exists(bundled)) return bundled;
        bundled += ".json";
        if (fs::exists(bundled)) return bundled;
    }
#endif
    throw UsageError("feeder file not found: " + arg);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Canonical "key=value" lines in a fixed order; hashed together with the input files.
class Inputs {
  public:
    void add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }
    void add(const std::string& key, double value) { add(key, format_fixed6(value)); }
    void add_file(const std::string& key, const std::string& bytes) {
        add(key, hex16(fnv1a(bytes)));
        files_ += bytes;
    }
    std::string hash() const {
        std::string canon;
        for (const auto& [k, v] : entries_) canon += k + "=" + v + "\n";
        return hex16(fnv1a(files_, fnv1a(canon)));
    }
    ordered_json json() const {
        ordered_json j = ordered_json::object();
        for (const auto& [k, v] : entries_) j[k] = v;
        return j;
    }

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::string files_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) s += (s.empty() ? "" : ",") + p;
    return s;
}

template <typename T>
std::string join_numbers(const std::vector<T>& values) {
    std::vector<std::string> parts;
    for (const auto& v : values) {
        if constexpr (std::is_floating_point_v<T>)
            parts.push_back(format_fixed6(v));
        else
            parts.push_back(std::to_string(v));
    }
    return join(parts);
}

const std::map<std::string, ControlMode> kControlNames = {
    {"none", ControlMode::none}, {"thevenin", ControlMode::thevenin}, {"pfm", ControlMode::pfm}};
const std::map<std::string, ViolationPreset> kScenarioNames = {{"none", ViolationPreset::none},
                                                               {"overvoltage", ViolationPreset::overvoltage},
                                                               {"undervoltage", ViolationPreset::undervoltage}};
const std::map<std::string, MeasurementTiming> kTimingNames = {{"lagged", MeasurementTiming::lagged},
                                                               {"settled", MeasurementTiming::settled}};

std::string names_of(const auto& table) {
    std::vector<std::string> n;
    for (const auto& [k, v] : table) n.push_back(k);
    return join(n);
}

// ---------------------------------------------------------------------------
// options shared by run and compare

struct Common {
    std::string feeder;
    std::string out = "out";
    std::string timing = "settled";
    std::size_t window = 15;
    std::optional<double> v_sub;
    int jobs = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--feeder", c.feeder, "Feeder JSON file, or the name of a bundled feeder")->required();
    cmd->add_option("--out", c.out, "Output root; files go to <out>/<input hash>/")->capture_default_str();
    cmd->add_option("--timing", c.timing, "When child-flow changes are observed: settled or lagged")
        ->check(CLI::IsMember(kTimingNames))
        ->capture_default_str();
    cmd->add_option("--window", c.window, "SAVFI window in steps")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--v-sub", c.v_sub, "Substation voltage in pu (default: the feeder's source setpoint)");
    cmd->add_option("--jobs", c.jobs, "Parallel scenario runs (0 = logical cores)")->check(CLI::NonNegativeNumber)->capture_default_str();
}

void apply_common(const Common& c, ScenarioConfig& cfg, Inputs& in) {
    cfg.timing = kTimingNames.at(c.timing);
    cfg.savfi_window = c.window;
    cfg.v_substation = c.v_sub;
    in.add("timing", c.timing);
    in.add("window", std::to_string(c.window));
    in.add("v_sub", c.v_sub ? format_fixed6(*c.v_sub) : std::string("feeder"));
    set_sweep_threads(c.jobs);
}

std::shared_ptr<const Feeder> open_feeder(const Common& c, Inputs& in) {
    const fs::path path = resolve_feeder(c.feeder);
    const std::string text = read_text_file(path);
    in.add_file("feeder", text);
    return std::make_shared<const Feeder>(parse_feeder(text));
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
    Common common;
    std::string control = "none";
    double variability = 0.0;
    std::size_t steps = 1440;
    std::uint64_t seed = 1;
    std::string scenario = "none";
    bool correlated_pv = false;
    std::string loads;
    std::optional<double> start_min;
    bool allow_degraded = false;
};

void print_summary(const ScenarioResult& r, std::ostream& out) {
    const auto& m = r.metrics;
    out << "feeder " << r.feeder_name << ", control " << to_string(r.control) << ", " << r.t_min.size() << " steps\n";
    out << std::left << std::setw(10) << "bus" << std::setw(7) << "phase" << std::setw(7) << "depth" << std::right
        << std::setw(14) << "savfi_mean" << std::setw(14) << "savfi_max" << std::setw(12) << "violations" << '\n';
    for (std::size_t k = 0; k < m.keys.size(); ++k) {
        const auto [b, ph] = m.keys[k];
        double sum = 0.0;
        double mx = 0.0;
        for (const auto& w : m.savfi[k]) {
            sum += w.value;
            mx = std::max(mx, w.value);
        }
        const double mean = m.savfi[k].empty() ? 0.0 : sum / static_cast<double>(m.savfi[k].size());
        out << std::left << std::setw(10) << r.bus_ids[b] << std::setw(7) << to_char(ph) << std::setw(7) << r.bus_depth[b]
            << std::right << std::fixed << std::setprecision(4) << std::setw(14) << mean * kSavfiScale << std::setw(14)
            << mx * kSavfiScale << std::setw(12) << m.violations[k].count() << '\n';
    }
    out << "savfi in 1e-3 pu; total violations " << m.violation_count() << "; voltage range [" << std::setprecision(4)
        << m.min_voltage << ", " << m.max_voltage << "] pu\n";
    out.unsetf(std::ios::floatfield);
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    Inputs in;
    in.add("command", "run");
    auto feeder = open_feeder(a.common, in);

    ScenarioConfig cfg;
    apply_common(a.common, cfg, in);
    cfg.control = kControlNames.at(a.control);
    cfg.variability = a.variability;
    cfg.steps = a.steps;
    cfg.seed = a.seed;
    cfg.correlated_pv = a.correlated_pv;
    cfg.start_min = a.start_min;
    in.add("control", a.control);
    in.add("variability", a.variability);
    in.add("steps", std::to_string(a.steps));
    in.add("seed", std::to_string(a.seed));
    in.add("scenario", a.scenario);
    in.add("correlated_pv", a.correlated_pv ? "true" : "false");
    in.add("start_min", a.start_min ? format_fixed6(*a.start_min) : std::string("default"));
    if (!a.loads.empty()) {
        const std::string text = read_text_file(a.loads);
        in.add_file("loads", text);
        const ProfileTable table = parse_profiles(text);
        const auto& series = table.contains("load") ? table.series("load") : table.columns.at(0);
        if (series.size() < a.steps)
            throw UsageError("load profile has " + std::to_string(series.size()) + " rows, fewer than --steps");
        cfg.load_profile.assign(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(a.steps));
    }

    const ViolationPreset preset = kScenarioNames.at(a.scenario);
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario sc = preset == ViolationPreset::none ? make_scenario(feeder, cfg) : make_violation_scenario(feeder, preset, cfg);
    log_info("running " + std::to_string(sc.steps()) + " steps on " + feeder->name());
    const ScenarioResult r = run(sc);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path dir = fs::path(a.common.out) / in.hash();
    write_results(r, dir);
    ordered_json meta;
    meta["tool"] = "gridflux";
    meta["version"] = kVersion;
    meta["inputs"] = in.json();
    meta["feeder_name"] = feeder->name();
    meta["steps"] = r.t_min.size();
    meta["start_min"] = r.t_min.empty() ? 0.0 : r.t_min.front();
    meta["load_multiplier"] = sc.load_multiplier.empty() ? 1.0 : sc.load_multiplier.front();
    meta["v_substation"] = sc.v_substation;
    meta["degraded"] = r.degraded;
    meta["degraded_steps"] = r.degraded_steps;
    long long sweeps = 0;
    for (int it : r.iterations) sweeps += it;
    meta["solver_iterations"] = sweeps;
    meta["violations"] = r.metrics.violation_count();
    write_text(dir / "meta.json", meta.dump(2) + "\n");

    print_summary(r, out);
    out << "wrote " << dir.string() << " (" << std::fixed << std::setprecision(2) << wall << " s)\n";
    out.unsetf(std::ios::floatfield);

    if (r.degraded) {
        err << "run degraded: " << r.degraded_steps.size() << " step(s) did not converge, first at step "
            << r.degraded_steps.front() << "\n";
        if (!a.allow_degraded) return kExitDegraded;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
    Common common;
    std::vector<double> variability{0.3};
    std::vector<std::uint64_t> seeds{1};
    std::vector<std::string> buses;
    std::size_t steps = 720;
    bool correlated_pv = false;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream&) {
    Inputs in;
    in.add("command", "compare");
    auto feeder = open_feeder(a.common, in);
    ScenarioConfig cfg;
    apply_common(a.common, cfg, in);
    cfg.steps = a.steps;
    cfg.correlated_pv = a.correlated_pv;

    std::vector<BusIndex> buses;
    if (a.buses.empty()) {
        buses = pv_buses(*feeder);
        if (buses.empty()) throw UsageError("feeder has no pv buses; pass --buses");
    } else {
        for (const auto& id : a.buses) {
            auto b = feeder->find_bus(id);
            if (!b) throw UsageError("unknown bus '" + id + "'");
            buses.push_back(*b);
        }
    }
    std::vector<std::string> bus_ids;
    for (BusIndex b : buses) bus_ids.push_back(feeder->bus(b).id);
    in.add("variability", join_numbers(a.variability));
    in.add("seeds", join_numbers(a.seeds));
    in.add("buses", join(bus_ids));
    in.add("steps", std::to_string(a.steps));
    in.add("correlated_pv", a.correlated_pv ? "true" : "false");

    const auto cmp = compare_strategies(feeder, cfg, a.variability, a.seeds, buses);

    std::ostringstream csv;
    csv << kSavfiScaleComment << "\nbus,variability,savfi_none,savfi_thevenin,savfi_pfm\n";
    for (const auto& row : cmp.rows)
        csv << row.bus << ',' << format_fixed6(row.variability) << ',' << format_fixed6(row.savfi[0] * kSavfiScale) << ','
            << format_fixed6(row.savfi[1] * kSavfiScale) << ',' << format_fixed6(row.savfi[2] * kSavfiScale) << '\n';

    const fs::path dir = fs::path(a.common.out) / in.hash();
    fs::create_directories(dir);
    write_text(dir / "compare.csv", csv.str());
    ordered_json meta;
    meta["tool"] = "gridflux";
    meta["version"] = kVersion;
    meta["inputs"] = in.json();
    meta["feeder_name"] = feeder->name();
    meta["ordering_bus_cells"] = cmp.bus_cells.cells;
    meta["ordering_bus_satisfied"] = cmp.bus_cells.satisfied;
    meta["ordering_phase_cells"] = cmp.phase_cells.cells;
    meta["ordering_phase_satisfied"] = cmp.phase_cells.satisfied;
    write_text(dir / "meta.json", meta.dump(2) + "\n");

    out << std::left << std::setw(10) << "bus" << std::right << std::setw(12) << "variability" << std::setw(14)
        << "savfi_none" << std::setw(16) << "savfi_thevenin" << std::setw(12) << "savfi_pfm" << '\n'
        << std::fixed;
    for (const auto& row : cmp.rows)
        out << std::left << std::setw(10) << row.bus << std::right << std::setprecision(2) << std::setw(12)
            << row.variability << std::setprecision(4) << std::setw(14) << row.savfi[0] * kSavfiScale << std::setw(16)
            << row.savfi[1] * kSavfiScale << std::setw(12) << row.savfi[2] * kSavfiScale << '\n';
    out << std::setprecision(1) << "ordering pfm <= thevenin <= none: " << 100.0 * cmp.bus_cells.fraction()
        << "% of " << cmp.bus_cells.cells << " (bus, window) cells; " << 100.0 * cmp.phase_cells.fraction() << "% of "
        << cmp.phase_cells.cells << " per-phase cells\n";
    out << "savfi in 1e-3 pu; wrote " << dir.string() << "\n";
    out.unsetf(std::ios::floatfield);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
    std::string feeder;
    std::vector<double> loading{0.0, 0.5, 1.0};
    double tol = 0.01;
    std::string out = "out";
};

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
    Inputs in;
    in.add("command", "validate");
    Common c;
    c.feeder = a.feeder;
    auto feeder = open_feeder(c, in);
    in.add("loading", join_numbers(a.loading));
    in.add("tol", a.tol);

    std::ostringstream csv;
    csv << "loading,max_abs_error,residual,iterations,converged\n";
    out << std::right << std::setw(9) << "loading" << std::setw(16) << "max_abs_error" << std::setw(12) << "residual"
        << std::setw(7) << "iter" << "  status\n";
    bool ok = true;
    for (double L : a.loading) {
        if (!(L >= 0.0)) throw UsageError("loading levels must be non-negative");
        const Agreement ag = solver_agreement(*feeder, L);
        const bool pass = ag.converged && ag.max_abs_error <= a.tol;
        ok = ok && pass;
        csv << format_fixed6(L) << ',' << format_fixed6(ag.max_abs_error) << ',' << std::scientific << std::setprecision(3)
            << ag.residual << std::defaultfloat << ',' << ag.iterations << ',' << (ag.converged ? 1 : 0) << '\n';
        out << std::fixed << std::setprecision(2) << std::setw(9) << L << std::setprecision(6) << std::setw(16)
            << ag.max_abs_error << std::scientific << std::setprecision(2) << std::setw(12) << ag.residual
            << std::defaultfloat << std::setw(7) << ag.iterations << "  " << (pass ? "ok" : "exceeds tolerance") << '\n';
    }
    const fs::path dir = fs::path(a.out) / in.hash();
    fs::create_directories(dir);
    write_text(dir / "validate.csv", csv.str());
    out << "tolerance " << format_fixed6(a.tol) << " pu; wrote " << dir.string() << "\n";
    if (!ok) {
        err << "linear and nonlinear solutions disagree beyond the tolerance\n";
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    setup_logging();
    CLI::App app{"Quasi-static time-series simulator for radial three-phase feeders with local inverter var control",
                 "gridflux"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write results.csv, savfi.csv and meta.json");
    add_common(run_cmd, ra.common);
    run_cmd->add_option("--control", ra.control, "Inverter control: " + names_of(kControlNames))
        ->check(CLI::IsMember(kControlNames))
        ->capture_default_str();
    run_cmd->add_option("--variability", ra.variability, "PV variability fraction; noise sigma is a third of it")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    run_cmd->add_option("--steps", ra.steps, "Number of one-minute steps")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    run_cmd->add_option("--seed", ra.seed, "Random seed")->capture_default_str();
    run_cmd->add_option("--scenario", ra.scenario, "Violation preset: " + names_of(kScenarioNames))
        ->check(CLI::IsMember(kScenarioNames))
        ->capture_default_str();
    run_cmd->add_flag("--correlated-pv", ra.correlated_pv, "Drive every PV unit with the same noise stream");
    run_cmd->add_option("--loads", ra.loads, "Load multiplier CSV (t_min,load) covering the horizon")->check(CLI::ExistingFile);
    run_cmd->add_option("--start-min", ra.start_min, "First simulated minute (default: horizon centred on solar noon)");
    run_cmd->add_flag("--allow-degraded", ra.allow_degraded, "Exit 0 even if some steps did not converge");

    CompareArgs ca;
    auto* cmp_cmd = app.add_subcommand("compare", "Run none, thevenin and pfm at matched seeds and tabulate SAVFI");
    add_common(cmp_cmd, ca.common);
    cmp_cmd->add_option("--variability", ca.variability, "Comma-separated variability levels")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmp_cmd->add_option("--seeds", ca.seeds, "Comma-separated seeds")->delimiter(',')->capture_default_str();
    cmp_cmd->add_option("--buses", ca.buses, "Comma-separated bus ids (default: every PV bus)")->delimiter(',');
    cmp_cmd->add_option("--steps", ca.steps, "Steps per run, centred on solar noon")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    cmp_cmd->add_flag("--correlated-pv", ca.correlated_pv, "Drive every PV unit with the same noise stream");

    ValidateArgs va;
    auto* val_cmd = app.add_subcommand("validate", "Compare linear and nonlinear power flow at several loading levels");
    val_cmd->add_option("--feeder", va.feeder, "Feeder JSON file, or the name of a bundled feeder")->required();
    val_cmd->add_option("--loading", va.loading, "Comma-separated load multipliers")->delimiter(',')->capture_default_str();
    val_cmd->add_option("--tol", va.tol, "Largest accepted |V_lin - V_nl| in pu")->check(CLI::PositiveNumber)->capture_default_str();
    val_cmd->add_option("--out", va.out, "Output root; files go to <out>/<input hash>/")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*run_cmd) return cmd_run(ra, out, err);
        if (*cmp_cmd) return cmd_compare(ca, out, err);
        return cmd_validate(va, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "error: invalid feeder\n";
        for (const auto& v : e.violations()) err << "  " << to_string(v.kind) << " (" << v.subject << "): " << v.message << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SemanticError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace gridflux::cli
