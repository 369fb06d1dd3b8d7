#include "gridflux/results_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "gridflux/feeder_io.hpp"

namespace gridflux {

namespace {

std::vector<std::string_view> cells_of(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

double number(std::string_view cell, std::size_t line, std::size_t col) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) throw ParseError("non-numeric cell", line, col);
    return v;
}

Phase phase_cell(std::string_view cell, std::size_t line, std::size_t col) {
    auto p = cell.size() == 1 ? phase_from_char(cell[0]) : std::nullopt;
    if (!p) throw ParseError("bad phase", line, col);
    return *p;
}

/// Calls `row(cells, line_no)` for each data line after the expected header.
template <typename F>
void for_each_row(std::string_view csv, std::string_view header, F&& row) {
    bool seen_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        auto end = csv.find('\n', pos);
        std::string_view line = csv.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? csv.size() : end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (!seen_header) {
            if (line != header) throw ParseError("unexpected header", line_no, 1);
            seen_header = true;
            continue;
        }
        row(cells_of(line), line_no);
    }
    if (!seen_header) throw ParseError("missing header", line_no, 1);
}

void write_file(const std::filesystem::path& path, auto&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    writer(out);
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void write_results_csv(const ScenarioResult& r, std::ostream& out) {
    out << kResultsHeader << '\n';
    const auto& keys = r.metrics.keys;
    const double base = r.base_kva_per_phase;
    for (std::size_t t = 0; t < r.t_min.size(); ++t) {
        const std::string t_str = format_fixed6(r.t_min[t]);
        // keys are in bus order then phase order
        for (std::size_t k = 0; k < keys.size(); ++k) {
            const auto [b, ph] = keys[k];
            double p_kw = 0.0;
            double q_kvar = 0.0;
            for (std::size_t u = 0; u < r.pv_bus.size(); ++u) {
                if (r.pv_bus[u] != b) continue;
                p_kw += r.pv_p[t][u][ph] * base;
                q_kvar += r.dispatch[t][u].phases[ph].q_setpoint * base;
            }
            const int flag = r.metrics.violations.size() == keys.size() ? r.metrics.violations[k].flags.at(t) : 0;
            out << t_str << ',' << r.bus_ids[b] << ',' << to_char(ph) << ',' << format_fixed6(r.v_mag[t][b][ph]) << ','
                << format_fixed6(p_kw) << ',' << format_fixed6(q_kvar) << ',' << flag << '\n';
        }
    }
}

void write_savfi_csv(const ScenarioResult& r, std::ostream& out) {
    out << kSavfiScaleComment << '\n' << kSavfiHeader << '\n';
    const auto& m = r.metrics;
    for (std::size_t k = 0; k < m.keys.size(); ++k) {
        const auto [b, ph] = m.keys[k];
        for (const auto& w : m.savfi[k]) {
            out << r.bus_ids[b] << ',' << to_char(ph) << ',' << format_fixed6(r.t_min.at(w.start)) << ','
                << format_fixed6(w.value * kSavfiScale) << '\n';
        }
    }
}

void write_results(const ScenarioResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "results.csv", [&](std::ostream& o) { write_results_csv(result, o); });
    write_file(dir / "savfi.csv", [&](std::ostream& o) { write_savfi_csv(result, o); });
}

std::vector<ResultRow> parse_results_csv(std::string_view csv) {
    std::vector<ResultRow> rows;
    for_each_row(csv, kResultsHeader, [&](const std::vector<std::string_view>& c, std::size_t line) {
        if (c.size() != 7) throw ParseError("ragged row", line, 1);
        ResultRow r;
        r.t_min = number(c[0], line, 1);
        r.bus = std::string(c[1]);
        r.phase = phase_cell(c[2], line, 3);
        r.v_pu = number(c[3], line, 4);
        r.p_inj_kw = number(c[4], line, 5);
        r.q_inj_kvar = number(c[5], line, 6);
        r.flag_violation = static_cast<int>(number(c[6], line, 7));
        rows.push_back(std::move(r));
    });
    return rows;
}

std::vector<SavfiRow> parse_savfi_csv(std::string_view csv) {
    std::vector<SavfiRow> rows;
    for_each_row(csv, kSavfiHeader, [&](const std::vector<std::string_view>& c, std::size_t line) {
        if (c.size() != 4) throw ParseError("ragged row", line, 1);
        rows.push_back({std::string(c[0]), phase_cell(c[1], line, 2), number(c[2], line, 3), number(c[3], line, 4)});
    });
    return rows;
}

}  // namespace gridflux
