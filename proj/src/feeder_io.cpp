#include "gridflux/feeder_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gridflux {

namespace {

using nlohmann::json;

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

class Reader {
  public:
    void expect_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> required,
                     std::initializer_list<std::string_view> optional) const {
        if (!obj.is_object()) throw SemanticError(path, "expected an object");
        for (auto key : required)
            if (!obj.contains(std::string(key))) throw SemanticError(path + "/" + std::string(key), "missing required key");
        for (const auto& [key, _] : obj.items()) {
            auto match = [&](auto list) { return std::find(list.begin(), list.end(), key) != list.end(); };
            if (!match(required) && !match(optional)) throw SemanticError(path + "/" + key, "unknown key");
        }
    }

    std::string string(const json& obj, const std::string& path, const char* key) const {
        const auto& v = obj.at(key);
        if (!v.is_string()) throw SemanticError(path + "/" + key, "expected a string");
        return v.get<std::string>();
    }

    double number(const json& v, const std::string& path) const {
        if (!v.is_number()) throw SemanticError(path, "expected a number");
        double d = v.get<double>();
        if (!std::isfinite(d)) throw SemanticError(path, "expected a finite number");
        return d;
    }

    PhaseSet phases(const json& obj, const std::string& path) const {
        auto text = string(obj, path, "phases");
        auto set = PhaseSet::parse(text);
        if (!set) throw SemanticError(path + "/phases", "invalid phase list '" + text + "'");
        return *set;
    }

    const json& array(const json& obj, const std::string& path, const char* key) const {
        const auto& v = obj.at(key);
        if (!v.is_array()) throw SemanticError(path + "/" + key, "expected an array");
        return v;
    }
};

BusSpec read_bus(const Reader& r, const json& j, const std::string& path) {
    r.expect_keys(j, path, {"id", "phases"}, {"zone", "load"});
    BusSpec b;
    b.id = r.string(j, path, "id");
    b.phases = r.phases(j, path);
    if (j.contains("zone")) b.zone = r.string(j, path, "zone");
    if (j.contains("load")) {
        const auto& load = j.at("load");
        const std::string lpath = path + "/load";
        if (!load.is_object()) throw SemanticError(lpath, "expected an object keyed by phase");
        for (const auto& [key, val] : load.items()) {
            auto ph = key.size() == 1 ? phase_from_char(key[0]) : std::nullopt;
            if (!ph || key[0] != to_char(*ph)) throw SemanticError(lpath + "/" + key, "unknown phase key");
            if (!val.is_array() || val.size() != 2) throw SemanticError(lpath + "/" + key, "expected [kw, kvar]");
            b.load[*ph] = Complex(r.number(val[0], lpath + "/" + key + "/0"), r.number(val[1], lpath + "/" + key + "/1"));
            b.load_phases.insert(*ph);
        }
    }
    return b;
}

SegmentSpec read_segment(const Reader& r, const json& j, const std::string& path) {
    r.expect_keys(j, path, {"from", "to", "phases", "impedance"}, {"length"});
    SegmentSpec s;
    s.from = r.string(j, path, "from");
    s.to = r.string(j, path, "to");
    s.phases = r.phases(j, path);
    if (j.contains("length")) s.length = r.number(j.at("length"), path + "/length");
    const auto& z = j.at("impedance");
    const std::string zpath = path + "/impedance";
    if (!z.is_array() || z.size() != kNumPhases) throw SemanticError(zpath, "expected a 3x3 array");
    for (Phase row : kAllPhases) {
        const auto& zr = z[index_of(row)];
        const std::string rpath = zpath + "/" + std::to_string(index_of(row));
        if (!zr.is_array() || zr.size() != kNumPhases) throw SemanticError(rpath, "expected 3 entries");
        for (Phase col : kAllPhases) {
            const auto& e = zr[index_of(col)];
            const std::string epath = rpath + "/" + std::to_string(index_of(col));
            const bool present = s.phases.contains(row) && s.phases.contains(col);
            if (e.is_null()) {
                if (present) throw SemanticError(epath, "null impedance on a present phase pair");
                continue;
            }
            if (!present) throw SemanticError(epath, "impedance given for an absent phase (use null)");
            if (!e.is_array() || e.size() != 2) throw SemanticError(epath, "expected [r, x]");
            s.impedance(row, col) = Complex(r.number(e[0], epath + "/0"), r.number(e[1], epath + "/1"));
        }
    }
    return s;
}

PvSpec read_pv(const Reader& r, const json& j, const std::string& path) {
    r.expect_keys(j, path, {"id", "bus", "phases", "rating_kva"}, {"p_max_kw"});
    PvSpec pv;
    pv.id = r.string(j, path, "id");
    pv.bus = r.string(j, path, "bus");
    pv.phases = r.phases(j, path);
    pv.rating_kva = r.number(j.at("rating_kva"), path + "/rating_kva");
    if (j.contains("p_max_kw")) pv.p_max_kw = r.number(j.at("p_max_kw"), path + "/p_max_kw");
    return pv;
}

json complex_pair(Complex c) { return json::array({c.real(), c.imag()}); }

bool parse_double(std::string_view cell, double& out) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::vector<std::string_view> split_commas(std::string_view line) {
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

}  // namespace

FeederSpec parse_feeder_spec(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(document, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("feeder syntax error: " + std::string(e.what()), line, col);
    } catch (const json::exception& e) {
        // numeric overflow and similar carry no byte offset
        throw ParseError("feeder syntax error: " + std::string(e.what()), 0, 0);
    }

    Reader r;
    r.expect_keys(doc, "", {"root", "bases", "buses", "segments"}, {"name", "v_source_pu", "pv_units"});
    FeederSpec spec;
    if (doc.contains("name")) spec.name = r.string(doc, "", "name");
    spec.root = r.string(doc, "", "root");
    if (doc.contains("v_source_pu")) spec.v_source_pu = r.number(doc.at("v_source_pu"), "/v_source_pu");

    const auto& bases = doc.at("bases");
    r.expect_keys(bases, "/bases", {"kva", "kv_ll"}, {"zones"});
    spec.bases.kva = r.number(bases.at("kva"), "/bases/kva");
    spec.bases.kv_ll = r.number(bases.at("kv_ll"), "/bases/kv_ll");
    if (bases.contains("zones")) {
        const auto& zones = bases.at("zones");
        if (!zones.is_object()) throw SemanticError("/bases/zones", "expected an object");
        for (const auto& [name, kv] : zones.items()) spec.bases.zones[name] = r.number(kv, "/bases/zones/" + name);
    }

    const auto& buses = r.array(doc, "", "buses");
    for (std::size_t i = 0; i < buses.size(); ++i) spec.buses.push_back(read_bus(r, buses[i], "/buses/" + std::to_string(i)));
    const auto& segments = r.array(doc, "", "segments");
    for (std::size_t i = 0; i < segments.size(); ++i)
        spec.segments.push_back(read_segment(r, segments[i], "/segments/" + std::to_string(i)));
    if (doc.contains("pv_units")) {
        const auto& pvs = r.array(doc, "", "pv_units");
        for (std::size_t i = 0; i < pvs.size(); ++i) spec.pv_units.push_back(read_pv(r, pvs[i], "/pv_units/" + std::to_string(i)));
    }

    // Name the offending reference by path before topology validation runs.
    std::set<std::string> ids;
    for (const auto& b : spec.buses) ids.insert(b.id);
    for (std::size_t i = 0; i < spec.segments.size(); ++i) {
        for (const char* key : {"from", "to"}) {
            const auto& id = std::string_view(key) == "from" ? spec.segments[i].from : spec.segments[i].to;
            if (!ids.contains(id))
                throw SemanticError("/segments/" + std::to_string(i) + "/" + key, "unknown bus '" + id + "'");
        }
    }
    for (std::size_t i = 0; i < spec.pv_units.size(); ++i)
        if (!ids.contains(spec.pv_units[i].bus))
            throw SemanticError("/pv_units/" + std::to_string(i) + "/bus", "unknown bus '" + spec.pv_units[i].bus + "'");
    if (!ids.contains(spec.root)) throw SemanticError("/root", "unknown bus '" + spec.root + "'");
    return spec;
}

Feeder parse_feeder(std::string_view document) { return Feeder::build(parse_feeder_spec(document)); }

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Feeder load_feeder(const std::filesystem::path& path) { return parse_feeder(read_text_file(path)); }

std::string write_feeder(const FeederSpec& spec) {
    json doc = json::object();
    if (!spec.name.empty()) doc["name"] = spec.name;
    doc["root"] = spec.root;
    json bases = {{"kva", spec.bases.kva}, {"kv_ll", spec.bases.kv_ll}};
    if (!spec.bases.zones.empty()) bases["zones"] = spec.bases.zones;
    doc["bases"] = bases;
    if (spec.v_source_pu != 1.0) doc["v_source_pu"] = spec.v_source_pu;

    json buses = json::array();
    for (const auto& b : spec.buses) {
        json jb = {{"id", b.id}, {"phases", b.phases.to_string()}};
        if (!b.zone.empty()) jb["zone"] = b.zone;
        if (!b.load_phases.empty()) {
            json load = json::object();
            b.load_phases.for_each([&](Phase p) { load[std::string(1, to_char(p))] = complex_pair(b.load[p]); });
            jb["load"] = load;
        }
        buses.push_back(jb);
    }
    doc["buses"] = buses;

    json segments = json::array();
    for (const auto& s : spec.segments) {
        json z = json::array();
        for (Phase row : kAllPhases) {
            json zr = json::array();
            for (Phase col : kAllPhases) {
                if (s.phases.contains(row) && s.phases.contains(col))
                    zr.push_back(complex_pair(s.impedance(row, col)));
                else
                    zr.push_back(nullptr);
            }
            z.push_back(zr);
        }
        json js = {{"from", s.from}, {"to", s.to}, {"phases", s.phases.to_string()}, {"impedance", z}};
        if (s.length != 1.0) js["length"] = s.length;
        segments.push_back(js);
    }
    doc["segments"] = segments;

    if (!spec.pv_units.empty()) {
        json pvs = json::array();
        for (const auto& pv : spec.pv_units) {
            json jp = {{"id", pv.id}, {"bus", pv.bus}, {"phases", pv.phases.to_string()}, {"rating_kva", pv.rating_kva}};
            if (pv.p_max_kw) jp["p_max_kw"] = *pv.p_max_kw;
            pvs.push_back(jp);
        }
        doc["pv_units"] = pvs;
    }
    return doc.dump(2) + "\n";
}

bool ProfileTable::contains(std::string_view name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& ProfileTable::series(std::string_view name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error("profile has no series '" + std::string(name) + "'");
    return columns[static_cast<std::size_t>(it - names.begin())];
}

ProfileTable parse_profiles(std::string_view csv) {
    ProfileTable table;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        auto end = csv.find('\n', pos);
        std::string_view line = csv.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? csv.size() : end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        auto cells = split_commas(line);
        if (!have_header) {
            if (cells.front() != "t_min") throw ParseError("profile header must start with t_min", line_no, 1);
            if (cells.size() < 2) throw ParseError("profile has no series columns", line_no, 1);
            for (std::size_t k = 1; k < cells.size(); ++k) {
                if (cells[k].empty()) throw ParseError("empty series name", line_no, k + 1);
                table.names.emplace_back(cells[k]);
            }
            table.columns.resize(table.names.size());
            have_header = true;
            continue;
        }
        if (cells.size() != table.names.size() + 1)
            throw ParseError("ragged row: expected " + std::to_string(table.names.size() + 1) + " cells, found " +
                                 std::to_string(cells.size()),
                             line_no, 1);
        double t = 0.0;
        if (!parse_double(cells[0], t)) throw ParseError("non-numeric t_min", line_no, 1);
        for (std::size_t k = 1; k < cells.size(); ++k) {
            double v = 0.0;
            if (!parse_double(cells[k], v)) throw ParseError("non-numeric value", line_no, k + 1);
            if (v < 0.0) throw ParseError("negative multiplier", line_no, k + 1);
            table.columns[k - 1].push_back(v);
        }
        if (!table.t_min.empty()) {
            if (t <= table.t_min.back()) throw ParseError("t_min must be strictly increasing", line_no, 1);
            if (table.t_min.size() >= 2) {
                double step = table.t_min[1] - table.t_min[0];
                if (std::abs((t - table.t_min.back()) - step) > 1e-9 * std::max(1.0, std::abs(t)))
                    throw ParseError("non-uniform time step", line_no, 1);
            }
        }
        table.t_min.push_back(t);
    }
    if (!have_header) throw ParseError("profile is empty", line_no, 1);
    return table;
}

std::string format_fixed6(double value) {
    char buf[64];
    if (value == 0.0) value = 0.0;  // drop negative zero
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 6);
    if (ec != std::errc{}) return "nan";
    std::string s(buf, ptr);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

void write_profiles(const ProfileTable& table, std::ostream& out) {
    out << "t_min";
    for (const auto& n : table.names) out << ',' << n;
    out << '\n';
    for (std::size_t row = 0; row < table.size(); ++row) {
        out << format_fixed6(table.t_min[row]);
        for (const auto& col : table.columns) out << ',' << format_fixed6(col[row]);
        out << '\n';
    }
}

}  // namespace gridflux
