#include "superrad/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "superrad/error.hpp"

namespace superrad {
namespace {

using nlohmann::json;

json param_json(const ParamValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

std::string param_text(const ParamValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
    if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
    if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    return std::get<std::string>(v);
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json provenance_object(const Provenance& p) {
    json params = json::object();
    for (const auto& [key, value] : p.params) params[key] = param_json(value);
    json out{{"tool", "superrad"}, {"version", p.version}, {"subcommand", p.subcommand},
             {"params", params}};
    out["seed"] = p.seed ? json(*p.seed) : json(nullptr);
    return out;
}

const char* kind_name(RateKind k) { return k == RateKind::Total ? "total" : "directional"; }

void require_nonempty(const RegionMap& map) {
    if (map.empty() || map.rows() == 0 || map.cols() == 0) {
        throw InvalidArgument("cannot export an empty region map");
    }
    map.validate();
}

std::string axis_comments(const RegionMap& map) {
    return "# x_axis=" + map.x.name + "\n# y_axis=" + map.y.name + "\n";
}

double parse_number(const std::string& field, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw ParseError("trailing characters in '" + field + "'", line);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("not a number: '" + field + "'", line);
    }
}

}  // namespace

const char* library_version() {
#ifdef SUPERRAD_VERSION_STRING
    return SUPERRAD_VERSION_STRING;
#else
    return "unknown";
#endif
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string Provenance::comment_block() const {
    std::string out = "# superrad " + version + " " + subcommand + "\n";
    for (const auto& [key, value] : params) out += "# " + key + "=" + param_text(value) + "\n";
    if (seed) out += "# seed=" + std::to_string(*seed) + "\n";
    return out;
}

std::string Provenance::json() const { return provenance_object(*this).dump(); }

std::string pgm_text(const RegionMap& map, const Provenance* prov) {
    require_nonempty(map);
    std::string out = "P2\n";
    if (prov) out += prov->comment_block();
    out += axis_comments(map);
    out += std::to_string(map.cols()) + " " + std::to_string(map.rows()) + "\n255\n";
    for (std::size_t row = 0; row < map.rows(); ++row) {
        for (std::size_t col = 0; col < map.cols(); ++col) {
            if (col > 0) out += ' ';
            out += map.superradiant(row, col) ? "255" : "128";
        }
        out += '\n';
    }
    return out;
}

void emit_pgm(const RegionMap& map, const std::filesystem::path& path, const Provenance& prov) {
    write_text(path, pgm_text(map, &prov));
}

std::string csv_text(const RegionMap& map, const Provenance* prov) {
    require_nonempty(map);
    std::string out;
    if (prov) out += prov->comment_block();
    out += axis_comments(map);
    out += "x,y,value,mask\n";
    for (std::size_t row = 0; row < map.rows(); ++row) {
        for (std::size_t col = 0; col < map.cols(); ++col) {
            out += format_double(map.x.samples[col]) + "," + format_double(map.y.samples[row]) + "," +
                   format_double(map.value(row, col)) + "," +
                   (map.superradiant(row, col) ? "1" : "0") + "\n";
        }
    }
    return out;
}

void emit_csv(const RegionMap& map, const std::filesystem::path& path, const Provenance& prov) {
    write_text(path, csv_text(map, &prov));
}

RegionMap parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::string x_name = "x";
    std::string y_name = "y";
    std::vector<double> xs, ys, vals;
    std::vector<std::uint8_t> masks;
    std::vector<std::pair<double, double>> coords;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# x_axis=", 0) == 0) x_name = line.substr(9);
            if (line.rfind("# y_axis=", 0) == 0) y_name = line.substr(9);
            continue;
        }
        if (!header) {
            if (line != "x,y,value,mask") throw ParseError("expected header x,y,value,mask", lineno);
            header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 4) throw ParseError("expected 4 fields", lineno);
        const double x = parse_number(fields[0], lineno);
        const double y = parse_number(fields[1], lineno);
        const double v = parse_number(fields[2], lineno);
        if (fields[3] != "0" && fields[3] != "1") throw ParseError("mask must be 0 or 1", lineno);
        const std::uint8_t m = fields[3] == "1";
        if (m != (v > 0.0)) throw ParseError("mask disagrees with value", lineno);
        if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
        if (std::find(ys.begin(), ys.end(), y) == ys.end()) ys.push_back(y);
        coords.emplace_back(x, y);
        vals.push_back(v);
        masks.push_back(m);
    }
    if (!header) throw ParseError("missing header", lineno);
    if (vals.empty() || vals.size() != xs.size() * ys.size()) {
        throw ParseError("cell count does not form a full grid", lineno);
    }
    RegionMap map(Axis{x_name, xs}, Axis{y_name, ys});
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const std::size_t row = i / xs.size();
        const std::size_t col = i % xs.size();
        if (coords[i].first != xs[col] || coords[i].second != ys[row]) {
            throw ParseError("cells are not in row-major order", i + 1);
        }
        map.set(row, col, vals[i]);
    }
    return map;
}

RegionMap read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::string slope_json(const SlopeResult& r, const ParamList& geometry, const Provenance& prov) {
    json params = json::object();
    for (const auto& [key, value] : geometry) params[key] = param_json(value);
    json out{{"N", r.n_atoms},
             {"d_params", params},
             {"alpha", r.alpha},
             {"k_i", vec_json(r.k_i)},
             {"gamma0", r.gamma0},
             {"gdot0", r.gdot0},
             {"scaled_slope", r.scaled()},
             {"single_atom_term", r.single_atom_term},
             {"pair_term", r.pair_term},
             {"superradiant", r.superradiant()},
             {"direction_warning", r.direction_warning}};
    out["k_f"] = r.k_f ? vec_json(*r.k_f) : json(nullptr);
    out["gddot0"] = r.gddot0 ? json(*r.gddot0) : json(nullptr);
    out["provenance"] = provenance_object(prov);
    return out.dump(2);
}

std::string threshold_json(const ThresholdResult& r, const Provenance& prov) {
    json out{{"dim", r.dim},
             {"d", r.d},
             {"kind", kind_name(r.kind)},
             {"C", nullptr},
             {"D", nullptr},
             {"rms", nullptr},
             {"found", r.found},
             {"n1_max", r.n1_max},
             {"largest_slope", r.largest_slope},
             {"n1_at_largest", r.n1_at_largest}};
    out["n1_threshold"] = r.found ? json(r.n1_threshold) : json(nullptr);
    out["first_positive"] = r.first_positive > 0 ? json(r.first_positive) : json(nullptr);
    out["provenance"] = provenance_object(prov);
    return out.dump(2);
}

std::string fit_json(const FitResult& f, const Provenance& prov) {
    json out{{"dim", f.dim},
             {"d", f.d},
             {"kind", "total"},
             {"C", f.C},
             {"D", f.D},
             {"D_times_d2", f.normalized_coefficient()},
             {"rms", f.rms},
             {"n1_lo", f.n1_lo},
             {"n1_hi", f.n1_hi},
             {"points", f.points},
             {"regressor", f.dim == 2 ? "ln_n1" : "n1"},
             {"n1_threshold_source", "fit_extrapolation"}};
    out["n1_threshold"] = f.extrapolated_threshold ? json(*f.extrapolated_threshold) : json(nullptr);
    out["provenance"] = provenance_object(prov);
    return out.dump(2);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace superrad
