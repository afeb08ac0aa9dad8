#include "terracelab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace terracelab {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceFailure("cannot write '" + path + "'");
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// ---------------------------------------------------------------------------
// CSV

std::string states_csv(const SteadyState& st) {
    std::ostringstream os;
    if (st.values.dim == 1) {
        os << "x,p,phi\n";
        for (int i = 0; i < st.values.n; ++i)
            os << format_double(double(i) / st.values.n) << ","
               << format_double(st.values.at(i)) << ","
               << format_double(st.eigenfunction.at(i)) << "\n";
    } else {
        os << "x,y,p,phi\n";
        for (int j = 0; j < st.values.n; ++j)
            for (int i = 0; i < st.values.n; ++i)
                os << format_double(double(i) / st.values.n) << ","
                   << format_double(double(j) / st.values.n) << ","
                   << format_double(st.values.at(i, j)) << ","
                   << format_double(st.eigenfunction.at(i, j)) << "\n";
    }
    return os.str();
}

std::string profile_csv(const Profile& prof) {
    std::ostringstream os;
    os << "z,u_mean,u_min,u_max\n";
    for (std::size_t k = 0; k < prof.mean.size(); ++k) {
        if (std::isnan(prof.mean[k])) continue;
        os << format_double(prof.z_at(k)) << "," << format_double(prof.mean[k]) << ","
           << format_double(prof.lo[k]) << "," << format_double(prof.hi[k]) << "\n";
    }
    return os.str();
}

std::string polygon_csv(const ShapePolygon& shape) {
    std::ostringstream os;
    os << "x,y\n";
    for (const auto& v : shape.vertices)
        os << format_double(v[0]) << "," << format_double(v[1]) << "\n";
    return os.str();
}

std::string speed_field_csv(const SpeedField& field) {
    std::ostringstream os;
    os << "angle_degrees,speed,se\n";
    for (const auto& s : field.samples) {
        double deg = std::atan2(s.ey, s.ex) * 180.0 / 3.14159265358979323846;
        os << format_double(deg) << "," << format_double(s.speed) << ","
           << format_double(s.se) << "\n";
    }
    return os.str();
}

std::string outline_csv(const MeasuredShape& shape) {
    std::ostringstream os;
    os << "angle_radians,radius_over_t\n";
    for (std::size_t i = 0; i < shape.angles.size(); ++i)
        os << format_double(shape.angles[i]) << "," << format_double(shape.radii[i]) << "\n";
    return os.str();
}

std::string field1d_csv(const Domain1D& dom, const std::vector<double>& values) {
    std::ostringstream os;
    os << "x,u\n";
    for (int i = 0; i < dom.n; ++i)
        os << format_double(dom.x(i)) << "," << format_double(values[i]) << "\n";
    return os.str();
}

std::string field2d_csv(const Domain2D& dom, const std::vector<double>& values) {
    std::ostringstream os;
    os << "# nx=" << dom.nx << " ny=" << dom.ny << " x0=" << format_double(dom.x0)
       << " y0=" << format_double(dom.y0) << " dx=" << format_double(dom.dx) << "\n";
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (i) os << ",";
            os << format_double(values[dom.idx(i, j)]);
        }
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// JSON

Json lattice_json(const StateLattice& lattice, const std::vector<std::string>& csv_paths) {
    Json states = Json::array();
    for (std::size_t i = 0; i < lattice.states.size(); ++i) {
        const auto& st = lattice.states[i];
        Json j;
        j["id"] = st.id;
        j["values_csv_path"] = i < csv_paths.size() ? csv_paths[i] : "";
        j["mean"] = st.values.mean();
        j["lambda"] = st.lambda;
        j["stability"] = to_string(st.stability);
        j["residual"] = st.residual;
        states.push_back(std::move(j));
    }
    Json doc;
    doc["states"] = std::move(states);
    doc["stable_ids"] = lattice.stable_ids;
    doc["totally_ordered"] = lattice.totally_ordered;
    doc["zero_id"] = lattice.zero_id;
    doc["pbar_id"] = lattice.pbar_id;
    Json inter = Json::array();
    for (auto& [a, b] : lattice.intersecting_pairs) inter.push_back(Json::array({a, b}));
    doc["intersecting_pairs"] = std::move(inter);
    return doc;
}

Json front_json(const FrontRecord& rec) {
    Json j;
    j["e"] = Json::array({rec.e.mx, rec.e.my});
    j["q_upper_id"] = rec.upper_id;
    j["q_lower_id"] = rec.lower_id;
    j["c"] = rec.speed.value;
    j["se"] = rec.speed.se;
    j["r2"] = rec.speed.r2;
    Json flags;
    flags["zero_speed"] = rec.flags.zero_speed;
    flags["accepted"] = rec.flags.accepted;
    flags["boundary_ok"] = rec.flags.boundary_ok;
    flags["profile_extracted"] = rec.flags.profile_extracted;
    flags["approximate_direction"] = rec.flags.approximate_direction;
    flags["note"] = rec.flags.note;
    j["flags"] = std::move(flags);
    if (rec.flags.profile_extracted) {
        j["profile"] = Json{{"monotonicity_defect", rec.profile.monotonicity_defect},
                            {"periodicity_defect", rec.profile.periodicity_defect},
                            {"limit_defect_upper", rec.profile.limit_defect_upper},
                            {"limit_defect_lower", rec.profile.limit_defect_lower}};
    }
    return j;
}

Json terrace_json(const Terrace& terr) {
    Json j;
    j["e"] = Json::array({terr.e.mx, terr.e.my});
    j["platforms"] = terr.platform_ids;
    Json speeds = Json::array();
    for (const auto& f : terr.fronts)
        speeds.push_back(Json{{"c", f.speed.value}, {"se", f.speed.se}});
    j["speeds"] = std::move(speeds);
    Json fronts = Json::array();
    for (const auto& f : terr.fronts) fronts.push_back(front_json(f));
    j["fronts"] = std::move(fronts);
    j["flags"] = Json{{"unique_certified", terr.flags.unique_certified},
                      {"zero_speed", terr.flags.zero_speed},
                      {"merges", terr.flags.merges},
                      {"notes", terr.flags.notes}};
    return j;
}

Json observed_terrace_json(const ObservedTerrace& obs) {
    Json j;
    j["e"] = Json::array({obs.e.mx, obs.e.my});
    j["platforms"] = obs.platform_ids;
    Json speeds = Json::array();
    for (const auto& s : obs.speeds) speeds.push_back(Json{{"c", s.value}, {"se", s.se}});
    j["speeds"] = std::move(speeds);
    Json plat = Json::array();
    for (const auto& p : obs.plateaus)
        plat.push_back(Json{{"state_id", p.state_id}, {"xi_lo", p.xi_lo}, {"xi_hi", p.xi_hi}});
    j["plateaus"] = std::move(plat);
    j["unknown_plateau"] = obs.unknown_plateau;
    j["notes"] = obs.notes;
    return j;
}

Json match_report_json(const TerraceMatchReport& rep) {
    Json j;
    j["structure_match"] = rep.structure_match;
    j["speeds_match"] = rep.speeds_match;
    j["profiles_match"] = rep.profiles_match;
    j["max_speed_gap"] = rep.max_speed_gap;
    j["max_profile_mismatch"] = rep.max_profile_mismatch;
    j["shifts"] = rep.shifts;
    j["notes"] = rep.notes;
    return j;
}

Json shape_json(const ShapePolygon& shape) {
    Json j;
    Json verts = Json::array();
    for (const auto& v : shape.vertices) verts.push_back(Json::array({v[0], v[1]}));
    j["vertices"] = std::move(verts);
    j["empty"] = shape.empty_shape;
    j["truncated"] = shape.truncated;
    j["contains_origin"] = shape.contains_origin;
    j["degenerate_origin"] = shape.degenerate_origin;
    return j;
}

Json residual_json(const PerturbationReport& rep) {
    Json j;
    j["passed"] = rep.passed;
    j["delta"] = rep.delta;
    j["min_residual"] = rep.margin;
    j["disc_err"] = rep.disc_err;
    j["location"] = rep.location;
    j["notes"] = rep.notes;
    return j;
}

Json glued_json(const GluedReport& rep) {
    Json j;
    j["passed"] = rep.passed;
    j["min_residual"] = rep.min_residual;
    j["location"] = rep.location;
    j["glue_continuous"] = rep.glue_continuous;
    j["max_glue_jump"] = rep.max_glue_jump;
    j["switch_in_band"] = rep.switch_in_band;
    j["notes"] = rep.notes;
    return j;
}

Json shape_match_json(const ShapeMatchReport& rep) {
    Json j;
    j["upper_ok"] = rep.upper_ok;
    j["lower_ok"] = rep.lower_ok;
    j["hausdorff"] = rep.hausdorff;
    j["eps"] = rep.eps;
    j["passed"] = rep.passed();
    return j;
}

Json manifest_json(const RunManifest& m) {
    Json j;
    j["command"] = m.command;
    j["config_hash"] = m.config_hash;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["wall_seconds"] = m.wall_seconds;
    j["version"] = m.version;
    return j;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

void svg_polyline(std::ostringstream& os, const std::vector<std::array<double, 2>>& pts,
                  const std::string& color, double scale, double cx, double cy, bool close) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    auto emit = [&](const std::array<double, 2>& p) {
        os << format_double(cx + scale * p[0]) << "," << format_double(cy - scale * p[1])
           << " ";
    };
    for (const auto& p : pts) emit(p);
    if (close && !pts.empty()) emit(pts.front());
    os << "\"/>\n";
}

}  // namespace

std::string polygon_svg(const std::vector<ShapePolygon>& shapes,
                        const std::vector<std::string>& colors) {
    double extent = 1.0;
    for (const auto& s : shapes)
        for (const auto& v : s.vertices)
            extent = std::max({extent, std::abs(v[0]), std::abs(v[1])});
    const double size = 480.0, pad = 20.0;
    const double scale = (size / 2 - pad) / extent;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\""
       << size << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
    os << "<line x1=\"0\" y1=\"" << size / 2 << "\" x2=\"" << size << "\" y2=\"" << size / 2
       << "\" stroke=\"#ccc\"/>\n";
    os << "<line x1=\"" << size / 2 << "\" y1=\"0\" x2=\"" << size / 2 << "\" y2=\"" << size
       << "\" stroke=\"#ccc\"/>\n";
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const std::string color = i < colors.size() ? colors[i] : "black";
        svg_polyline(os, shapes[i].vertices, color, scale, size / 2, size / 2, true);
    }
    os << "</svg>\n";
    return os.str();
}

std::string overlay_svg(const MeasuredShape& measured, const ShapePolygon& predicted) {
    return polygon_svg({measured.outline(), predicted}, {"crimson", "steelblue"});
}

// ---------------------------------------------------------------------------
// schema subset

std::string schema_check(const Json& schema, const Json& doc) {
    if (schema.contains("type")) {
        const std::string t = schema["type"];
        bool ok = (t == "object" && doc.is_object()) || (t == "array" && doc.is_array()) ||
                  (t == "string" && doc.is_string()) || (t == "number" && doc.is_number()) ||
                  (t == "integer" && doc.is_number_integer()) ||
                  (t == "boolean" && doc.is_boolean());
        if (!ok) return "expected type " + t + ", got " + std::string(doc.type_name());
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& v : schema["enum"])
            if (v == doc) found = true;
        if (!found) return "value not in enum";
    }
    if (schema.contains("required"))
        for (const auto& key : schema["required"])
            if (!doc.contains(key.get<std::string>()))
                return "missing required key '" + key.get<std::string>() + "'";
    if (schema.contains("properties") && doc.is_object()) {
        for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it) {
            if (!doc.contains(it.key())) continue;
            std::string err = schema_check(it.value(), doc.at(it.key()));
            if (!err.empty()) return "." + it.key() + ": " + err;
        }
    }
    if (schema.contains("items") && doc.is_array()) {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            std::string err = schema_check(schema["items"], doc[i]);
            if (!err.empty()) return "[" + std::to_string(i) + "]: " + err;
        }
    }
    return {};
}

const Json& published_schema(const std::string& name) {
    static const std::map<std::string, Json> schemas = [] {
        std::map<std::string, Json> m;
        m["lattice"] = Json::parse(R"({
          "type": "object",
          "required": ["states", "stable_ids", "totally_ordered", "zero_id", "pbar_id"],
          "properties": {
            "states": {"type": "array", "items": {
              "type": "object",
              "required": ["id", "values_csv_path", "lambda", "stability", "residual"],
              "properties": {
                "id": {"type": "integer"},
                "values_csv_path": {"type": "string"},
                "mean": {"type": "number"},
                "lambda": {"type": "number"},
                "stability": {"type": "string", "enum": ["stable", "unstable", "marginal"]},
                "residual": {"type": "number"}
              }}},
            "stable_ids": {"type": "array", "items": {"type": "integer"}},
            "totally_ordered": {"type": "boolean"},
            "zero_id": {"type": "integer"},
            "pbar_id": {"type": "integer"}
          }})");
        m["front"] = Json::parse(R"({
          "type": "object",
          "required": ["e", "q_upper_id", "q_lower_id", "c", "se", "r2", "flags"],
          "properties": {
            "e": {"type": "array", "items": {"type": "integer"}},
            "q_upper_id": {"type": "integer"},
            "q_lower_id": {"type": "integer"},
            "c": {"type": "number"},
            "se": {"type": "number"},
            "r2": {"type": "number"},
            "flags": {"type": "object",
                      "required": ["zero_speed", "accepted", "boundary_ok"],
                      "properties": {
                        "zero_speed": {"type": "boolean"},
                        "accepted": {"type": "boolean"},
                        "boundary_ok": {"type": "boolean"}
                      }}
          }})");
        m["terrace"] = Json::parse(R"({
          "type": "object",
          "required": ["e", "platforms", "speeds", "fronts", "flags"],
          "properties": {
            "e": {"type": "array"},
            "platforms": {"type": "array", "items": {"type": "integer"}},
            "speeds": {"type": "array", "items": {
              "type": "object", "required": ["c", "se"],
              "properties": {"c": {"type": "number"}, "se": {"type": "number"}}}},
            "fronts": {"type": "array"},
            "flags": {"type": "object", "required": ["unique_certified", "zero_speed"]}
          }})");
        m["observed_terrace"] = Json::parse(R"({
          "type": "object",
          "required": ["e", "platforms", "speeds", "plateaus", "unknown_plateau"],
          "properties": {
            "platforms": {"type": "array", "items": {"type": "integer"}},
            "speeds": {"type": "array"},
            "plateaus": {"type": "array", "items": {
              "type": "object", "required": ["state_id", "xi_lo", "xi_hi"]}},
            "unknown_plateau": {"type": "boolean"}
          }})");
        m["match_report"] = Json::parse(R"({
          "type": "object",
          "required": ["structure_match", "speeds_match", "max_speed_gap"],
          "properties": {
            "structure_match": {"type": "boolean"},
            "speeds_match": {"type": "boolean"},
            "max_speed_gap": {"type": "number"}
          }})");
        m["shape"] = Json::parse(R"({
          "type": "object",
          "required": ["vertices", "empty", "truncated", "contains_origin"],
          "properties": {
            "vertices": {"type": "array"},
            "empty": {"type": "boolean"},
            "truncated": {"type": "boolean"},
            "contains_origin": {"type": "boolean"}
          }})");
        m["residual"] = Json::parse(R"({
          "type": "object",
          "required": ["passed", "delta", "min_residual", "disc_err"],
          "properties": {
            "passed": {"type": "boolean"},
            "delta": {"type": "number"},
            "min_residual": {"type": "number"},
            "disc_err": {"type": "number"}
          }})");
        m["glued"] = Json::parse(R"({
          "type": "object",
          "required": ["passed", "min_residual", "glue_continuous", "switch_in_band"],
          "properties": {
            "passed": {"type": "boolean"},
            "min_residual": {"type": "number"}
          }})");
        m["shape_match"] = Json::parse(R"({
          "type": "object",
          "required": ["upper_ok", "lower_ok", "hausdorff", "eps", "passed"]
        })");
        m["manifest"] = Json::parse(R"({
          "type": "object",
          "required": ["command", "config_hash", "inputs", "outputs", "version"],
          "properties": {
            "command": {"type": "string"},
            "config_hash": {"type": "string"},
            "inputs": {"type": "array"},
            "outputs": {"type": "array"},
            "version": {"type": "string"}
          }})");
        return m;
    }();
    auto it = schemas.find(name);
    if (it == schemas.end()) throw ConfigError("unknown schema '" + name + "'");
    return it->second;
}

}  // namespace terracelab
