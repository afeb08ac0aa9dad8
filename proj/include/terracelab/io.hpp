#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "terracelab/fronts.hpp"
#include "terracelab/spectral.hpp"
#include "terracelab/terrace.hpp"
#include "terracelab/verify.hpp"
#include "terracelab/wulff.hpp"

namespace terracelab {

using Json = nlohmann::ordered_json;

/// Shortest round-trippable decimal for a double; keeps reruns byte-identical.
std::string format_double(double v);

std::string fnv1a_hex(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// CSV emission (deterministic formatting)
std::string states_csv(const SteadyState& st);
std::string profile_csv(const Profile& prof);
std::string polygon_csv(const ShapePolygon& shape);
std::string speed_field_csv(const SpeedField& field);
std::string outline_csv(const MeasuredShape& shape);
std::string field1d_csv(const Domain1D& dom, const std::vector<double>& values);
std::string field2d_csv(const Domain2D& dom, const std::vector<double>& values);

// JSON documents
Json lattice_json(const StateLattice& lattice, const std::vector<std::string>& csv_paths);
Json front_json(const FrontRecord& rec);
Json terrace_json(const Terrace& terr);
Json observed_terrace_json(const ObservedTerrace& obs);
Json match_report_json(const TerraceMatchReport& rep);
Json shape_json(const ShapePolygon& shape);
Json residual_json(const PerturbationReport& rep);
Json glued_json(const GluedReport& rep);
Json shape_match_json(const ShapeMatchReport& rep);

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
    std::string version;
};

Json manifest_json(const RunManifest& m);

// SVG rendering
std::string polygon_svg(const std::vector<ShapePolygon>& shapes,
                        const std::vector<std::string>& colors);
std::string overlay_svg(const MeasuredShape& measured, const ShapePolygon& predicted);

/// Minimal JSON-schema subset checker: type / required / properties / items /
/// enum. Returns an empty string on success, a description of the first
/// violation otherwise.
std::string schema_check(const Json& schema, const Json& doc);

/// Schema documents published with the tool, keyed by name (lattice, front,
/// terrace, observed_terrace, match_report, shape, residual, glued, manifest,
/// shape_match).
const Json& published_schema(const std::string& name);

}  // namespace terracelab
