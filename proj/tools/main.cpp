// terracelab: steady states, pulsating front speeds, propagating terraces and
// spreading shapes of periodic multistable reaction-diffusion equations.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "terracelab/io.hpp"
#include "terracelab/problem.hpp"
#include "terracelab/spectral.hpp"
#include "terracelab/terrace.hpp"
#include "terracelab/verify.hpp"
#include "terracelab/wulff.hpp"

namespace fs = std::filesystem;
using namespace terracelab;

namespace {

constexpr const char* kVersion = "terracelab 0.1.0";

struct OutputSink {
    fs::path dir;
    RunManifest manifest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit OutputSink(const std::string& out_dir, std::string command) {
        const char* env = std::getenv("TERRACELAB_OUT");
        dir = out_dir.empty() ? (env ? fs::path(env) : fs::path("out")) : fs::path(out_dir);
        fs::create_directories(dir);
        manifest.command = std::move(command);
        manifest.version = kVersion;
    }

    std::string write(const std::string& name, const std::string& content) {
        fs::path p = dir / name;
        write_text_file(p.string(), content);
        manifest.outputs.push_back(p.string());
        return p.string();
    }

    std::string write_json(const std::string& name, const Json& doc) {
        return write(name, doc.dump(2) + "\n");
    }

    void finish() {
        manifest.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text_file((dir / "manifest.json").string(), manifest_json(manifest).dump(2) + "\n");
        std::cout << "outputs in " << dir.string() << "\n";
    }
};

LabConfig load_for(OutputSink& sink, const std::string& config_path) {
    LabConfig cfg = load_config_file(config_path);
    sink.manifest.inputs.push_back(config_path);
    sink.manifest.config_hash = fnv1a_hex(cfg.source_text);
    return cfg;
}

Direction parse_dir(const std::string& text) {
    std::istringstream is(text);
    Direction d;
    if (!(is >> d.mx)) throw ConfigError("bad direction '" + text + "'");
    if (!(is >> d.my)) d.my = 0;
    return d;
}

std::vector<Direction> parse_dirs(const std::string& text) {
    std::vector<Direction> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ';'))
        if (!item.empty()) out.push_back(parse_dir(item));
    if (out.empty()) throw ConfigError("empty direction list");
    return out;
}

std::vector<double> parse_times(const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs);
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

StateLattice enumerate_for(const LabConfig& cfg) {
    CellOperator op(cfg.problem, cfg.grid.points_per_period);
    return enumerate_stable_states(op, cfg.run);
}

// ---------------------------------------------------------------------------

int cmd_states(const std::string& config_path, const std::string& out_dir) {
    OutputSink sink(out_dir, "states");
    LabConfig cfg = load_for(sink, config_path);
    StateLattice lattice = enumerate_for(cfg);
    std::vector<std::string> csvs;
    for (const auto& st : lattice.states)
        csvs.push_back(sink.write("state_" + std::to_string(st.id) + ".csv", states_csv(st)));
    sink.write_json("states.json", lattice_json(lattice, csvs));
    sink.finish();
    return 0;
}

int cmd_front(const std::string& config_path, const std::string& out_dir,
              const std::string& dir_text, int upper, int lower) {
    OutputSink sink(out_dir, "front");
    LabConfig cfg = load_for(sink, config_path);
    StateLattice lattice = enumerate_for(cfg);
    FrontContext ctx{cfg.problem, cfg.grid, cfg.run};
    FrontJob job;
    job.dir = parse_dir(dir_text);
    job.upper_id = upper >= 0 ? upper : lattice.pbar_id;
    job.lower_id = lower >= 0 ? lower : lattice.zero_id;
    job.upper = lattice.state(job.upper_id).values;
    job.lower = lattice.state(job.lower_id).values;
    for (int id : lattice.stable_ids) {
        double m = lattice.state(id).values.mean();
        if (m > job.lower.mean() && m < job.upper.mean())
            job.candidate_means.push_back(m);
    }
    FrontRecord rec = measure_front(ctx, job);
    sink.write_json("front.json", front_json(rec));
    if (rec.flags.profile_extracted) sink.write("profile.csv", profile_csv(rec.profile));
    sink.finish();
    std::cout << "c = " << format_double(rec.speed.value) << " +- "
              << format_double(rec.speed.se) << "\n";
    return 0;
}

int cmd_terrace(const std::string& config_path, const std::string& out_dir,
                const std::string& dir_text, bool observe) {
    OutputSink sink(out_dir, "terrace");
    LabConfig cfg = load_for(sink, config_path);
    StateLattice lattice = enumerate_for(cfg);
    FrontContext ctx{cfg.problem, cfg.grid, cfg.run};
    Direction e = parse_dir(dir_text);
    Terrace terr = build_terrace(ctx, lattice, e);
    sink.write_json("terrace.json", terrace_json(terr));
    for (std::size_t k = 0; k < terr.num_fronts(); ++k)
        if (terr.fronts[k].flags.profile_extracted)
            sink.write("profile_" + std::to_string(k) + ".csv",
                       profile_csv(terr.fronts[k].profile));
    if (observe) {
        ObservedTerrace obs = observe_terrace_from_cauchy(ctx, lattice, e);
        sink.write_json("observed_terrace.json", observed_terrace_json(obs));
        TerraceMatchReport rep = compare_terraces(terr, obs);
        sink.write_json("match_report.json", match_report_json(rep));
        if (!rep.match()) {
            sink.finish();
            throw NumericalDiagnostic("built and observed terraces disagree");
        }
    }
    sink.finish();
    std::cout << "K = " << terr.num_fronts() << ", merges = " << terr.flags.merges << "\n";
    return 0;
}

int cmd_wulff(const std::string& config_path, const std::string& out_dir,
              const std::string& field_path, int state_id, const std::string& dirs_text,
              const std::string& fg_text, int jobs) {
    OutputSink sink(out_dir, "wulff");
    SpeedField field;
    if (!field_path.empty()) {
        field.provenance = Provenance::Synthetic;
        std::istringstream is(read_text_file(field_path));
        sink.manifest.inputs.push_back(field_path);
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double deg, c, se = 0.0;
            if (!(ls >> deg >> c)) throw ConfigError("bad field row: " + line);
            ls >> se;
            field.add_angle(deg * std::numbers::pi / 180.0, c, se);
        }
    } else {
        if (config_path.empty()) throw ConfigError("wulff needs --config or --field");
        LabConfig cfg = load_for(sink, config_path);
        StateLattice lattice = enumerate_for(cfg);
        FrontContext ctx{cfg.problem, cfg.grid, cfg.run};
        std::vector<Direction> dirs = parse_dirs(dirs_text);
        int p_id = state_id >= 0 ? state_id : lattice.zero_id;
        std::vector<Terrace> terraces(dirs.size());
        parallel_for(dirs.size(), jobs,
                     [&](std::size_t i) { terraces[i] = build_terrace(ctx, lattice, dirs[i]); });
        field = c_of_p(terraces, lattice, p_id, cfg.run.dedup_tol);
    }

    ShapePolygon shape = wulff_shape(field);
    sink.write("field.csv", speed_field_csv(field));
    sink.write("polygon.csv", polygon_csv(shape));
    sink.write("polygon.svg", polygon_svg({shape}, {"steelblue"}));
    sink.write_json("shape.json", shape_json(shape));
    if (!fg_text.empty()) {
        Direction e = parse_dir(fg_text);
        auto fg = freidlin_gartner(field, e.ex(), e.ey());
        std::cout << "w(" << e.str() << ") = " << format_double(fg.value) << "\n";
    }
    sink.finish();
    return 0;
}

int cmd_spread(const std::string& config_path, const std::string& out_dir,
               const std::string& times_text, double r0, double eps) {
    OutputSink sink(out_dir, "spread");
    LabConfig cfg = load_for(sink, config_path);
    if (cfg.problem.dimension() != 2) throw ConfigError("spread needs dimension = 2");
    StateLattice lattice = enumerate_for(cfg);
    FrontContext ctx{cfg.problem, cfg.grid, cfg.run};

    SpreadingOptions opt;
    opt.times = parse_times(times_text);
    if (opt.times.empty()) throw ConfigError("spread: --times required");
    if (r0 > 0) opt.r0 = r0;
    SpreadingResult result = spreading_run(ctx, lattice, opt);

    // predicted shapes from per-direction terraces; homogeneous problems need a
    // single direction, heterogeneous ones use the axis pairs
    std::vector<Direction> dirs;
    if (cfg.problem.homogeneous()) dirs = {{1, 0}};
    else dirs = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    std::vector<Terrace> terraces;
    {
        GridSpec front_grid = cfg.grid;
        front_grid.extent_periods_y = 1;
        FrontContext front_ctx{cfg.problem, front_grid, cfg.run};
        for (const auto& d : dirs) terraces.push_back(build_terrace(front_ctx, lattice, d));
    }

    Json all = Json::array();
    std::vector<int> chain = lattice.stable_descending();
    for (std::size_t ti = 0; ti < result.times.size(); ++ti) {
        for (const auto& shape : result.shapes[ti]) {
            // predicted polygon for this level pair: Wulff shape of c[p_lower]
            SpeedField field;
            if (cfg.problem.homogeneous()) {
                SpeedEstimate c =
                    front_speed_through(terraces[0], lattice, shape.lower_id, cfg.run.dedup_tol);
                for (int a = 0; a < 64; ++a)
                    field.add_angle(2.0 * std::numbers::pi * a / 64, c.value, c.se);
            } else {
                field = c_of_p(terraces, lattice, shape.lower_id, cfg.run.dedup_tol);
            }
            ShapePolygon predicted = wulff_shape(field);
            ShapeMatchReport rep = shape_match(shape, predicted, eps);
            std::string tag = "t" + format_double(shape.time) + "_q" +
                              std::to_string(shape.lower_id);
            sink.write("outline_" + tag + ".csv", outline_csv(shape));
            sink.write("overlay_" + tag + ".svg", overlay_svg(shape, predicted));
            Json j = shape_match_json(rep);
            j["time"] = shape.time;
            j["lower_id"] = shape.lower_id;
            all.push_back(std::move(j));
        }
    }
    sink.write_json("shape_match.json", all);
    sink.finish();
    return 0;
}

int cmd_corner_demo(const std::string& out_dir) {
    OutputSink sink(out_dir, "corner-demo");
    // speeds 1, 1, 2 on e1, e2 and the 3-4-5 diagonal
    std::vector<ExactSample> samples = {
        {Rat(1), Rat(0), Rat(1)},
        {Rat(0), Rat(1), Rat(1)},
        {Rat(3, 5), Rat(4, 5), Rat(2)},
    };
    ExactShape shape = wulff_shape_exact(samples, Rat(10));
    Rat support = support_exact(shape, Rat(3, 5), Rat(4, 5));
    bool supporting = supporting_hyperplane_test_exact(shape, Rat(3, 5), Rat(4, 5), Rat(2));

    ShapePolygon dshape = to_double(shape);
    std::size_t corner = 0;
    for (std::size_t i = 0; i < dshape.vertices.size(); ++i)
        if (std::abs(dshape.vertices[i][0] - 1.0) < 1e-12 &&
            std::abs(dshape.vertices[i][1] - 1.0) < 1e-12)
            corner = i;
    double angle = vertex_interior_angle(dshape, corner);

    Json j;
    j["speeds"] = Json::array({Json{{"e", {1, 0}}, {"c", 1}}, Json{{"e", {0, 1}}, {"c", 1}},
                               Json{{"e", {"3/5", "4/5"}}, {"c", 2}}});
    j["support_at_diag"] = support.str();
    j["supporting_hyperplane"] = supporting;
    j["corner_vertex"] = Json::array({1.0, 1.0});
    j["corner_interior_angle"] = angle;
    sink.write_json("corner.json", j);
    sink.write("polygon.csv", polygon_csv(dshape));
    sink.write("polygon.svg", polygon_svg({dshape}, {"steelblue"}));
    sink.finish();

    std::cout << "support at (3/5,4/5): " << support.str() << " vs speed 2 -> "
              << (supporting ? "supporting" : "NOT supporting") << ", corner angle "
              << format_double(angle) << " rad\n";
    if (supporting)
        throw NumericalDiagnostic("corner demo: hyperplane unexpectedly supporting");
    return 0;
}

int cmd_certify(const std::string& config_path, const std::string& out_dir,
                const std::string& lemma) {
    OutputSink sink(out_dir, "certify");
    LabConfig cfg = load_for(sink, config_path);
    StateLattice lattice = enumerate_for(cfg);
    FrontContext ctx{cfg.problem, cfg.grid, cfg.run};

    if (lemma == "perturbation") {
        CellOperator op(cfg.problem, cfg.grid.points_per_period);
        std::vector<double> t_grid = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
        Json all = Json::array();
        bool ok = true;
        for (int id : lattice.stable_ids) {
            PerturbationReport rep =
                perturbation_residual(op, lattice.state(id), t_grid, 1e-6);
            Json j = residual_json(rep);
            j["state_id"] = id;
            all.push_back(std::move(j));
            ok = ok && rep.passed;
        }
        sink.write_json("perturbation.json", all);
        sink.finish();
        if (!ok) throw NumericalDiagnostic("perturbation certificate failed");
        return 0;
    }
    if (lemma == "glued") {
        Terrace terr = build_terrace(ctx, lattice, {1, 0});
        GluedOptions opt;
        GluedReport rep = glued_supersolution_residual(ctx, terr, lattice, opt);
        sink.write_json("glued.json", glued_json(rep));
        sink.finish();
        if (!rep.passed) throw NumericalDiagnostic("glued supersolution certificate failed");
        return 0;
    }
    throw ConfigError("--lemma must be 'perturbation' or 'glued'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for periodic multistable reaction-diffusion fronts"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config, out_dir, dir_text = "1 0", dirs_text = "1 0;0 1;-1 0;0 -1";
    std::string field_path, fg_text, times_text, lemma = "perturbation";
    int upper = -1, lower = -1, state_id = -1, jobs = 1;
    double r0 = 0.0, eps = 0.1;
    bool observe = false;

    auto* states = app.add_subcommand("states", "enumerate and classify steady states");
    states->add_option("--config", config)->required();
    states->add_option("--out", out_dir);

    auto* front = app.add_subcommand("front", "measure one pulsating front");
    front->add_option("--config", config)->required();
    front->add_option("--dir", dir_text);
    front->add_option("--upper", upper);
    front->add_option("--lower", lower);
    front->add_option("--out", out_dir);

    auto* terrace = app.add_subcommand("terrace", "build the propagating terrace");
    terrace->add_option("--config", config)->required();
    terrace->add_option("--dir", dir_text);
    terrace->add_flag("--observe", observe, "also observe from a Cauchy run and compare");
    terrace->add_option("--out", out_dir);

    auto* wulff = app.add_subcommand("wulff", "Wulff shape of a speed field");
    wulff->add_option("--config", config);
    wulff->add_option("--field", field_path, "speed field CSV (angle_degrees,speed,se)");
    wulff->add_option("--state", state_id);
    wulff->add_option("--dirs", dirs_text, "semicolon-separated integer directions");
    wulff->add_option("--fg", fg_text, "print the spreading speed in this direction");
    wulff->add_option("--jobs", jobs);
    wulff->add_option("--out", out_dir);

    auto* spread = app.add_subcommand("spread", "2D compact-datum spreading vs prediction");
    spread->add_option("--config", config)->required();
    spread->add_option("--times", times_text)->required();
    spread->add_option("--r0", r0);
    spread->add_option("--eps", eps);
    spread->add_option("--out", out_dir);

    auto* corner = app.add_subcommand("corner-demo", "exact corner-shape demonstration");
    corner->add_option("--out", out_dir);

    auto* certify = app.add_subcommand("certify", "numerical sub/supersolution certificates");
    certify->add_option("--config", config)->required();
    certify->add_option("--lemma", lemma, "perturbation | glued");
    certify->add_option("--out", out_dir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (states->parsed()) return cmd_states(config, out_dir);
        if (front->parsed()) return cmd_front(config, out_dir, dir_text, upper, lower);
        if (terrace->parsed()) return cmd_terrace(config, out_dir, dir_text, observe);
        if (wulff->parsed())
            return cmd_wulff(config, out_dir, field_path, state_id, dirs_text, fg_text, jobs);
        if (spread->parsed()) return cmd_spread(config, out_dir, times_text, r0, eps);
        if (corner->parsed()) return cmd_corner_demo(out_dir);
        if (certify->parsed()) return cmd_certify(config, out_dir, lemma);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalDiagnostic& e) {
        std::cerr << "numerical diagnostic: " << e.what() << "\n";
        return 3;
    } catch (const ResourceFailure& e) {
        std::cerr << "resource failure: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
