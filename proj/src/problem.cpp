#include "terracelab/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace terracelab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial Polynomial::from_roots(const std::vector<double>& roots, double scale) {
    std::vector<double> c{scale};
    for (double r : roots) {
        // multiply by (u - r)
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = std::move(next);
    }
    return Polynomial{std::move(c)};
}

double Polynomial::eval(double u) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * u + *it;
    return acc;
}

double Polynomial::deriv_eval(double u) const {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 1;)
        acc = acc * u + static_cast<double>(i) * coeffs_[i];
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) return Polynomial{};
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i)
        d[i - 1] = static_cast<double>(i) * coeffs_[i];
    return Polynomial{std::move(d)};
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (coeffs_.empty() || o.coeffs_.empty()) return Polynomial{};
    std::vector<double> c(coeffs_.size() + o.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        for (std::size_t j = 0; j < o.coeffs_.size(); ++j)
            c[i + j] += coeffs_[i] * o.coeffs_[j];
    return Polynomial{std::move(c)};
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    std::vector<double> c(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) c[i] += coeffs_[i];
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) c[i] += o.coeffs_[i];
    return Polynomial{std::move(c)};
}

Polynomial Polynomial::operator-() const { return scaled(-1.0); }

Polynomial Polynomial::scaled(double s) const {
    std::vector<double> c = coeffs_;
    for (double& v : c) v *= s;
    return Polynomial{std::move(c)};
}

Polynomial Polynomial::compose_affine(double a, double b) const {
    // Horner in the affine argument.
    Polynomial acc;
    Polynomial lin{{a, b}};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
        acc = acc * lin + Polynomial::constant(*it);
    return acc;
}

void Polynomial::trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

// ---------------------------------------------------------------------------
// ReactionSpec

ReactionSpec ReactionSpec::cubic(double a) {
    ReactionSpec spec;
    // u(1-u)(u-a)
    spec.base = Polynomial::from_roots({0.0, 1.0, a}, -1.0);
    spec.description = "cubic a=" + std::to_string(a);
    return spec;
}

ReactionSpec ReactionSpec::quintic(double a1, double a2, double a3) {
    ReactionSpec spec;
    // -u(u-a1)(u-a2)(u-a3)(u-1)
    spec.base = Polynomial::from_roots({0.0, a1, a2, a3, 1.0}, -1.0);
    spec.description = "quintic";
    return spec;
}

ReactionSpec ReactionSpec::from_interior_roots(const std::vector<double>& interior,
                                               double gain) {
    std::vector<double> roots{0.0};
    roots.insert(roots.end(), interior.begin(), interior.end());
    roots.push_back(1.0);
    std::sort(roots.begin(), roots.end());
    Polynomial p = Polynomial::from_roots(roots, gain);
    if (p.derivative().eval(0.0) > 0.0) p = -p;
    ReactionSpec spec;
    spec.base = std::move(p);
    spec.description = "roots";
    return spec;
}

double ReactionSpec::eval(const Point& p, double u) const {
    double v = base.eval(u);
    for (const auto& m : modulation) {
        double c = std::cos(kTwoPi * (m.wavevector[0] * p.x + m.wavevector[1] * p.y) + m.phase);
        v += m.amplitude * c * m.g.eval(u);
    }
    return v;
}

double ReactionSpec::deriv_u(const Point& p, double u) const {
    double v = base.deriv_eval(u);
    for (const auto& m : modulation) {
        double c = std::cos(kTwoPi * (m.wavevector[0] * p.x + m.wavevector[1] * p.y) + m.phase);
        v += m.amplitude * c * m.g.deriv_eval(u);
    }
    return v;
}

double ReactionSpec::lipschitz_bound(double lo, double hi) const {
    double bound = 0.0;
    const int samples = 400;
    for (int i = 0; i <= samples; ++i) {
        double u = lo + (hi - lo) * i / samples;
        double d = std::abs(base.deriv_eval(u));
        for (const auto& m : modulation) d += std::abs(m.amplitude * m.g.deriv_eval(u));
        bound = std::max(bound, d);
    }
    return bound;
}

// ---------------------------------------------------------------------------
// TrigSeries

double TrigSeries::eval(const Point& p) const {
    double v = base;
    for (const auto& m : modes)
        v += m.amplitude *
             std::cos(kTwoPi * (m.wavevector[0] * p.x + m.wavevector[1] * p.y) + m.phase);
    return v;
}

double TrigSeries::min_bound() const {
    double v = base;
    for (const auto& m : modes) v -= std::abs(m.amplitude);
    return v;
}

double TrigSeries::max_bound() const {
    double v = base;
    for (const auto& m : modes) v += std::abs(m.amplitude);
    return v;
}

// ---------------------------------------------------------------------------
// PeriodicProblem

PeriodicProblem::PeriodicProblem(int dimension, TrigSeries axx, TrigSeries ayy,
                                 ReactionSpec reaction)
    : dim_(dimension), axx_(std::move(axx)), ayy_(std::move(ayy)),
      reaction_(std::move(reaction)) {
    if (dim_ != 1 && dim_ != 2)
        throw ConfigError("dimension must be 1 or 2, got " + std::to_string(dim_));
    certify_ellipticity();
}

void PeriodicProblem::certify_ellipticity() {
    // Probe one period per axis; the series bounds make this exact for pure cosines,
    // the grid probe catches phase interplay.
    const int n = 64;
    double lo = axx_.min_bound();
    double hi = axx_.max_bound();
    if (dim_ == 2) {
        lo = std::min(lo, ayy_.min_bound());
        hi = std::max(hi, ayy_.max_bound());
    }
    double glo = hi, ghi = lo;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < (dim_ == 2 ? n : 1); ++j) {
            Point p{static_cast<double>(i) / n, static_cast<double>(j) / n};
            double axx = axx_.eval(p);
            glo = std::min(glo, axx);
            ghi = std::max(ghi, axx);
            if (dim_ == 2) {
                double ayy = ayy_.eval(p);
                glo = std::min(glo, ayy);
                ghi = std::max(ghi, ayy);
            }
        }
    }
    c1_ = std::min(lo, glo);
    c2_ = std::max(hi, ghi);
    if (c1_ <= 0.0)
        throw ConfigError("diffusion is not elliptic: min eigenvalue " + std::to_string(c1_));
}

bool PeriodicProblem::homogeneous() const {
    return axx_.modes.empty() && ayy_.modes.empty() && reaction_.modulation.empty();
}

PeriodicProblem PeriodicProblem::reflected(double pbar_const) const {
    ReactionSpec r;
    // v = pbar - u:  f_v(x,v) = -f(x, pbar - v); polynomial composition keeps it exact.
    r.base = -reaction_.base.compose_affine(pbar_const, -1.0);
    for (const auto& m : reaction_.modulation) {
        ModulationTerm t = m;
        t.g = -m.g.compose_affine(pbar_const, -1.0);
        t.amplitude = m.amplitude;
        r.modulation.push_back(std::move(t));
    }
    r.description = reaction_.description + " (state-reflected)";
    return PeriodicProblem(dim_, axx_, ayy_, std::move(r));
}

std::string PeriodicProblem::summary() const {
    std::ostringstream os;
    os << dim_ << "D, " << reaction_.description << ", C1=" << c1_ << ", C2=" << c2_;
    return os.str();
}

// ---------------------------------------------------------------------------
// dt policies

double RunSpec::measurement_dt(const PeriodicProblem& prob, double dx, double ulo,
                               double uhi) const {
    if (dt > 0.0) return dt;
    double lip = std::max(prob.reaction().lipschitz_bound(ulo, uhi), 1e-12);
    return std::min(cfl_safety * dx * dx / prob.c2(), reaction_limit / lip);
}

double RunSpec::relaxation_dt(const PeriodicProblem& prob, double ulo, double uhi) const {
    if (dt > 0.0) return dt;
    double lip = std::max(prob.reaction().lipschitz_bound(ulo, uhi), 1e-12);
    return std::min(relax_dt_cap, reaction_limit / lip);
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
    }
}

int parse_int(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
    }
}

// "BASE [+ AMP cos M1 [M2] [phase P]]*"
TrigSeries parse_trig_series(const std::string& value, int dim, const std::string& key) {
    auto toks = tokenize(value);
    if (toks.empty()) throw ConfigError("key '" + key + "': empty diffusion spec");
    TrigSeries s;
    std::size_t i = 0;
    s.base = parse_double(toks[i++], key);
    while (i < toks.size()) {
        if (toks[i] != "+") throw ConfigError("key '" + key + "': expected '+', got '" + toks[i] + "'");
        ++i;
        if (i + 1 >= toks.size() || toks[i + 1] != "cos")
            throw ConfigError("key '" + key + "': expected 'AMP cos ...'");
        TrigSeries::Mode m;
        m.amplitude = parse_double(toks[i], key);
        i += 2;
        for (int d = 0; d < dim; ++d) {
            if (i >= toks.size()) throw ConfigError("key '" + key + "': missing wavevector");
            m.wavevector[d] = parse_int(toks[i++], key);
        }
        if (i < toks.size() && toks[i] == "phase") {
            ++i;
            if (i >= toks.size()) throw ConfigError("key '" + key + "': missing phase value");
            m.phase = parse_double(toks[i++], key);
        }
        s.modes.push_back(m);
    }
    return s;
}

Polynomial parse_poly(const std::vector<std::string>& toks, std::size_t from,
                      const std::string& key) {
    std::vector<double> c;
    for (std::size_t i = from; i < toks.size(); ++i) c.push_back(parse_double(toks[i], key));
    if (c.empty()) throw ConfigError("key '" + key + "': empty polynomial");
    return Polynomial{std::move(c)};
}

ReactionSpec parse_reaction(const std::string& value) {
    auto toks = tokenize(value);
    if (toks.empty()) throw ConfigError("key 'reaction': empty value");
    const std::string& kind = toks[0];
    if (kind == "cubic") {
        if (toks.size() != 2) throw ConfigError("reaction cubic expects one knot");
        return ReactionSpec::cubic(parse_double(toks[1], "reaction"));
    }
    if (kind == "quintic") {
        if (toks.size() != 4) throw ConfigError("reaction quintic expects three knots");
        return ReactionSpec::quintic(parse_double(toks[1], "reaction"),
                                     parse_double(toks[2], "reaction"),
                                     parse_double(toks[3], "reaction"));
    }
    if (kind == "roots") {
        if (toks.size() < 3) throw ConfigError("reaction roots expects: gain r1 [r2 ...]");
        double gain = parse_double(toks[1], "reaction");
        std::vector<double> interior;
        for (std::size_t i = 2; i < toks.size(); ++i)
            interior.push_back(parse_double(toks[i], "reaction"));
        return ReactionSpec::from_interior_roots(interior, gain);
    }
    if (kind == "poly") {
        ReactionSpec spec;
        spec.base = parse_poly(toks, 1, "reaction");
        spec.description = "poly";
        return spec;
    }
    throw ConfigError("unknown reaction kind '" + kind + "'");
}

// "AMP cos M1 [M2] [phase P] | G0 G1 ..."
ModulationTerm parse_modulation(const std::string& value, int dim) {
    auto bar = value.find('|');
    if (bar == std::string::npos)
        throw ConfigError("modulation needs 'AMP cos M.. | g-poly coefficients'");
    auto head = tokenize(value.substr(0, bar));
    auto tail = tokenize(value.substr(bar + 1));
    if (head.size() < 2 || head[1] != "cos")
        throw ConfigError("modulation head must be 'AMP cos M1 [M2] [phase P]'");
    ModulationTerm m;
    m.amplitude = parse_double(head[0], "modulation");
    std::size_t i = 2;
    for (int d = 0; d < dim; ++d) {
        if (i >= head.size()) throw ConfigError("modulation: missing wavevector component");
        m.wavevector[d] = parse_int(head[i++], "modulation");
    }
    if (i < head.size() && head[i] == "phase") {
        ++i;
        if (i >= head.size()) throw ConfigError("modulation: missing phase value");
        m.phase = parse_double(head[i++], "modulation");
    }
    if (i != head.size()) throw ConfigError("modulation: unexpected token '" + head[i] + "'");
    std::vector<double> c;
    for (const auto& t : tail) c.push_back(parse_double(t, "modulation"));
    if (c.empty()) throw ConfigError("modulation: empty g polynomial");
    m.g = Polynomial{std::move(c)};
    return m;
}

struct RawConfig {
    // section -> list of (key, value), preserving duplicates for 'modulation'
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
};

RawConfig parse_sections(const std::string& text) {
    RawConfig raw;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
            section = line.substr(1, line.size() - 2);
            if (section != "problem" && section != "grid" && section != "run")
                throw ConfigError("unknown section [" + section + "]");
            raw.sections[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            auto a = s.find_first_not_of(" \t");
            auto b = s.find_last_not_of(" \t");
            s = (a == std::string::npos) ? std::string{} : s.substr(a, b - a + 1);
        };
        trim(key);
        trim(val);
        raw.sections[section].emplace_back(key, val);
    }
    return raw;
}

}  // namespace

LabConfig load_config_text(const std::string& text) {
    RawConfig raw = parse_sections(text);
    if (!raw.sections.count("problem")) throw ConfigError("missing [problem] section");

    int dim = 1;
    std::string diff_xx = "1.0", diff_yy = "1.0", reaction_value;
    std::vector<std::string> modulations;
    for (const auto& [key, val] : raw.sections["problem"]) {
        if (key == "dimension") dim = parse_int(val, key);
        else if (key == "diffusion_xx") diff_xx = val;
        else if (key == "diffusion_yy") diff_yy = val;
        else if (key == "reaction") reaction_value = val;
        else if (key == "modulation") modulations.push_back(val);
        else throw ConfigError("unknown key '" + key + "' in [problem]");
    }
    if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
    if (reaction_value.empty()) throw ConfigError("missing 'reaction' in [problem]");

    ReactionSpec reaction = parse_reaction(reaction_value);
    for (const auto& m : modulations) reaction.modulation.push_back(parse_modulation(m, dim));

    TrigSeries axx = parse_trig_series(diff_xx, dim, "diffusion_xx");
    TrigSeries ayy = parse_trig_series(diff_yy, dim, "diffusion_yy");

    GridSpec grid;
    if (raw.sections.count("grid")) {
        for (const auto& [key, val] : raw.sections["grid"]) {
            if (key == "points_per_period") grid.points_per_period = parse_int(val, key);
            else if (key == "extent_periods") grid.extent_periods = parse_int(val, key);
            else if (key == "extent_periods_y") grid.extent_periods_y = parse_int(val, key);
            else if (key == "interface_fraction") grid.interface_fraction = parse_double(val, key);
            else throw ConfigError("unknown key '" + key + "' in [grid]");
        }
    }
    if (grid.points_per_period < 2) throw ConfigError("points_per_period must be >= 2");
    if (grid.extent_periods < 1) throw ConfigError("extent_periods must be >= 1");

    RunSpec run;
    if (raw.sections.count("run")) {
        for (const auto& [key, val] : raw.sections["run"]) {
            if (key == "horizon") run.horizon = parse_double(val, key);
            else if (key == "dt") run.dt = parse_double(val, key);
            else if (key == "cfl_safety") run.cfl_safety = parse_double(val, key);
            else if (key == "reaction_limit") run.reaction_limit = parse_double(val, key);
            else if (key == "relax_dt_cap") run.relax_dt_cap = parse_double(val, key);
            else if (key == "steady_tol") run.steady_tol = parse_double(val, key);
            else if (key == "tol_marginal") run.tol_marginal = parse_double(val, key);
            else if (key == "dedup_tol") run.dedup_tol = parse_double(val, key);
            else if (key == "zero_speed_tol") run.zero_speed_tol = parse_double(val, key);
            else if (key == "boundary_margin") run.boundary_margin = parse_double(val, key);
            else if (key == "speed_se_max") run.speed_se_max = parse_double(val, key);
            else if (key == "monotone_tol") run.monotone_tol = parse_double(val, key);
            else if (key == "prof_tol") run.prof_tol = parse_double(val, key);
            else if (key == "min_travel_periods") run.min_travel_periods = parse_double(val, key);
            else if (key == "extension_cap") run.extension_cap = parse_double(val, key);
            else if (key == "seed") run.seed = static_cast<std::uint64_t>(parse_int(val, key));
            else throw ConfigError("unknown key '" + key + "' in [run]");
        }
    }

    PeriodicProblem problem(dim, std::move(axx), std::move(ayy), std::move(reaction));
    return LabConfig{std::move(problem), grid, run, text};
}

LabConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return load_config_text(os.str());
}

}  // namespace terracelab
