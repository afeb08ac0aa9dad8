#include "terracelab/wulff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace terracelab {

// ---------------------------------------------------------------------------
// Rat

namespace {

long long checked_mul(long long a, long long b) {
    __int128 r = static_cast<__int128>(a) * b;
    if (r > std::numeric_limits<long long>::max() || r < std::numeric_limits<long long>::min())
        throw std::overflow_error("rational overflow");
    return static_cast<long long>(r);
}

long long checked_add(long long a, long long b) {
    __int128 r = static_cast<__int128>(a) + b;
    if (r > std::numeric_limits<long long>::max() || r < std::numeric_limits<long long>::min())
        throw std::overflow_error("rational overflow");
    return static_cast<long long>(r);
}

}  // namespace

Rat::Rat(long long n, long long d) : num_(n), den_(d) {
    if (d == 0) throw std::invalid_argument("rational with zero denominator");
    normalize();
}

void Rat::normalize() {
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
    if (num_ == 0) den_ = 1;
}

Rat Rat::operator+(const Rat& o) const {
    return Rat(checked_add(checked_mul(num_, o.den_), checked_mul(o.num_, den_)),
               checked_mul(den_, o.den_));
}

Rat Rat::operator-(const Rat& o) const { return *this + (-o); }

Rat Rat::operator*(const Rat& o) const {
    return Rat(checked_mul(num_, o.num_), checked_mul(den_, o.den_));
}

Rat Rat::operator/(const Rat& o) const {
    if (o.num_ == 0) throw std::invalid_argument("rational division by zero");
    return Rat(checked_mul(num_, o.den_), checked_mul(den_, o.num_));
}

bool Rat::operator<(const Rat& o) const {
    return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
}

std::string Rat::str() const {
    std::ostringstream os;
    os << num_;
    if (den_ != 1) os << "/" << den_;
    return os.str();
}

// ---------------------------------------------------------------------------
// generic polygon machinery, shared by the double and exact paths

namespace {

template <typename T>
struct V2 {
    T x, y;
};

template <typename T>
T cross(const V2<T>& o, const V2<T>& a, const V2<T>& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Sutherland-Hodgman clip of a convex CCW polygon by a*x + b*y <= c.
template <typename T>
std::vector<V2<T>> clip_halfplane(const std::vector<V2<T>>& poly, const T& a, const T& b,
                                  const T& c) {
    std::vector<V2<T>> out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    for (std::size_t i = 0; i < n; ++i) {
        const V2<T>& p = poly[i];
        const V2<T>& q = poly[(i + 1) % n];
        T dp = a * p.x + b * p.y - c;
        T dq = a * q.x + b * q.y - c;
        bool pin = !(T(0) < dp);
        bool qin = !(T(0) < dq);
        if (pin) out.push_back(p);
        if (pin != qin) {
            T t = dp / (dp - dq);
            out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
        }
    }
    return out;
}

// Drop duplicate and collinear vertices; keeps CCW order. `near_zero` decides
// degeneracy (exact zero for rationals, a tolerance for doubles).
template <typename T, typename NearZero>
std::vector<V2<T>> clean_polygon(std::vector<V2<T>> poly, NearZero near_zero) {
    // dedupe
    std::vector<V2<T>> dedup;
    for (const auto& p : poly) {
        if (!dedup.empty() && near_zero(p.x - dedup.back().x) && near_zero(p.y - dedup.back().y))
            continue;
        dedup.push_back(p);
    }
    while (dedup.size() > 1 && near_zero(dedup.front().x - dedup.back().x) &&
           near_zero(dedup.front().y - dedup.back().y))
        dedup.pop_back();
    if (dedup.size() < 3) return dedup;
    // collinear removal
    std::vector<V2<T>> out;
    const std::size_t n = dedup.size();
    for (std::size_t i = 0; i < n; ++i) {
        const V2<T>& prev = dedup[(i + n - 1) % n];
        const V2<T>& cur = dedup[i];
        const V2<T>& next = dedup[(i + 1) % n];
        if (!near_zero(cross(prev, cur, next))) out.push_back(cur);
    }
    return out;
}

template <typename T>
std::vector<V2<T>> box_polygon(const T& r) {
    return {{-r, -r}, {r, -r}, {r, r}, {-r, r}};
}

// Andrew monotone chain, strict turns only.
std::vector<V2<double>> hull_points(std::vector<V2<double>> pts) {
    std::sort(pts.begin(), pts.end(), [](const V2<double>& a, const V2<double>& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const V2<double>& a, const V2<double>& b) {
                              return std::abs(a.x - b.x) < 1e-14 &&
                                     std::abs(a.y - b.y) < 1e-14;
                          }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<V2<double>> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 1e-14) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 1e-14) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

std::vector<V2<double>> to_v2(const std::vector<std::array<double, 2>>& v) {
    std::vector<V2<double>> out;
    out.reserve(v.size());
    for (const auto& p : v) out.push_back({p[0], p[1]});
    return out;
}

std::vector<std::array<double, 2>> from_v2(const std::vector<V2<double>>& v) {
    std::vector<std::array<double, 2>> out;
    out.reserve(v.size());
    for (const auto& p : v) out.push_back({p.x, p.y});
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// SpeedField / ShapePolygon

void SpeedField::add(double ex, double ey, double speed, double se) {
    double n = std::sqrt(ex * ex + ey * ey);
    if (n == 0.0) throw ConfigError("speed field: zero direction");
    samples.push_back({ex / n, ey / n, speed, se});
}

void SpeedField::add_angle(double radians, double speed, double se) {
    samples.push_back({std::cos(radians), std::sin(radians), speed, se});
}

double ShapePolygon::support(double ex, double ey) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices) best = std::max(best, v[0] * ex + v[1] * ey);
    return best;
}

double ShapePolygon::area() const {
    double acc = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = vertices[i];
        const auto& q = vertices[(i + 1) % n];
        acc += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * std::abs(acc);
}

bool ShapePolygon::contains(double x, double y, double tol) const {
    if (degenerate_origin) return std::abs(x) <= tol && std::abs(y) <= tol;
    const std::size_t n = vertices.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = vertices[i];
        const auto& q = vertices[(i + 1) % n];
        double cr = (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]);
        if (cr < -tol) return false;
    }
    return true;
}

ShapePolygon make_singleton_origin() {
    ShapePolygon s;
    s.degenerate_origin = true;
    s.contains_origin = true;
    s.vertices = {{0.0, 0.0}};
    return s;
}

ShapePolygon wulff_shape(const SpeedField& field, double box_radius) {
    if (field.samples.size() < 3)
        throw ConfigError("wulff_shape: at least 3 directions required");
    double cmax = 1.0;
    for (const auto& s : field.samples) cmax = std::max(cmax, std::abs(s.speed));
    const double box = box_radius > 0.0 ? box_radius : 8.0 * cmax;

    std::vector<V2<double>> poly = box_polygon(box);
    for (const auto& s : field.samples) {
        poly = clip_halfplane(poly, s.ex, s.ey, s.speed);
        if (poly.empty()) break;
    }
    poly = clean_polygon(std::move(poly), [](double v) { return std::abs(v) < 1e-12; });

    ShapePolygon shape;
    if (poly.size() < 3) {
        shape.empty_shape = true;
        return shape;
    }
    shape.vertices = from_v2(poly);
    for (const auto& v : shape.vertices)
        if (std::max(std::abs(v[0]), std::abs(v[1])) > box * (1.0 - 1e-9))
            shape.truncated = true;
    shape.contains_origin = shape.contains(0.0, 0.0, 1e-12);
    return shape;
}

FreidlinGartnerResult freidlin_gartner(const SpeedField& field, double ex, double ey) {
    double n = std::sqrt(ex * ex + ey * ey);
    ex /= n;
    ey /= n;
    FreidlinGartnerResult out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < field.samples.size(); ++i) {
        const auto& s = field.samples[i];
        double dot = s.ex * ex + s.ey * ey;
        if (dot <= 0.0) continue;
        double v = s.speed / dot;
        if (v < best) {
            best = v;
            out.argmin = i;
            out.defined = true;
        }
    }
    out.value = best;
    if (!out.defined)
        throw NumericalDiagnostic("freidlin_gartner: no sample with e'.e > 0");
    return out;
}

bool supporting_hyperplane_test(const ShapePolygon& shape, double ex, double ey, double c_e,
                                double tol) {
    if (shape.empty_shape) throw ConfigError("supporting_hyperplane_test: empty shape");
    double n = std::sqrt(ex * ex + ey * ey);
    return shape.support(ex / n, ey / n) >= c_e - tol;
}

UpsilonResult upsilon(const SpeedField& field, double zero_speed_tol, double box_radius) {
    UpsilonResult out;
    double cmin = std::numeric_limits<double>::infinity();
    for (const auto& s : field.samples) cmin = std::min(cmin, s.speed);
    if (cmin > zero_speed_tol) {
        out.positive_branch = true;
        out.shape = wulff_shape(field, box_radius);
        return out;
    }
    out.shape = make_singleton_origin();
    out.indeterminate = std::abs(cmin) <= zero_speed_tol;
    return out;
}

// ---------------------------------------------------------------------------
// hulls, Minkowski sums, recursion

ShapePolygon convex_hull_points(const std::vector<std::array<double, 2>>& pts) {
    auto h = hull_points(to_v2(pts));
    ShapePolygon shape;
    if (h.size() < 3) {
        shape.empty_shape = h.empty();
        shape.vertices = from_v2(h);
        return shape;
    }
    shape.vertices = from_v2(h);
    shape.contains_origin = shape.contains(0.0, 0.0, 1e-12);
    return shape;
}

namespace {

// rotate a CCW polygon so the lexicographically smallest vertex comes first
std::vector<V2<double>> canonical_start(std::vector<V2<double>> p) {
    auto it = std::min_element(p.begin(), p.end(), [](const V2<double>& a, const V2<double>& b) {
        return a.y < b.y || (a.y == b.y && a.x < b.x);
    });
    std::rotate(p.begin(), it, p.end());
    return p;
}

}  // namespace

ShapePolygon minkowski_sum(const ShapePolygon& a, const ShapePolygon& b) {
    if (a.degenerate_origin) return b;
    if (b.degenerate_origin) return a;
    auto pa = canonical_start(to_v2(a.vertices));
    auto pb = canonical_start(to_v2(b.vertices));
    const std::size_t n = pa.size(), m = pb.size();
    std::vector<V2<double>> out;
    std::size_t i = 0, j = 0;
    while (i < n || j < m) {
        out.push_back({pa[i % n].x + pb[j % m].x, pa[i % n].y + pb[j % m].y});
        V2<double> ea{pa[(i + 1) % n].x - pa[i % n].x, pa[(i + 1) % n].y - pa[i % n].y};
        V2<double> eb{pb[(j + 1) % m].x - pb[j % m].x, pb[(j + 1) % m].y - pb[j % m].y};
        double cr = ea.x * eb.y - ea.y * eb.x;
        if (i >= n) ++j;
        else if (j >= m) ++i;
        else if (cr > 1e-14) ++i;
        else if (cr < -1e-14) ++j;
        else {
            ++i;
            ++j;
        }
    }
    auto cleaned = clean_polygon(std::move(out), [](double v) { return std::abs(v) < 1e-12; });
    ShapePolygon s;
    s.vertices = from_v2(cleaned);
    s.contains_origin = s.contains(0.0, 0.0, 1e-12);
    return s;
}

ShapePolygon scale_polygon(const ShapePolygon& p, double factor) {
    if (p.degenerate_origin) return p;
    ShapePolygon out = p;
    for (auto& v : out.vertices) {
        v[0] *= factor;
        v[1] *= factor;
    }
    return out;
}

bool polygons_equal(const ShapePolygon& a, const ShapePolygon& b, double tol) {
    if (a.degenerate_origin != b.degenerate_origin) return false;
    if (a.vertices.size() != b.vertices.size()) return false;
    const std::size_t n = a.vertices.size();
    for (std::size_t off = 0; off < n; ++off) {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            const auto& va = a.vertices[i];
            const auto& vb = b.vertices[(i + off) % n];
            if (std::abs(va[0] - vb[0]) > tol || std::abs(va[1] - vb[1]) > tol) ok = false;
        }
        if (ok) return true;
    }
    return false;
}

double polygon_hausdorff(const ShapePolygon& a, const ShapePolygon& b) {
    auto boundary_samples = [](const ShapePolygon& p) {
        std::vector<std::array<double, 2>> pts;
        const std::size_t n = p.vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& u = p.vertices[i];
            const auto& v = p.vertices[(i + 1) % n];
            for (int k = 0; k < 16; ++k) {
                double t = k / 16.0;
                pts.push_back({u[0] + t * (v[0] - u[0]), u[1] + t * (v[1] - u[1])});
            }
        }
        return pts;
    };
    auto one_sided = [](const std::vector<std::array<double, 2>>& from,
                        const std::vector<std::array<double, 2>>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                double dx = p[0] - q[0], dy = p[1] - q[1];
                best = std::min(best, dx * dx + dy * dy);
            }
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    auto pa = boundary_samples(a), pb = boundary_samples(b);
    return std::max(one_sided(pa, pb), one_sided(pb, pa));
}

double vertex_interior_angle(const ShapePolygon& p, std::size_t i) {
    const std::size_t n = p.vertices.size();
    const auto& prev = p.vertices[(i + n - 1) % n];
    const auto& cur = p.vertices[i];
    const auto& next = p.vertices[(i + 1) % n];
    double ax = prev[0] - cur[0], ay = prev[1] - cur[1];
    double bx = next[0] - cur[0], by = next[1] - cur[1];
    double na = std::hypot(ax, ay), nb = std::hypot(bx, by);
    double cosang = std::clamp((ax * bx + ay * by) / (na * nb), -1.0, 1.0);
    return std::acos(cosang);
}

RecursionResult spreading_shape_recursion(const std::vector<ShapePolygon>& upsilons,
                                          double geom_tol) {
    RecursionResult out;
    if (upsilons.empty()) return out;

    // route 1: hulls of cumulative unions
    std::vector<std::array<double, 2>> cloud;
    std::vector<ShapePolygon> hull_route;
    for (const auto& u : upsilons) {
        if (u.degenerate_origin) cloud.push_back({0.0, 0.0});
        else
            cloud.insert(cloud.end(), u.vertices.begin(), u.vertices.end());
        hull_route.push_back(convex_hull_points(cloud));
    }

    // route 2: W_k = union over kappa of (kappa W_{k-1} + (1-kappa) Upsilon_k),
    // evaluated through Minkowski sums of scaled polygons on a kappa grid
    std::vector<ShapePolygon> mink_route;
    mink_route.push_back(upsilons[0]);
    for (std::size_t k = 1; k < upsilons.size(); ++k) {
        std::vector<std::array<double, 2>> pts;
        for (double kappa : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            ShapePolygon sa = scale_polygon(mink_route.back(), kappa);
            ShapePolygon sb = scale_polygon(upsilons[k], 1.0 - kappa);
            ShapePolygon sum;
            if (kappa == 0.0) sum = sb;
            else if (kappa == 1.0) sum = sa;
            else if (sa.degenerate_origin) sum = sb;
            else if (sb.degenerate_origin) sum = sa;
            else sum = minkowski_sum(sa, sb);
            if (sum.degenerate_origin) pts.push_back({0.0, 0.0});
            else pts.insert(pts.end(), sum.vertices.begin(), sum.vertices.end());
        }
        mink_route.push_back(convex_hull_points(pts));
    }

    for (std::size_t k = 0; k < upsilons.size(); ++k) {
        const ShapePolygon& h = hull_route[k];
        const ShapePolygon& m = mink_route[k];
        bool degenerate = h.vertices.size() < 3 || m.vertices.size() < 3;
        double gap = degenerate ? (h.vertices.size() == m.vertices.size() ? 0.0 : 1.0)
                                : polygon_hausdorff(h, m);
        out.max_route_gap = std::max(out.max_route_gap, gap);
        if (!degenerate && !polygons_equal(h, m, std::max(geom_tol, 1e-9) * 100.0) &&
            gap > geom_tol * 100.0)
            throw NumericalDiagnostic(
                "spreading_shape_recursion: hull and Minkowski routes disagree by " +
                std::to_string(gap));
    }
    out.shapes = std::move(hull_route);
    return out;
}

// ---------------------------------------------------------------------------
// exact path

ExactShape wulff_shape_exact(const std::vector<ExactSample>& samples, Rat box_radius) {
    for (const auto& s : samples) {
        Rat n2 = s.ex * s.ex + s.ey * s.ey;
        if (!(n2 == Rat(1)))
            throw ConfigError("wulff_shape_exact: direction (" + s.ex.str() + "," +
                              s.ey.str() + ") is not an exact unit vector");
    }
    std::vector<V2<Rat>> poly = box_polygon(box_radius);
    for (const auto& s : samples) {
        poly = clip_halfplane(poly, s.ex, s.ey, s.c);
        if (poly.empty()) break;
    }
    poly = clean_polygon(std::move(poly), [](const Rat& v) { return v == Rat(0); });

    ExactShape shape;
    if (poly.size() < 3) {
        shape.empty_shape = true;
        return shape;
    }
    for (const auto& p : poly) {
        shape.vertices.push_back({p.x, p.y});
        if (p.x == box_radius || p.x == -box_radius || p.y == box_radius ||
            p.y == -box_radius)
            shape.truncated = true;
    }
    return shape;
}

Rat support_exact(const ExactShape& shape, const Rat& ex, const Rat& ey) {
    if (shape.vertices.empty()) throw ConfigError("support_exact: empty shape");
    Rat best = shape.vertices[0][0] * ex + shape.vertices[0][1] * ey;
    for (const auto& v : shape.vertices) {
        Rat d = v[0] * ex + v[1] * ey;
        if (best < d) best = d;
    }
    return best;
}

bool supporting_hyperplane_test_exact(const ExactShape& shape, const Rat& ex, const Rat& ey,
                                      const Rat& c) {
    return !(support_exact(shape, ex, ey) < c);
}

Rat freidlin_gartner_exact(const std::vector<ExactSample>& samples, const Rat& ex,
                           const Rat& ey) {
    bool defined = false;
    Rat best;
    for (const auto& s : samples) {
        Rat dot = s.ex * ex + s.ey * ey;
        if (!(Rat(0) < dot)) continue;
        Rat v = s.c / dot;
        if (!defined || v < best) {
            best = v;
            defined = true;
        }
    }
    if (!defined) throw NumericalDiagnostic("freidlin_gartner_exact: empty hemisphere");
    return best;
}

ExactShape scale_exact(const ExactShape& shape, const Rat& factor) {
    ExactShape out = shape;
    for (auto& v : out.vertices) {
        v[0] = v[0] * factor;
        v[1] = v[1] * factor;
    }
    return out;
}

ShapePolygon to_double(const ExactShape& shape) {
    ShapePolygon out;
    out.empty_shape = shape.empty_shape;
    out.truncated = shape.truncated;
    for (const auto& v : shape.vertices)
        out.vertices.push_back({v[0].to_double(), v[1].to_double()});
    if (!out.vertices.empty()) out.contains_origin = out.contains(0.0, 0.0, 1e-12);
    return out;
}

// ---------------------------------------------------------------------------
// terrace-derived fields

SpeedEstimate front_speed_through(const Terrace& terr, const StateLattice& lattice, int p_id,
                                  double tol) {
    const CellField& p = lattice.state(p_id).values;
    for (const auto& f : terr.fronts) {
        const CellField& up = lattice.state(f.upper_id).values;
        const CellField& lo = lattice.state(f.lower_id).values;
        auto lo_ord = compare_fields(lo, p, tol);
        bool lower_ok = lo_ord == Ordering::Below || lo_ord == Ordering::Equal;
        bool upper_exceeds = false;
        for (std::size_t k = 0; k < up.values.size(); ++k)
            if (up.values[k] - p.values[k] > tol) upper_exceeds = true;
        if (lower_ok && upper_exceeds) return f.speed;
    }
    throw NumericalDiagnostic("front_speed_through: no front crosses the level of state " +
                              std::to_string(p_id));
}

SpeedField c_of_p(const std::vector<Terrace>& terraces, const StateLattice& lattice, int p_id,
                  double tol) {
    SpeedField field;
    field.provenance = Provenance::Measured;
    for (const auto& t : terraces) {
        SpeedEstimate est = front_speed_through(t, lattice, p_id, tol);
        field.add(t.e.ex(), t.e.ey(), est.value, est.se);
    }
    return field;
}

SpeedConsistencyReport speed_consistency_check(
    const StateLattice& lattice, const std::vector<Terrace>& full_terraces,
    const std::vector<std::vector<const Terrace*>>& sub_terraces, double tol) {
    SpeedConsistencyReport rep;
    std::vector<int> chain = lattice.stable_descending();  // p_0 = pbar ... p_M = 0
    const std::size_t M = chain.size() - 1;

    for (std::size_t d = 0; d < full_terraces.size(); ++d) {
        const Terrace& full = full_terraces[d];
        std::ostringstream dir_tag;
        dir_tag << "direction " << full.e.str();

        // c[p_k] for k = 1..M
        std::vector<SpeedEstimate> cp(M + 1);
        for (std::size_t k = 1; k <= M; ++k)
            cp[k] = front_speed_through(full, lattice, chain[k], tol);

        // (i) monotone in k
        for (std::size_t k = 1; k < M; ++k) {
            double slack = 3.0 * combined_se(cp[k], cp[k + 1]) + 1e-9;
            std::ostringstream os;
            os << dir_tag.str() << ": c[p_" << k << "]=" << cp[k].value << " <= c[p_"
               << k + 1 << "]=" << cp[k + 1].value;
            rep.checks.push_back(os.str());
            if (cp[k].value > cp[k + 1].value + slack) {
                rep.ok = false;
                rep.violations.push_back(os.str() + " violated");
            }
        }

        // (ii)/(iii)/(iv) against sub-terraces from p_k, k = 1..M-1
        for (std::size_t k = 1; k < M; ++k) {
            const Terrace* sub =
                d < sub_terraces.size() && k - 1 < sub_terraces[d].size()
                    ? sub_terraces[d][k - 1]
                    : nullptr;
            if (!sub || sub->fronts.empty()) continue;
            SpeedEstimate c1pk = sub->fronts.front().speed;
            bool is_platform =
                std::find(full.platform_ids.begin(), full.platform_ids.end(), chain[k]) !=
                full.platform_ids.end();
            if (is_platform) {
                double gap = std::abs(cp[k + 1].value - c1pk.value);
                double slack = 3.0 * combined_se(cp[k + 1], c1pk) + 1e-9;
                std::ostringstream os;
                os << dir_tag.str() << ": platform p_" << k << ": c[p_" << k + 1
                   << "]=" << cp[k + 1].value << " vs c_1^{p_" << k << "}=" << c1pk.value;
                rep.checks.push_back(os.str());
                if (gap > slack) {
                    rep.ok = false;
                    rep.violations.push_back(os.str() + " differ by " + std::to_string(gap));
                }
            } else {
                double gap = std::abs(cp[k + 1].value - cp[k].value);
                double slack = 3.0 * combined_se(cp[k + 1], cp[k]) + 1e-9;
                std::ostringstream os;
                os << dir_tag.str() << ": skipped p_" << k << ": c[p_" << k + 1
                   << "]=" << cp[k + 1].value << " vs c[p_" << k << "]=" << cp[k].value;
                rep.checks.push_back(os.str());
                if (gap > slack) {
                    rep.ok = false;
                    rep.violations.push_back(os.str() + " differ by " + std::to_string(gap));
                }
            }
            // c_1^{p_k} <= c[p_k]
            double slack = 3.0 * combined_se(cp[k], c1pk) + 1e-9;
            std::ostringstream os;
            os << dir_tag.str() << ": c_1^{p_" << k << "}=" << c1pk.value << " <= c[p_" << k
               << "]=" << cp[k].value;
            rep.checks.push_back(os.str());
            if (c1pk.value > cp[k].value + slack) {
                rep.ok = false;
                rep.violations.push_back(os.str() + " violated");
            }
        }
    }
    return rep;
}

}  // namespace terracelab
