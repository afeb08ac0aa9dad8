#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "terracelab/wulff.hpp"

using namespace terracelab;

namespace {

constexpr double kPi = std::numbers::pi;

SpeedField constant_field(double c, int directions) {
    SpeedField f;
    for (int a = 0; a < directions; ++a)
        f.add_angle(2.0 * kPi * a / directions, c);
    return f;
}

// Exact unit rational directions from Pythagorean triples.
std::vector<std::pair<Rat, Rat>> pythagorean_directions() {
    std::vector<std::pair<Rat, Rat>> dirs;
    const int pairs[4][2] = {{2, 1}, {3, 1}, {3, 2}, {4, 1}};
    for (const auto& mn : pairs) {
        long long m = mn[0], n = mn[1];
        long long a = m * m - n * n, b = 2 * m * n, h = m * m + n * n;
        dirs.push_back({Rat(a, h), Rat(b, h)});
        dirs.push_back({Rat(-a, h), Rat(b, h)});
        dirs.push_back({Rat(b, h), Rat(-a, h)});
        dirs.push_back({Rat(-b, h), Rat(-a, h)});
    }
    dirs.push_back({Rat(1), Rat(0)});
    dirs.push_back({Rat(0), Rat(1)});
    dirs.push_back({Rat(-1), Rat(0)});
    dirs.push_back({Rat(0), Rat(-1)});
    return dirs;
}

}  // namespace

TEST_CASE("rational arithmetic basics") {
    Rat a(3, 5), b(4, 5);
    CHECK(a * a + b * b == Rat(1));
    CHECK((Rat(1) / a).num() == 5);
    CHECK(Rat(7, 5) < Rat(2));
    CHECK(Rat(-2, -4) == Rat(1, 2));
    CHECK((Rat(1, 3) + Rat(1, 6)) == Rat(1, 2));
}

TEST_CASE("constant field gives a disk-like polygon") {
    const int m = 360;
    SpeedField f = constant_field(2.0, m);
    ShapePolygon w = wulff_shape(f);
    REQUIRE_FALSE(w.empty_shape);
    CHECK_FALSE(w.truncated);
    CHECK(w.contains_origin);
    // circumscribed polygon of the disk of radius 2: support equals 2 in the
    // sampled directions, and at most 2/cos(pi/m) anywhere
    double worst = 0.0;
    for (const auto& v : w.vertices) worst = std::max(worst, std::hypot(v[0], v[1]));
    CHECK(worst <= 2.0 / std::cos(kPi / m) + 1e-9);
    CHECK(w.support(1.0, 0.0) == doctest::Approx(2.0).epsilon(1e-12));
    // Hausdorff gap to the disk: circumscribed-polygon geometry
    CHECK(worst - 2.0 <= 2.0 * (1.0 - std::cos(kPi / m)) / std::cos(kPi / m) + 1e-12);
}

TEST_CASE("two active half-planes give the corner at (1,1)") {
    SpeedField f;
    f.add(1, 0, 1.0);
    f.add(0, 1, 1.0);
    f.add(-1, 0, 50.0);
    f.add(0, -1, 50.0);
    ShapePolygon w = wulff_shape(f);
    bool corner = false;
    for (const auto& v : w.vertices)
        if (std::abs(v[0] - 1.0) < 1e-12 && std::abs(v[1] - 1.0) < 1e-12) corner = true;
    CHECK(corner);
}

TEST_CASE("the three-direction counter-example field in exact arithmetic") {
    std::vector<ExactSample> samples = {
        {Rat(1), Rat(0), Rat(1)},
        {Rat(0), Rat(1), Rat(1)},
        {Rat(3, 5), Rat(4, 5), Rat(2)},
    };
    ExactShape shape = wulff_shape_exact(samples, Rat(10));
    REQUIRE_FALSE(shape.empty_shape);
    CHECK(shape.truncated);  // three half-planes cannot close a polygon

    // support value at the diagonal is exactly 7/5, strictly below the speed 2
    Rat support = support_exact(shape, Rat(3, 5), Rat(4, 5));
    CHECK(support == Rat(7, 5));
    CHECK_FALSE(supporting_hyperplane_test_exact(shape, Rat(3, 5), Rat(4, 5), Rat(2)));
    // the axis constraints do support it
    CHECK(supporting_hyperplane_test_exact(shape, Rat(1), Rat(0), Rat(1)));
    CHECK(supporting_hyperplane_test_exact(shape, Rat(0), Rat(1), Rat(1)));

    // vertex (1,1) exists and is an honest 90-degree corner
    ShapePolygon d = to_double(shape);
    bool found = false;
    for (std::size_t i = 0; i < d.vertices.size(); ++i) {
        if (std::abs(d.vertices[i][0] - 1.0) < 1e-14 &&
            std::abs(d.vertices[i][1] - 1.0) < 1e-14) {
            found = true;
            CHECK(vertex_interior_angle(d, i) == doctest::Approx(kPi / 2).epsilon(1e-12));
        }
    }
    CHECK(found);

    // same polygon with the diagonal constraint removed: it is inactive
    std::vector<ExactSample> axes_only = {samples[0], samples[1]};
    ExactShape without = wulff_shape_exact(axes_only, Rat(10));
    REQUIRE(without.vertices.size() == shape.vertices.size());
    // compare supports in a few directions
    for (const auto& [ex, ey] : pythagorean_directions())
        CHECK(support_exact(shape, ex, ey) == support_exact(without, ex, ey));
}

TEST_CASE("freidlin-gartner on the counter-example field") {
    SpeedField f;
    f.add(1, 0, 1.0);
    f.add(0, 1, 1.0);
    f.add(3.0 / 5.0, 4.0 / 5.0, 2.0);
    auto fg = freidlin_gartner(f, 3.0 / 5.0, 4.0 / 5.0);
    // min(1/(3/5), 1/(4/5), 2) = 5/4
    CHECK(fg.value == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(fg.argmin == 1);

    // exact route agrees
    std::vector<ExactSample> samples = {
        {Rat(1), Rat(0), Rat(1)},
        {Rat(0), Rat(1), Rat(1)},
        {Rat(3, 5), Rat(4, 5), Rat(2)},
    };
    CHECK(freidlin_gartner_exact(samples, Rat(3, 5), Rat(4, 5)) == Rat(5, 4));
}

TEST_CASE("freidlin-gartner of a constant field is the constant") {
    const int m = 180;
    SpeedField f = constant_field(0.7, m);
    // sampled infimum reaches the constant up to the direction-grid resolution
    const double grid_slack = 0.7 * (1.0 / std::cos(kPi / m) - 1.0) + 1e-12;
    for (double ang : {0.0, 0.4, 1.3, 2.9}) {
        auto fg = freidlin_gartner(f, std::cos(ang), std::sin(ang));
        CHECK(fg.value >= 0.7 - 1e-12);
        CHECK(fg.value <= 0.7 + grid_slack);
    }
    SpeedField single;
    single.add(1, 0, 0.9);
    auto fg = freidlin_gartner(single, 1.0, 0.0);
    CHECK(fg.value == doctest::Approx(0.9).epsilon(1e-15));
    CHECK_THROWS_AS(freidlin_gartner(single, -1.0, 0.0), NumericalDiagnostic);
}

TEST_CASE("duality: the FG point lies on the Wulff boundary") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.5, 2.5);
    const int m = 360;
    SpeedField f;
    // lower semi-continuity is not testable from samples; keep the field smooth
    double a = unif(rng), b = unif(rng), ph = unif(rng);
    for (int k = 0; k < m; ++k) {
        double ang = 2.0 * kPi * k / m;
        f.add_angle(ang, 1.5 + 0.3 * a * std::cos(ang + ph) + 0.2 * b * std::cos(2 * ang));
    }
    ShapePolygon w = wulff_shape(f);
    for (int k = 0; k < m; k += 7) {
        double ang = 2.0 * kPi * k / m;
        auto fg = freidlin_gartner(f, std::cos(ang), std::sin(ang));
        double px = fg.value * std::cos(ang), py = fg.value * std::sin(ang);
        CHECK(w.contains(px, py, 1e-9));
        CHECK_FALSE(w.contains(px * (1 + 1e-7), py * (1 + 1e-7), 1e-12));
    }
}

TEST_CASE("scaling equivariance is exact in rational mode") {
    std::vector<ExactSample> samples;
    auto dirs = pythagorean_directions();
    long long s = 1;
    for (const auto& [ex, ey] : dirs) {
        samples.push_back({ex, ey, Rat(3 + (s % 5), 2)});
        ++s;
    }
    ExactShape base = wulff_shape_exact(samples, Rat(100));
    REQUIRE_FALSE(base.truncated);

    std::vector<ExactSample> scaled = samples;
    const Rat lam(7, 3);
    for (auto& smp : scaled) smp.c = smp.c * lam;
    ExactShape big = wulff_shape_exact(scaled, Rat(100));
    REQUIRE(big.vertices.size() == base.vertices.size());
    ExactShape expect = scale_exact(base, lam);
    for (std::size_t i = 0; i < big.vertices.size(); ++i) {
        bool matched = false;
        for (std::size_t j = 0; j < expect.vertices.size(); ++j)
            if (big.vertices[i][0] == expect.vertices[j][0] &&
                big.vertices[i][1] == expect.vertices[j][1])
                matched = true;
        CHECK(matched);
    }
}

TEST_CASE("pointwise larger speeds give a larger Wulff shape") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    SpeedField small, large;
    for (int k = 0; k < 90; ++k) {
        double ang = 2.0 * kPi * k / 90;
        double c = unif(rng);
        small.add_angle(ang, c);
        large.add_angle(ang, c + 0.25);
    }
    ShapePolygon ws = wulff_shape(small), wl = wulff_shape(large);
    for (const auto& v : ws.vertices) CHECK(wl.contains(v[0], v[1], 1e-9));
}

TEST_CASE("upsilon branches on positivity") {
    SpeedField pos = constant_field(1.0, 90);
    UpsilonResult up = upsilon(pos, 5e-3);
    CHECK(up.positive_branch);
    CHECK(up.shape.support(1, 0) == doctest::Approx(1.0).epsilon(1e-12));

    SpeedField bad = constant_field(1.0, 90);
    bad.samples[10].speed = -0.2;
    UpsilonResult down = upsilon(bad, 5e-3);
    CHECK_FALSE(down.positive_branch);
    CHECK(down.shape.degenerate_origin);
    CHECK_FALSE(down.indeterminate);

    SpeedField edge = constant_field(1.0, 90);
    edge.samples[3].speed = 1e-3;  // inside the zero-speed band
    UpsilonResult ind = upsilon(edge, 5e-3);
    CHECK_FALSE(ind.positive_branch);
    CHECK(ind.indeterminate);
}

TEST_CASE("hull recursion equals the Minkowski route") {
    // square and disk example
    ShapePolygon square;
    square.vertices = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    square.contains_origin = true;
    SpeedField diskf = constant_field(1.5, 64);
    ShapePolygon disk = wulff_shape(diskf);

    RecursionResult rec = spreading_shape_recursion({square, disk});
    REQUIRE(rec.shapes.size() == 2);
    CHECK(rec.max_route_gap <= 1e-9);
    // hull contains both generators
    for (const auto& v : square.vertices) CHECK(rec.shapes[1].contains(v[0], v[1], 1e-9));
    for (const auto& v : disk.vertices) CHECK(rec.shapes[1].contains(v[0], v[1], 1e-9));

    // degenerate upsilon: hull with the origin only
    RecursionResult rec2 = spreading_shape_recursion({disk, make_singleton_origin()});
    CHECK(polygons_equal(rec2.shapes[1], rec2.shapes[0], 1e-12));

    // identical upsilons: constant in k
    RecursionResult rec3 = spreading_shape_recursion({disk, disk, disk});
    CHECK(polygons_equal(rec3.shapes[2], rec3.shapes[0], 1e-12));
}

TEST_CASE("hull recursion on randomized ordered families") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(0.4, 2.0);
    for (int family = 0; family < 20; ++family) {
        std::vector<ShapePolygon> ups;
        int count = 2 + family % 3;
        for (int k = 0; k < count; ++k) {
            SpeedField f;
            double base = unif(rng), wob = 0.3 * unif(rng);
            int m = 24 + 12 * (family % 4);
            for (int a2 = 0; a2 < m; ++a2) {
                double ang = 2.0 * kPi * a2 / m;
                f.add_angle(ang, base + wob * std::cos(ang + family));
            }
            ups.push_back(wulff_shape(f));
        }
        RecursionResult rec = spreading_shape_recursion(ups);
        CHECK(rec.max_route_gap <= 1e-9);
        // monotone: shapes only grow with k
        for (std::size_t k = 1; k < rec.shapes.size(); ++k)
            for (const auto& v : rec.shapes[k - 1].vertices)
                CHECK(rec.shapes[k].contains(v[0], v[1], 1e-9));
    }
}

TEST_CASE("minkowski sum of boxes adds supports") {
    ShapePolygon a;
    a.vertices = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    ShapePolygon b;
    b.vertices = {{-0.5, -0.25}, {0.5, -0.25}, {0.5, 0.25}, {-0.5, 0.25}};
    ShapePolygon s = minkowski_sum(a, b);
    CHECK(s.support(1, 0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(s.support(0, 1) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(s.support(1, 1) == doctest::Approx(2.75).epsilon(1e-12));  // (1.5+1.25)
}
