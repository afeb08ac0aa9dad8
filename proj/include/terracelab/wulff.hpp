#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "terracelab/fronts.hpp"
#include "terracelab/spectral.hpp"
#include "terracelab/terrace.hpp"

namespace terracelab {

/// Exact rational scalar on int64 with overflow checks; enough for synthetic
/// speed fields with small numerators.
class Rat {
  public:
    Rat() = default;
    Rat(long long n) : num_(n), den_(1) {}
    Rat(long long n, long long d);

    long long num() const { return num_; }
    long long den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / den_; }

    Rat operator+(const Rat& o) const;
    Rat operator-(const Rat& o) const;
    Rat operator*(const Rat& o) const;
    Rat operator/(const Rat& o) const;
    Rat operator-() const { return Rat(-num_, den_); }
    bool operator==(const Rat& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rat& o) const { return !(*this == o); }
    bool operator<(const Rat& o) const;
    bool operator<=(const Rat& o) const { return *this < o || *this == o; }
    bool operator>(const Rat& o) const { return o < *this; }
    bool operator>=(const Rat& o) const { return o <= *this; }

    std::string str() const;

  private:
    void normalize();
    long long num_ = 0;
    long long den_ = 1;
};

/// A direction-indexed speed sample set on the circle.
struct SpeedSample {
    double ex = 1.0;
    double ey = 0.0;
    double speed = 0.0;
    double se = 0.0;
};

enum class Provenance { Measured, Synthetic };

struct SpeedField {
    std::vector<SpeedSample> samples;
    Provenance provenance = Provenance::Synthetic;

    void add(double ex, double ey, double speed, double se = 0.0);
    void add_angle(double radians, double speed, double se = 0.0);
};

/// Convex polygon, counterclockwise vertices; built as an intersection of
/// half-planes over the sampled directions (outer approximation of the true
/// shape) inside a bounding box.
struct ShapePolygon {
    std::vector<std::array<double, 2>> vertices;
    bool empty_shape = false;
    bool truncated = false;         // the bounding box contributed edges
    bool contains_origin = false;
    bool degenerate_origin = false; // the {0} singleton

    double support(double ex, double ey) const;
    double area() const;
    bool contains(double x, double y, double tol = 1e-12) const;
};

ShapePolygon make_singleton_origin();

/// Half-plane intersection over the samples: { x : x.e <= c(e) for all samples }.
ShapePolygon wulff_shape(const SpeedField& field, double box_radius = 0.0);

struct FreidlinGartnerResult {
    double value = 0.0;
    std::size_t argmin = 0;
    bool defined = false;
};

/// inf over samples with e'.e > 0 of c(e') / (e'.e).
FreidlinGartnerResult freidlin_gartner(const SpeedField& field, double ex, double ey);

/// True iff the hyperplane { x.e = c_e } touches the shape: max over vertices of
/// x.e >= c_e - tol.
bool supporting_hyperplane_test(const ShapePolygon& shape, double ex, double ey, double c_e,
                                double tol);

struct UpsilonResult {
    ShapePolygon shape;
    bool positive_branch = false;
    bool indeterminate = false;  // samples straddle the zero-speed band
};

/// W_{c} when every sampled speed clears the positivity tolerance, the {0}
/// singleton otherwise.
UpsilonResult upsilon(const SpeedField& field, double zero_speed_tol,
                      double box_radius = 0.0);

/// Cumulative spreading shapes for ordered states: hull route and the
/// Minkowski-combination route computed independently and compared.
struct RecursionResult {
    std::vector<ShapePolygon> shapes;   // one per state, topmost first
    double max_route_gap = 0.0;         // worst vertex disagreement between routes
};

RecursionResult spreading_shape_recursion(const std::vector<ShapePolygon>& upsilons,
                                          double geom_tol = 1e-9);

/// Convex hull of a point cloud (strict; collinear points dropped).
ShapePolygon convex_hull_points(const std::vector<std::array<double, 2>>& pts);

/// Minkowski sum of convex polygons.
ShapePolygon minkowski_sum(const ShapePolygon& a, const ShapePolygon& b);

ShapePolygon scale_polygon(const ShapePolygon& p, double factor);

/// Vertex-for-vertex equality within tol, up to cyclic rotation.
bool polygons_equal(const ShapePolygon& a, const ShapePolygon& b, double tol);

/// Approximate Hausdorff distance between polygon boundaries.
double polygon_hausdorff(const ShapePolygon& a, const ShapePolygon& b);

/// Interior angle (radians) at vertex i.
double vertex_interior_angle(const ShapePolygon& p, std::size_t i);

// ---------------------------------------------------------------------------
// exact-arithmetic path for synthetic fields

struct ExactSample {
    Rat ex, ey, c;  // direction must be an exact unit vector (ex^2 + ey^2 = 1)
};

struct ExactShape {
    std::vector<std::array<Rat, 2>> vertices;
    bool empty_shape = false;
    bool truncated = false;
};

ExactShape wulff_shape_exact(const std::vector<ExactSample>& samples, Rat box_radius);
Rat support_exact(const ExactShape& shape, const Rat& ex, const Rat& ey);
bool supporting_hyperplane_test_exact(const ExactShape& shape, const Rat& ex, const Rat& ey,
                                      const Rat& c);
Rat freidlin_gartner_exact(const std::vector<ExactSample>& samples, const Rat& ex,
                           const Rat& ey);
ExactShape scale_exact(const ExactShape& shape, const Rat& factor);
ShapePolygon to_double(const ExactShape& shape);

// ---------------------------------------------------------------------------
// terrace-derived speed fields

/// Speed of the front of the terrace that crosses level p: lower platform <= p
/// pointwise and upper platform exceeds p somewhere.
SpeedEstimate front_speed_through(const Terrace& terr, const StateLattice& lattice, int p_id,
                                  double tol);

/// c[p] over a family of per-direction terraces.
SpeedField c_of_p(const std::vector<Terrace>& terraces, const StateLattice& lattice, int p_id,
                  double tol);

struct SpeedConsistencyReport {
    bool ok = true;
    std::vector<std::string> violations;
    std::vector<std::string> checks;  // human-readable record of what was compared
};

/// Per direction: monotonicity of c[p_k] in k, the platform / skipped-state
/// identities against sub-terrace uppermost speeds, and c_1^{p_k} <= c[p_k].
/// sub_terraces[d][k] connects the k-th stable state (descending, excluding the
/// extremes) to 0 in direction d; entries may be absent (empty optional).
SpeedConsistencyReport speed_consistency_check(
    const StateLattice& lattice, const std::vector<Terrace>& full_terraces,
    const std::vector<std::vector<const Terrace*>>& sub_terraces, double tol);

}  // namespace terracelab
