#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace terracelab {

/// Samples of a periodic function on one unit cell, n points per axis,
/// node i at coordinate i/n. Row-major (y outer) in 2D.
struct CellField {
    int dim = 1;
    int n = 0;
    std::vector<double> values;

    static CellField constant(int dim, int n, double v) {
        CellField f;
        f.dim = dim;
        f.n = n;
        f.values.assign(dim == 1 ? n : std::size_t(n) * n, v);
        return f;
    }

    std::size_t size() const { return values.size(); }

    double& at(int i, int j = 0) { return values[dim == 1 ? i : std::size_t(j) * n + i]; }
    double at(int i, int j = 0) const { return values[dim == 1 ? i : std::size_t(j) * n + i]; }

    /// Periodic nodal lookup; the coordinate must sit on the 1/n lattice.
    double value_at(double x, double y = 0.0) const {
        return values[node_index(x, y)];
    }

    std::size_t node_index(double x, double y = 0.0) const {
        auto wrap = [this](double c) {
            double s = c * n;
            long k = std::lround(s);
            if (std::abs(s - static_cast<double>(k)) > 1e-6)
                throw std::runtime_error("CellField lookup off the grid lattice");
            long m = k % n;
            if (m < 0) m += n;
            return static_cast<int>(m);
        };
        int ix = wrap(x);
        if (dim == 1) return ix;
        int iy = wrap(y);
        return std::size_t(iy) * n + ix;
    }

    double min() const {
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }
    double max() const {
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::max(m, v);
        return m;
    }
    double mean() const {
        if (values.empty()) return 0.0;
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }
};

/// max |a - b| over the cell.
double max_norm_distance(const CellField& a, const CellField& b);

/// a < b strictly at every node?
bool strictly_below(const CellField& a, const CellField& b);

/// a <= b everywhere, b <= a everywhere, or neither (intersecting).
enum class Ordering { Below, Above, Intersecting, Equal };
Ordering compare_fields(const CellField& a, const CellField& b, double tol);

}  // namespace terracelab
