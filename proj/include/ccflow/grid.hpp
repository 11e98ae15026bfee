#pragma once

#include "ccflow/types.hpp"

#include <cmath>
#include <functional>

namespace ccflow {

/// Uniform cell-centered grid over an axis-aligned box.
class Grid3D {
public:
    Grid3D(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz)
        : lo_(lo), hi_(hi), nx_(nx), ny_(ny), nz_(nz) {
        if (nx < 1 || ny < 1 || nz < 1)
            throw DomainError("grid resolution must be positive");
        for (int d = 0; d < 3; ++d)
            if (!(hi[d] > lo[d])) throw DomainError("empty grid box");
        h_ = Vec3((hi_.x() - lo_.x()) / nx_, (hi_.y() - lo_.y()) / ny_,
                  (hi_.z() - lo_.z()) / nz_);
    }
    static Grid3D unit_cube(int n) {
        return Grid3D(Vec3::Zero(), Vec3::Ones(), n, n, n);
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    long cells() const { return long(nx_) * ny_ * nz_; }
    const Vec3& lo() const { return lo_; }
    const Vec3& hi() const { return hi_; }
    const Vec3& spacing() const { return h_; }
    double cell_volume() const { return h_.x() * h_.y() * h_.z(); }
    double volume() const { return (hi_ - lo_).prod(); }

    long index(int i, int j, int k) const {
        return (long(k) * ny_ + j) * nx_ + i;
    }
    Vec3 center(int i, int j, int k) const {
        return lo_ + Vec3((i + 0.5) * h_.x(), (j + 0.5) * h_.y(),
                          (k + 0.5) * h_.z());
    }
    Vec3 center(long idx) const {
        const int i = static_cast<int>(idx % nx_);
        const int j = static_cast<int>((idx / nx_) % ny_);
        const int k = static_cast<int>(idx / (long(nx_) * ny_));
        return center(i, j, k);
    }
    bool contains(const Vec3& x) const {
        for (int d = 0; d < 3; ++d)
            if (x[d] < lo_[d] || x[d] > hi_[d]) return false;
        return true;
    }
    /// Cell containing x (clamped to the grid).
    void locate(const Vec3& x, int& i, int& j, int& k) const {
        i = clamp_idx((x.x() - lo_.x()) / h_.x(), nx_);
        j = clamp_idx((x.y() - lo_.y()) / h_.y(), ny_);
        k = clamp_idx((x.z() - lo_.z()) / h_.z(), nz_);
    }

    /// Trilinear interpolation of cell-centered values; clamps to the
    /// outermost centers (constant extrapolation near the boundary).
    double interpolate(const VectorXd& values, const Vec3& x) const;

    /// Interpolation stencil: up to 8 (index, weight) pairs summing to 1.
    int interpolation_stencil(const Vec3& x, long idx[8], double w[8]) const;

    /// Midpoint-rule quadrature of a closure over the box.
    double integrate(const std::function<double(const Vec3&)>& f) const {
        double acc = 0.0;
        for (long c = 0; c < cells(); ++c) acc += f(center(c));
        return acc * cell_volume();
    }

private:
    static int clamp_idx(double u, int n) {
        int i = static_cast<int>(std::floor(u));
        if (i < 0) i = 0;
        if (i >= n) i = n - 1;
        return i;
    }
    Vec3 lo_, hi_;
    int nx_, ny_, nz_;
    Vec3 h_;
};

/// Field of cell-centered samples with its time stamp.
struct BulkField {
    VectorXd values;
    double time = 0.0;
};

/// Cell-centered central-difference gradient of a bulk field, one
/// component array per direction (one-sided at the boundary).
struct BulkGradient {
    VectorXd gx, gy, gz;
};
BulkGradient bulk_gradient(const Grid3D& grid, const VectorXd& values);

/// Uniform node grid on [0,1] with nodes at both endpoints.
class Grid1D {
public:
    explicit Grid1D(int n_nodes) : n_(n_nodes) {
        if (n_nodes < 2) throw DomainError("Grid1D needs at least two nodes");
        ds_ = 1.0 / (n_ - 1);
    }
    int nodes() const { return n_; }
    double spacing() const { return ds_; }
    double node(int j) const { return j * ds_; }
    /// Control-volume width for node j (half cells at the ends).
    double cv_width(int j) const {
        return (j == 0 || j == n_ - 1) ? 0.5 * ds_ : ds_;
    }

private:
    int n_;
    double ds_;
};

struct CurveField {
    VectorXd values;
    double time = 0.0;
};

} // namespace ccflow
