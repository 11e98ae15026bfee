#include "ccflow/grid.hpp"

#include <cmath>

namespace ccflow {

int Grid3D::interpolation_stencil(const Vec3& x, long idx[8], double w[8]) const {
    // coordinates in the cell-center lattice
    double u[3], frac[3];
    int base[3];
    const int n[3] = {nx_, ny_, nz_};
    for (int d = 0; d < 3; ++d) {
        u[d] = (x[d] - lo_[d]) / h_[d] - 0.5;
        double fl = std::floor(u[d]);
        int i0 = static_cast<int>(fl);
        double f = u[d] - fl;
        if (i0 < 0) { i0 = 0; f = 0.0; }
        if (i0 >= n[d] - 1) { i0 = n[d] > 1 ? n[d] - 2 : 0; f = n[d] > 1 ? 1.0 : 0.0; }
        base[d] = i0;
        frac[d] = f;
    }
    int count = 0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                const int i = std::min(base[0] + di, nx_ - 1);
                const int j = std::min(base[1] + dj, ny_ - 1);
                const int k = std::min(base[2] + dk, nz_ - 1);
                const double wt = (di ? frac[0] : 1 - frac[0]) *
                                  (dj ? frac[1] : 1 - frac[1]) *
                                  (dk ? frac[2] : 1 - frac[2]);
                if (wt == 0.0) continue;
                idx[count] = index(i, j, k);
                w[count] = wt;
                ++count;
            }
    return count;
}

double Grid3D::interpolate(const VectorXd& values, const Vec3& x) const {
    long idx[8];
    double w[8];
    const int m = interpolation_stencil(x, idx, w);
    double acc = 0.0;
    for (int q = 0; q < m; ++q) acc += w[q] * values[idx[q]];
    return acc;
}

BulkGradient bulk_gradient(const Grid3D& grid, const VectorXd& values) {
    BulkGradient g;
    const long n = grid.cells();
    g.gx.resize(n);
    g.gy.resize(n);
    g.gz.resize(n);
    const Vec3 h = grid.spacing();
    for (int k = 0; k < grid.nz(); ++k)
        for (int j = 0; j < grid.ny(); ++j)
            for (int i = 0; i < grid.nx(); ++i) {
                const long c = grid.index(i, j, k);
                auto diff = [&](int di, int dj, int dk, int lo, int hi, int pos,
                                double hd) {
                    const long cp = grid.index(i + (pos < hi ? di : 0),
                                               j + (pos < hi ? dj : 0),
                                               k + (pos < hi ? dk : 0));
                    const long cm = grid.index(i - (pos > lo ? di : 0),
                                               j - (pos > lo ? dj : 0),
                                               k - (pos > lo ? dk : 0));
                    const int steps = (pos < hi ? 1 : 0) + (pos > lo ? 1 : 0);
                    return steps ? (values[cp] - values[cm]) / (steps * hd) : 0.0;
                };
                g.gx[c] = diff(1, 0, 0, 0, grid.nx() - 1, i, h.x());
                g.gy[c] = diff(0, 1, 0, 0, grid.ny() - 1, j, h.y());
                g.gz[c] = diff(0, 0, 1, 0, grid.nz() - 1, k, h.z());
            }
    return g;
}

} // namespace ccflow
