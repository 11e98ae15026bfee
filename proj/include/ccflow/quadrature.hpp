#pragma once

#include "ccflow/coefficients.hpp"
#include "ccflow/grid.hpp"

namespace ccflow {

enum class TubeRegion { Core, Collar, FullTube };

struct QuadDensity {
    int n_axial = 64;    ///< Gauss nodes along s
    int n_radial = 16;   ///< Gauss nodes across a disk radius
    int n_angular = 32;  ///< uniform nodes around the axis
    int n_normal = 8;    ///< Gauss nodes across the delta collar width
    int n_corner = 8;    ///< Gauss nodes across a quarter-circle edge fan
};

/// Gauss-Legendre nodes/weights on [0,1].
struct GaussRule {
    std::vector<double> x, w;
};
GaussRule gauss_legendre(int n);

/// Integrand in tube coordinates at time t.
using TubeIntegrand = std::function<double(double s, double nu, double om)>;

/// Integral of f * J_F over the region, in (s,nu,om) coordinates.
/// The collar [0 < d_eps < delta] is decomposed into lateral, cap and
/// edge-fan pieces, each a graph over the core boundary in the d_eps
/// direction, so arbitrarily small delta is resolved exactly.
double tube_integral(const TubeChart& chart, const CapacityParams& p,
                     const TubeIntegrand& f, double t, TubeRegion region,
                     const QuadDensity& quad = {});

/// Visits every quadrature node of the region with its full weight
/// (including J_F); the basis of the integral and of coefficient scatter.
void for_each_tube_node(
    const TubeChart& chart, const CapacityParams& p, double t, TubeRegion region,
    const QuadDensity& quad,
    const std::function<void(double s, double nu, double om, double weight)>& visit);

struct GapMeasure {
    double flat = 0;   ///< mu([0 < d_eps < delta]) in reference coordinates
    double mapped = 0; ///< image measure, with the J_F weight
};
GapMeasure gap_measure(const TubeChart& chart, const CapacityParams& p, double t,
                       const QuadDensity& quad = {});

enum class PairingMode {
    Split, ///< grid integral of f plus tube-resolved zeta integral
    Grid,  ///< direct grid sum of a(t,x) f(x); cross-check only
};

/// int_Omega a_{eps,delta}(t;.) f dx.
double capacity_pairing(const TubeChart& chart, const CapacityParams& p,
                        const std::function<double(const Vec3&)>& f, double t,
                        const Grid3D& grid, PairingMode mode = PairingMode::Split,
                        const QuadDensity& quad = {});

/// int_Omega f dx + pi eps0^2 int_0^1 (f o Gamma)|d_s Gamma| ds.
double capacity_limit_target(const TubeChart& chart,
                             const std::function<double(const Vec3&)>& f,
                             double t, const Grid3D& grid, int n_line = 128);

struct DiskAverage {
    double value = 0;
    Vec3 grad = Vec3::Zero(); ///< (s,nu,om)-gradient cross-section average
};

/// Cross-section averages of u and of its tube-coordinate gradient over
/// the disk of radius eps at (t,s). Field values and grid gradients are
/// interpolated trilinearly.
DiskAverage disk_average(const TubeChart& chart, const Grid3D& grid,
                         const VectorXd& field, const BulkGradient& grad,
                         double t, double s, double eps,
                         const QuadDensity& quad = {});
DiskAverage disk_average(const TubeChart& chart, const Grid3D& grid,
                         const BulkField& field, double t, double s, double eps,
                         const QuadDensity& quad = {});

/// Metric line integral int_0^1 f(s) |d_s Gamma| ds.
double line_integral(const TubeChart& chart,
                     const std::function<double(double)>& f, double t,
                     int n_line = 128);

} // namespace ccflow
