#pragma once

#include "ccflow/approx_solver.hpp"

namespace ccflow {

/// Transverse gradient limits at the curve mesh nodes.
struct XiPair {
    VectorXd xi_nu, xi_om;
};

/// xi = [e . grad F^-1 (v_c - d_t F)](t,s,0,0) u_c / k_n(s,0,0) for the
/// second and third coordinate directions. Linear in u_c; identically
/// zero when v_c equals the chart velocity.
XiPair xi_closure(const TubeChart& chart, const MaterialParams& m,
                  const CurveField& uc, const Grid1D& mesh, double t);

struct LimitRun {
    std::vector<double> times;
    std::vector<double> mass_bulk;  ///< int u dx
    std::vector<double> mass_curve; ///< pi eps0^2 int u_c |d_s Gamma| ds
    std::vector<VectorXd> uc_series;            ///< every step
    std::vector<std::pair<double, VectorXd>> bulk_series; ///< stride-sampled
    BulkField initial_bulk, final_bulk;
    CurveField final_curve;
    int linear_iterations_total = 0;
};

/// Coupled backward-Euler solve of the formal split: bulk diffusion-
/// advection with a line-concentrated exchange sink, curve transport-
/// diffusion with the matching source. Combined mass is conserved by
/// construction (the exchange enters both blocks with opposite totals).
LimitRun run_limit(const SolveConfig& cfg, const TubeChart& chart, double eps0,
                   const MaterialParams& m, const Grid3D& grid,
                   const Grid1D& mesh);

/// Smooth space-time test function with analytic derivatives; must vanish
/// at the final time of the trajectory it is paired with.
struct TestFunction {
    std::function<double(double t, const Vec3& x)> phi;
    std::function<double(double t, const Vec3& x)> phi_t;
    std::function<Vec3(double t, const Vec3& x)> grad;
    std::string label;
};

/// Five smooth space-time-varying functions vanishing at t = h.
std::vector<TestFunction> test_basket(double h);

/// value * (1 - t/h): spatially constant; pairs the weak identity with
/// the combined mass series.
TestFunction constant_cutoff(double h, double value = 1.0);

/// View of a coupled trajectory for residual evaluation.
struct TrajectoryView {
    std::vector<double> times;                // sampled times
    std::function<const VectorXd&(int)> bulk; // u at sample k
    std::function<const VectorXd&(int)> curve; // u_c at sample k
};
TrajectoryView view_of(const LimitRun& run);

/// Definition of the coupled weak identity, evaluated for a candidate
/// pair; returns the scalar residual (zero for an exact solution).
double weak_residual(const TubeChart& chart, const MaterialParams& m,
                     double eps0, const TrajectoryView& traj,
                     const TestFunction& phi, const Grid3D& grid,
                     const Grid1D& mesh);

} // namespace ccflow
