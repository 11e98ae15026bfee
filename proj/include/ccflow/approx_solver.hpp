#pragma once

#include "ccflow/linear_solver.hpp"
#include "ccflow/quadrature.hpp"

namespace ccflow {

enum class DeltaRule { Eps3, Eps11, Explicit };

inline double delta_for(DeltaRule rule, double eps, double explicit_delta = 0.0) {
    switch (rule) {
    case DeltaRule::Eps3: return eps * eps * eps;
    case DeltaRule::Eps11: return std::pow(eps, 11);
    default: return explicit_delta;
    }
}

struct SolveConfig {
    double dt = 1e-3;
    double t_end = 0.05;
    double tol = 1e-12; ///< relative linear-solver tolerance
    int max_iters = 4000;
    DeltaRule delta_rule = DeltaRule::Eps3;
    double delta_explicit = 0.0;
    int snapshot_stride = 0;   ///< 0: first/last only
    bool record_profiles = true;
    int profile_nodes = 65;    ///< curve-mesh nodes for recorded profiles
    // limit-solver coupling
    double r_avg_cells = 2.0;  ///< exchange radius in grid cells
    double lambda_ex = -1.0;   ///< < 0: default k0 / r_avg^2
    int bulk_series_stride = 1;

    void validate() const {
        if (!(dt > 0)) throw DomainError("dt must be positive");
        if (!(t_end > 0)) throw DomainError("t_end must be positive");
        if (!(tol > 0 && tol <= 1e-4))
            throw DomainError("linear tolerance must lie in (0, 1e-4]");
        if (max_iters < 1) throw DomainError("max_iters must be >= 1");
    }
};

/// Cell-averaged coefficients at one time level. Diffusivity keeps only
/// the diagonal entries used by the two-point face flux.
struct CellCoefficients {
    VectorXd a;
    std::vector<Vec3> k_diag;
    std::vector<Vec3> v;
    double lost_mass = 0.0; ///< scatter weight that fell outside the grid
};

/// Cell averages of a, K, v by tube-coordinate quadrature scatter; the
/// collar is resolved analytically in the distance direction, so delta far
/// below the grid spacing is handled exactly.
CellCoefficients build_cell_coefficients(const Grid3D& grid,
                                         const TubeChart& chart,
                                         const CapacityParams& p,
                                         const MaterialParams& m, double t,
                                         const QuadDensity& quad);

using SourceField = std::function<double(double t, const Vec3& x)>;

/// Backward-Euler, flux-form step: rows sum so that the all-ones vector
/// annihilates the flux part (discrete conservation of a u).
SparseSystem assemble_step(const Grid3D& grid, const VectorXd& a_old,
                           const CellCoefficients& coeffs_new,
                           const VectorXd& u_old, double t_new, double dt,
                           const SourceField& source = nullptr);

struct ApproxRun {
    std::vector<double> times;
    std::vector<double> mass;        ///< int a u dx
    std::vector<double> energy_au2;  ///< int a u^2 dx
    std::vector<double> grad_energy; ///< cumulative int_0^t int a |grad u|^2
    // disk-average profiles on the recording mesh (value and gradient parts)
    std::vector<VectorXd> disk_u, disk_ds, disk_dnu, disk_dom;
    std::vector<std::pair<double, VectorXd>> snapshots;
    BulkField initial, final_field;
    int linear_iterations_total = 0;
};

/// A zero quad density asks the solver to scale the scatter to the grid.
ApproxRun run_approx(const SolveConfig& cfg, const CapacityParams& p,
                     const MaterialParams& m, const TubeChart& chart,
                     const Grid3D& grid,
                     const QuadDensity& quad = {0, 0, 0, 0, 0},
                     const SourceField& source = nullptr);

struct EnergyReport {
    double sup_au2 = 0;    ///< max_t int a u^2
    double int_a_grad2 = 0;///< int int a |grad u|^2 dx dt
    double initial_au02 = 0;
};
EnergyReport energy_report(const ApproxRun& run);

/// Quadrature density scaled so the scatter resolves the grid cells.
QuadDensity scatter_density(const Grid3D& grid, const TubeChart& chart);

VectorXd sample_initial(const Grid3D& grid, const ScalarField3& u0);

} // namespace ccflow
