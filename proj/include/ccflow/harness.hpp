#pragma once

#include "ccflow/limit_solver.hpp"

#include <cstdint>

namespace ccflow {

/// Concurrency cap from the CCFLOW_THREADS environment variable (>= 1).
/// Ladder rungs are independent solves and may run concurrently; report
/// assembly stays sequential either way.
int thread_cap();

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0.0;     ///< worst observed error / value
    double threshold = 0.0; ///< tolerance it was held against
    std::string note;
};

struct GeometryReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Frame, Jacobian, inverse, block-inverse, inversion round-trip and
/// coercivity identities on n random chart points.
GeometryReport run_geometry_suite(const TubeChart& chart, int n_samples,
                                  std::uint64_t seed = 42);

/// Coefficient-field invariants (zeta range, capacity bounds, pointwise
/// ellipticity, advection bound, distance-function properties).
GeometryReport run_coefficient_suite(const TubeChart& chart,
                                     const CapacityParams& p,
                                     const MaterialParams& m,
                                     const Vec3& box_lo, const Vec3& box_hi,
                                     int n_samples, std::uint64_t seed = 42);

struct CapacityRung {
    double eps = 0, delta = 0;
    double pairing = 0, target = 0, abs_error = 0, rel_error = 0;
};
struct CapacityLadderReport {
    std::vector<CapacityRung> rungs;
    bool strictly_decreasing = false;
    double final_rel_error = 0;
};
/// Pairing of a_{eps_i, eps_i^3} against f along eps_i = eps0 / 2^i.
CapacityLadderReport run_capacity_ladder(
    const TubeChart& chart, const std::function<double(const Vec3&)>& f,
    double t, const Grid3D& grid, int n_rungs = 4,
    const QuadDensity& quad = {});

struct EnergyRung {
    double eps = 0, delta = 0;
    int grid_n = 0;
    EnergyReport energy;
    double norm_sup = 0, norm_grad = 0; ///< normalized by int a u0^2
    double seconds = 0;
    std::string error; ///< nonempty if the rung's solve failed
};
struct EnergyLadderReport {
    std::vector<EnergyRung> rungs;
    double bound_constant = 0; ///< max over rungs of the normalized pair
    bool uniform = false;      ///< no rung exceeds `factor` x first rung
};
EnergyLadderReport run_energy_ladder(const SolveConfig& cfg,
                                     const TubeChart& chart, double eps0,
                                     const MaterialParams& m,
                                     const std::vector<std::pair<double, int>>&
                                         rungs, // (eps, grid_n)
                                     DeltaRule rule, const Vec3& box_lo,
                                     const Vec3& box_hi, double uniform_factor = 3.0);

struct ComparisonRung {
    double eps = 0, delta = 0;
    int grid_n = 0;
    double dist_uc = 0;       ///< L2([0,1]_h): disk-averaged u vs limit u_c
    double dist_bulk_out = 0; ///< L2 outside the eps0-tube: u vs limit u
    double cauchy_prev = 0;   ///< profile distance to the previous rung
    double xi_rel_diff = 0;   ///< transverse disk gradient vs xi closure
    double weak_resid_max = 0;///< rung pair against the weak identity
    double seconds = 0;
};
struct ComparisonReport {
    std::vector<ComparisonRung> rungs;
    bool cauchy_decreasing = false;
    bool dist_decreasing = false;
    bool xi_decreasing = false;
};
ComparisonReport run_limit_comparison(
    const SolveConfig& cfg, const TubeChart& chart, double eps0,
    const MaterialParams& m, const Grid3D& limit_grid, const Grid1D& mesh,
    const std::vector<std::pair<double, int>>& rungs, DeltaRule rule,
    const Vec3& box_lo, const Vec3& box_hi);

} // namespace ccflow
