#pragma once

#include "ccflow/curve.hpp"
#include "ccflow/types.hpp"

#include <functional>

namespace ccflow {

/// Positively oriented orthonormal triple along the curve.
struct Frame {
    Vec3 t = Vec3::UnitX();
    Vec3 n = Vec3::UnitY();
    Vec3 b = Vec3::UnitZ();
};

struct ChartConfig {
    double fd_step_rel = 1e-5; ///< finite-difference step, relative to span
    int rmf_steps = 256;       ///< marching steps for the rotation-minimizing frame
    int seed_samples = 512;    ///< presampled curve points seeding inversion
    int newton_max_iters = 50;
    double newton_tol = 1e-11;     ///< on |F(y) - x|
    int validity_samples = 7;      ///< per axis for the J_F > 0 lattice check
    double degenerate_tol = 1e-10; ///< minimum |d_s Gamma|
    bool validate_on_construction = true;
};

/// Result of chart inversion. `inside` is false for points outside the
/// closed tube; coordinates are then meaningless.
struct ChartCoords {
    double s = 0, nu = 0, om = 0;
    bool inside = false;
};

struct ChartVelocity {
    Vec3 value = Vec3::Zero();
    bool one_sided = false; ///< t was at an end of [0, T]
};

/// Curve points presampled at a fixed time, reused across many inversions.
struct CurveSamples {
    double t = 0;
    std::vector<double> s;
    std::vector<Vec3> p;
    double max_gap = 0; ///< largest distance between consecutive samples
};

/// The map F(t,s,nu,om) = Gamma(t,s) + nu*n + om*b on
/// [0,T] x [-eps0, 1+eps0] x D_eps0, with its Jacobian algebra.
class TubeChart {
public:
    TubeChart(CurveSpec curve, double eps0, ChartConfig cfg = {});

    const CurveSpec& curve() const { return curve_; }
    double eps0() const { return eps0_; }
    double t_end() const { return curve_.t_end; }
    double s_min() const { return -eps0_; }
    double s_max() const { return 1.0 + eps0_; }
    const ChartConfig& config() const { return cfg_; }
    double fd_step_s() const { return hs_; }
    double fd_step_t() const { return ht_; }

    /// Gamma(t,s); throws DomainError off [0,T] x [-eps0, 1+eps0].
    Vec3 eval_curve(double t, double s) const;

    /// Orthonormal frame at (t,s). Deterministic for a fixed rmf_steps.
    Frame eval_frame(double t, double s) const;

    /// d_s Gamma by centered differences (unchecked domain).
    Vec3 curve_tangent_raw(double t, double s) const;

    /// F(t,s,nu,om).
    Vec3 point(double t, double s, double nu, double om) const;

    /// grad F: columns (d_s Gamma + nu d_s n + om d_s b, n, b).
    Mat3 grad_F(double t, double s, double nu, double om) const;

    /// Closed-form J_F; agrees with det(grad_F) on a valid chart.
    double det_J_F(double t, double s, double nu, double om) const;

    /// Closed-form (grad F^t grad F)^-1.
    Mat3 metric_inv(double t, double s, double nu, double om) const;

    /// Closed-form grad F^-1 = (grad F^t grad F)^-1 grad F^t.
    Mat3 inv_grad_F(double t, double s, double nu, double om) const;

    /// d_t F by centered differences; one-sided at t in {0, T}.
    ChartVelocity curve_velocity(double t, double s, double nu, double om) const;

    /// 4x4 space-time Jacobian [[1, 0], [d_t F, grad F]].
    Mat4 grad_F4(double t, double s, double nu, double om) const;

    /// Block-form inverse [[1, 0], [-grad F^-1 d_t F, grad F^-1]].
    Mat4 inv_grad_F4(double t, double s, double nu, double om) const;

    CurveSamples sample_curve(double t) const;

    /// Newton inversion of x = F(t,...), seeded from the nearest sample.
    ChartCoords invert(double t, const Vec3& x) const;
    ChartCoords invert(double t, const Vec3& x, const CurveSamples& samples) const;

    /// min over a sample lattice of lambda_min((grad F^t grad F)^-1 J_F).
    double coercivity_beta(int sample_density = 12) const;

    /// (1/J_F) div_{s,nu,om}[J_F grad F^-1 (q o F)] by centered differences.
    double divergence_in_tube(const std::function<Vec3(const Vec3&)>& q,
                              double t, double s, double nu, double om,
                              double h = 1e-3) const;

private:
    void validate_lattice() const;
    Frame frame_rmf(double t, double s) const;
    Frame frame_analytic(double t, double s) const;
    void frame_s_derivatives(double t, double s, Vec3& dn, Vec3& db) const;

    CurveSpec curve_;
    double eps0_;
    ChartConfig cfg_;
    double hs_, ht_;
    Vec3 rmf_ref_ = Vec3::UnitY(); // fixed reference for the auto seed
};

} // namespace ccflow
