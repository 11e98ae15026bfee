#pragma once

#include "ccflow/chart.hpp"

namespace ccflow {

/// Scale parameters of the concentrating family. The chart radius eps0
/// bounds both the core radius eps and the collar width delta.
struct CapacityParams {
    double eps0 = 0.1;
    double eps = 0.05;
    double delta = 1.25e-4;

    void validate() const {
        if (!(eps0 > 0)) throw DomainError("eps0 must be positive");
        if (!(eps > 0 && eps < eps0))
            throw DomainError("eps must lie in (0, eps0)");
        if (!(delta > 0 && delta < eps0 - eps))
            throw DomainError("delta must lie in (0, eps0 - eps)");
    }
    /// eps0^2 / eps^2, the capacity contrast.
    double contrast() const { return (eps0 * eps0) / (eps * eps); }
};

using ScalarField1 = std::function<double(double s, double nu, double om)>;
using VelocityField = std::function<Vec3(double t, const Vec3& x)>;
using ScalarField3 = std::function<double(const Vec3& x)>;

/// Material data: bulk diffusivity, curve-frame principal diffusivities,
/// ellipticity floor, advection fields, initial datum.
struct MaterialParams {
    double k0 = 1.0;
    ScalarField1 k_s = [](double, double, double) { return 1.0; };
    ScalarField1 k_n = [](double, double, double) { return 1.0; };
    double theta = 1.0;
    VelocityField v = [](double, const Vec3&) { return Vec3::Zero(); };
    VelocityField v_c = [](double, const Vec3&) { return Vec3::Zero(); };
    ScalarField3 u0 = [](const Vec3&) { return 0.0; };

    /// Sampled check of 0 < theta <= min{k0, inf k_s, inf k_n}.
    void validate(double eps0, int n_samples = 24) const;
};

// --- reference-cylinder geometry -----------------------------------------

/// d_eps: distance from (s,nu,om) to the core cylinder [0,1] x D_eps.
double dist_core(double eps, double s, double nu, double om);
inline double dist_core(const CapacityParams& p, double s, double nu, double om) {
    return dist_core(p.eps, s, nu, om);
}

/// Gradient of d_eps; unit length off the core, zero inside it.
Vec3 dist_core_gradient(double eps, double s, double nu, double om);

/// chi_delta(r) = (1 - r/delta)_+.
inline double cutoff_chi(double delta, double r) {
    const double v = 1.0 - r / delta;
    return v > 0.0 ? v : 0.0;
}

// --- coefficient fields in tube coordinates -------------------------------

inline double zeta_tube(const CapacityParams& p, double s, double nu, double om) {
    return cutoff_chi(p.delta, dist_core(p.eps, s, nu, om));
}

inline double capacity_a_tube(const CapacityParams& p, double s, double nu,
                              double om) {
    return 1.0 + (p.contrast() - 1.0) * zeta_tube(p, s, nu, om);
}

/// Frame-aligned diffusion tensor (t n b) diag(k_s, k_n, k_n) (t n b)^t.
Mat3 frame_diffusion_tensor(const TubeChart& chart, const MaterialParams& m,
                            double t, double s, double nu, double om);

// --- coefficient fields at ambient points ---------------------------------

double zeta(const TubeChart& chart, const CapacityParams& p, double t,
            const Vec3& x, const CurveSamples& samples);
double zeta(const TubeChart& chart, const CapacityParams& p, double t,
            const Vec3& x);

double capacity_a(const TubeChart& chart, const CapacityParams& p, double t,
                  const Vec3& x, const CurveSamples& samples);
double capacity_a(const TubeChart& chart, const CapacityParams& p, double t,
                  const Vec3& x);

Mat3 diffusivity_K(const TubeChart& chart, const CapacityParams& p,
                   const MaterialParams& m, double t, const Vec3& x,
                   const CurveSamples& samples);
Mat3 diffusivity_K(const TubeChart& chart, const CapacityParams& p,
                   const MaterialParams& m, double t, const Vec3& x);

Vec3 advection_v(const TubeChart& chart, const CapacityParams& p,
                 const MaterialParams& m, double t, const Vec3& x,
                 const CurveSamples& samples);
Vec3 advection_v(const TubeChart& chart, const CapacityParams& p,
                 const MaterialParams& m, double t, const Vec3& x);

/// d_t a on the open collar 0 < d_eps < delta, zero elsewhere. Diagnostic
/// only; the solver never assembles it.
double dt_capacity_a(const TubeChart& chart, const CapacityParams& p, double t,
                     const Vec3& x, const CurveSamples& samples);
double dt_capacity_a(const TubeChart& chart, const CapacityParams& p, double t,
                     const Vec3& x);

/// sup |<v, v_c>| over quadrature nodes of [0,T] x box, for the advection
/// bound |v_eps_delta| <= sup * a_eps_delta.
double velocity_sup_norm(const MaterialParams& m, const Vec3& box_lo,
                         const Vec3& box_hi, double t_end, int n = 8);

} // namespace ccflow
