#include "ccflow/coefficients.hpp"

#include <cmath>

namespace ccflow {

void MaterialParams::validate(double eps0, int n_samples) const {
    if (!(k0 > 0)) throw DomainError("k0 must be positive");
    if (!(theta > 0)) throw DomainError("theta must be positive");
    double lo = k0;
    for (int i = 0; i <= n_samples; ++i) {
        const double s = -eps0 + (1.0 + 2.0 * eps0) * i / n_samples;
        for (int j = 0; j <= n_samples / 4; ++j) {
            const double r = eps0 * j / std::max(1, n_samples / 4);
            for (int k = 0; k < 8; ++k) {
                const double th = 2.0 * M_PI * k / 8.0;
                const double nu = r * std::cos(th), om = r * std::sin(th);
                lo = std::min(lo, k_s(s, nu, om));
                lo = std::min(lo, k_n(s, nu, om));
            }
        }
    }
    if (theta > lo + 1e-12)
        throw DomainError("theta exceeds min{k0, k_s, k_n} on samples");
}

double dist_core(double eps, double s, double nu, double om) {
    const double s_neg = s < 0.0 ? -s : 0.0;
    const double s_pos = s > 1.0 ? s - 1.0 : 0.0;
    const double rad = std::sqrt(nu * nu + om * om) - eps;
    const double rad_pos = rad > 0.0 ? rad : 0.0;
    return std::sqrt(s_neg * s_neg + s_pos * s_pos + rad_pos * rad_pos);
}

Vec3 dist_core_gradient(double eps, double s, double nu, double om) {
    const double d = dist_core(eps, s, nu, om);
    if (d == 0.0) return Vec3::Zero();
    const double gs = s < 0.0 ? s : (s > 1.0 ? s - 1.0 : 0.0);
    const double rho = std::sqrt(nu * nu + om * om);
    double gnu = 0.0, gom = 0.0;
    if (rho > eps && rho > 0.0) {
        gnu = (rho - eps) * nu / rho;
        gom = (rho - eps) * om / rho;
    }
    return Vec3(gs, gnu, gom) / d;
}

Mat3 frame_diffusion_tensor(const TubeChart& chart, const MaterialParams& m,
                            double t, double s, double nu, double om) {
    const Frame f = chart.eval_frame(t, s);
    Mat3 R;
    R.col(0) = f.t;
    R.col(1) = f.n;
    R.col(2) = f.b;
    Vec3 diag(m.k_s(s, nu, om), m.k_n(s, nu, om), m.k_n(s, nu, om));
    return R * diag.asDiagonal() * R.transpose();
}

double zeta(const TubeChart& chart, const CapacityParams& p, double t,
            const Vec3& x, const CurveSamples& samples) {
    const ChartCoords c = chart.invert(t, x, samples);
    if (!c.inside) return 0.0;
    return zeta_tube(p, c.s, c.nu, c.om);
}

double zeta(const TubeChart& chart, const CapacityParams& p, double t,
            const Vec3& x) {
    return zeta(chart, p, t, x, chart.sample_curve(t));
}

double capacity_a(const TubeChart& chart, const CapacityParams& p, double t,
                  const Vec3& x, const CurveSamples& samples) {
    return 1.0 + (p.contrast() - 1.0) * zeta(chart, p, t, x, samples);
}

double capacity_a(const TubeChart& chart, const CapacityParams& p, double t,
                  const Vec3& x) {
    return capacity_a(chart, p, t, x, chart.sample_curve(t));
}

Mat3 diffusivity_K(const TubeChart& chart, const CapacityParams& p,
                   const MaterialParams& m, double t, const Vec3& x,
                   const CurveSamples& samples) {
    const ChartCoords c = chart.invert(t, x, samples);
    const Mat3 kb = m.k0 * Mat3::Identity();
    if (!c.inside) return kb;
    const double z = zeta_tube(p, c.s, c.nu, c.om);
    if (z == 0.0) return kb;
    const Mat3 kc = frame_diffusion_tensor(chart, m, t, c.s, c.nu, c.om);
    return kb + (p.contrast() * kc - kb) * z;
}

Mat3 diffusivity_K(const TubeChart& chart, const CapacityParams& p,
                   const MaterialParams& m, double t, const Vec3& x) {
    return diffusivity_K(chart, p, m, t, x, chart.sample_curve(t));
}

Vec3 advection_v(const TubeChart& chart, const CapacityParams& p,
                 const MaterialParams& m, double t, const Vec3& x,
                 const CurveSamples& samples) {
    const Vec3 vb = m.v(t, x);
    const double z = zeta(chart, p, t, x, samples);
    if (z == 0.0) return vb;
    return vb + (p.contrast() * m.v_c(t, x) - vb) * z;
}

Vec3 advection_v(const TubeChart& chart, const CapacityParams& p,
                 const MaterialParams& m, double t, const Vec3& x) {
    return advection_v(chart, p, m, t, x, chart.sample_curve(t));
}

double dt_capacity_a(const TubeChart& chart, const CapacityParams& p, double t,
                     const Vec3& x, const CurveSamples& samples) {
    const ChartCoords c = chart.invert(t, x, samples);
    if (!c.inside) return 0.0;
    const double d = dist_core(p.eps, c.s, c.nu, c.om);
    if (d <= 0.0 || d >= p.delta) return 0.0;
    const Vec3 grad_d = dist_core_gradient(p.eps, c.s, c.nu, c.om);
    const Vec3 dtF = chart.curve_velocity(t, c.s, c.nu, c.om).value;
    const Mat3 gi = chart.inv_grad_F(t, c.s, c.nu, c.om);
    return (p.contrast() - 1.0) / p.delta * grad_d.dot(gi * dtF);
}

double dt_capacity_a(const TubeChart& chart, const CapacityParams& p, double t,
                     const Vec3& x) {
    return dt_capacity_a(chart, p, t, x, chart.sample_curve(t));
}

double velocity_sup_norm(const MaterialParams& m, const Vec3& box_lo,
                         const Vec3& box_hi, double t_end, int n) {
    double sup = 0.0;
    for (int it = 0; it <= n; ++it) {
        const double t = t_end * it / n;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                for (int k = 0; k <= n; ++k) {
                    const Vec3 x =
                        box_lo + Vec3((box_hi - box_lo).x() * i / n,
                                      (box_hi - box_lo).y() * j / n,
                                      (box_hi - box_lo).z() * k / n);
                    sup = std::max(sup, std::hypot(m.v(t, x).norm(),
                                                   m.v_c(t, x).norm()));
                }
    }
    return sup;
}

} // namespace ccflow
