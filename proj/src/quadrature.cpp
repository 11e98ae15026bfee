#include "ccflow/quadrature.hpp"

#include <cmath>

namespace ccflow {

GaussRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    // Newton on Legendre P_n, nodes on [-1,1], then map to [0,1]
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 1) ? x : p1;
            const double pnm1 = (n == 1) ? 1.0 : p0;
            pp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[i] = 0.5 * (1.0 - x); // descending roots -> ascending nodes
        rule.w[i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
    return rule;
}

namespace {

// Visit the collar [0 < d_eps < delta] decomposed as lateral shell, two
// end caps, and two quarter-circle edge fans. Weight excludes J_F.
void for_each_collar_node_flat(
    double eps, double delta, const QuadDensity& q,
    const std::function<void(double s, double r, double th, double weight)>& visit) {
    const GaussRule gs = gauss_legendre(q.n_axial);
    const GaussRule gd = gauss_legendre(q.n_normal);
    const GaussRule gr = gauss_legendre(q.n_radial);
    const GaussRule gc = gauss_legendre(q.n_corner);
    const double dth = 2.0 * M_PI / q.n_angular;

    for (int ia = 0; ia < q.n_angular; ++ia) {
        const double th = (ia + 0.5) * dth;
        // lateral shell: s in [0,1], r = eps + d
        for (int is = 0; is < q.n_axial; ++is) {
            const double s = gs.x[is];
            for (int id = 0; id < q.n_normal; ++id) {
                const double d = delta * gd.x[id];
                const double r = eps + d;
                visit(s, r, th, gs.w[is] * delta * gd.w[id] * dth * r);
            }
        }
        // end caps: s = -d and s = 1 + d, r in [0, eps]
        for (int id = 0; id < q.n_normal; ++id) {
            const double d = delta * gd.x[id];
            for (int ir = 0; ir < q.n_radial; ++ir) {
                const double r = eps * gr.x[ir];
                const double w = delta * gd.w[id] * eps * gr.w[ir] * dth * r;
                visit(-d, r, th, w);
                visit(1.0 + d, r, th, w);
            }
        }
        // edge fans: distance d from the rim circle, direction angle psi
        for (int ip = 0; ip < q.n_corner; ++ip) {
            const double psi = 0.5 * M_PI * gc.x[ip];
            const double wpsi = 0.5 * M_PI * gc.w[ip];
            for (int id = 0; id < q.n_normal; ++id) {
                const double d = delta * gd.x[id];
                const double r = eps + d * std::cos(psi);
                const double soff = d * std::sin(psi);
                const double w = wpsi * delta * gd.w[id] * d * dth * r;
                visit(-soff, r, th, w);
                visit(1.0 + soff, r, th, w);
            }
        }
    }
}

} // namespace

void for_each_tube_node(
    const TubeChart& chart, const CapacityParams& p, double t, TubeRegion region,
    const QuadDensity& quad,
    const std::function<void(double s, double nu, double om, double weight)>& visit) {
    auto emit = [&](double s, double r, double th, double flat_w) {
        const double nu = r * std::cos(th);
        const double om = r * std::sin(th);
        visit(s, nu, om, flat_w * chart.det_J_F(t, s, nu, om));
    };

    if (region == TubeRegion::Collar) {
        for_each_collar_node_flat(p.eps, p.delta, quad, emit);
        return;
    }
    const double s_lo = region == TubeRegion::Core ? 0.0 : chart.s_min();
    const double s_hi = region == TubeRegion::Core ? 1.0 : chart.s_max();
    const double rad = region == TubeRegion::Core ? p.eps : chart.eps0();
    const GaussRule gs = gauss_legendre(quad.n_axial);
    const GaussRule gr = gauss_legendre(quad.n_radial);
    const double dth = 2.0 * M_PI / quad.n_angular;
    for (int is = 0; is < quad.n_axial; ++is) {
        const double s = s_lo + (s_hi - s_lo) * gs.x[is];
        const double ws = (s_hi - s_lo) * gs.w[is];
        for (int ir = 0; ir < quad.n_radial; ++ir) {
            const double r = rad * gr.x[ir];
            const double wr = rad * gr.w[ir] * r;
            for (int ia = 0; ia < quad.n_angular; ++ia) {
                const double th = (ia + 0.5) * dth;
                emit(s, r, th, ws * wr * dth);
            }
        }
    }
}

double tube_integral(const TubeChart& chart, const CapacityParams& p,
                     const TubeIntegrand& f, double t, TubeRegion region,
                     const QuadDensity& quad) {
    double acc = 0.0;
    for_each_tube_node(chart, p, t, region, quad,
                       [&](double s, double nu, double om, double w) {
                           acc += w * f(s, nu, om);
                       });
    return acc;
}

GapMeasure gap_measure(const TubeChart& chart, const CapacityParams& p, double t,
                       const QuadDensity& quad) {
    GapMeasure g;
    for_each_collar_node_flat(p.eps, p.delta, quad,
                              [&](double s, double r, double th, double w) {
                                  g.flat += w;
                                  const double nu = r * std::cos(th);
                                  const double om = r * std::sin(th);
                                  g.mapped += w * chart.det_J_F(t, s, nu, om);
                              });
    return g;
}

double capacity_pairing(const TubeChart& chart, const CapacityParams& p,
                        const std::function<double(const Vec3&)>& f, double t,
                        const Grid3D& grid, PairingMode mode,
                        const QuadDensity& quad) {
    if (mode == PairingMode::Grid) {
        const CurveSamples samples = chart.sample_curve(t);
        return grid.integrate([&](const Vec3& x) {
            return capacity_a(chart, p, t, x, samples) * f(x);
        });
    }
    const double background = grid.integrate(f);
    auto zf = [&](double s, double nu, double om) {
        return zeta_tube(p, s, nu, om) * f(chart.point(t, s, nu, om));
    };
    // zeta == 1 on the core and decays across the collar; zero beyond
    const double core = tube_integral(
        chart, p,
        [&](double s, double nu, double om) {
            return f(chart.point(t, s, nu, om));
        },
        t, TubeRegion::Core, quad);
    const double collar = tube_integral(chart, p, zf, t, TubeRegion::Collar, quad);
    return background + (p.contrast() - 1.0) * (core + collar);
}

double line_integral(const TubeChart& chart,
                     const std::function<double(double)>& f, double t,
                     int n_line) {
    const GaussRule g = gauss_legendre(n_line);
    double acc = 0.0;
    for (int i = 0; i < n_line; ++i) {
        const double s = g.x[i];
        acc += g.w[i] * f(s) * chart.curve_tangent_raw(t, s).norm();
    }
    return acc;
}

double capacity_limit_target(const TubeChart& chart,
                             const std::function<double(const Vec3&)>& f,
                             double t, const Grid3D& grid, int n_line) {
    const double background = grid.integrate(f);
    const double eps0 = chart.eps0();
    const double line = line_integral(
        chart, [&](double s) { return f(chart.eval_curve(t, s)); }, t, n_line);
    return background + M_PI * eps0 * eps0 * line;
}

DiskAverage disk_average(const TubeChart& chart, const Grid3D& grid,
                         const VectorXd& field, const BulkGradient& grad,
                         double t, double s, double eps,
                         const QuadDensity& quad) {
    DiskAverage out;
    const GaussRule gr = gauss_legendre(quad.n_radial);
    const double dth = 2.0 * M_PI / quad.n_angular;
    double area = 0.0;
    for (int ir = 0; ir < quad.n_radial; ++ir) {
        const double r = eps * gr.x[ir];
        const double wr = eps * gr.w[ir] * r * dth;
        for (int ia = 0; ia < quad.n_angular; ++ia) {
            const double th = (ia + 0.5) * dth;
            const double nu = r * std::cos(th);
            const double om = r * std::sin(th);
            const Vec3 x = chart.point(t, s, nu, om);
            if (!grid.contains(x))
                throw DomainError("disk_average: cross-section leaves the grid");
            const Vec3 gx(grid.interpolate(grad.gx, x),
                          grid.interpolate(grad.gy, x),
                          grid.interpolate(grad.gz, x));
            out.value += wr * grid.interpolate(field, x);
            out.grad += wr * (chart.grad_F(t, s, nu, om).transpose() * gx);
            area += wr;
        }
    }
    out.value /= area;
    out.grad /= area;
    return out;
}

DiskAverage disk_average(const TubeChart& chart, const Grid3D& grid,
                         const BulkField& field, double t, double s, double eps,
                         const QuadDensity& quad) {
    const BulkGradient g = bulk_gradient(grid, field.values);
    return disk_average(chart, grid, field.values, g, t, s, eps, quad);
}

} // namespace ccflow
