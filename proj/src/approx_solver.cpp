#include "ccflow/approx_solver.hpp"

#include <cmath>

namespace ccflow {

QuadDensity scatter_density(const Grid3D& grid, const TubeChart& chart) {
    QuadDensity q;
    const double h = grid.spacing().minCoeff();
    // rough arc length of the extended curve at t = 0
    double len = 0.0;
    Vec3 prev = chart.curve().gamma(0.0, chart.s_min());
    for (int i = 1; i <= 64; ++i) {
        const double s =
            chart.s_min() + (chart.s_max() - chart.s_min()) * i / 64.0;
        const Vec3 p = chart.curve().gamma(0.0, s);
        len += (p - prev).norm();
        prev = p;
    }
    q.n_axial = std::max(64, int(4.0 * len / h));
    q.n_radial = std::max(12, int(4.0 * chart.eps0() / h) + 4);
    q.n_angular = 32;
    q.n_normal = 8;
    return q;
}

VectorXd sample_initial(const Grid3D& grid, const ScalarField3& u0) {
    VectorXd u(grid.cells());
    for (long c = 0; c < grid.cells(); ++c) u[c] = u0(grid.center(c));
    return u;
}

CellCoefficients build_cell_coefficients(const Grid3D& grid,
                                         const TubeChart& chart,
                                         const CapacityParams& p,
                                         const MaterialParams& m, double t,
                                         const QuadDensity& quad) {
    const long n = grid.cells();
    CellCoefficients c;
    c.a = VectorXd::Ones(n);
    c.k_diag.assign(n, Vec3::Constant(m.k0));
    c.v.resize(n);
    for (long i = 0; i < n; ++i) c.v[i] = m.v(t, grid.center(i));

    const double contrast = p.contrast();
    const double inv_vol = 1.0 / grid.cell_volume();

    auto scatter = [&](double s, double nu, double om, double w) {
        const double z = zeta_tube(p, s, nu, om);
        if (z == 0.0) return;
        const Vec3 x = chart.point(t, s, nu, om);
        if (!grid.contains(x)) {
            c.lost_mass += w * z;
            return;
        }
        int i, j, k;
        grid.locate(x, i, j, k);
        const long cell = grid.index(i, j, k);
        const double wz = w * z * inv_vol;
        c.a[cell] += (contrast - 1.0) * wz;
        const Mat3 kk = frame_diffusion_tensor(chart, m, t, s, nu, om);
        c.k_diag[cell] += wz * (contrast * kk.diagonal() - Vec3::Constant(m.k0));
        c.v[cell] += wz * (contrast * m.v_c(t, x) - m.v(t, x));
    };
    for_each_tube_node(chart, p, t, TubeRegion::Core, quad, scatter);
    for_each_tube_node(chart, p, t, TubeRegion::Collar, quad, scatter);
    return c;
}

SparseSystem assemble_step(const Grid3D& grid, const VectorXd& a_old,
                           const CellCoefficients& coeffs_new,
                           const VectorXd& u_old, double t_new, double dt,
                           const SourceField& source) {
    const long n = grid.cells();
    if (a_old.size() != n || coeffs_new.a.size() != n || u_old.size() != n)
        throw DomainError("assemble_step: size mismatch");

    SparseSystem sys;
    sys.A.resize(n, n);
    sys.rhs.resize(n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(7 * n);

    const Vec3 h = grid.spacing();
    const double V = grid.cell_volume();
    const double face_area[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
    const int nd[3] = {grid.nx(), grid.ny(), grid.nz()};

    VectorXd diag = VectorXd::Zero(n);
    for (long i = 0; i < n; ++i) {
        if (!std::isfinite(coeffs_new.a[i]) ||
            !coeffs_new.k_diag[i].allFinite() || !coeffs_new.v[i].allFinite())
            throw DomainError("assemble_step: non-finite coefficients");
        diag[i] = V * coeffs_new.a[i] / dt;
        sys.rhs[i] = V * a_old[i] * u_old[i] / dt;
        if (source) sys.rhs[i] += V * source(t_new, grid.center(i));
    }

    // interior faces, one direction at a time
    for (int d = 0; d < 3; ++d) {
        const double A = face_area[d];
        const double hd = h[d];
        for (int k = 0; k < nd[2]; ++k)
            for (int j = 0; j < nd[1]; ++j)
                for (int i = 0; i < nd[0]; ++i) {
                    int idx[3] = {i, j, k};
                    if (idx[d] + 1 >= nd[d]) continue;
                    const long cl = grid.index(i, j, k);
                    int ip = i, jp = j, kp = k;
                    (d == 0 ? ip : d == 1 ? jp : kp) += 1;
                    const long cr = grid.index(ip, jp, kp);

                    const double kl = coeffs_new.k_diag[cl][d];
                    const double kr = coeffs_new.k_diag[cr][d];
                    const double kf =
                        (kl > 0 && kr > 0) ? 2.0 * kl * kr / (kl + kr) : 0.0;
                    const double dcoef = A * kf / hd;

                    const double vn =
                        0.5 * (coeffs_new.v[cl][d] + coeffs_new.v[cr][d]);
                    const double up = A * std::max(vn, 0.0);
                    const double um = A * std::min(vn, 0.0);

                    // flux out of left cell: -kf (uR - uL)/h + up uL + um uR
                    trip.emplace_back(cl, cr, -dcoef + um);
                    diag[cl] += dcoef + up;
                    trip.emplace_back(cr, cl, -dcoef - up);
                    diag[cr] += dcoef - um;
                }
    }
    for (long i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i]);
    sys.A.setFromTriplets(trip.begin(), trip.end());
    (void)t_new;
    return sys;
}

namespace {

double weighted_mass(const Grid3D& grid, const VectorXd& a, const VectorXd& u) {
    return grid.cell_volume() * a.dot(u);
}

double weighted_energy(const Grid3D& grid, const VectorXd& a, const VectorXd& u) {
    return grid.cell_volume() * (a.array() * u.array().square()).sum();
}

double grad_energy_density(const Grid3D& grid, const VectorXd& a,
                           const VectorXd& u) {
    const BulkGradient g = bulk_gradient(grid, u);
    double acc = 0.0;
    for (long c = 0; c < grid.cells(); ++c)
        acc += a[c] * (g.gx[c] * g.gx[c] + g.gy[c] * g.gy[c] + g.gz[c] * g.gz[c]);
    return acc * grid.cell_volume();
}

} // namespace

ApproxRun run_approx(const SolveConfig& cfg, const CapacityParams& p,
                     const MaterialParams& m, const TubeChart& chart,
                     const Grid3D& grid, const QuadDensity& quad_in,
                     const SourceField& source) {
    cfg.validate();
    p.validate();
    ApproxRun run;
    const int n_steps = std::max(1, int(std::llround(cfg.t_end / cfg.dt)));
    const double dt = cfg.t_end / n_steps;

    QuadDensity quad = quad_in;
    if (quad.n_axial <= 0) quad = scatter_density(grid, chart);

    Grid1D mesh1(cfg.profile_nodes);
    VectorXd u = sample_initial(grid, m.u0);
    CellCoefficients coeffs = build_cell_coefficients(grid, chart, p, m, 0.0, quad);

    auto record = [&](double t, const VectorXd& uu, const VectorXd& aa) {
        run.times.push_back(t);
        run.mass.push_back(weighted_mass(grid, aa, uu));
        run.energy_au2.push_back(weighted_energy(grid, aa, uu));
        if (run.grad_energy.empty())
            run.grad_energy.push_back(0.0);
        else
            run.grad_energy.push_back(run.grad_energy.back() +
                                      dt * grad_energy_density(grid, aa, uu));
        if (cfg.record_profiles) {
            const BulkGradient g = bulk_gradient(grid, uu);
            VectorXd pu(mesh1.nodes()), ps(mesh1.nodes()), pn(mesh1.nodes()),
                po(mesh1.nodes());
            for (int j = 0; j < mesh1.nodes(); ++j) {
                const DiskAverage da =
                    disk_average(chart, grid, uu, g, t, mesh1.node(j), p.eps);
                pu[j] = da.value;
                ps[j] = da.grad[0];
                pn[j] = da.grad[1];
                po[j] = da.grad[2];
            }
            run.disk_u.push_back(pu);
            run.disk_ds.push_back(ps);
            run.disk_dnu.push_back(pn);
            run.disk_dom.push_back(po);
        }
    };

    record(0.0, u, coeffs.a);
    run.initial = BulkField{u, 0.0};
    if (cfg.snapshot_stride > 0) run.snapshots.push_back({0.0, u});

    for (int step = 1; step <= n_steps; ++step) {
        const double t_new = step * dt;
        VectorXd a_old = coeffs.a;
        coeffs = build_cell_coefficients(grid, chart, p, m, t_new, quad);
        SparseSystem sys =
            assemble_step(grid, a_old, coeffs, u, t_new, dt, source);
        SolveStats st;
        u = linear_solve(sys, cfg.tol, cfg.max_iters, &st, &u);
        run.linear_iterations_total += st.iterations;
        record(t_new, u, coeffs.a);
        if (cfg.snapshot_stride > 0 && (step % cfg.snapshot_stride == 0 ||
                                        step == n_steps))
            run.snapshots.push_back({t_new, u});
    }
    run.final_field = BulkField{u, cfg.t_end};
    return run;
}

EnergyReport energy_report(const ApproxRun& run) {
    EnergyReport r;
    for (const double e : run.energy_au2) r.sup_au2 = std::max(r.sup_au2, e);
    r.int_a_grad2 = run.grad_energy.empty() ? 0.0 : run.grad_energy.back();
    r.initial_au02 = run.energy_au2.empty() ? 0.0 : run.energy_au2.front();
    return r;
}

} // namespace ccflow
