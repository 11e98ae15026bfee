#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccflow/approx_solver.hpp"

using namespace ccflow;

namespace {

CurveSpec inner_segment() {
    return make_segment(Vec3(0.2, 0.4, 0.5), Vec3(0.8, 0.4, 0.5));
}

MaterialParams quiet_materials(double c0) {
    MaterialParams m;
    m.k0 = 1.0;
    m.theta = 0.5;
    m.u0 = [c0](const Vec3&) { return c0; };
    return m;
}

// manufactured-solution source by finite differences of the closures;
// independent of the assembly path
SourceField mms_source(const std::function<double(double, const Vec3&)>& uex,
                       const std::function<double(double, const Vec3&)>& a,
                       const std::function<Vec3(double, const Vec3&)>& kdiag,
                       const std::function<Vec3(double, const Vec3&)>& vel) {
    return [=](double t, const Vec3& x) {
        const double ht = 1e-5, hx = 1e-4;
        double g = (a(t + ht, x) * uex(t + ht, x) -
                    a(t - ht, x) * uex(t - ht, x)) /
                   (2 * ht);
        for (int d = 0; d < 3; ++d) {
            Vec3 xp = x, xm = x;
            xp[d] += hx;
            xm[d] -= hx;
            // -d_d(K_dd d_d u) + d_d(u v_d), each by nested central diffs
            auto flux = [&](const Vec3& y) {
                Vec3 yp = y, ym = y;
                yp[d] += hx;
                ym[d] -= hx;
                const double du = (uex(t, yp) - uex(t, ym)) / (2 * hx);
                return -kdiag(t, y)[d] * du + uex(t, y) * vel(t, y)[d];
            };
            g += (flux(xp) - flux(xm)) / (2 * hx);
        }
        return g;
    };
}

CellCoefficients fill_coefficients(
    const Grid3D& grid, double t,
    const std::function<double(double, const Vec3&)>& a,
    const std::function<Vec3(double, const Vec3&)>& kdiag,
    const std::function<Vec3(double, const Vec3&)>& vel) {
    CellCoefficients c;
    c.a.resize(grid.cells());
    c.k_diag.resize(grid.cells());
    c.v.resize(grid.cells());
    for (long i = 0; i < grid.cells(); ++i) {
        const Vec3 x = grid.center(i);
        c.a[i] = a(t, x);
        c.k_diag[i] = kdiag(t, x);
        c.v[i] = vel(t, x);
    }
    return c;
}

} // namespace

TEST_CASE("constants are exact steady states") {
    TubeChart chart(inner_segment(), 0.1);
    CapacityParams p{0.1, 0.05, 1.25e-4};
    MaterialParams m = quiet_materials(2.0);
    SolveConfig cfg;
    cfg.dt = 2e-3;
    cfg.t_end = 0.02;
    cfg.record_profiles = false;
    Grid3D grid = Grid3D::unit_cube(16);
    const ApproxRun run = run_approx(cfg, p, m, chart, grid);
    CHECK((run.final_field.values.array() - 2.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("single cell: mass balance against the capacity change") {
    const Grid3D cell(Vec3::Zero(), Vec3::Ones(), 1, 1, 1);
    CellCoefficients coeffs;
    coeffs.a = VectorXd::Constant(1, 4.0);
    coeffs.k_diag.assign(1, Vec3::Ones());
    coeffs.v.assign(1, Vec3::Zero());
    VectorXd a_old = VectorXd::Constant(1, 2.0);
    VectorXd u_old = VectorXd::Constant(1, 1.0);
    const SparseSystem sys = assemble_step(cell, a_old, coeffs, u_old, 0.1, 0.1);
    const VectorXd u = linear_solve(sys, 1e-13, 10);
    CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-12)); // u a^n / a^{n+1}
}

TEST_CASE("mass conservation with a moving curve and advection") {
    TubeChart chart(TubeChart(make_translating_segment(Vec3(0.2, 0.4, 0.5),
                                                       Vec3(0.8, 0.4, 0.5),
                                                       Vec3(0, 0.2, 0)),
                              0.1));
    CapacityParams p{0.1, 0.05, 1.25e-4};
    MaterialParams m;
    m.k0 = 1.0;
    m.theta = 0.5;
    m.v = [](double, const Vec3& x) {
        return Vec3(-0.2 * (x.y() - 0.5), 0.2 * (x.x() - 0.5), 0.0);
    };
    m.v_c = [](double, const Vec3&) { return Vec3(0.3, 0.2, 0.1); };
    m.u0 = [](const Vec3& x) {
        return 1.0 + std::exp(-(x - Vec3(0.5, 0.45, 0.5)).squaredNorm() / 0.02);
    };
    SolveConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.02;
    cfg.record_profiles = false;
    Grid3D grid = Grid3D::unit_cube(24);
    const ApproxRun run = run_approx(cfg, p, m, chart, grid);
    for (const double mass : run.mass)
        CHECK(std::abs(mass - run.mass.front()) / run.mass.front() < 1e-8);
}

TEST_CASE("maximum principle surrogate for pure diffusion") {
    TubeChart chart(inner_segment(), 0.1);
    CapacityParams p{0.1, 0.05, 1.25e-4};
    MaterialParams m = quiet_materials(0.0);
    m.u0 = [](const Vec3& x) {
        return 0.3 + 0.5 * std::exp(-(x - Vec3(0.4, 0.5, 0.5)).squaredNorm() /
                                    0.01);
    };
    SolveConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;
    cfg.record_profiles = false;
    Grid3D grid = Grid3D::unit_cube(20);
    const ApproxRun run = run_approx(cfg, p, m, chart, grid);
    const double lo = run.initial.values.minCoeff();
    const double hi = run.initial.values.maxCoeff();
    CHECK(run.final_field.values.minCoeff() >= lo - 1e-8);
    CHECK(run.final_field.values.maxCoeff() <= hi + 1e-8);
}

TEST_CASE("energy: pure diffusion with unit capacity decays") {
    TubeChart chart(inner_segment(), 0.1);
    // eps ~ eps0 keeps the contrast at 1.5^2; a is still nontrivial
    CapacityParams p{0.1, 0.0999, 1e-8};
    MaterialParams m = quiet_materials(0.0);
    m.u0 = [](const Vec3& x) { return std::cos(M_PI * x.x()); };
    SolveConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;
    cfg.record_profiles = false;
    Grid3D grid = Grid3D::unit_cube(16);
    const ApproxRun run = run_approx(cfg, p, m, chart, grid);
    for (std::size_t k = 1; k < run.energy_au2.size(); ++k)
        CHECK(run.energy_au2[k] <= run.energy_au2[k - 1] * (1 + 1e-12));
    const EnergyReport er = energy_report(run);
    CHECK(er.sup_au2 == doctest::Approx(run.energy_au2.front()));

    // zero initial data stays identically zero
    MaterialParams z = quiet_materials(0.0);
    const ApproxRun zrun = run_approx(cfg, p, z, chart, grid);
    const EnergyReport zer = energy_report(zrun);
    CHECK(zer.sup_au2 == 0.0);
    CHECK(zer.int_a_grad2 == 0.0);
    CHECK(zer.initial_au02 == 0.0);
}

TEST_CASE("manufactured solution: second order in space") {
    auto uex = [](double, const Vec3& x) {
        return std::cos(M_PI * x.x()) * std::cos(2 * M_PI * x.y()) *
               std::cos(M_PI * x.z());
    };
    auto a = [](double, const Vec3& x) {
        return 1.0 + 0.5 * std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
    };
    auto kdiag = [](double, const Vec3& x) {
        return Vec3(1.0 + 0.3 * std::sin(M_PI * x.x()),
                    1.0 + 0.2 * std::cos(M_PI * x.y()),
                    1.0 + 0.1 * std::sin(M_PI * x.z()));
    };
    auto vel = [](double, const Vec3&) { return Vec3::Zero(); };
    const SourceField src = mms_source(uex, a, kdiag, vel);

    std::vector<double> errors;
    for (int n : {8, 16, 32}) {
        const Grid3D grid = Grid3D::unit_cube(n);
        VectorXd u(grid.cells());
        for (long c = 0; c < grid.cells(); ++c)
            u[c] = uex(0.0, grid.center(c));
        const double dt = 0.05;
        for (int step = 1; step <= 3; ++step) {
            const double t = step * dt;
            const CellCoefficients cnew =
                fill_coefficients(grid, t, a, kdiag, vel);
            const CellCoefficients cold =
                fill_coefficients(grid, t - dt, a, kdiag, vel);
            const SparseSystem sys =
                assemble_step(grid, cold.a, cnew, u, t, dt, src);
            u = linear_solve(sys, 1e-13, 4000, nullptr, &u);
        }
        double err = 0.0;
        for (long c = 0; c < grid.cells(); ++c)
            err = std::max(err, std::abs(u[c] - uex(0.15, grid.center(c))));
        errors.push_back(err);
    }
    const double order1 = std::log2(errors[0] / errors[1]);
    const double order2 = std::log2(errors[1] / errors[2]);
    CHECK(order1 > 1.8);
    CHECK(order2 > 1.8);
}

TEST_CASE("manufactured solution: first order in time") {
    auto uex = [](double t, const Vec3& x) {
        return (1.0 + 0.4 * std::sin(2 * M_PI * t)) *
               (1.0 + 0.5 * std::cos(M_PI * x.x()) * std::cos(M_PI * x.y()));
    };
    auto a = [](double t, const Vec3& x) {
        return 1.5 + 0.4 * std::cos(M_PI * x.x()) * std::sin(2 * M_PI * t);
    };
    auto kdiag = [](double, const Vec3&) { return Vec3(1.0, 0.8, 1.2); };
    auto vel = [](double, const Vec3& x) {
        return Vec3(0.3 * std::sin(M_PI * x.x()), 0.2 * std::sin(M_PI * x.y()),
                    0.0);
    };
    const SourceField src = mms_source(uex, a, kdiag, vel);
    const Grid3D grid = Grid3D::unit_cube(16);
    const double t_end = 0.2;

    auto solve_with = [&](int n_steps) {
        const double dt = t_end / n_steps;
        VectorXd u(grid.cells());
        for (long c = 0; c < grid.cells(); ++c)
            u[c] = uex(0.0, grid.center(c));
        for (int step = 1; step <= n_steps; ++step) {
            const double t = step * dt;
            const CellCoefficients cnew =
                fill_coefficients(grid, t, a, kdiag, vel);
            const CellCoefficients cold =
                fill_coefficients(grid, t - dt, a, kdiag, vel);
            const SparseSystem sys =
                assemble_step(grid, cold.a, cnew, u, t, dt, src);
            u = linear_solve(sys, 1e-13, 4000, nullptr, &u);
        }
        return u;
    };
    // Richardson in dt on a fixed grid isolates the time order
    const VectorXd u1 = solve_with(8);
    const VectorXd u2 = solve_with(16);
    const VectorXd u3 = solve_with(32);
    const double d12 = (u1 - u2).norm();
    const double d23 = (u2 - u3).norm();
    const double order = std::log2(d12 / d23);
    CHECK(order > 0.85);
    CHECK(order < 1.35);
}

TEST_CASE("disk-average self-convergence under grid refinement") {
    TubeChart chart(inner_segment(), 0.1);
    CapacityParams p{0.1, 0.05, 1.25e-4};
    MaterialParams m = quiet_materials(0.0);
    m.v_c = [](double, const Vec3&) { return Vec3(0.2, 0.0, 0.1); };
    m.u0 = [](const Vec3& x) {
        return 1.0 + std::exp(-(x - Vec3(0.5, 0.45, 0.5)).squaredNorm() / 0.02);
    };
    SolveConfig cfg;
    cfg.dt = 2e-3;
    cfg.t_end = 0.01;
    cfg.profile_nodes = 33;
    Grid1D mesh(33);

    std::vector<std::vector<VectorXd>> profiles;
    for (int n : {12, 24, 48}) {
        const ApproxRun run = run_approx(cfg, p, m, chart, Grid3D::unit_cube(n));
        profiles.push_back(run.disk_u);
    }
    auto dist = [&](const std::vector<VectorXd>& A,
                    const std::vector<VectorXd>& B) {
        double acc = 0.0;
        for (std::size_t k = 0; k < A.size(); ++k)
            for (int j = 0; j < mesh.nodes(); ++j)
                acc += mesh.cv_width(j) * std::pow(A[k][j] - B[k][j], 2);
        return std::sqrt(acc);
    };
    const double d1 = dist(profiles[0], profiles[1]);
    const double d2 = dist(profiles[1], profiles[2]);
    CHECK(d2 < d1);
}

TEST_CASE("runs are deterministic") {
    TubeChart chart(inner_segment(), 0.1);
    CapacityParams p{0.1, 0.05, 1.25e-4};
    MaterialParams m = quiet_materials(0.0);
    m.u0 = [](const Vec3& x) { return x.x() + 0.2 * x.y(); };
    SolveConfig cfg;
    cfg.dt = 2e-3;
    cfg.t_end = 0.006;
    cfg.record_profiles = false;
    Grid3D grid = Grid3D::unit_cube(12);
    const ApproxRun r1 = run_approx(cfg, p, m, chart, grid);
    const ApproxRun r2 = run_approx(cfg, p, m, chart, grid);
    CHECK((r1.final_field.values - r2.final_field.values).norm() == 0.0);
    for (std::size_t k = 0; k < r1.mass.size(); ++k)
        CHECK(r1.mass[k] == r2.mass[k]);
}
