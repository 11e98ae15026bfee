#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccflow/limit_solver.hpp"

using namespace ccflow;

namespace {

CurveSpec inner_segment() {
    return make_segment(Vec3(0.2, 0.4, 0.5), Vec3(0.8, 0.4, 0.5));
}

} // namespace

TEST_CASE("xi_closure") {
    Grid1D mesh(21);
    MaterialParams m;

    // no-slip transport: v_c equals the chart velocity, xi vanishes
    TubeChart trans(make_translating_segment(Vec3(0.2, 0.4, 0.5),
                                             Vec3(0.8, 0.4, 0.5),
                                             Vec3(0, 0.2, 0)),
                    0.1);
    m.v_c = [](double, const Vec3&) { return Vec3(0, 0.2, 0); };
    CurveField uc{VectorXd::Constant(21, 3.0), 0.5};
    const XiPair none = xi_closure(trans, m, uc, mesh, 0.5);
    CHECK(none.xi_nu.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(none.xi_om.cwiseAbs().maxCoeff() < 1e-9);

    // static segment: grad F^-1 = I and d_t F = 0
    TubeChart seg(inner_segment(), 0.1);
    m.v_c = [](double, const Vec3&) { return Vec3(0, 0.3, 0); };
    m.k_n = [](double, double, double) { return 1.0; };
    CurveField two{VectorXd::Constant(21, 2.0), 0.0};
    const XiPair xi = xi_closure(seg, m, two, mesh, 0.0);
    for (int j = 0; j < 21; ++j) {
        CHECK(xi.xi_nu[j] == doctest::Approx(0.6).epsilon(1e-9));
        CHECK(std::abs(xi.xi_om[j]) < 1e-12);
    }

    // linear in u_c; zero field gives zero
    CurveField four{VectorXd::Constant(21, 4.0), 0.0};
    const XiPair xi2 = xi_closure(seg, m, four, mesh, 0.0);
    CHECK(xi2.xi_nu[10] == doctest::Approx(2.0 * xi.xi_nu[10]));
    CurveField zero{VectorXd::Zero(21), 0.0};
    const XiPair xi0 = xi_closure(seg, m, zero, mesh, 0.0);
    CHECK(xi0.xi_nu.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constants are exact steady states of the coupled solve") {
    TubeChart chart(inner_segment(), 0.1);
    MaterialParams m;
    m.u0 = [](const Vec3&) { return 1.7; };
    SolveConfig cfg;
    cfg.dt = 2e-3;
    cfg.t_end = 0.01;
    Grid3D grid = Grid3D::unit_cube(16);
    Grid1D mesh(33);
    const LimitRun run = run_limit(cfg, chart, 0.1, m, grid, mesh);
    CHECK((run.final_bulk.values.array() - 1.7).abs().maxCoeff() < 1e-10);
    CHECK((run.final_curve.values.array() - 1.7).abs().maxCoeff() < 1e-10);
}

TEST_CASE("combined mass conservation with transport and exchange") {
    TubeChart chart(make_translating_segment(Vec3(0.2, 0.4, 0.5),
                                             Vec3(0.8, 0.4, 0.5),
                                             Vec3(0, 0.2, 0)),
                    0.1);
    MaterialParams m;
    m.v = [](double, const Vec3& x) {
        return Vec3(-0.2 * (x.y() - 0.5), 0.2 * (x.x() - 0.5), 0.0);
    };
    m.v_c = [](double, const Vec3&) { return Vec3(0.25, 0.2, 0.05); };
    m.u0 = [](const Vec3& x) {
        return 1.0 + std::exp(-(x - Vec3(0.5, 0.45, 0.5)).squaredNorm() / 0.02);
    };
    SolveConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.02;
    Grid3D grid = Grid3D::unit_cube(24);
    Grid1D mesh(33);
    const LimitRun run = run_limit(cfg, chart, 0.1, m, grid, mesh);
    const double m0 = run.mass_bulk.front() + run.mass_curve.front();
    for (std::size_t k = 0; k < run.times.size(); ++k)
        CHECK(std::abs(run.mass_bulk[k] + run.mass_curve[k] - m0) /
                  std::abs(m0) <
              1e-8);
    // the exchange actually moves mass between the blocks
    CHECK(std::abs(run.mass_curve.back() - run.mass_curve.front()) > 1e-12);
}

TEST_CASE("weak_residual vanishes for the zero trajectory") {
    TubeChart chart(inner_segment(), 0.1);
    MaterialParams m;
    Grid3D grid = Grid3D::unit_cube(12);
    Grid1D mesh(17);
    const int K = 6;
    const double h = 0.01;
    std::vector<VectorXd> bulk(K, VectorXd::Zero(grid.cells()));
    std::vector<VectorXd> curve(K, VectorXd::Zero(mesh.nodes()));
    TrajectoryView tv;
    for (int k = 0; k < K; ++k) tv.times.push_back(h * k / (K - 1));
    tv.bulk = [&bulk](int k) -> const VectorXd& { return bulk[k]; };
    tv.curve = [&curve](int k) -> const VectorXd& { return curve[k]; };
    for (const TestFunction& phi : test_basket(h))
        CHECK(std::abs(weak_residual(chart, m, 0.1, tv, phi, grid, mesh)) <
              1e-14);
}

TEST_CASE("mass identity: the linear time cutoff recovers the mass series") {
    TubeChart chart(make_translating_segment(Vec3(0.2, 0.4, 0.5),
                                             Vec3(0.8, 0.4, 0.5),
                                             Vec3(0, 0.15, 0)),
                    0.1);
    MaterialParams m;
    m.v_c = [](double, const Vec3&) { return Vec3(0.2, 0.15, 0.0); };
    m.u0 = [](const Vec3& x) {
        return 1.0 + std::exp(-(x - Vec3(0.5, 0.45, 0.5)).squaredNorm() / 0.02);
    };
    SolveConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;
    Grid3D grid = Grid3D::unit_cube(16);
    Grid1D mesh(33);
    const LimitRun run = run_limit(cfg, chart, 0.1, m, grid, mesh);
    const TrajectoryView tv = view_of(run);

    // phi = c (1 - t/h): residual reduces to (c/h) int (M(t) - M(0)) dt
    const TestFunction phi = test_basket(cfg.t_end)[0];
    const double resid = weak_residual(chart, m, 0.1, tv, phi, grid, mesh);
    std::vector<double> drift(run.times.size());
    const double m0 = run.mass_bulk.front() + run.mass_curve.front();
    for (std::size_t k = 0; k < run.times.size(); ++k)
        drift[k] = run.mass_bulk[k] + run.mass_curve[k] - m0;
    double expected = 0.0;
    for (std::size_t k = 0; k + 1 < drift.size(); ++k)
        expected += 0.5 * (run.times[k + 1] - run.times[k]) *
                    (drift[k] + drift[k + 1]) / cfg.t_end;
    CHECK(resid == doctest::Approx(expected).epsilon(1e-8));
    CHECK(std::abs(resid) < 1e-8 * std::abs(m0)); // conservative trajectory
}

TEST_CASE("weak residual decreases under refinement") {
    TubeChart chart(make_translating_segment(Vec3(0.2, 0.4, 0.5),
                                             Vec3(0.8, 0.4, 0.5),
                                             Vec3(0, 0.15, 0)),
                    0.1);
    MaterialParams m;
    m.v_c = [](double, const Vec3&) { return Vec3(0.2, 0.15, 0.0); };
    m.u0 = [](const Vec3& x) {
        return 1.0 + std::exp(-(x - Vec3(0.5, 0.45, 0.5)).squaredNorm() / 0.04);
    };
    const double h = 0.02;
    // the whole discretization family refines together: grid, curve mesh,
    // time step
    auto max_resid = [&](int n, int n_s, double dt) {
        SolveConfig cfg;
        cfg.dt = dt;
        cfg.t_end = h;
        const Grid3D grid = Grid3D::unit_cube(n);
        const Grid1D mesh(n_s);
        const LimitRun run = run_limit(cfg, chart, 0.1, m, grid, mesh);
        const TrajectoryView tv = view_of(run);
        double worst = 0.0;
        // skip the pure cutoff (index 0): it measures mass drift, not
        // discretization error
        const auto basket = test_basket(h);
        for (std::size_t i = 1; i < basket.size(); ++i)
            worst = std::max(
                worst, std::abs(weak_residual(chart, m, 0.1, tv, basket[i],
                                              grid, mesh)));
        return worst;
    };
    const double coarse = max_resid(16, 17, 2e-3);
    const double fine = max_resid(32, 33, 1e-3);
    CHECK(fine < coarse);
}
