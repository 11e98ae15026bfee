#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccflow/quadrature.hpp"

#include <random>

using namespace ccflow;

namespace {

CurveSpec axis_segment() { return make_segment(Vec3(0, 0, 0), Vec3(1, 0, 0)); }
CurveSpec cube_segment() {
    return make_segment(Vec3(0, 0.5, 0.5), Vec3(1, 0.5, 0.5));
}

// reference integrals of the collar pieces for a straight segment (J = 1),
// computed by hand from the lateral / cap / edge-fan decomposition
double flat_collar_volume(double eps, double delta) {
    return M_PI * (2 * eps * delta + delta * delta)      // lateral
           + 2 * M_PI * eps * eps * delta                 // caps
           + M_PI * M_PI * eps * delta * delta            // edge fans
           + 4.0 * M_PI * delta * delta * delta / 3.0;
}
double collar_chi_integral(double eps, double delta) {
    return M_PI * eps * delta + M_PI * delta * delta / 3.0 // lateral
           + M_PI * eps * eps * delta                      // caps
           + M_PI * M_PI * eps * delta * delta / 3.0       // edge fans
           + M_PI * delta * delta * delta / 3.0;
}

} // namespace

TEST_CASE("gauss_legendre integrates polynomials exactly") {
    for (int n : {1, 2, 4, 8, 16}) {
        const GaussRule g = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += g.w[i] * std::pow(g.x[i], k);
            CHECK(acc == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("tube_integral over core and full tube") {
    TubeChart seg(axis_segment(), 0.1);
    const CapacityParams p{0.1, 0.05, 0.01};
    auto one = [](double, double, double) { return 1.0; };

    CHECK(tube_integral(seg, p, one, 0.0, TubeRegion::Core) ==
          doctest::Approx(M_PI * 0.05 * 0.05).epsilon(1e-12));
    CHECK(tube_integral(seg, p, one, 0.0, TubeRegion::FullTube) ==
          doctest::Approx(M_PI * 0.1 * 0.1 * 1.2).epsilon(1e-12));

    // arc: J_F = R - nu integrates to pi eps^2 R over the core
    const double R = 0.3;
    TubeChart arc(make_arc(R, Vec3::Zero(), 0.0), 0.1);
    CHECK(tube_integral(arc, p, one, 0.0, TubeRegion::Core) ==
          doctest::Approx(M_PI * 0.05 * 0.05 * R).epsilon(1e-10));
}

TEST_CASE("collar quadrature matches the reference decomposition") {
    TubeChart seg(axis_segment(), 0.1);
    const CapacityParams p{0.1, 0.05, 0.01};
    auto one = [](double, double, double) { return 1.0; };
    CHECK(tube_integral(seg, p, one, 0.0, TubeRegion::Collar) ==
          doctest::Approx(flat_collar_volume(p.eps, p.delta)).epsilon(1e-12));
    auto chi = [&p](double s, double nu, double om) {
        return zeta_tube(p, s, nu, om);
    };
    CHECK(tube_integral(seg, p, chi, 0.0, TubeRegion::Collar) ==
          doctest::Approx(collar_chi_integral(p.eps, p.delta)).epsilon(1e-12));
}

TEST_CASE("gap_measure: closed form, Monte Carlo, delta halving") {
    TubeChart seg(axis_segment(), 0.1);
    const CapacityParams p{0.1, 0.05, 0.01};
    const GapMeasure g = gap_measure(seg, p, 0.0);
    CHECK(g.flat ==
          doctest::Approx(flat_collar_volume(p.eps, p.delta)).epsilon(1e-12));
    CHECK(g.mapped == doctest::Approx(g.flat).epsilon(1e-12)); // J = 1

    // rejection sampling over a bounding box of the collar
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(0, 1);
    const double lo_s = -p.delta, hi_s = 1 + p.delta, r = p.eps + p.delta;
    const long n = 2'000'000;
    long hits = 0;
    for (long i = 0; i < n; ++i) {
        const double s = lo_s + (hi_s - lo_s) * u(rng);
        const double nu = r * (2 * u(rng) - 1);
        const double om = r * (2 * u(rng) - 1);
        const double d = dist_core(p.eps, s, nu, om);
        if (d > 0 && d < p.delta) ++hits;
    }
    const double mc = double(hits) / n * (hi_s - lo_s) * (2 * r) * (2 * r);
    CHECK(std::abs(mc - g.flat) / g.flat < 0.01);

    // linearity in delta: halving roughly halves the measure
    CapacityParams half = p;
    half.delta = p.delta / 2;
    const double ratio = gap_measure(seg, half, 0.0).flat / g.flat;
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);

    // mapped measure bounded by sup J_F times the flat measure
    TubeChart arc(make_arc(0.3, Vec3::Zero(), 0.0), 0.1);
    const GapMeasure ga = gap_measure(arc, p, 0.0);
    CHECK(ga.mapped <= (0.3 + 0.1) * ga.flat * (1 + 1e-12));
}

TEST_CASE("capacity_pairing") {
    TubeChart seg(cube_segment(), 0.1);
    const Grid3D grid = Grid3D::unit_cube(24);
    const CapacityParams p{0.1, 0.05, 0.01};
    auto zero = [](const Vec3&) { return 0.0; };
    auto onef = [](const Vec3&) { return 1.0; };

    CHECK(capacity_pairing(seg, p, zero, 0.0, grid) == 0.0);

    // closed-form tube volumes: background + (contrast-1)(core + collar chi)
    const double expected =
        1.0 + (p.contrast() - 1.0) * (M_PI * p.eps * p.eps +
                                      collar_chi_integral(p.eps, p.delta));
    CHECK(capacity_pairing(seg, p, onef, 0.0, grid) ==
          doctest::Approx(expected).epsilon(1e-10));

    // grid-resolved cross check at a coarse contrast
    const CapacityParams pc{0.1, 0.08, 0.015};
    const Grid3D fine = Grid3D::unit_cube(48);
    const double split = capacity_pairing(seg, pc, onef, 0.0, fine);
    const double direct =
        capacity_pairing(seg, pc, onef, 0.0, fine, PairingMode::Grid);
    CHECK(std::abs(split - direct) / split < 0.02);
}

TEST_CASE("capacity_limit_target analytic values") {
    TubeChart seg(cube_segment(), 0.1);
    const Grid3D grid = Grid3D::unit_cube(16);
    auto onef = [](const Vec3&) { return 1.0; };
    auto zero = [](const Vec3&) { return 0.0; };
    auto fx = [](const Vec3& x) { return x.x(); };

    CHECK(capacity_limit_target(seg, onef, 0.0, grid) ==
          doctest::Approx(1.0 + M_PI * 0.01).epsilon(1e-12));
    CHECK(capacity_limit_target(seg, zero, 0.0, grid) == 0.0);
    CHECK(capacity_limit_target(seg, fx, 0.0, grid) ==
          doctest::Approx(0.5 + M_PI * 0.01 * 0.5).epsilon(1e-10));
}

TEST_CASE("pairing converges to the limit target along the eps ladder") {
    TubeChart seg(cube_segment(), 0.1);
    const Grid3D grid = Grid3D::unit_cube(16);
    auto f = [](const Vec3& x) { return 1.0 + 0.3 * x.x(); };
    const double target = capacity_limit_target(seg, f, 0.0, grid);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 3; ++i) {
        const double eps = 0.1 / std::pow(2.0, i);
        const CapacityParams p{0.1, eps, eps * eps * eps};
        const double err =
            std::abs(capacity_pairing(seg, p, f, 0.0, grid) - target);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev / std::abs(target) < 1e-3);
}

TEST_CASE("disk_average") {
    TubeChart seg(cube_segment(), 0.1);
    const Grid3D grid = Grid3D::unit_cube(32);

    BulkField constant{VectorXd::Constant(grid.cells(), 2.5), 0.0};
    const DiskAverage dc = disk_average(seg, grid, constant, 0.0, 0.4, 0.05);
    CHECK(dc.value == doctest::Approx(2.5).epsilon(1e-13));
    CHECK(dc.grad.norm() < 1e-12);

    VectorXd linear(grid.cells());
    for (long c = 0; c < grid.cells(); ++c) linear[c] = grid.center(c).x();
    const DiskAverage dl =
        disk_average(seg, grid, BulkField{linear, 0.0}, 0.0, 0.4, 0.05);
    CHECK(dl.value == doctest::Approx(0.4).epsilon(1e-12));
    CHECK((dl.grad - Vec3(1, 0, 0)).norm() < 1e-10);

    // a disk that pokes through the grid boundary is rejected
    const Grid3D small(Vec3(0.2, 0.4, 0.4), Vec3(0.8, 0.6, 0.6), 16, 16, 16);
    CHECK_THROWS_AS(
        disk_average(seg, small, BulkField{VectorXd::Zero(small.cells()), 0.0},
                     0.0, 0.01, 0.05),
        DomainError);

    // smooth radial field against a dense quadrature of the closure
    const Grid3D fine = Grid3D::unit_cube(64);
    auto field_fn = [](const Vec3& x) {
        return std::exp(-(x - Vec3(0.5, 0.5, 0.5)).squaredNorm() / 0.2);
    };
    VectorXd smooth(fine.cells());
    for (long c = 0; c < fine.cells(); ++c) smooth[c] = field_fn(fine.center(c));
    const double s0 = 0.45;
    QuadDensity qd;
    qd.n_radial = 64;
    qd.n_angular = 128;
    double ref = 0.0, area = 0.0;
    const GaussRule gr = gauss_legendre(qd.n_radial);
    for (int ir = 0; ir < qd.n_radial; ++ir)
        for (int ia = 0; ia < qd.n_angular; ++ia) {
            const double r = 0.05 * gr.x[ir];
            const double th = 2 * M_PI * (ia + 0.5) / qd.n_angular;
            const double w = gr.w[ir] * r;
            ref += w * field_fn(seg.point(0.0, s0, r * std::cos(th),
                                          r * std::sin(th)));
            area += w;
        }
    ref /= area;
    const DiskAverage ds =
        disk_average(seg, fine, BulkField{smooth, 0.0}, 0.0, s0, 0.05);
    CHECK(std::abs(ds.value - ref) / ref < 1e-3);
}

TEST_CASE("line_integral uses the metric factor") {
    // arc parameterized by angle: |d_s Gamma| = R
    TubeChart arc(make_arc(0.3, Vec3::Zero(), 0.0), 0.1);
    const double len = line_integral(
        arc, [](double) { return 1.0; }, 0.0);
    CHECK(len == doctest::Approx(0.3).epsilon(1e-10));
}
