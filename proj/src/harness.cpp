#include "ccflow/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <random>

namespace ccflow {

int thread_cap() {
    const char* env = std::getenv("CCFLOW_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
}

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

/// Runs fn(i) for i in [0, n), at most `cap` concurrently, in fixed waves.
void run_waves(int n, int cap, const std::function<void(int)>& fn) {
    if (cap <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    for (int start = 0; start < n; start += cap) {
        std::vector<std::future<void>> wave;
        for (int i = start; i < std::min(n, start + cap); ++i)
            wave.push_back(std::async(std::launch::async, fn, i));
        for (auto& f : wave) f.get();
    }
}

struct Worst {
    double value = 0.0;
    void track(double v) { value = std::max(value, std::abs(v)); }
};

} // namespace

GeometryReport run_geometry_suite(const TubeChart& chart, int n_samples,
                                  std::uint64_t seed) {
    GeometryReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Worst ortho, det1, tangent, jf, minv, ginv, block4, roundtrip;
    const double T = chart.t_end();

    for (int i = 0; i < n_samples; ++i) {
        const double t = T * unit(rng);
        const double s =
            chart.s_min() + (chart.s_max() - chart.s_min()) * unit(rng);
        const double r = chart.eps0() * std::sqrt(unit(rng)) * 0.999;
        const double th = 2.0 * M_PI * unit(rng);
        const double nu = r * std::cos(th), om = r * std::sin(th);

        const Frame f = chart.eval_frame(t, s);
        ortho.track(f.t.dot(f.n));
        ortho.track(f.t.dot(f.b));
        ortho.track(f.n.dot(f.b));
        ortho.track(f.t.norm() - 1.0);
        ortho.track(f.n.norm() - 1.0);
        ortho.track(f.b.norm() - 1.0);
        Mat3 R;
        R.col(0) = f.t;
        R.col(1) = f.n;
        R.col(2) = f.b;
        det1.track(R.determinant() - 1.0);
        const Vec3 g = chart.curve_tangent_raw(t, s);
        tangent.track((f.t - g / g.norm()).norm());

        const Mat3 gf = chart.grad_F(t, s, nu, om);
        const double jd = gf.determinant();
        jf.track((chart.det_J_F(t, s, nu, om) - jd) / jd);

        const Mat3 metric = gf.transpose() * gf;
        minv.track((chart.metric_inv(t, s, nu, om) * metric - Mat3::Identity())
                       .cwiseAbs()
                       .maxCoeff());
        ginv.track((gf * chart.inv_grad_F(t, s, nu, om) - Mat3::Identity())
                       .cwiseAbs()
                       .maxCoeff());
        block4.track((chart.inv_grad_F4(t, s, nu, om) *
                          chart.grad_F4(t, s, nu, om) -
                      Mat4::Identity())
                         .cwiseAbs()
                         .maxCoeff());

        const Vec3 x = chart.point(t, s, nu, om);
        const ChartCoords c = chart.invert(t, x);
        if (!c.inside) {
            roundtrip.track(1.0);
        } else {
            roundtrip.track((chart.point(t, c.s, c.nu, c.om) - x).norm());
        }
    }

    auto add = [&rep](const std::string& name, double worst, double tol) {
        rep.checks.push_back({name, worst <= tol, worst, tol, ""});
    };
    add("frame orthonormality", ortho.value, 1e-12);
    add("frame orientation det=+1", det1.value, 1e-12);
    add("tangent alignment", tangent.value, 1e-8);
    add("J_F closed form vs numeric det (rel)", jf.value, 1e-8);
    add("metric inverse identity", minv.value, 1e-10);
    add("grad F inverse identity", ginv.value, 1e-10);
    add("space-time block inverse identity", block4.value, 1e-8);
    add("chart inversion round trip", roundtrip.value, 1e-9);

    try {
        const double beta = chart.coercivity_beta(10);
        rep.checks.push_back({"coercivity beta > 0", beta > 0.0, beta, 0.0,
                              "min eigenvalue of (gradF^t gradF)^-1 J_F"});
    } catch (const ChartError& e) {
        rep.checks.push_back({"coercivity beta > 0", false, 0.0, 0.0, e.what()});
    }
    return rep;
}

GeometryReport run_coefficient_suite(const TubeChart& chart,
                                     const CapacityParams& p,
                                     const MaterialParams& m,
                                     const Vec3& box_lo, const Vec3& box_hi,
                                     int n_samples, std::uint64_t seed) {
    GeometryReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double T = chart.t_end();
    const double contrast = p.contrast();
    const double vsup = velocity_sup_norm(m, box_lo, box_hi, T);

    Worst zeta_range, a_low, ellipticity, advection, d_lip, d_grad;
    double a_sup = 0.0;
    const CurveSamples samples0 = chart.sample_curve(0.0);

    for (int i = 0; i < n_samples; ++i) {
        const double t = T * unit(rng);
        const CurveSamples samples =
            (t == 0.0) ? samples0 : chart.sample_curve(t);
        Vec3 x;
        for (int d = 0; d < 3; ++d)
            x[d] = box_lo[d] + (box_hi[d] - box_lo[d]) * unit(rng);
        // bias half the samples into the tube, where everything happens
        if (i % 2 == 0) {
            const double s =
                chart.s_min() + (chart.s_max() - chart.s_min()) * unit(rng);
            const double r = chart.eps0() * std::sqrt(unit(rng)) * 0.98;
            const double th = 2.0 * M_PI * unit(rng);
            x = chart.point(t, s, r * std::cos(th), r * std::sin(th));
        }

        const double z = zeta(chart, p, t, x, samples);
        zeta_range.track(std::min(0.0, z));
        zeta_range.track(std::max(0.0, z - 1.0));
        const double a = capacity_a(chart, p, t, x, samples);
        a_low.track(std::min(0.0, a - 1.0));
        a_sup = std::max(a_sup, a);

        const Mat3 K = diffusivity_K(chart, p, m, t, x, samples);
        Eigen::SelfAdjointEigenSolver<Mat3> es(K);
        ellipticity.track(std::min(0.0, es.eigenvalues().minCoeff() -
                                            m.theta * a + 1e-12));
        const Vec3 v = advection_v(chart, p, m, t, x, samples);
        advection.track(std::max(0.0, v.norm() - vsup * a - 1e-12));

        // distance function: 1-Lipschitz pairwise, |grad| = 1 off the core
        const double s1 = chart.s_min() +
                          (chart.s_max() - chart.s_min()) * unit(rng);
        const double nu1 = chart.eps0() * (2 * unit(rng) - 1);
        const double om1 = chart.eps0() * (2 * unit(rng) - 1);
        const double s2 = chart.s_min() +
                          (chart.s_max() - chart.s_min()) * unit(rng);
        const double nu2 = chart.eps0() * (2 * unit(rng) - 1);
        const double om2 = chart.eps0() * (2 * unit(rng) - 1);
        const double dd = std::abs(dist_core(p.eps, s1, nu1, om1) -
                                   dist_core(p.eps, s2, nu2, om2));
        const double sep = std::sqrt((s1 - s2) * (s1 - s2) +
                                     (nu1 - nu2) * (nu1 - nu2) +
                                     (om1 - om2) * (om1 - om2));
        d_lip.track(std::max(0.0, dd - sep * (1.0 + 1e-12)));
        const double d0 = dist_core(p.eps, s1, nu1, om1);
        if (d0 > 1e-3) {
            const double fd = 1e-6;
            Vec3 gnum((dist_core(p.eps, s1 + fd, nu1, om1) -
                       dist_core(p.eps, s1 - fd, nu1, om1)) /
                          (2 * fd),
                      (dist_core(p.eps, s1, nu1 + fd, om1) -
                       dist_core(p.eps, s1, nu1 - fd, om1)) /
                          (2 * fd),
                      (dist_core(p.eps, s1, nu1, om1 + fd) -
                       dist_core(p.eps, s1, nu1, om1 - fd)) /
                          (2 * fd));
            d_grad.track(gnum.norm() - 1.0);
        }
    }

    auto add = [&rep](const std::string& name, double worst, double tol,
                      const std::string& note = "") {
        rep.checks.push_back({name, worst <= tol, worst, tol, note});
    };
    add("zeta in [0,1]", zeta_range.value, 0.0);
    add("a >= 1", a_low.value, 0.0);
    rep.checks.push_back({"sup a <= contrast", a_sup <= contrast + 1e-12, a_sup,
                          contrast, ""});
    add("pointwise ellipticity q^t K q >= theta a |q|^2", ellipticity.value,
        0.0);
    add("advection bound |v| <= sup a", advection.value, 0.0);
    add("d_eps 1-Lipschitz", d_lip.value, 0.0);
    add("|grad d_eps| = 1 off core", d_grad.value, 1e-4);
    return rep;
}

CapacityLadderReport run_capacity_ladder(
    const TubeChart& chart, const std::function<double(const Vec3&)>& f,
    double t, const Grid3D& grid, int n_rungs, const QuadDensity& quad) {
    CapacityLadderReport rep;
    const double target = capacity_limit_target(chart, f, t, grid);
    const double scale = std::max(std::abs(target), 1e-300);
    for (int i = 1; i <= n_rungs; ++i) {
        CapacityRung rung;
        rung.eps = chart.eps0() / std::pow(2.0, i);
        rung.delta = rung.eps * rung.eps * rung.eps;
        CapacityParams p{chart.eps0(), rung.eps, rung.delta};
        rung.pairing = capacity_pairing(chart, p, f, t, grid,
                                        PairingMode::Split, quad);
        rung.target = target;
        rung.abs_error = std::abs(rung.pairing - target);
        rung.rel_error = rung.abs_error / scale;
        rep.rungs.push_back(rung);
    }
    rep.strictly_decreasing = true;
    for (std::size_t i = 1; i < rep.rungs.size(); ++i)
        if (!(rep.rungs[i].abs_error < rep.rungs[i - 1].abs_error))
            rep.strictly_decreasing = false;
    rep.final_rel_error = rep.rungs.empty() ? 0.0 : rep.rungs.back().rel_error;
    return rep;
}

EnergyLadderReport run_energy_ladder(
    const SolveConfig& cfg, const TubeChart& chart, double eps0,
    const MaterialParams& m, const std::vector<std::pair<double, int>>& rungs,
    DeltaRule rule, const Vec3& box_lo, const Vec3& box_hi,
    double uniform_factor) {
    EnergyLadderReport rep;
    rep.rungs.resize(rungs.size());
    run_waves(static_cast<int>(rungs.size()), thread_cap(), [&](int i) {
        const auto& [eps, grid_n] = rungs[i];
        EnergyRung& rung = rep.rungs[i];
        rung.eps = eps;
        rung.delta = delta_for(rule, eps, cfg.delta_explicit);
        rung.grid_n = grid_n;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            CapacityParams p{eps0, eps, rung.delta};
            Grid3D grid(box_lo, box_hi, grid_n, grid_n, grid_n);
            SolveConfig rcfg = cfg;
            rcfg.record_profiles = false;
            rcfg.snapshot_stride = 0;
            const ApproxRun run = run_approx(rcfg, p, m, chart, grid);
            rung.energy = energy_report(run);
            const double base = std::max(rung.energy.initial_au02, 1e-300);
            rung.norm_sup = rung.energy.sup_au2 / base;
            rung.norm_grad = rung.energy.int_a_grad2 / base;
        } catch (const std::exception& e) {
            rung.error = e.what();
        }
        rung.seconds = seconds_since(t0);
    });
    double first = 0.0;
    for (const auto& r : rep.rungs) {
        if (!r.error.empty()) continue;
        const double pair_norm = r.norm_sup + r.norm_grad;
        rep.bound_constant = std::max(rep.bound_constant, pair_norm);
        if (first == 0.0) first = pair_norm;
    }
    rep.uniform = first > 0.0 && rep.bound_constant <= uniform_factor * first;
    for (const auto& r : rep.rungs)
        if (!r.error.empty()) rep.uniform = false;
    return rep;
}

namespace {

/// L2(time x s) distance between two profile series on the same mesh.
double profile_distance(const std::vector<VectorXd>& a,
                        const std::vector<VectorXd>& b,
                        const std::vector<double>& times, const Grid1D& mesh) {
    const std::size_t K = std::min(a.size(), b.size());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        const double dt = times[k + 1] - times[k];
        double e0 = 0.0, e1 = 0.0;
        for (int j = 0; j < mesh.nodes(); ++j) {
            e0 += mesh.cv_width(j) * std::pow(a[k][j] - b[k][j], 2);
            e1 += mesh.cv_width(j) * std::pow(a[k + 1][j] - b[k + 1][j], 2);
        }
        acc += 0.5 * dt * (e0 + e1);
    }
    return std::sqrt(acc);
}

double profile_norm(const std::vector<VectorXd>& a,
                    const std::vector<double>& times, const Grid1D& mesh) {
    std::vector<VectorXd> zero(a.size(), VectorXd::Zero(a.empty() ? 0 : a[0].size()));
    return profile_distance(a, zero, times, mesh);
}

} // namespace

ComparisonReport run_limit_comparison(
    const SolveConfig& cfg, const TubeChart& chart, double eps0,
    const MaterialParams& m, const Grid3D& limit_grid, const Grid1D& mesh,
    const std::vector<std::pair<double, int>>& rungs, DeltaRule rule,
    const Vec3& box_lo, const Vec3& box_hi) {
    ComparisonReport rep;

    SolveConfig lim_cfg = cfg;
    lim_cfg.bulk_series_stride = 1;
    const LimitRun limit = run_limit(lim_cfg, chart, eps0, m, limit_grid, mesh);

    // xi-closure prediction from the limit solver's curve field, per step
    std::vector<VectorXd> xi_nu_pred, xi_om_pred;
    for (std::size_t k = 0; k < limit.times.size(); ++k) {
        const CurveField cf{limit.uc_series[k], limit.times[k]};
        const XiPair xi = xi_closure(chart, m, cf, mesh, limit.times[k]);
        xi_nu_pred.push_back(xi.xi_nu);
        xi_om_pred.push_back(xi.xi_om);
    }

    std::vector<std::vector<VectorXd>> all_profiles(rungs.size());
    std::vector<std::vector<double>> all_times(rungs.size());
    rep.rungs.resize(rungs.size());

    run_waves(static_cast<int>(rungs.size()), thread_cap(), [&](int ri) {
        const auto& [eps, grid_n] = rungs[ri];
        ComparisonRung& rung = rep.rungs[ri];
        rung.eps = eps;
        rung.delta = delta_for(rule, eps, cfg.delta_explicit);
        rung.grid_n = grid_n;
        const auto t0 = std::chrono::steady_clock::now();

        CapacityParams p{eps0, eps, rung.delta};
        Grid3D grid(box_lo, box_hi, grid_n, grid_n, grid_n);
        SolveConfig rcfg = cfg;
        rcfg.record_profiles = true;
        rcfg.profile_nodes = mesh.nodes();
        rcfg.snapshot_stride = std::max(
            1, int(std::llround(cfg.t_end / cfg.dt)) / 8);
        const ApproxRun run = run_approx(rcfg, p, m, chart, grid);

        rung.dist_uc = profile_distance(run.disk_u, limit.uc_series, run.times,
                                        mesh) /
                       std::max(profile_norm(limit.uc_series, limit.times, mesh),
                                1e-300);

        // transverse disk gradients against the closure prediction
        {
            double num = 0.0, den = 0.0;
            const std::size_t K =
                std::min(run.disk_dnu.size(), xi_nu_pred.size());
            for (std::size_t k = 0; k + 1 < K; ++k) {
                const double dt = run.times[k + 1] - run.times[k];
                for (int j = 0; j < mesh.nodes(); ++j) {
                    const double w = mesh.cv_width(j) * dt;
                    num += w * (std::pow(run.disk_dnu[k][j] - xi_nu_pred[k][j], 2) +
                                std::pow(run.disk_dom[k][j] - xi_om_pred[k][j], 2));
                    den += w * (std::pow(xi_nu_pred[k][j], 2) +
                                std::pow(xi_om_pred[k][j], 2));
                }
            }
            rung.xi_rel_diff = std::sqrt(num / std::max(den, 1e-300));
        }

        // bulk distance outside the eps0-tube, at snapshot times
        {
            double acc = 0.0, tspan = 0.0;
            for (const auto& [t, field] : run.snapshots) {
                // find the matching limit step
                std::size_t kl = 0;
                for (std::size_t k = 0; k < limit.bulk_series.size(); ++k)
                    if (std::abs(limit.bulk_series[k].first - t) <
                        std::abs(limit.bulk_series[kl].first - t))
                        kl = k;
                const CurveSamples cs = chart.sample_curve(t);
                double e = 0.0;
                for (long c = 0; c < grid.cells(); ++c) {
                    const Vec3 x = grid.center(c);
                    double dmin = std::numeric_limits<double>::infinity();
                    for (const Vec3& q : cs.p)
                        dmin = std::min(dmin, (q - x).squaredNorm());
                    if (dmin < (eps0 + cs.max_gap) * (eps0 + cs.max_gap))
                        continue;
                    const double ul =
                        limit_grid.interpolate(limit.bulk_series[kl].second, x);
                    e += std::pow(field[c] - ul, 2) * grid.cell_volume();
                }
                acc += e;
                tspan += 1.0;
            }
            rung.dist_bulk_out = std::sqrt(acc / std::max(tspan, 1.0));
        }

        // the rung's own pair (u, disk average) against the weak identity
        {
            TrajectoryView tv;
            std::vector<int> prof_idx;
            for (const auto& [t, f] : run.snapshots) {
                tv.times.push_back(t);
                int best = 0;
                for (std::size_t k = 0; k < run.times.size(); ++k)
                    if (std::abs(run.times[k] - t) <
                        std::abs(run.times[best] - t))
                        best = int(k);
                prof_idx.push_back(best);
            }
            tv.bulk = [&run](int k) -> const VectorXd& {
                return run.snapshots[k].second;
            };
            tv.curve = [&run, prof_idx](int k) -> const VectorXd& {
                return run.disk_u[prof_idx[k]];
            };
            for (const TestFunction& phi : test_basket(cfg.t_end))
                rung.weak_resid_max =
                    std::max(rung.weak_resid_max,
                             std::abs(weak_residual(chart, m, eps0, tv, phi,
                                                    grid, mesh)));
        }

        rung.seconds = seconds_since(t0);
        all_profiles[ri] = run.disk_u;
        all_times[ri] = run.times;
    });

    for (std::size_t i = 1; i < rep.rungs.size(); ++i)
        rep.rungs[i].cauchy_prev = profile_distance(
            all_profiles[i], all_profiles[i - 1], all_times[i], mesh);

    auto decreasing = [](auto get, const std::vector<ComparisonRung>& rungs,
                         std::size_t from) {
        for (std::size_t i = from + 1; i < rungs.size(); ++i)
            if (!(get(rungs[i]) < get(rungs[i - 1]))) return false;
        return rungs.size() >= from + 2;
    };
    rep.dist_decreasing = decreasing(
        [](const ComparisonRung& r) { return r.dist_uc; }, rep.rungs, 0);
    rep.cauchy_decreasing = decreasing(
        [](const ComparisonRung& r) { return r.cauchy_prev; }, rep.rungs, 1);
    rep.xi_decreasing = decreasing(
        [](const ComparisonRung& r) { return r.xi_rel_diff; }, rep.rungs, 0);
    return rep;
}

} // namespace ccflow
