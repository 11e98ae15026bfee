#include "ccflow/limit_solver.hpp"

#include <cmath>
#include <map>

namespace ccflow {

XiPair xi_closure(const TubeChart& chart, const MaterialParams& m,
                  const CurveField& uc, const Grid1D& mesh, double t) {
    XiPair xi;
    const int n = mesh.nodes();
    if (uc.values.size() != n)
        throw DomainError("xi_closure: field/mesh size mismatch");
    xi.xi_nu.resize(n);
    xi.xi_om.resize(n);
    for (int j = 0; j < n; ++j) {
        const double s = mesh.node(j);
        const Mat3 gi = chart.inv_grad_F(t, s, 0.0, 0.0);
        const Vec3 rel = m.v_c(t, chart.eval_curve(t, s)) -
                         chart.curve_velocity(t, s, 0.0, 0.0).value;
        const Vec3 w = gi * rel;
        const double kn = m.k_n(s, 0.0, 0.0);
        xi.xi_nu[j] = w[1] * uc.values[j] / kn;
        xi.xi_om[j] = w[2] * uc.values[j] / kn;
    }
    return xi;
}

namespace {

/// Sparse row of interpolation weights for the disk average of radius
/// r_avg at (t, s); weights sum to one.
void disk_weights(const TubeChart& chart, const Grid3D& grid, double t,
                  double s, double r_avg,
                  std::vector<std::pair<long, double>>& out) {
    out.clear();
    const GaussRule gr = gauss_legendre(4);
    const int n_ang = 8;
    const double dth = 2.0 * M_PI / n_ang;
    double total = 0.0;
    long idx[8];
    double w[8];
    for (int ir = 0; ir < 4; ++ir) {
        const double r = r_avg * gr.x[ir];
        const double wr = gr.w[ir] * r;
        for (int ia = 0; ia < n_ang; ++ia) {
            const double th = (ia + 0.5) * dth;
            const Vec3 x =
                chart.point(t, s, r * std::cos(th), r * std::sin(th));
            if (!grid.contains(x)) continue;
            const int cnt = grid.interpolation_stencil(x, idx, w);
            for (int q = 0; q < cnt; ++q) {
                out.emplace_back(idx[q], wr * w[q]);
                total += wr * w[q];
            }
        }
    }
    if (total <= 0.0)
        throw DomainError("exchange disk lies outside the grid");
    for (auto& e : out) e.second /= total;
}

/// Volume-fraction weights of the radius-r_avg tube around the j-th
/// s-cell; normalized to one (unit line density).
void delta_weights(const TubeChart& chart, const Grid3D& grid, double t,
                   double s_lo, double s_hi, double r_avg,
                   std::vector<std::pair<long, double>>& out) {
    out.clear();
    const GaussRule gr = gauss_legendre(4);
    const GaussRule gs = gauss_legendre(4);
    const int n_ang = 8;
    const double dth = 2.0 * M_PI / n_ang;
    std::map<long, double> acc;
    double total = 0.0;
    for (int is = 0; is < 4; ++is) {
        const double s = s_lo + (s_hi - s_lo) * gs.x[is];
        for (int ir = 0; ir < 4; ++ir) {
            const double r = r_avg * gr.x[ir];
            for (int ia = 0; ia < n_ang; ++ia) {
                const double th = (ia + 0.5) * dth;
                const double nu = r * std::cos(th), om = r * std::sin(th);
                const Vec3 x = chart.point(t, s, nu, om);
                if (!grid.contains(x)) continue;
                const double w =
                    gs.w[is] * gr.w[ir] * r * chart.det_J_F(t, s, nu, om);
                int i, j, k;
                grid.locate(x, i, j, k);
                acc[grid.index(i, j, k)] += w;
                total += w;
            }
        }
    }
    if (total <= 0.0)
        throw DomainError("line-delta tube lies outside the grid");
    out.assign(acc.begin(), acc.end());
    for (auto& e : out) e.second /= total;
}

} // namespace

LimitRun run_limit(const SolveConfig& cfg, const TubeChart& chart, double eps0,
                   const MaterialParams& m, const Grid3D& grid,
                   const Grid1D& mesh) {
    cfg.validate();
    LimitRun run;
    const long N = grid.cells();
    const int M = mesh.nodes();
    const int n_steps = std::max(1, int(std::llround(cfg.t_end / cfg.dt)));
    const double dt = cfg.t_end / n_steps;
    const double pi_e2 = M_PI * eps0 * eps0;
    const double h_mean = grid.spacing().mean();
    // keep the exchange tube within the chart's validated radius
    const double r_avg = std::min(cfg.r_avg_cells * h_mean, 0.75 * eps0);
    const double lambda =
        cfg.lambda_ex > 0 ? cfg.lambda_ex : m.k0 / (r_avg * r_avg);

    const Vec3 h = grid.spacing();
    const double V = grid.cell_volume();
    const double face_area[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
    const int nd[3] = {grid.nx(), grid.ny(), grid.nz()};

    VectorXd u = sample_initial(grid, m.u0);
    VectorXd uc(M);
    VectorXd g_old(M);
    for (int j = 0; j < M; ++j) {
        uc[j] = m.u0(chart.eval_curve(0.0, mesh.node(j)));
        g_old[j] = chart.curve_tangent_raw(0.0, mesh.node(j)).norm();
    }

    auto record = [&](double t, const VectorXd& gv) {
        run.times.push_back(t);
        run.mass_bulk.push_back(V * u.sum());
        double mc = 0.0;
        for (int j = 0; j < M; ++j) mc += gv[j] * uc[j] * mesh.cv_width(j);
        run.mass_curve.push_back(pi_e2 * mc);
        run.uc_series.push_back(uc);
    };
    record(0.0, g_old);
    run.initial_bulk = BulkField{u, 0.0};
    run.bulk_series.push_back({0.0, u});

    std::vector<std::pair<long, double>> dw, cw;

    for (int step = 1; step <= n_steps; ++step) {
        const double t_new = step * dt;
        VectorXd g_new(M), g_face(M - 1), w_rel(M - 1), k_face(M - 1);
        for (int j = 0; j < M; ++j)
            g_new[j] = chart.curve_tangent_raw(t_new, mesh.node(j)).norm();
        for (int j = 0; j + 1 < M; ++j) {
            const double sf = 0.5 * (mesh.node(j) + mesh.node(j + 1));
            g_face[j] = chart.curve_tangent_raw(t_new, sf).norm();
            const Mat3 gi = chart.inv_grad_F(t_new, sf, 0.0, 0.0);
            const Vec3 rel = m.v_c(t_new, chart.eval_curve(t_new, sf)) -
                             chart.curve_velocity(t_new, sf, 0.0, 0.0).value;
            w_rel[j] = (gi * rel)[0];
            k_face[j] = m.k_s(sf, 0.0, 0.0) / g_face[j]; // (k_s/g^2) * g
        }

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(9 * N + 40 * M);
        VectorXd rhs = VectorXd::Zero(N + M);
        VectorXd diag = VectorXd::Zero(N + M);

        for (long i = 0; i < N; ++i) {
            diag[i] = V / dt;
            rhs[i] = V * u[i] / dt;
        }
        // bulk faces: k0 diffusion plus upwinded background advection
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
                        Vec3 xf = grid.center(cl);
                        xf[d] += 0.5 * hd;
                        const double dcoef = A * m.k0 / hd;
                        const double vn = m.v(t_new, xf)[d];
                        const double up = A * std::max(vn, 0.0);
                        const double um = A * std::min(vn, 0.0);
                        trip.emplace_back(cl, cr, -dcoef + um);
                        diag[cl] += dcoef + up;
                        trip.emplace_back(cr, cl, -dcoef - up);
                        diag[cr] += dcoef - um;
                    }
        }
        // curve control volumes (rows scaled by pi eps0^2)
        for (int j = 0; j < M; ++j) {
            const long row = N + j;
            diag[row] = pi_e2 * g_new[j] * mesh.cv_width(j) / dt;
            rhs[row] = pi_e2 * g_old[j] * mesh.cv_width(j) * uc[j] / dt;
        }
        for (int j = 0; j + 1 < M; ++j) { // interior s-faces
            const double adv = w_rel[j] * g_face[j];
            const double ap = std::max(adv, 0.0), am = std::min(adv, 0.0);
            const double dc = k_face[j] / mesh.spacing();
            const long rl = N + j, rr = N + j + 1;
            trip.emplace_back(rl, rr, pi_e2 * (-dc + am));
            diag[rl] += pi_e2 * (dc + ap);
            trip.emplace_back(rr, rl, pi_e2 * (-dc - ap));
            diag[rr] += pi_e2 * (dc - am);
        }
        // exchange flux q_j = lambda (u_disk - uc_j), implicit in both blocks
        for (int j = 0; j < M; ++j) {
            const double s_lo = std::max(0.0, mesh.node(j) - 0.5 * mesh.spacing());
            const double s_hi = std::min(1.0, mesh.node(j) + 0.5 * mesh.spacing());
            delta_weights(chart, grid, t_new, s_lo, s_hi, r_avg, dw);
            disk_weights(chart, grid, t_new, mesh.node(j), r_avg, cw);
            const double Lj = g_new[j] * mesh.cv_width(j);
            // bulk sink rows
            for (const auto& [ci, wi] : dw) {
                const double f = pi_e2 * Lj * wi * lambda;
                for (const auto& [ck, wk] : cw) trip.emplace_back(ci, ck, f * wk);
                trip.emplace_back(ci, N + j, -f);
            }
            // curve source row
            const double fc = pi_e2 * lambda * Lj;
            for (const auto& [ck, wk] : cw)
                trip.emplace_back(N + j, ck, -fc * wk);
            diag[N + j] += fc;
        }
        for (long i = 0; i < N + M; ++i) trip.emplace_back(i, i, diag[i]);

        SparseSystem sys;
        sys.A.resize(N + M, N + M);
        sys.A.setFromTriplets(trip.begin(), trip.end());
        sys.rhs = rhs;

        VectorXd warm(N + M);
        warm.head(N) = u;
        warm.tail(M) = uc;
        SolveStats st;
        const VectorXd sol = linear_solve(sys, cfg.tol, cfg.max_iters, &st, &warm);
        run.linear_iterations_total += st.iterations;
        u = sol.head(N);
        uc = sol.tail(M);
        g_old = g_new;

        record(t_new, g_new);
        if (cfg.bulk_series_stride > 0 &&
            (step % cfg.bulk_series_stride == 0 || step == n_steps))
            run.bulk_series.push_back({t_new, u});
    }
    run.final_bulk = BulkField{u, cfg.t_end};
    run.final_curve = CurveField{uc, cfg.t_end};
    return run;
}

TestFunction constant_cutoff(double h, double value) {
    return {[h, value](double t, const Vec3&) { return value * (1.0 - t / h); },
            [h, value](double, const Vec3&) { return -value / h; },
            [](double, const Vec3&) { return Vec3(Vec3::Zero()); },
            "constant-cutoff"};
}

std::vector<TestFunction> test_basket(double h) {
    std::vector<TestFunction> basket;
    auto c = [h](double t) { return 1.0 - t / h; };
    const double cp = -1.0 / h;

    basket.push_back({[c](double t, const Vec3& x) { return c(t) * x.x(); },
                      [cp](double, const Vec3& x) { return cp * x.x(); },
                      [c](double t, const Vec3&) {
                          return Vec3(c(t), 0.0, 0.0);
                      },
                      "linear-x"});
    basket.push_back(
        {[c](double t, const Vec3& x) {
             return c(t) * std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
         },
         [cp](double, const Vec3& x) {
             return cp * std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
         },
         [c](double t, const Vec3& x) {
             return Vec3(
                 -c(t) * M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()),
                 -c(t) * M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y()),
                 0.0);
         },
         "cosine-xy"});
    const Vec3 x0(0.5, 0.45, 0.5);
    const double wsq = 0.15 * 0.15;
    basket.push_back(
        {[c, x0, wsq](double t, const Vec3& x) {
             return c(t) * std::exp(-(x - x0).squaredNorm() / wsq);
         },
         [cp, x0, wsq](double, const Vec3& x) {
             return cp * std::exp(-(x - x0).squaredNorm() / wsq);
         },
         [c, x0, wsq](double t, const Vec3& x) {
             return Vec3(-2.0 / wsq * c(t) *
                         std::exp(-(x - x0).squaredNorm() / wsq) * (x - x0));
         },
         "gaussian"});
    basket.push_back(
        {[c](double t, const Vec3& x) {
             return c(t) * (x.x() * x.x() + x.y() * x.z());
         },
         [cp](double, const Vec3& x) {
             return cp * (x.x() * x.x() + x.y() * x.z());
         },
         [c](double t, const Vec3& x) {
             return Vec3(c(t) * 2.0 * x.x(), c(t) * x.z(), c(t) * x.y());
         },
         "quadratic"});
    basket.push_back(
        {[c](double t, const Vec3& x) {
             return c(t) * std::sin(M_PI * x.y()) * x.z();
         },
         [cp](double, const Vec3& x) {
             return cp * std::sin(M_PI * x.y()) * x.z();
         },
         [c](double t, const Vec3& x) {
             return Vec3(0.0, c(t) * M_PI * std::cos(M_PI * x.y()) * x.z(),
                         c(t) * std::sin(M_PI * x.y()));
         },
         "sine-yz"});
    return basket;
}

TrajectoryView view_of(const LimitRun& run) {
    TrajectoryView v;
    // bulk_series carries its own times; uc is recorded at every step, so
    // align the curve samples with the bulk stride.
    std::vector<int> uc_idx;
    for (const auto& [t, f] : run.bulk_series) {
        v.times.push_back(t);
        int best = 0;
        double bd = std::abs(run.times[0] - t);
        for (std::size_t i = 1; i < run.times.size(); ++i)
            if (std::abs(run.times[i] - t) < bd) {
                bd = std::abs(run.times[i] - t);
                best = int(i);
            }
        uc_idx.push_back(best);
    }
    v.bulk = [&run](int k) -> const VectorXd& {
        return run.bulk_series[k].second;
    };
    v.curve = [&run, uc_idx](int k) -> const VectorXd& {
        return run.uc_series[uc_idx[k]];
    };
    return v;
}

double weak_residual(const TubeChart& chart, const MaterialParams& m,
                     double eps0, const TrajectoryView& traj,
                     const TestFunction& phi, const Grid3D& grid,
                     const Grid1D& mesh) {
    const std::vector<double>& times = traj.times;
    const int K = static_cast<int>(times.size());
    if (K < 2) throw DomainError("weak_residual: need at least two samples");
    const double pi_e2 = M_PI * eps0 * eps0;
    const int M = mesh.nodes();

    // ---- volume block -------------------------------------------------
    double vol = 0.0;
    {
        const VectorXd& u00 = traj.bulk(0);
        double init = 0.0;
        for (long c = 0; c < grid.cells(); ++c)
            init += phi.phi(times[0], grid.center(c)) * u00[c];
        vol -= init * grid.cell_volume();
    }
    std::vector<double> integrand(K, 0.0);
    for (int k = 0; k < K; ++k) {
        const double t = times[k];
        const VectorXd& uk = traj.bulk(k);
        const BulkGradient gk = bulk_gradient(grid, uk);
        double acc = 0.0;
        for (long c = 0; c < grid.cells(); ++c) {
            const Vec3 x = grid.center(c);
            const Vec3 gphi = phi.grad(t, x);
            const Vec3 gu(gk.gx[c], gk.gy[c], gk.gz[c]);
            acc += -phi.phi_t(t, x) * uk[c] + m.k0 * gphi.dot(gu) -
                   gphi.dot(m.v(t, x)) * uk[c];
        }
        integrand[k] = acc * grid.cell_volume();
    }
    for (int k = 0; k + 1 < K; ++k)
        vol += 0.5 * (times[k + 1] - times[k]) * (integrand[k] + integrand[k + 1]);

    // ---- line block ----------------------------------------------------
    double line = 0.0;
    {
        const VectorXd& uc0 = traj.curve(0);
        double init = 0.0;
        for (int j = 0; j < M; ++j) {
            const double s = mesh.node(j);
            const double g = chart.curve_tangent_raw(times[0], s).norm();
            init += mesh.cv_width(j) *
                    phi.phi(times[0], chart.eval_curve(times[0], s)) * uc0[j] * g;
        }
        line -= init;
    }
    std::vector<double> line_int(K, 0.0);
    for (int k = 0; k < K; ++k) {
        const double t = times[k];
        const VectorXd& uck = traj.curve(k);
        const CurveField cf{uck, t};
        const XiPair xi = xi_closure(chart, m, cf, mesh, t);
        double acc = 0.0;
        for (int j = 0; j < M; ++j) {
            const double s = mesh.node(j);
            const Vec3 gamma = chart.eval_curve(t, s);
            const double g = chart.curve_tangent_raw(t, s).norm();
            const Mat3 gF = chart.grad_F(t, s, 0.0, 0.0);
            const Mat3 gi = chart.inv_grad_F(t, s, 0.0, 0.0);
            const Vec3 dtF = chart.curve_velocity(t, s, 0.0, 0.0).value;
            // tube-coordinate derivatives of phi o F
            const Vec3 gphi = phi.grad(t, gamma);
            const double phit_tube = phi.phi_t(t, gamma) + gphi.dot(dtF);
            const Vec3 gphi_tube = gF.transpose() * gphi;
            const Vec3 A = gi * dtF;
            const Vec3 B = gi * m.v_c(t, gamma);
            double ducds;
            if (j == 0)
                ducds = (uck[1] - uck[0]) / mesh.spacing();
            else if (j == M - 1)
                ducds = (uck[M - 1] - uck[M - 2]) / mesh.spacing();
            else
                ducds = (uck[j + 1] - uck[j - 1]) / (2.0 * mesh.spacing());
            const Vec3 diff_vec(m.k_s(s, 0, 0) / (g * g) * ducds,
                                m.k_n(s, 0, 0) * xi.xi_nu[j],
                                m.k_n(s, 0, 0) * xi.xi_om[j]);
            double term = -(phit_tube - gphi_tube.dot(A)) * uck[j];
            term -= gphi_tube.dot(B) * uck[j];
            term += gphi_tube.dot(diff_vec);
            acc += mesh.cv_width(j) * term * g;
        }
        line_int[k] = acc;
    }
    for (int k = 0; k + 1 < K; ++k)
        line += 0.5 * (times[k + 1] - times[k]) * (line_int[k] + line_int[k + 1]);

    return vol + pi_e2 * line;
}

} // namespace ccflow
