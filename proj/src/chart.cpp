#include "ccflow/chart.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ccflow {

namespace {

std::string fmt_point(double t, double s, double nu, double om) {
    std::ostringstream os;
    os << "(t=" << t << ", s=" << s << ", nu=" << nu << ", om=" << om << ")";
    return os.str();
}

/// One double-reflection step: transports (n) from (p0,t0) to (p1,t1).
Vec3 double_reflection_step(const Vec3& p0, const Vec3& t0, const Vec3& n0,
                            const Vec3& p1, const Vec3& t1) {
    const Vec3 v1 = p1 - p0;
    const double c1 = v1.squaredNorm();
    if (c1 < 1e-30) return n0;
    const Vec3 nL = n0 - (2.0 / c1) * v1.dot(n0) * v1;
    const Vec3 tL = t0 - (2.0 / c1) * v1.dot(t0) * v1;
    const Vec3 v2 = t1 - tL;
    const double c2 = v2.squaredNorm();
    if (c2 < 1e-30) return nL;
    return nL - (2.0 / c2) * v2.dot(nL) * v2;
}

} // namespace

TubeChart::TubeChart(CurveSpec curve, double eps0, ChartConfig cfg)
    : curve_(std::move(curve)), eps0_(eps0), cfg_(cfg) {
    if (!(eps0_ > 0)) throw ChartError("eps0 must be positive");
    if (!curve_.gamma) throw ChartError("curve has no gamma map");
    if (curve_.frame_mode == FrameMode::Analytic &&
        (!curve_.normal || !curve_.binormal))
        throw ChartError("analytic frame mode without normal/binormal closures");
    hs_ = cfg_.fd_step_rel * (s_max() - s_min());
    ht_ = cfg_.fd_step_rel * std::max(curve_.t_end, 1e-6);

    // fixed reference axis for the auto rotation-minimizing seed
    if (curve_.rmf_seed.norm() > 1e-12) {
        rmf_ref_ = curve_.rmf_seed.normalized();
    } else {
        const Vec3 tg = curve_tangent_raw(0.0, 0.5).normalized();
        rmf_ref_ = Vec3::UnitY();
        if (std::abs(tg.dot(rmf_ref_)) > 0.9) rmf_ref_ = Vec3::UnitZ();
        if (std::abs(tg.dot(rmf_ref_)) > 0.9) rmf_ref_ = Vec3::UnitX();
    }

    if (cfg_.validate_on_construction) validate_lattice();
}

void TubeChart::validate_lattice() const {
    const int n = std::max(3, cfg_.validity_samples);
    const int n_t = std::max(2, n / 2);
    for (int it = 0; it <= n_t; ++it) {
        const double t = t_end() * it / double(n_t);
        for (int is = 0; is <= n; ++is) {
            const double s = s_min() + (s_max() - s_min()) * is / double(n);
            for (int ir = 0; ir <= n; ++ir) {
                const double r = eps0_ * ir / double(n);
                for (int ia = 0; ia < n; ++ia) {
                    const double th = 2.0 * M_PI * ia / double(n);
                    const double nu = r * std::cos(th);
                    const double om = r * std::sin(th);
                    const double j = grad_F(t, s, nu, om).determinant();
                    if (!(j > 0)) {
                        throw ChartError(
                            "chart invalid: J_F = " + std::to_string(j) +
                            " at " + fmt_point(t, s, nu, om) +
                            "; eps0 exceeds the curve's reach");
                    }
                }
            }
        }
    }
}

Vec3 TubeChart::eval_curve(double t, double s) const {
    if (t < -1e-12 || t > t_end() + 1e-12)
        throw DomainError("eval_curve: t outside [0, T]");
    if (s < s_min() - 1e-12 || s > s_max() + 1e-12)
        throw DomainError("eval_curve: s outside [-eps0, 1+eps0]");
    return curve_.gamma(t, s);
}

Vec3 TubeChart::curve_tangent_raw(double t, double s) const {
    return (curve_.gamma(t, s + hs_) - curve_.gamma(t, s - hs_)) / (2.0 * hs_);
}

Frame TubeChart::frame_analytic(double t, double s) const {
    Frame f;
    const Vec3 g = curve_tangent_raw(t, s);
    const double len = g.norm();
    if (len < cfg_.degenerate_tol)
        throw ChartError("degenerate curve: |d_s Gamma| ~ 0 at s=" +
                         std::to_string(s));
    f.t = g / len;
    f.n = curve_.normal(t, s);
    f.b = curve_.binormal(t, s);
    return f;
}

Frame TubeChart::frame_rmf(double t, double s) const {
    const int N = std::max(2, cfg_.rmf_steps);
    const double s0 = s_min();
    const double ds = (s - s0) / N;

    auto tangent_at = [&](double si) {
        const Vec3 g = curve_tangent_raw(t, si);
        const double len = g.norm();
        if (len < cfg_.degenerate_tol)
            throw ChartError("degenerate curve: |d_s Gamma| ~ 0 at s=" +
                             std::to_string(si));
        return Vec3(g / len);
    };

    Vec3 tv = tangent_at(s0);
    Vec3 n = rmf_ref_ - rmf_ref_.dot(tv) * tv;
    if (n.norm() < 1e-8)
        throw ChartError("rotation-minimizing seed parallel to the tangent");
    n.normalize();
    if (std::abs(ds) < 1e-300) return Frame{tv, n, tv.cross(n)};

    Vec3 p = curve_.gamma(t, s0);
    for (int i = 1; i <= N; ++i) {
        const double si = s0 + ds * i;
        const Vec3 p1 = curve_.gamma(t, si);
        const Vec3 t1 = tangent_at(si);
        n = double_reflection_step(p, tv, n, p1, t1);
        n = (n - n.dot(t1) * t1).normalized(); // re-orthogonalize drift
        p = p1;
        tv = t1;
    }
    return Frame{tv, n, tv.cross(n)};
}

Frame TubeChart::eval_frame(double t, double s) const {
    if (t < -1e-12 || t > t_end() + 1e-12)
        throw DomainError("eval_frame: t outside [0, T]");
    if (s < s_min() - 1e-12 || s > s_max() + 1e-12)
        throw DomainError("eval_frame: s outside [-eps0, 1+eps0]");
    return curve_.frame_mode == FrameMode::Analytic ? frame_analytic(t, s)
                                                    : frame_rmf(t, s);
}

void TubeChart::frame_s_derivatives(double t, double s, Vec3& dn, Vec3& db) const {
    Frame fp, fm;
    if (curve_.frame_mode == FrameMode::Analytic) {
        fp = frame_analytic(t, s + hs_);
        fm = frame_analytic(t, s - hs_);
    } else {
        fp = frame_rmf(t, s + hs_);
        fm = frame_rmf(t, s - hs_);
    }
    dn = (fp.n - fm.n) / (2.0 * hs_);
    db = (fp.b - fm.b) / (2.0 * hs_);
}

Vec3 TubeChart::point(double t, double s, double nu, double om) const {
    const Frame f = eval_frame(t, s);
    return curve_.gamma(t, s) + nu * f.n + om * f.b;
}

Mat3 TubeChart::grad_F(double t, double s, double nu, double om) const {
    const Frame f = eval_frame(t, s);
    Vec3 dn, db;
    frame_s_derivatives(t, s, dn, db);
    const Vec3 c1 = curve_tangent_raw(t, s) + nu * dn + om * db;
    Mat3 m;
    m.col(0) = c1;
    m.col(1) = f.n;
    m.col(2) = f.b;
    return m;
}

double TubeChart::det_J_F(double t, double s, double nu, double om) const {
    const Frame f = eval_frame(t, s);
    Vec3 dn, db;
    frame_s_derivatives(t, s, dn, db);
    const Vec3 c1 = curve_tangent_raw(t, s) + nu * dn + om * db;
    const double tau_nb = dn.dot(f.b); // <d_s n, b>
    const double tau_bn = db.dot(f.n); // <d_s b, n>
    const double radicand =
        c1.squaredNorm() - nu * nu * tau_nb * tau_nb - om * om * tau_bn * tau_bn;
    if (radicand < -1e-14)
        throw ChartError("det_J_F: negative radicand at " +
                         fmt_point(t, s, nu, om));
    return std::sqrt(std::max(radicand, 0.0));
}

Mat3 TubeChart::metric_inv(double t, double s, double nu, double om) const {
    const Frame f = eval_frame(t, s);
    Vec3 dn, db;
    frame_s_derivatives(t, s, dn, db);
    const Vec3 c1 = curve_tangent_raw(t, s) + nu * dn + om * db;
    const double A = c1.squaredNorm();
    const double p = om * db.dot(f.n); // om <d_s b, n>
    const double q = nu * dn.dot(f.b); // nu <d_s n, b>
    const double D = A - p * p - q * q; // = J_F^2
    if (!(D > 0))
        throw ChartError("metric_inv: singular metric at " +
                         fmt_point(t, s, nu, om));
    Mat3 m;
    m << 1.0, -p, -q,
        -p, A - q * q, p * q,
        -q, p * q, A - p * p;
    return m / D;
}

Mat3 TubeChart::inv_grad_F(double t, double s, double nu, double om) const {
    return metric_inv(t, s, nu, om) *
           grad_F(t, s, nu, om).transpose();
}

ChartVelocity TubeChart::curve_velocity(double t, double s, double nu,
                                        double om) const {
    ChartVelocity out;
    auto F = [&](double tt) { return point(tt, s, nu, om); };
    if (t - ht_ >= 0.0 && t + ht_ <= t_end()) {
        out.value = (F(t + ht_) - F(t - ht_)) / (2.0 * ht_);
    } else if (t - ht_ < 0.0) {
        // 2nd-order one-sided
        out.value = (-3.0 * F(t) + 4.0 * F(t + ht_) - F(t + 2 * ht_)) / (2.0 * ht_);
        out.one_sided = true;
    } else {
        out.value = (3.0 * F(t) - 4.0 * F(t - ht_) + F(t - 2 * ht_)) / (2.0 * ht_);
        out.one_sided = true;
    }
    return out;
}

Mat4 TubeChart::grad_F4(double t, double s, double nu, double om) const {
    Mat4 m = Mat4::Zero();
    m(0, 0) = 1.0;
    m.block<3, 1>(1, 0) = curve_velocity(t, s, nu, om).value;
    m.block<3, 3>(1, 1) = grad_F(t, s, nu, om);
    return m;
}

Mat4 TubeChart::inv_grad_F4(double t, double s, double nu, double om) const {
    Mat4 m = Mat4::Zero();
    const Mat3 gi = inv_grad_F(t, s, nu, om);
    m(0, 0) = 1.0;
    m.block<3, 1>(1, 0) = -gi * curve_velocity(t, s, nu, om).value;
    m.block<3, 3>(1, 1) = gi;
    return m;
}

CurveSamples TubeChart::sample_curve(double t) const {
    CurveSamples cs;
    cs.t = t;
    const int n = std::max(8, cfg_.seed_samples);
    cs.s.resize(n);
    cs.p.resize(n);
    for (int i = 0; i < n; ++i) {
        cs.s[i] = s_min() + (s_max() - s_min()) * i / double(n - 1);
        cs.p[i] = curve_.gamma(t, cs.s[i]);
    }
    for (int i = 1; i < n; ++i)
        cs.max_gap = std::max(cs.max_gap, (cs.p[i] - cs.p[i - 1]).norm());
    return cs;
}

ChartCoords TubeChart::invert(double t, const Vec3& x) const {
    return invert(t, x, sample_curve(t));
}

ChartCoords TubeChart::invert(double t, const Vec3& x,
                              const CurveSamples& samples) const {
    ChartCoords out;
    // nearest presampled curve point
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.p.size(); ++i) {
        const double d2 = (samples.p[i] - x).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<int>(i);
        }
    }
    const double dmin = std::sqrt(best_d2);
    // every tube point is within eps0 of the curve
    if (dmin > eps0_ + samples.max_gap) return out;

    double s = samples.s[best];
    Frame f = eval_frame(t, s);
    const Vec3 d0 = x - samples.p[best];
    double nu = d0.dot(f.n);
    double om = d0.dot(f.b);

    for (int it = 0; it < cfg_.newton_max_iters; ++it) {
        const Vec3 r = point(t, s, nu, om) - x;
        if (r.norm() <= cfg_.newton_tol) {
            const double slack = 1e-9;
            if (s >= s_min() - slack && s <= s_max() + slack &&
                nu * nu + om * om <= eps0_ * eps0_ * (1.0 + slack)) {
                out.s = s;
                out.nu = nu;
                out.om = om;
                out.inside = true;
            }
            return out;
        }
        Mat3 J = grad_F(t, s, nu, om);
        const Vec3 step = J.partialPivLu().solve(r);
        s -= step[0];
        nu -= step[1];
        om -= step[2];
        // runaway guard: clearly left the extended chart neighborhood
        if (s < s_min() - 0.5 || s > s_max() + 0.5 ||
            nu * nu + om * om > 9.0 * eps0_ * eps0_)
            return out;
    }
    if (dmin > eps0_) return out; // near the lateral boundary, call it outside
    throw ChartError("invert_chart: Newton failed inside the tube at point (" +
                     std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                     ", " + std::to_string(x.z()) + ")");
}

double TubeChart::coercivity_beta(int sample_density) const {
    const int n = std::max(3, sample_density);
    double beta = std::numeric_limits<double>::infinity();
    const int n_t = 4;
    for (int it = 0; it <= n_t; ++it) {
        const double t = t_end() * it / double(n_t);
        for (int is = 0; is <= n; ++is) {
            const double s = s_min() + (s_max() - s_min()) * is / double(n);
            for (int ir = 0; ir <= n; ++ir) {
                const double r = eps0_ * ir / double(n);
                for (int ia = 0; ia < n; ++ia) {
                    const double th = 2.0 * M_PI * ia / double(n);
                    const double nu = r * std::cos(th);
                    const double om = r * std::sin(th);
                    const Mat3 m =
                        metric_inv(t, s, nu, om) * det_J_F(t, s, nu, om);
                    Eigen::SelfAdjointEigenSolver<Mat3> es(m);
                    beta = std::min(beta, es.eigenvalues().minCoeff());
                }
            }
        }
    }
    if (!(beta > 0))
        throw ChartError("coercivity_beta: nonpositive bound " +
                         std::to_string(beta));
    return beta;
}

double TubeChart::divergence_in_tube(const std::function<Vec3(const Vec3&)>& q,
                                     double t, double s, double nu, double om,
                                     double h) const {
    auto G = [&](double ss, double nn, double oo) -> Vec3 {
        const Vec3 qa = q(point(t, ss, nn, oo));
        return grad_F(t, ss, nn, oo).determinant() *
               (inv_grad_F(t, ss, nn, oo) * qa);
    };
    double div = 0.0;
    div += (G(s + h, nu, om)[0] - G(s - h, nu, om)[0]) / (2 * h);
    div += (G(s, nu + h, om)[1] - G(s, nu - h, om)[1]) / (2 * h);
    div += (G(s, nu, om + h)[2] - G(s, nu, om - h)[2]) / (2 * h);
    return div / grad_F(t, s, nu, om).determinant();
}

} // namespace ccflow
