#include "ccflow/curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

namespace ccflow {

CurveSpec make_segment(const Vec3& p0, const Vec3& p1) {
    CurveSpec c;
    const Vec3 d = p1 - p0;
    if (d.norm() < 1e-12) throw DomainError("segment endpoints coincide");
    c.gamma = [p0, d](double, double s) -> Vec3 { return p0 + s * d; };
    // constant orthonormal complement of the direction
    const Vec3 t = d.normalized();
    Vec3 ref = std::abs(t.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    // prefer the conventional (0,1,0)/(0,0,1) pair for axis-aligned segments
    if (std::abs(t.dot(Vec3(0, 1, 0))) < 1e-12) ref = Vec3(0, 1, 0);
    const Vec3 n = (ref - ref.dot(t) * t).normalized();
    const Vec3 b = t.cross(n);
    c.frame_mode = FrameMode::Analytic;
    c.normal = [n](double, double) { return n; };
    c.binormal = [b](double, double) { return b; };
    c.rmf_seed = n;
    c.label = "segment";
    return c;
}

CurveSpec make_translating_segment(const Vec3& p0, const Vec3& p1,
                                   const Vec3& velocity) {
    CurveSpec c = make_segment(p0, p1);
    const Vec3 d = p1 - p0;
    c.gamma = [p0, d, velocity](double t, double s) -> Vec3 {
        return p0 + s * d + t * velocity;
    };
    c.label = "translating-segment";
    return c;
}

CurveSpec make_arc(double radius, const Vec3& center, double angle0) {
    if (radius <= 0) throw DomainError("arc radius must be positive");
    CurveSpec c;
    c.gamma = [radius, center, angle0](double, double s) -> Vec3 {
        const double a = angle0 + s;
        return center + radius * Vec3(std::cos(a), std::sin(a), 0.0);
    };
    c.frame_mode = FrameMode::Analytic;
    // inward normal; (t, n, b) right-handed with b = e_z
    c.normal = [angle0](double, double s) -> Vec3 {
        const double a = angle0 + s;
        return Vec3(-std::cos(a), -std::sin(a), 0.0);
    };
    c.binormal = [](double, double) { return Vec3(0, 0, 1); };
    c.label = "arc";
    return c;
}

CurveSpec make_helix_wiggle(double radius, double angular_rate,
                            double spin_rate, const Vec3& center,
                            double pitch) {
    CurveSpec c;
    c.gamma = [=](double t, double s) -> Vec3 {
        const double a = angular_rate * s + spin_rate * t;
        return center +
               Vec3(radius * std::cos(a), radius * std::sin(a), pitch * s);
    };
    c.frame_mode = FrameMode::RotationMinimizing;
    c.label = "helix-wiggle";
    return c;
}

CurveSpec named_curve(const std::string& name) {
    if (name == "segment") return make_segment();
    if (name == "translating-segment") return make_translating_segment();
    if (name == "arc") return make_arc();
    if (name == "helix-wiggle") return make_helix_wiggle();
    throw ConfigError("unknown curve name: " + name);
}

namespace detail {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size() || n < 2)
        throw DomainError("cubic spline needs at least two nodes");
    m_.assign(n, 0.0);
    if (n == 2) return; // linear
    // tridiagonal solve for natural spline second derivatives
    std::vector<double> a(n, 0.0), b(n, 0.0), cdiag(n, 0.0), r(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x_[i] - x_[i - 1];
        const double hr = x_[i + 1] - x_[i];
        a[i] = hl / 6.0;
        b[i] = (hl + hr) / 3.0;
        cdiag[i] = hr / 6.0;
        r[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    }
    // Thomas algorithm on the interior rows
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * cdiag[i - 1];
        r[i] -= w * r[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m_[i] = (r[i] - cdiag[i] * (i + 2 < n ? m_[i + 1] : 0.0)) / b[i];
        if (i == 1) break;
    }
}

double CubicSpline::operator()(double x) const {
    const std::size_t n = x_.size();
    if (x <= x_.front()) { // linear extrapolation with end slope
        const double h = x_[1] - x_[0];
        const double slope = (y_[1] - y_[0]) / h - h / 6.0 * (2 * m_[0] + m_[1]);
        return y_[0] + slope * (x - x_[0]);
    }
    if (x >= x_.back()) {
        const double h = x_[n - 1] - x_[n - 2];
        const double slope =
            (y_[n - 1] - y_[n - 2]) / h + h / 6.0 * (m_[n - 2] + 2 * m_[n - 1]);
        return y_[n - 1] + slope * (x - x_[n - 1]);
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double u = (x_[i + 1] - x) / h;
    const double w = (x - x_[i]) / h;
    return u * y_[i] + w * y_[i + 1] +
           ((u * u * u - u) * m_[i] + (w * w * w - w) * m_[i + 1]) * h * h / 6.0;
}

} // namespace detail

namespace {

struct PolylineData {
    std::vector<double> t_slices;
    // per slice: splines for x(s), y(s), z(s)
    std::vector<std::array<detail::CubicSpline, 3>> slices;
};

} // namespace

CurveSpec load_polyline_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open polyline file: " + path);
    std::map<double, std::vector<std::array<double, 4>>> rows; // t -> (s,x,y,z)
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double t, s, x, y, z;
        if (!(ls >> t)) continue; // blank
        if (!(ls >> s >> x >> y >> z))
            throw ConfigError("polyline " + path + ": line " +
                              std::to_string(lineno) + ": expected t s x y z");
        rows[t].push_back({s, x, y, z});
    }
    if (rows.empty()) throw ConfigError("polyline file has no samples: " + path);

    auto data = std::make_shared<PolylineData>();
    for (auto& [t, samples] : rows) {
        std::sort(samples.begin(), samples.end(),
                  [](const auto& a, const auto& b) { return a[0] < b[0]; });
        std::vector<double> sv, xv, yv, zv;
        for (const auto& r : samples) {
            sv.push_back(r[0]);
            xv.push_back(r[1]);
            yv.push_back(r[2]);
            zv.push_back(r[3]);
        }
        data->t_slices.push_back(t);
        data->slices.push_back({detail::CubicSpline(sv, xv),
                                detail::CubicSpline(sv, yv),
                                detail::CubicSpline(sv, zv)});
    }

    CurveSpec c;
    c.frame_mode = FrameMode::RotationMinimizing;
    c.label = "polyline";
    c.gamma = [data](double t, double s) -> Vec3 {
        const auto& ts = data->t_slices;
        if (ts.size() == 1) {
            const auto& sl = data->slices[0];
            return Vec3(sl[0](s), sl[1](s), sl[2](s));
        }
        // spline across time slices of the per-slice values
        std::vector<double> vx, vy, vz;
        vx.reserve(ts.size());
        for (const auto& sl : data->slices) {
            vx.push_back(sl[0](s));
            vy.push_back(sl[1](s));
            vz.push_back(sl[2](s));
        }
        detail::CubicSpline fx(ts, vx), fy(ts, vy), fz(ts, vz);
        return Vec3(fx(t), fy(t), fz(t));
    };
    return c;
}

CurveValidation validate_curve(const CurveSpec& curve, const Vec3& box_lo,
                               const Vec3& box_hi, double s_lo, double s_hi,
                               int n_samples, double margin) {
    CurveValidation v;
    v.worst_margin = std::numeric_limits<double>::infinity();
    const double hs = (s_hi - s_lo) / (n_samples - 1);
    const double T = curve.t_end;
    const int n_t = 9;
    const double span_s = s_hi - s_lo;
    for (int it = 0; it < n_t; ++it) {
        const double t = T * it / (n_t - 1.0);
        for (int i = 0; i < n_samples; ++i) {
            const double s = s_lo + i * hs;
            const Vec3 p = curve.gamma(t, s);
            for (int d = 0; d < 3; ++d) {
                const double m =
                    std::min(p[d] - box_lo[d], box_hi[d] - p[d]) - margin;
                v.worst_margin = std::min(v.worst_margin, m);
            }
            // centered second difference in s, scaled to a curvature proxy
            if (i > 0 && i + 1 < n_samples) {
                const Vec3 d2 = curve.gamma(t, s + hs) - 2.0 * p +
                                curve.gamma(t, s - hs);
                v.worst_d2s = std::max(v.worst_d2s, d2.norm() / (hs * hs));
            }
            const double ht = std::max(T, 1e-3) / 64.0;
            const Vec3 dt = curve.gamma(std::min(t + ht, T), s) -
                            curve.gamma(std::max(t - ht, 0.0), s);
            v.worst_dt = std::max(v.worst_dt, dt.norm() / (2 * ht));
        }
    }
    v.inside_domain = v.worst_margin >= 0.0;
    // smoothness: second differences bounded relative to the curve scale
    v.smooth = v.worst_d2s < 1e4 / std::max(span_s, 1e-12);
    if (!v.inside_domain) v.note = "curve leaves the domain box";
    return v;
}

} // namespace ccflow
