#pragma once

#include "ccflow/types.hpp"

#include <functional>
#include <string>

namespace ccflow {

enum class FrameMode {
    Analytic,           ///< normal/binormal supplied as closures
    RotationMinimizing, ///< propagated along s by double reflection
};

/// A smooth time-varying curve s -> Gamma(t,s) on [0,T] x [-eps0, 1+eps0],
/// together with how its moving orthonormal frame is obtained.
struct CurveSpec {
    std::function<Vec3(double t, double s)> gamma;
    FrameMode frame_mode = FrameMode::RotationMinimizing;
    std::function<Vec3(double t, double s)> normal;   // analytic mode only
    std::function<Vec3(double t, double s)> binormal; // analytic mode only
    Vec3 rmf_seed = Vec3::Zero(); // zero means choose automatically
    double t_end = 1.0;           // time horizon T
    std::string label = "custom";
};

// Built-in curve library. All defaults sit inside the unit cube.
CurveSpec make_segment(const Vec3& p0 = Vec3(0.0, 0.5, 0.5),
                       const Vec3& p1 = Vec3(1.0, 0.5, 0.5));
CurveSpec make_translating_segment(const Vec3& p0 = Vec3(0.2, 0.4, 0.5),
                                   const Vec3& p1 = Vec3(0.8, 0.4, 0.5),
                                   const Vec3& velocity = Vec3(0.0, 0.2, 0.0));
CurveSpec make_arc(double radius = 0.3,
                   const Vec3& center = Vec3(0.2, 0.35, 0.5),
                   double angle0 = 0.0);
CurveSpec make_helix_wiggle(double radius = 0.18, double angular_rate = 3.0,
                            double spin_rate = 0.4,
                            const Vec3& center = Vec3(0.5, 0.5, 0.3),
                            double pitch = 0.4);

/// Sampled-polyline curve: whitespace-separated rows "t s x y z", cubic
/// spline in s per time slice, cubic spline across slices in t.
CurveSpec load_polyline_curve(const std::string& path);

/// Curve selected by name with the library defaults.
CurveSpec named_curve(const std::string& name);

struct CurveValidation {
    bool inside_domain = true;   // image within the box at all samples
    bool smooth = true;          // bounded 2nd differences in s, 1st in t
    double worst_margin = 0.0;   // signed distance to the box faces (>= 0 ok)
    double worst_d2s = 0.0;
    double worst_dt = 0.0;
    std::string note;
};

/// Sampled smoothness / containment checks for a curve against an
/// axis-aligned box [lo, hi]. `margin` > 0 demands strict interiority.
CurveValidation validate_curve(const CurveSpec& curve, const Vec3& box_lo,
                               const Vec3& box_hi, double s_lo, double s_hi,
                               int n_samples = 64, double margin = 0.0);

namespace detail {

/// Natural cubic spline through (x_i, y_i); evaluates with linear
/// extrapolation outside the node range.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;

private:
    std::vector<double> x_, y_, m_; // m_: second derivatives at nodes
};

} // namespace detail

} // namespace ccflow
