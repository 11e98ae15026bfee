#include "ccflow/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ccflow {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

RunConfig::RunConfig() {
    auto reg = [this](const char* key, const char* value) {
        defaults_[key] = value;
        values_[key] = value;
    };
    // domain
    reg("box.lo", "0,0,0");
    reg("box.hi", "1,1,1");
    reg("grid.n", "32");
    reg("mesh.n_s", "65");
    // curve
    reg("curve.name", "segment");
    reg("curve.file", "");
    reg("curve.p0", "0,0.5,0.5");
    reg("curve.p1", "1,0.5,0.5");
    reg("curve.velocity", "0,0.2,0");
    reg("curve.radius", "0.3");
    reg("curve.center", "0.2,0.35,0.5");
    reg("curve.angle0", "0");
    reg("curve.frame", "default"); // default | analytic | rmf
    reg("curve.rmf_seed", "0,0,0");
    reg("curve.t_end", "1.0");
    // capacity
    reg("capacity.eps0", "0.1");
    reg("capacity.eps", "0.05");
    reg("capacity.delta_rule", "eps3"); // eps3 | eps11 | explicit
    reg("capacity.delta", "1.25e-4");
    // material
    reg("material.k0", "1.0");
    reg("material.theta", "0.5");
    reg("material.ks.kind", "constant"); // constant | linear
    reg("material.ks.value", "1.0");
    reg("material.ks.slope", "0.0");
    reg("material.kn.kind", "constant");
    reg("material.kn.value", "1.0");
    reg("material.kn.slope", "0.0");
    reg("material.v.kind", "constant"); // constant | linear | swirl
    reg("material.v.value", "0,0,0");
    reg("material.v.slope", "0,0,0");
    reg("material.v.amplitude", "0.2");
    reg("material.v.center", "0.5,0.5,0.5");
    reg("material.vc.kind", "constant");
    reg("material.vc.value", "0,0,0");
    reg("material.vc.slope", "0,0,0");
    reg("material.vc.amplitude", "0.2");
    reg("material.vc.center", "0.5,0.5,0.5");
    reg("material.u0.kind", "gaussian"); // constant | linear | gaussian
    reg("material.u0.value", "1.0");
    reg("material.u0.slope", "0,0,0");
    reg("material.u0.amplitude", "1.0");
    reg("material.u0.center", "0.5,0.45,0.5");
    reg("material.u0.width", "0.15");
    // solve
    reg("solve.dt", "1e-3");
    reg("solve.t_end", "0.05");
    reg("solve.tol", "1e-12");
    reg("solve.max_iters", "4000");
    reg("solve.snapshot_stride", "0");
    reg("solve.lambda_ex", "-1");
    reg("solve.r_avg_cells", "2");
    // ladder
    reg("ladder.rungs", "3");
    reg("ladder.grids", "48,64,96");
    reg("ladder.deep", "false");
    // quadrature
    reg("quad.axial", "64");
    reg("quad.radial", "16");
    reg("quad.angular", "32");
    reg("quad.normal", "8");
    // output
    reg("output.dir", "out");
    reg("output.vtk", "false");
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (!defaults_.count(key))
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
        values_[key] = value;
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!defaults_.count(key)) throw ConfigError("unknown key '" + key + "'");
    values_[key] = value;
}

void RunConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must be key=value: " + assignment);
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not a number: '" + v + "'");
    }
}

int RunConfig::get_int(const std::string& key) const {
    const double d = get_double(key);
    const int i = static_cast<int>(std::llround(d));
    if (std::abs(d - i) > 1e-9)
        throw ConfigError("key '" + key + "': not an integer");
    return i;
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': not a boolean: '" + v + "'");
}

Vec3 RunConfig::get_vec3(const std::string& key) const {
    const std::string v = get(key);
    std::istringstream is(v);
    Vec3 out;
    char comma;
    if (!(is >> out[0] >> comma >> out[1] >> comma >> out[2]))
        throw ConfigError("key '" + key + "': expected x,y,z: '" + v + "'");
    return out;
}

std::string RunConfig::resolved() const {
    std::ostringstream os;
    os << "# ccflow resolved configuration\n";
    for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
    return os.str();
}

CurveSpec RunConfig::build_curve() const {
    const std::string name = get("curve.name");
    CurveSpec c;
    if (name == "segment") {
        c = make_segment(get_vec3("curve.p0"), get_vec3("curve.p1"));
    } else if (name == "translating-segment") {
        c = make_translating_segment(get_vec3("curve.p0"), get_vec3("curve.p1"),
                                     get_vec3("curve.velocity"));
    } else if (name == "arc") {
        c = make_arc(get_double("curve.radius"), get_vec3("curve.center"),
                     get_double("curve.angle0"));
    } else if (name == "helix-wiggle") {
        c = make_helix_wiggle();
    } else if (name == "polyline") {
        c = load_polyline_curve(get("curve.file"));
    } else {
        throw ConfigError("unknown curve.name: " + name);
    }
    const std::string frame = get("curve.frame");
    if (frame == "rmf") {
        c.frame_mode = FrameMode::RotationMinimizing;
    } else if (frame == "analytic") {
        if (!c.normal)
            throw ConfigError("curve '" + name + "' has no analytic frame");
        c.frame_mode = FrameMode::Analytic;
    } else if (frame != "default") {
        throw ConfigError("curve.frame must be default | analytic | rmf");
    }
    const Vec3 seed = get_vec3("curve.rmf_seed");
    if (seed.norm() > 0) c.rmf_seed = seed;
    c.t_end = get_double("curve.t_end");
    if (!(c.t_end > 0)) throw ConfigError("curve.t_end must be positive");
    return c;
}

TubeChart RunConfig::build_chart() const {
    return TubeChart(build_curve(), get_double("capacity.eps0"));
}

DeltaRule RunConfig::delta_rule() const {
    const std::string r = get("capacity.delta_rule");
    if (r == "eps3") return DeltaRule::Eps3;
    if (r == "eps11") return DeltaRule::Eps11;
    if (r == "explicit") return DeltaRule::Explicit;
    throw ConfigError("capacity.delta_rule must be eps3 | eps11 | explicit");
}

CapacityParams RunConfig::build_capacity() const {
    CapacityParams p;
    p.eps0 = get_double("capacity.eps0");
    p.eps = get_double("capacity.eps");
    p.delta = delta_for(delta_rule(), p.eps, get_double("capacity.delta"));
    p.validate();
    return p;
}

namespace {

ScalarField1 build_scalar1(const RunConfig& cfg, const std::string& prefix) {
    const std::string kind = cfg.get(prefix + ".kind");
    const double value = cfg.get_double(prefix + ".value");
    const double slope = cfg.get_double(prefix + ".slope");
    if (kind == "constant")
        return [value](double, double, double) { return value; };
    if (kind == "linear")
        return [value, slope](double s, double, double) {
            return value + slope * s;
        };
    throw ConfigError(prefix + ".kind must be constant | linear");
}

VelocityField build_velocity(const RunConfig& cfg, const std::string& prefix) {
    const std::string kind = cfg.get(prefix + ".kind");
    if (kind == "constant") {
        const Vec3 value = cfg.get_vec3(prefix + ".value");
        return [value](double, const Vec3&) { return value; };
    }
    if (kind == "linear") {
        const Vec3 value = cfg.get_vec3(prefix + ".value");
        const Vec3 slope = cfg.get_vec3(prefix + ".slope");
        return [value, slope](double, const Vec3& x) {
            return Vec3(value + slope.cwiseProduct(x));
        };
    }
    if (kind == "swirl") {
        const double amp = cfg.get_double(prefix + ".amplitude");
        const Vec3 c = cfg.get_vec3(prefix + ".center");
        return [amp, c](double, const Vec3& x) {
            return Vec3(-amp * (x.y() - c.y()), amp * (x.x() - c.x()), 0.0);
        };
    }
    throw ConfigError(prefix + ".kind must be constant | linear | swirl");
}

} // namespace

MaterialParams RunConfig::build_materials() const {
    MaterialParams m;
    m.k0 = get_double("material.k0");
    m.theta = get_double("material.theta");
    m.k_s = build_scalar1(*this, "material.ks");
    m.k_n = build_scalar1(*this, "material.kn");
    m.v = build_velocity(*this, "material.v");
    m.v_c = build_velocity(*this, "material.vc");
    const std::string kind = get("material.u0.kind");
    if (kind == "constant") {
        const double value = get_double("material.u0.value");
        m.u0 = [value](const Vec3&) { return value; };
    } else if (kind == "linear") {
        const double value = get_double("material.u0.value");
        const Vec3 slope = get_vec3("material.u0.slope");
        m.u0 = [value, slope](const Vec3& x) { return value + slope.dot(x); };
    } else if (kind == "gaussian") {
        const double base = get_double("material.u0.value");
        const double amp = get_double("material.u0.amplitude");
        const Vec3 c = get_vec3("material.u0.center");
        const double w = get_double("material.u0.width");
        m.u0 = [base, amp, c, w](const Vec3& x) {
            return base + amp * std::exp(-(x - c).squaredNorm() / (w * w));
        };
    } else {
        throw ConfigError("material.u0.kind must be constant | linear | gaussian");
    }
    m.validate(get_double("capacity.eps0"));
    return m;
}

Grid3D RunConfig::build_grid(int n_override) const {
    const int n = n_override > 0 ? n_override : get_int("grid.n");
    return Grid3D(get_vec3("box.lo"), get_vec3("box.hi"), n, n, n);
}

Grid1D RunConfig::build_mesh() const { return Grid1D(get_int("mesh.n_s")); }

SolveConfig RunConfig::build_solve() const {
    SolveConfig s;
    s.dt = get_double("solve.dt");
    s.t_end = get_double("solve.t_end");
    s.tol = get_double("solve.tol");
    s.max_iters = get_int("solve.max_iters");
    s.snapshot_stride = get_int("solve.snapshot_stride");
    s.lambda_ex = get_double("solve.lambda_ex");
    s.r_avg_cells = get_double("solve.r_avg_cells");
    s.profile_nodes = get_int("mesh.n_s");
    s.delta_rule = delta_rule();
    s.delta_explicit = get_double("capacity.delta");
    s.validate();
    return s;
}

QuadDensity RunConfig::build_quad() const {
    QuadDensity q;
    q.n_axial = get_int("quad.axial");
    q.n_radial = get_int("quad.radial");
    q.n_angular = get_int("quad.angular");
    q.n_normal = get_int("quad.normal");
    return q;
}

std::vector<std::pair<double, int>> RunConfig::build_rungs() const {
    const int n_rungs = get_int("ladder.rungs");
    std::vector<int> grids;
    {
        std::istringstream is(get("ladder.grids"));
        std::string tok;
        while (std::getline(is, tok, ',')) grids.push_back(std::stoi(tok));
    }
    if (grids.empty()) throw ConfigError("ladder.grids is empty");
    const double eps0 = get_double("capacity.eps0");
    std::vector<std::pair<double, int>> out;
    for (int i = 1; i <= n_rungs; ++i) {
        const int g = grids[std::min<std::size_t>(i - 1, grids.size() - 1)];
        out.push_back({eps0 / std::pow(2.0, i), g});
    }
    return out;
}

std::function<double(const Vec3&)> RunConfig::pairing_integrand(
    const std::string& name) const {
    if (name == "const") return [](const Vec3&) { return 1.0; };
    if (name == "linear") return [](const Vec3& x) { return x.x(); };
    if (name == "bump") {
        const Vec3 c = get_vec3("material.u0.center");
        return [c](const Vec3& x) {
            return std::exp(-(x - c).squaredNorm() / 0.04);
        };
    }
    throw ConfigError("pairing integrand must be const | linear | bump");
}

} // namespace ccflow
