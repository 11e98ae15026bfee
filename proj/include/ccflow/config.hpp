#pragma once

#include "ccflow/harness.hpp"

#include <map>
#include <string>

namespace ccflow {

/// Flat key = value configuration with a closed key registry. Unknown
/// keys are rejected; every run can be reproduced from the resolved file.
class RunConfig {
public:
    RunConfig();

    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    /// "key=value" pairs from the command line.
    void apply_override(const std::string& assignment);

    std::string get(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    Vec3 get_vec3(const std::string& key) const;

    /// All registered keys with their current values.
    std::string resolved() const;

    // --- builders ---------------------------------------------------------
    CurveSpec build_curve() const;
    TubeChart build_chart() const;
    CapacityParams build_capacity() const;
    MaterialParams build_materials() const;
    Grid3D build_grid(int n_override = 0) const;
    Grid1D build_mesh() const;
    SolveConfig build_solve() const;
    QuadDensity build_quad() const;
    DeltaRule delta_rule() const;
    /// (eps, grid_n) rungs for the ladder campaigns.
    std::vector<std::pair<double, int>> build_rungs() const;

    /// Named test integrand for the capacity ladder: const | linear | bump.
    std::function<double(const Vec3&)> pairing_integrand(
        const std::string& name) const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> defaults_;
};

} // namespace ccflow
