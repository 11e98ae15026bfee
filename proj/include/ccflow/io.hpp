#pragma once

#include "ccflow/harness.hpp"

#include <iosfwd>
#include <string>

namespace ccflow {

/// Legacy VTK structured-points snapshot of cell data.
void write_vtk(const std::string& path, const Grid3D& grid,
               const std::vector<std::pair<std::string, const VectorXd*>>& fields);

/// CSV time series of (t, s, u_c, xi_nu, xi_om) rows.
void write_curve_csv(const std::string& path, const Grid1D& mesh,
                     const std::vector<double>& times,
                     const std::vector<VectorXd>& uc,
                     const std::vector<VectorXd>& xi_nu,
                     const std::vector<VectorXd>& xi_om);

/// CSV time series of mass / energy records of a bulk solve.
void write_series_csv(const std::string& path, const ApproxRun& run);

std::string render(const GeometryReport& rep, const std::string& title);
std::string render(const CapacityLadderReport& rep);
std::string render(const EnergyLadderReport& rep);
std::string render(const ComparisonReport& rep);

std::string csv(const CapacityLadderReport& rep);
std::string csv(const EnergyLadderReport& rep);
std::string csv(const ComparisonReport& rep);
std::string csv(const GeometryReport& rep);

void write_text(const std::string& path, const std::string& content);

} // namespace ccflow
