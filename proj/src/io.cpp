#include "ccflow/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace ccflow {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    return out;
}

} // namespace

void write_text(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
}

void write_vtk(const std::string& path, const Grid3D& grid,
               const std::vector<std::pair<std::string, const VectorXd*>>& fields) {
    auto out = open_out(path);
    out << "# vtk DataFile Version 3.0\nccflow snapshot\nASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << grid.nx() << ' ' << grid.ny() << ' ' << grid.nz()
        << '\n';
    const Vec3 o = grid.lo() + 0.5 * grid.spacing();
    out << "ORIGIN " << o.x() << ' ' << o.y() << ' ' << o.z() << '\n';
    out << "SPACING " << grid.spacing().x() << ' ' << grid.spacing().y() << ' '
        << grid.spacing().z() << '\n';
    out << "POINT_DATA " << grid.cells() << '\n';
    out << std::setprecision(9);
    for (const auto& [name, values] : fields) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (long c = 0; c < grid.cells(); ++c) out << (*values)[c] << '\n';
    }
}

void write_curve_csv(const std::string& path, const Grid1D& mesh,
                     const std::vector<double>& times,
                     const std::vector<VectorXd>& uc,
                     const std::vector<VectorXd>& xi_nu,
                     const std::vector<VectorXd>& xi_om) {
    auto out = open_out(path);
    out << "t,s,u_c,xi_nu,xi_om\n" << std::setprecision(12);
    for (std::size_t k = 0; k < times.size() && k < uc.size(); ++k)
        for (int j = 0; j < mesh.nodes(); ++j)
            out << times[k] << ',' << mesh.node(j) << ',' << uc[k][j] << ','
                << (k < xi_nu.size() ? xi_nu[k][j] : 0.0) << ','
                << (k < xi_om.size() ? xi_om[k][j] : 0.0) << '\n';
}

void write_series_csv(const std::string& path, const ApproxRun& run) {
    auto out = open_out(path);
    out << "t,mass,energy_au2,grad_energy\n" << std::setprecision(12);
    for (std::size_t k = 0; k < run.times.size(); ++k)
        out << run.times[k] << ',' << run.mass[k] << ',' << run.energy_au2[k]
            << ',' << run.grad_energy[k] << '\n';
}

std::string render(const GeometryReport& rep, const std::string& title) {
    std::ostringstream os;
    os << title << "\n" << std::string(title.size(), '-') << "\n";
    os << std::setprecision(4) << std::scientific;
    for (const auto& c : rep.checks) {
        os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": worst "
           << c.worst << " (tol " << c.threshold << ")";
        if (!c.note.empty()) os << "  -- " << c.note;
        os << "\n";
    }
    os << (rep.all_pass() ? "all checks passed\n" : "CHECKS FAILED\n");
    return os.str();
}

std::string csv(const GeometryReport& rep) {
    std::ostringstream os;
    os << "check,pass,worst,tolerance\n" << std::setprecision(12);
    for (const auto& c : rep.checks)
        os << '"' << c.name << "\"," << (c.pass ? 1 : 0) << ',' << c.worst
           << ',' << c.threshold << '\n';
    return os.str();
}

std::string render(const CapacityLadderReport& rep) {
    std::ostringstream os;
    os << "capacity ladder (delta = eps^3)\n";
    os << std::setprecision(6) << std::scientific;
    os << "  eps        delta      pairing          target           rel.err\n";
    for (const auto& r : rep.rungs)
        os << "  " << r.eps << "  " << r.delta << "  " << std::setw(15)
           << r.pairing << "  " << std::setw(15) << r.target << "  "
           << r.rel_error << "\n";
    os << "errors strictly decreasing: " << (rep.strictly_decreasing ? "yes" : "NO")
       << ", final relative error: " << rep.final_rel_error << "\n";
    return os.str();
}

std::string csv(const CapacityLadderReport& rep) {
    std::ostringstream os;
    os << "eps,delta,pairing,target,abs_error,rel_error\n"
       << std::setprecision(12);
    for (const auto& r : rep.rungs)
        os << r.eps << ',' << r.delta << ',' << r.pairing << ',' << r.target
           << ',' << r.abs_error << ',' << r.rel_error << '\n';
    return os.str();
}

std::string render(const EnergyLadderReport& rep) {
    std::ostringstream os;
    os << "energy uniformity ladder\n" << std::setprecision(6) << std::scientific;
    os << "  eps        delta       grid   sup(a u^2)/E0   int(a|du|^2)/E0   time[s]\n";
    for (const auto& r : rep.rungs) {
        os << "  " << r.eps << "  " << r.delta << "  " << std::setw(4)
           << r.grid_n;
        if (r.error.empty())
            os << "   " << std::setw(12) << r.norm_sup << "   " << std::setw(14)
               << r.norm_grad << "   " << std::fixed << std::setprecision(1)
               << r.seconds << std::scientific << std::setprecision(6);
        else
            os << "   solve failed: " << r.error;
        os << "\n";
    }
    os << "bound constant: " << rep.bound_constant
       << ", uniform: " << (rep.uniform ? "yes" : "NO") << "\n";
    return os.str();
}

std::string csv(const EnergyLadderReport& rep) {
    std::ostringstream os;
    os << "eps,delta,grid_n,sup_au2,int_a_grad2,initial,norm_sup,norm_grad,"
          "seconds,error\n"
       << std::setprecision(12);
    for (const auto& r : rep.rungs)
        os << r.eps << ',' << r.delta << ',' << r.grid_n << ','
           << r.energy.sup_au2 << ',' << r.energy.int_a_grad2 << ','
           << r.energy.initial_au02 << ',' << r.norm_sup << ',' << r.norm_grad
           << ',' << r.seconds << ",\"" << r.error << "\"\n";
    return os.str();
}

std::string render(const ComparisonReport& rep) {
    std::ostringstream os;
    os << "approximating family vs concentrated-capacity limit\n"
       << std::setprecision(6) << std::scientific;
    os << "  eps        grid   |disk(u)-u_C|rel   cauchy        xi rel diff   "
          "bulk-out L2    weak resid   time[s]\n";
    for (const auto& r : rep.rungs)
        os << "  " << r.eps << "  " << std::setw(4) << r.grid_n << "   "
           << std::setw(13) << r.dist_uc << "   " << std::setw(11)
           << r.cauchy_prev << "   " << std::setw(11) << r.xi_rel_diff << "   "
           << std::setw(11) << r.dist_bulk_out << "   " << std::setw(11)
           << r.weak_resid_max << "   " << std::fixed << std::setprecision(1)
           << r.seconds << std::scientific << std::setprecision(6) << "\n";
    os << "distance to u_C decreasing: " << (rep.dist_decreasing ? "yes" : "NO")
       << ", Cauchy decreasing: " << (rep.cauchy_decreasing ? "yes" : "NO")
       << ", xi trend decreasing: " << (rep.xi_decreasing ? "yes" : "NO") << "\n";
    return os.str();
}

std::string csv(const ComparisonReport& rep) {
    std::ostringstream os;
    os << "eps,delta,grid_n,dist_uc,cauchy_prev,xi_rel_diff,dist_bulk_out,"
          "weak_resid_max,seconds\n"
       << std::setprecision(12);
    for (const auto& r : rep.rungs)
        os << r.eps << ',' << r.delta << ',' << r.grid_n << ',' << r.dist_uc
           << ',' << r.cauchy_prev << ',' << r.xi_rel_diff << ','
           << r.dist_bulk_out << ',' << r.weak_resid_max << ',' << r.seconds
           << '\n';
    return os.str();
}

} // namespace ccflow
