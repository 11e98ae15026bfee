// Command-line driver: configuration, subcommand dispatch, report output.

#include "ccflow/config.hpp"
#include "ccflow/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ccflow;

namespace {

constexpr const char* kVersion = "ccflow 1.0.0";

struct CommonArgs {
    std::string config_file;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::string curve;
    bool deep = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_file, "configuration file");
    cmd->add_option("--set", args.overrides, "override key=value")
        ->take_all();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--curve", args.curve,
                    "curve name (segment | translating-segment | arc | "
                    "helix-wiggle | polyline)");
    cmd->add_flag("--deep", args.deep, "extend ladders by one rung");
}

RunConfig load(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_file.empty()) cfg.load_file(args.config_file);
    for (const auto& o : args.overrides) cfg.apply_override(o);
    if (!args.out_dir.empty()) cfg.set("output.dir", args.out_dir);
    if (!args.curve.empty()) cfg.set("curve.name", args.curve);
    return cfg;
}

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path dir = cfg.get("output.dir");
    fs::create_directories(dir);
    write_text((dir / "resolved-config.txt").string(), cfg.resolved());
    return dir;
}

int finish(const fs::path& dir, const std::string& report_text,
           const std::string& report_csv, bool pass) {
    write_text((dir / "report.txt").string(), report_text);
    write_text((dir / "report.csv").string(), report_csv);
    std::cout << report_text;
    return pass ? 0 : 1;
}

int cmd_geometry_check(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out(cfg);
    try {
        const TubeChart chart = cfg.build_chart();
        const GeometryReport rep = run_geometry_suite(chart, 1000);
        return finish(dir, render(rep, "geometry identity suite"), csv(rep),
                      rep.all_pass());
    } catch (const ChartError& e) {
        GeometryReport rep;
        rep.checks.push_back({"chart construction", false, 0.0, 0.0, e.what()});
        return finish(dir, render(rep, "geometry identity suite"), csv(rep),
                      false);
    }
}

int cmd_coeff_check(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out(cfg);
    const TubeChart chart = cfg.build_chart();
    const GeometryReport rep = run_coefficient_suite(
        chart, cfg.build_capacity(), cfg.build_materials(),
        cfg.get_vec3("box.lo"), cfg.get_vec3("box.hi"), 1000);
    return finish(dir, render(rep, "coefficient suite"), csv(rep),
                  rep.all_pass());
}

int cmd_capacity_ladder(const CommonArgs& args, const std::string& f_name) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out(cfg);
    const TubeChart chart = cfg.build_chart();
    const int n_rungs = args.deep ? 5 : 4;
    const CapacityLadderReport rep =
        run_capacity_ladder(chart, cfg.pairing_integrand(f_name), 0.0,
                            cfg.build_grid(), n_rungs, cfg.build_quad());
    const bool pass = rep.strictly_decreasing && rep.final_rel_error < 1e-3;
    return finish(dir, render(rep), csv(rep), pass);
}

int cmd_solve_approx(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out(cfg);
    const TubeChart chart = cfg.build_chart();
    const CapacityParams p = cfg.build_capacity();
    const MaterialParams m = cfg.build_materials();
    const Grid3D grid = cfg.build_grid();
    SolveConfig scfg = cfg.build_solve();
    if (cfg.get_bool("output.vtk") && scfg.snapshot_stride == 0)
        scfg.snapshot_stride = std::max(
            1, int(std::llround(scfg.t_end / scfg.dt)) / 8);
    const ApproxRun run = run_approx(scfg, p, m, chart, grid);
    write_series_csv((dir / "series.csv").string(), run);
    if (cfg.get_bool("output.vtk"))
        for (std::size_t i = 0; i < run.snapshots.size(); ++i)
            write_vtk((dir / ("snapshot_" + std::to_string(i) + ".vtk")).string(),
                      grid, {{"u", &run.snapshots[i].second}});
    double worst_drift = 0.0;
    for (const double mass : run.mass)
        worst_drift = std::max(
            worst_drift, std::abs(mass - run.mass.front()) /
                             std::max(std::abs(run.mass.front()), 1e-300));
    const EnergyReport er = energy_report(run);
    std::ostringstream os;
    os << "approximating-family solve\n";
    os << "  steps: " << run.times.size() - 1
       << ", linear iterations: " << run.linear_iterations_total << "\n"
       << std::scientific << std::setprecision(6);
    os << "  relative mass drift: " << worst_drift << "\n";
    os << "  sup int a u^2: " << er.sup_au2
       << ", int int a|grad u|^2: " << er.int_a_grad2
       << ", initial: " << er.initial_au02 << "\n";
    const bool pass = worst_drift < 1e-8;
    os << (pass ? "mass conserved\n" : "MASS DRIFT EXCEEDS 1e-8\n");
    std::ostringstream oc;
    oc << "metric,value\nmass_drift," << worst_drift << "\nsup_au2,"
       << er.sup_au2 << "\nint_a_grad2," << er.int_a_grad2 << "\n";
    return finish(dir, os.str(), oc.str(), pass);
}

int cmd_solve_limit(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out(cfg);
    const TubeChart chart = cfg.build_chart();
    const MaterialParams m = cfg.build_materials();
    const Grid3D grid = cfg.build_grid();
    const Grid1D mesh = cfg.build_mesh();
    const double eps0 = cfg.get_double("capacity.eps0");
    const LimitRun run =
        run_limit(cfg.build_solve(), chart, eps0, m, grid, mesh);
    std::vector<VectorXd> xin, xio;
    for (std::size_t k = 0; k < run.times.size(); ++k) {
        const XiPair xi = xi_closure(
            chart, m, CurveField{run.uc_series[k], run.times[k]}, mesh,
            run.times[k]);
        xin.push_back(xi.xi_nu);
        xio.push_back(xi.xi_om);
    }
    write_curve_csv((dir / "curve.csv").string(), mesh, run.times,
                    run.uc_series, xin, xio);
    if (cfg.get_bool("output.vtk"))
        write_vtk((dir / "bulk_final.vtk").string(), grid,
                  {{"u", &run.final_bulk.values}});
    double worst_drift = 0.0;
    const double m0 = run.mass_bulk.front() + run.mass_curve.front();
    for (std::size_t k = 0; k < run.times.size(); ++k)
        worst_drift = std::max(
            worst_drift, std::abs(run.mass_bulk[k] + run.mass_curve[k] - m0) /
                             std::max(std::abs(m0), 1e-300));
    std::ostringstream os;
    os << "concentrated-capacity limit solve\n"
       << std::scientific << std::setprecision(6);
    os << "  steps: " << run.times.size() - 1
       << ", linear iterations: " << run.linear_iterations_total << "\n";
    os << "  combined mass drift: " << worst_drift << "\n";
    const bool pass = worst_drift < 1e-8;
    os << (pass ? "combined mass conserved\n" : "MASS DRIFT EXCEEDS 1e-8\n");
    std::ostringstream oc;
    oc << "metric,value\ncombined_mass_drift," << worst_drift << "\n";
    return finish(dir, os.str(), oc.str(), pass);
}

int cmd_energy_ladder(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out(cfg);
    const TubeChart chart = cfg.build_chart();
    const EnergyLadderReport rep = run_energy_ladder(
        cfg.build_solve(), chart, cfg.get_double("capacity.eps0"),
        cfg.build_materials(), cfg.build_rungs(), cfg.delta_rule(),
        cfg.get_vec3("box.lo"), cfg.get_vec3("box.hi"));
    return finish(dir, render(rep), csv(rep), rep.uniform);
}

int cmd_compare(const CommonArgs& args) {
    const RunConfig cfg = load(args);
    const fs::path dir = prepare_out(cfg);
    const TubeChart chart = cfg.build_chart();
    const ComparisonReport rep = run_limit_comparison(
        cfg.build_solve(), chart, cfg.get_double("capacity.eps0"),
        cfg.build_materials(), cfg.build_grid(), cfg.build_mesh(),
        cfg.build_rungs(), cfg.delta_rule(), cfg.get_vec3("box.lo"),
        cfg.get_vec3("box.hi"));
    const bool pass =
        rep.cauchy_decreasing && rep.dist_decreasing && rep.xi_decreasing;
    return finish(dir, render(rep), csv(rep), pass);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"concentrated-capacity diffusion-advection laboratory"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string f_name = "const";

    auto* geo = app.add_subcommand("geometry-check",
                                   "chart and frame identity suite");
    add_common(geo, args);
    auto* coeff = app.add_subcommand("coeff-check",
                                     "coefficient-field invariants");
    add_common(coeff, args);
    auto* ladder = app.add_subcommand(
        "capacity-ladder", "distributional limit of the capacity coefficient");
    add_common(ladder, args);
    ladder->add_option("--f", f_name, "integrand: const | linear | bump");
    auto* sa = app.add_subcommand("solve-approx",
                                  "run the approximating-family solver");
    add_common(sa, args);
    auto* sl = app.add_subcommand("solve-limit", "run the coupled limit solver");
    add_common(sl, args);
    auto* el = app.add_subcommand("energy-ladder",
                                  "energy uniformity across the eps ladder");
    add_common(el, args);
    auto* cmp = app.add_subcommand(
        "compare", "approximating family against the limit pair");
    add_common(cmp, args);
    auto* ver = app.add_subcommand("version", "print version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ver->parsed()) {
            std::cout << kVersion << "\n";
            return 0;
        }
        if (geo->parsed()) return cmd_geometry_check(args);
        if (coeff->parsed()) return cmd_coeff_check(args);
        if (ladder->parsed()) return cmd_capacity_ladder(args, f_name);
        if (sa->parsed()) return cmd_solve_approx(args);
        if (sl->parsed()) return cmd_solve_limit(args);
        if (el->parsed()) return cmd_energy_ladder(args);
        if (cmp->parsed()) return cmd_compare(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
