/**
 * @file rdfm_cli.cpp
 * @brief Command-line front end: solve, convergence, errors, transport, slice.
 */

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rdfm/darcy.hpp"
#include "rdfm/metrics.hpp"
#include "rdfm/output.hpp"
#include "rdfm/transport.hpp"

namespace fs = std::filesystem;
using namespace rdfm;

namespace {

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument("not a number: '" + tok + "'");
    }
    return out;
}

void print_solve_summary(const DarcySolution& sol)
{
    const auto& st = sol.stats;
    std::printf("cells            %d\n", sol.mesh().cell_count());
    std::printf("unknowns         %d (%d after condensation)\n", st.unknowns, st.reduced_unknowns);
    std::printf("relative residual %.3e\n", st.residual);
    std::printf("max cell flux residual %.3e\n", sol.diagnostics.max_cell_residual);
    std::printf("limited cells    %zu\n", sol.limiter.cells.size());
}

int cmd_solve(const std::string& scenario_path, const std::string& out_dir)
{
    const Scenario sc = load_scenario(scenario_path);
    for (const auto& note : sc.notes) std::fprintf(stderr, "note: %s\n", note.c_str());
    const DarcySolution sol = solve_darcy(sc);
    fs::create_directories(out_dir);
    const Grid& g = sol.mesh().grid();
    write_field_vtk((fs::path(out_dir) / "solution.vtk").string(), g,
                    {{"pressure", &sol.limited_p}, {"pressure_raw", &sol.p}, {"velocity", &sol.u}});
    write_segments_csv((fs::path(out_dir) / "segments.csv").string(), sol.setup.clipping);
    write_cell_average_csv((fs::path(out_dir) / "pressure_cells.csv").string(), sol.limited_p, "pressure");
    print_solve_summary(sol);
    return 0;
}

int cmd_convergence(const std::string& scenario_path, const std::string& meshes_text, const std::string& which,
                    double theta, int order, const std::string& out)
{
    const Scenario tmpl = load_scenario(scenario_path);
    ExactSolution exact;
    if (which == "a")
        exact.kind = ExactCase::SingleFracture;
    else if (which == "b")
        exact.kind = ExactCase::SingleBarrier;
    else
        throw std::invalid_argument("--case must be a or b");
    exact.theta = theta;
    std::vector<int> meshes;
    for (double m : parse_list(meshes_text)) meshes.push_back(static_cast<int>(m));

    DarcyOptions opts;
    if (tmpl.penalties) opts.penalties = tmpl.penalties;
    MeshSettings base = tmpl.mesh;
    const ErrorReport report = convergence_study(exact, meshes, order >= 0 ? order : base.order, opts, base);

    std::printf("%6s %12s %8s %12s %8s\n", "mesh", "L1_error", "L1_order", "L2_error", "L2_order");
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        const auto& l = report.levels[i];
        if (i == 0)
            std::printf("%6d %12.3e %8s %12.3e %8s\n", l.mesh, l.l1, "", l.l2, "");
        else
            std::printf("%6d %12.3e %8.2f %12.3e %8.2f\n", l.mesh, l.l1, report.l1_order(i), l.l2,
                        report.l2_order(i));
    }
    if (!out.empty()) write_error_table(out, report);
    return 0;
}

int cmd_errors(const std::string& scenario_path, const std::string& reference, const std::string& fractures,
               double delta_p)
{
    const Scenario sc = load_scenario(scenario_path);
    const DarcySolution sol = solve_darcy(sc);
    ReferenceData ref = read_reference_matrix(reference);
    if (!fractures.empty()) ref.elements = read_reference_fractures(fractures);
    const BenchmarkErrors e = benchmark_errors(sol.limited_p, ref, delta_p);
    for (const auto& w : e.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("delta_p %.6g\nerr_m %.4e\n", e.delta_p, e.err_m);
    if (std::isfinite(e.err_f)) std::printf("err_f %.4e\n", e.err_f);
    return 0;
}

int cmd_transport(const std::string& scenario_path, const std::string& out_dir, bool limit)
{
    const Scenario sc = load_scenario(scenario_path);
    TransportOptions opts;
    opts.limit = limit;
    const TransportRun run = run_transport(sc, out_dir, {}, opts);
    std::printf("steps %d, final pvi %.4g, t %.6g\n", run.state.steps, run.state.pvi, run.state.t);
    std::printf("mass balance error %.3e\n", run.balance_error);
    for (const auto& [pvi, path] : run.snapshots) std::printf("snapshot %g -> %s\n", pvi, path.c_str());
    return 0;
}

int cmd_slice(const std::string& scenario_path, const std::string& line, int samples, const std::string& out)
{
    const auto v = parse_list(line);
    if (v.size() != 4) throw std::invalid_argument("--line needs x0,y0,x1,y1");
    const Scenario sc = load_scenario(scenario_path);
    const DarcySolution sol = solve_darcy(sc);
    const auto s = slice(sol.limited_p, Vec2(v[0], v[1]), Vec2(v[2], v[3]), samples);
    if (!out.empty()) {
        write_slice_csv(out, s);
    } else {
        std::printf("s,value\n");
        for (const auto& [a, p] : s) std::printf("%.17g,%.17g\n", a, p);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discontinuous Galerkin solver for flow and transport in fractured porous media"};
    app.require_subcommand(1);

    std::string scenario, out_dir, meshes = "20,40,80,160", which = "a", reference, fractures, line, out;
    double theta = 0.0, delta_p = 0.0;
    int order = -1, samples = 101;
    bool limit = false;

    auto* solve = app.add_subcommand("solve", "Solve the flow problem and write fields");
    solve->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
    solve->add_option("--out", out_dir, "output directory")->required();

    auto* conv = app.add_subcommand("convergence", "Error table against the exact single-line solutions");
    conv->add_option("scenario", scenario, "template scenario (mesh and penalty sections)")
        ->required()
        ->check(CLI::ExistingFile);
    conv->add_option("--meshes", meshes, "comma-separated cells per side");
    conv->add_option("--case", which, "a: fracture, b: barrier")->check(CLI::IsMember({"a", "b"}));
    conv->add_option("--theta", theta, "line angle in radians");
    conv->add_option("--order", order, "polynomial order (default: from the scenario)");
    conv->add_option("--out", out, "error table CSV");

    auto* err = app.add_subcommand("errors", "Relative errors against reference data");
    err->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
    err->add_option("--reference", reference, "reference matrix CSV")->required()->check(CLI::ExistingFile);
    err->add_option("--fracture-reference", fractures, "reference line CSV")->check(CLI::ExistingFile);
    err->add_option("--delta-p", delta_p, "pressure scale (default: file header, else value range)");

    auto* tr = app.add_subcommand("transport", "Transport simulation in the computed flow");
    tr->add_option("scenario", scenario, "scenario file with a [transport] section")
        ->required()
        ->check(CLI::ExistingFile);
    tr->add_option("--out", out_dir, "output directory")->required();
    tr->add_flag("--limit", limit, "limit the concentration in every cell after each step");

    auto* sl = app.add_subcommand("slice", "Pressure samples along a line");
    sl->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
    sl->add_option("--line", line, "x0,y0,x1,y1")->required();
    sl->add_option("--samples", samples, "number of samples")->check(CLI::Range(2, 10000000));
    sl->add_option("--out", out, "CSV file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return cmd_solve(scenario, out_dir);
        if (*conv) return cmd_convergence(scenario, meshes, which, theta, order, out);
        if (*err) return cmd_errors(scenario, reference, fractures, delta_p);
        if (*tr) return cmd_transport(scenario, out_dir, limit);
        if (*sl) return cmd_slice(scenario, line, samples, out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
