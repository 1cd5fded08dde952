// bnet: run Burgers network scenarios and inspect graph files.
#include "burgers_net/error.hpp"
#include "burgers_net/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace bnet;

namespace {

void print_report(const SolverOutput& out) {
    std::printf("[%s] %zu snapshots\n", out.solver.c_str(), out.snapshots.size());
    for (const auto& d : out.diagnostics) {
        std::printf("  %-24s total %-14.8g", d.metric.c_str(), d.total);
        if (d.bound) std::printf(" bound %-12.6g %s", *d.bound, d.holds ? "ok" : "exceeded");
        if (!d.per_edge.empty()) {
            std::printf("  per edge");
            for (double v : d.per_edge) std::printf(" %.6g", v);
        }
        std::printf("\n");
    }
}

ScenarioSpec load_named(const std::string& arg, std::string& base_dir) {
    if (!std::filesystem::exists(arg)) {
        for (const auto& n : builtin_names())
            if (n == arg) return builtin_scenario(arg);
    }
    base_dir = std::filesystem::path(arg).parent_path().string();
    if (base_dir.empty()) base_dir = ".";
    return load_scenario(arg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Burgers' equation on directed metric trees"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run a scenario file or a built-in scenario name");
    std::string scenario_path, solver, out_dir = "out";
    double cells = 0.0, cfl = 0.0;
    bool audit = true, print_config = false;
    std::vector<std::string> sets;
    run_cmd->add_option("scenario", scenario_path, "Scenario JSON file or built-in name")->required();
    run_cmd->add_option("--solver", solver, "Override the solver")
        ->check(CLI::IsMember({"lax_oleinik", "godunov", "both"}));
    run_cmd->add_option("--cells", cells, "Override grid cells per unit length")->check(CLI::PositiveNumber);
    run_cmd->add_option("--cfl", cfl, "Override the CFL number")->check(CLI::Range(0.0, 1.0));
    run_cmd->add_flag("--audit,!--no-audit", audit, "Fail with exit code 3 on audit failures (default on)");
    run_cmd->add_option("--out-dir", out_dir, "Directory for CSV/JSON/SVG output")->capture_default_str();
    run_cmd->add_option("--set", sets, "Override key=value (T, cfl, grid.cells_per_unit, tolerance.l1, parameters)");
    run_cmd->add_flag("--print-config", print_config, "Print the effective configuration and exit");

    auto* graph_cmd = app.add_subcommand("graph", "Validate a graph file and print its canonical form");
    std::string graph_path;
    bool reindex = false, strict = false;
    graph_cmd->add_option("file", graph_path, "Graph JSON file")->required();
    graph_cmd->add_flag("--reindex", reindex, "Renumber edges into increasing order");
    graph_cmd->add_flag("--strict", strict, "Reject graphs whose edges are not in increasing order");

    auto* builtin_cmd = app.add_subcommand("builtin", "List built-ins or print one as JSON");
    std::string builtin_name;
    builtin_cmd->add_option("name", builtin_name, "Scenario name, or 'diamond' for the graph");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            std::string base_dir = ".";
            ScenarioSpec spec = load_named(scenario_path, base_dir);
            if (!solver.empty())
                spec.solver = solver == "both" ? SolverChoice::Both
                              : solver == "godunov" ? SolverChoice::Godunov
                                                    : SolverChoice::LaxOleinik;
            if (cells > 0.0) spec.cells_per_unit = cells;
            if (cfl > 0.0) spec.cfl = cfl;
            for (const auto& s : sets) apply_override(spec, s);
            prepare(spec, base_dir);
            if (print_config) {
                auto config = nlohmann::ordered_json::parse(scenario_to_json(spec));
                config["run"] = {{"audit", audit}, {"out_dir", out_dir}};
                std::cout << config.dump(2) << "\n";
                return ExitOk;
            }
            RunResult result = run_scenario(spec, {audit, out_dir}, base_dir);
            std::printf("scenario %s: solver %s, T = %g, %g cells per unit\n", spec.name.c_str(),
                        solver_choice_name(spec.solver), spec.T, spec.cells_per_unit);
            for (const auto& out : result.outputs) print_report(out);
            if (!result.l1_table.empty()) {
                std::printf("L1 difference (godunov vs lax_oleinik)\n");
                for (const auto& [t, d] : result.l1_table) std::printf("  t = %-10.6g %.6g\n", t, d);
            }
            for (const auto& path : emit_outputs(spec, result, out_dir)) std::printf("wrote %s\n", path.c_str());
            for (const auto& f : result.audit_failures) std::fprintf(stderr, "audit failure: %s\n", f.c_str());
            if (!audit && !result.audit_failures.empty()) std::fprintf(stderr, "audits disabled, exit status 0\n");
            return result.exit_code;
        }
        if (*graph_cmd) {
            DirectedMetricTree tree = load_graph(graph_path, {strict, Topology::Tree});
            if (!tree.increasing_order()) {
                if (reindex)
                    tree = reindex_increasing(tree).tree;
                else
                    std::fprintf(stderr, "warning: edges are not in increasing order (use --reindex)\n");
            }
            std::cout << graph_to_json(tree);
            return ExitOk;
        }
        if (*builtin_cmd) {
            if (builtin_name.empty()) {
                for (const auto& n : builtin_names()) std::printf("%s\n", n.c_str());
                std::printf("diamond (graph)\n");
            } else if (builtin_name == "diamond") {
                std::cout << graph_to_json(build_diamond());
            } else {
                std::cout << scenario_to_json(builtin_scenario(builtin_name));
            }
            return ExitOk;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    }
    return ExitOk;
}
