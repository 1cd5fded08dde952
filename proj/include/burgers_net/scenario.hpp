#pragma once

#include "burgers_net/diagnostics.hpp"
#include "burgers_net/godunov.hpp"
#include "burgers_net/graph.hpp"
#include "burgers_net/lax_oleinik.hpp"
#include "burgers_net/transmission.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bnet {

// Graph section of a scenario: exactly one of builtin, file or inline edges.
// Indices in files are 1-based.
struct GraphSpec {
    std::string builtin;
    std::string file;
    int vertices = 0;
    std::vector<EdgeSpec> edges;  // 0-based once loaded
    std::vector<std::string> labels;
    Topology topology = Topology::Tree;

    bool operator==(const GraphSpec&) const = default;
};

// A segment value is either a number or the name of a parameter.
struct SegmentSpec {
    double x0 = 0.0;
    double x1 = 0.0;
    double value = 0.0;
    std::string parameter;

    bool operator==(const SegmentSpec&) const = default;
};

struct EdgeData {
    int edge = 0;  // 0-based
    std::vector<SegmentSpec> segments;

    bool operator==(const EdgeData&) const = default;
};

struct PolicySpec {
    int vertex = 0;  // 0-based
    VertexPolicy policy;

    bool operator==(const PolicySpec&) const = default;
};

enum class SolverChoice { LaxOleinik, Godunov, Both };
const char* solver_choice_name(SolverChoice s);

struct OutputSpec {
    std::vector<double> times;
    double stride = 0.0;  // used when times is empty
    std::string csv;
    std::string json;
    std::string svg;

    bool operator==(const OutputSpec&) const = default;
};

struct ScenarioSpec {
    std::string name;
    GraphSpec graph;
    std::map<std::string, double> parameters;
    std::vector<EdgeData> initial;  // edges not listed start at zero
    VertexPolicy default_policy;
    std::vector<PolicySpec> policies;
    CouplingMode mode = CouplingMode::Signed;
    SolverChoice solver = SolverChoice::Godunov;
    double T = 1.0;
    double cells_per_unit = 100.0;
    double cfl = 0.45;
    OutputSpec output;
    double l1_tolerance = 2e-2;

    bool operator==(const ScenarioSpec&) const = default;
};

// Graph JSON: {"vertices": n, "edges": [[tail, head, length], ...], "labels": [...], "topology": "tree"|"dag"}.
DirectedMetricTree load_graph(const std::string& path, const BuildOptions& options = {});
DirectedMetricTree parse_graph(const std::string& text, const std::string& origin, const BuildOptions& options = {});
std::string graph_to_json(const DirectedMetricTree& tree);

// v0 -> v1 (9), v1 -> v2 twice (2, 2), v2 -> v3 (9). Not a tree: the two middle edges are parallel.
DirectedMetricTree build_diamond();

// ParseError carries line and column; ValidationError carries the field path.
ScenarioSpec load_scenario(const std::string& path);
ScenarioSpec parse_scenario(const std::string& text, const std::string& origin, const std::string& base_dir = ".");
std::string scenario_to_json(const ScenarioSpec& spec);

// Built-in scenarios: p2_riemann, h3_split, diamond_case1, diamond_case2, diamond_case3.
std::vector<std::string> builtin_names();
ScenarioSpec builtin_scenario(const std::string& name);

// key=value: T, cfl, grid.cells_per_unit, or a parameter name.
void apply_override(ScenarioSpec& spec, const std::string& assignment);

struct Prepared {
    DirectedMetricTree tree;
    std::vector<StepFunction> initial;
    std::vector<VertexPolicy> policies;
    std::vector<double> times;
};

// Validates the scenario against its graph; throws ValidationError with the field path.
Prepared prepare(const ScenarioSpec& spec, const std::string& base_dir = ".");

struct RunOptions {
    bool audit = true;
    std::string out_dir = ".";
};

struct SolverOutput {
    std::string solver;
    std::vector<Snapshot> snapshots;
    std::vector<DiagnosticReport> diagnostics;
};

struct RunResult {
    int exit_code = 0;
    std::vector<SolverOutput> outputs;
    std::vector<std::pair<double, double>> l1_table;  // (t, L1 distance) when both solvers ran
    std::vector<std::string> audit_failures;
    std::vector<std::string> files;
};

enum ExitCode { ExitOk = 0, ExitValidation = 2, ExitAudit = 3, ExitSolver = 4 };

// Input problems (parse, validation, I/O, graph structure) map to ExitValidation, the rest to ExitSolver.
int exit_code_for(Errc code);

// Runs the solvers and audits; throws Error on solver failures.
RunResult run_scenario(const ScenarioSpec& spec, const RunOptions& options = {}, const std::string& base_dir = ".");

std::string snapshots_csv(const std::vector<Snapshot>& snapshots);
// Records mirror the CSV rows grouped by (t, edge), followed by the diagnostics of each solver.
std::string result_json(const ScenarioSpec& spec, const RunResult& result);
std::string snapshots_svg(const std::vector<Snapshot>& snapshots, const std::string& title);

// Writes CSV/JSON/SVG (and the L1 table) into out_dir; returns the written paths.
// With both solvers the CSV and SVG names get a _godunov / _lax_oleinik suffix.
std::vector<std::string> emit_outputs(const ScenarioSpec& spec, const RunResult& result, const std::string& out_dir);

}  // namespace bnet
