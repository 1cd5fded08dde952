#include <doctest.h>

#include "burgers_net/error.hpp"
#include "burgers_net/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bnet;

namespace {

Error error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected an error");
    return Error(Errc::InvalidArgument, "");
}

struct Row {
    double t;
    int edge;
    double x;
    double u;
};

std::vector<Row> parse_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        Row r{};
        REQUIRE(std::sscanf(line.c_str(), "%lf,%d,%lf,%lf", &r.t, &r.edge, &r.x, &r.u) == 4);
        rows.push_back(r);
    }
    return rows;
}

const char* p2_text = R"({
  "name": "p2",
  "graph": {"vertices": 3, "edges": [{"tail": 1, "head": 2, "length": 1}, {"tail": 2, "head": 3, "length": 1}]},
  "initial_data": [{"edge": 2, "segments": [[0, 1, 1]]}],
  "mode": "nonnegative",
  "solver": "godunov",
  "T": 0.2,
  "grid": {"cells_per_unit": 4},
  "output": {"times": [0.1, 0.2]}
})";

std::string source_path(const std::string& rel) { return std::string(BNET_SOURCE_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("build_diamond") {
    auto d = build_diamond();
    REQUIRE(d.edge_count() == 4);
    std::vector<double> lengths;
    for (const auto& e : d.edges()) lengths.push_back(e.length);
    CHECK(lengths == std::vector<double>{9, 2, 2, 9});
    CHECK(d.classify(1).kind == VertexKind::FirstKind);
    CHECK(d.classify(2).kind == VertexKind::SecondKind);
    CHECK_FALSE(d.is_tree());
    CHECK(d.increasing_order());
}

TEST_CASE("malformed JSON reports line and column") {
    auto e = error_of([] { parse_scenario("{\n  \"T\": 1,\n  \"name\" \"x\"\n}", "bad.json"); });
    CHECK(e.code() == Errc::ParseError);
    // The parser stops on the closing quote of the unexpected string.
    CHECK(std::string(e.what()).find("bad.json:3:12") != std::string::npos);
    CHECK(exit_code_for(e.code()) == ExitValidation);
}

TEST_CASE("validation errors carry the field path") {
    auto path_of = [](const std::string& text) {
        auto e = error_of([&] { parse_scenario(text, "s.json"); });
        CHECK(e.code() == Errc::ValidationError);
        return std::string(e.what());
    };
    const std::string graph = R"("graph": {"vertices": 3, "edges": [[1, 2, 1.0], [2, 3, 1.0]]})";
    CHECK(path_of("{" + graph + R"(, "initial_data": [{"edge": 1, "segments": [[0, 0.5, 1]]},
                                   {"edge": 2, "segments": [[0, 2, 1]]}]})")
              .find("initial_data[1].segments[0]") != std::string::npos);
    CHECK(path_of("{" + graph + R"(, "initial_data": [{"edge": 1}, {"edge": 1}]})").find("initial_data[1].edge") !=
          std::string::npos);
    CHECK(path_of("{" + graph + R"(, "initial_data": [{"edge": 3}]})").find("initial_data[0].edge") !=
          std::string::npos);
    CHECK(path_of("{" + graph + R"(, "colour": 1})").find("colour: unknown field") != std::string::npos);
    CHECK(path_of("{" + graph + R"(, "solver": "lax_oleinik"})").find("mode:") != std::string::npos);
    CHECK(path_of("{" + graph + R"(, "mode": "nonnegative", "solver": "both",
                                   "initial_data": [{"edge": 1, "segments": [[0, 1, -0.5]]}]})")
              .find("initial_data[0].segments[0]") != std::string::npos);
    CHECK(path_of("{" + graph + R"(, "initial_data": [{"edge": 1, "segments": [[0, 1, "k"]]}]})")
              .find("unknown parameter 'k'") != std::string::npos);
    CHECK(path_of("{" + graph + R"(, "policies": [{"vertex": 1, "solver": "explicit", "coefficients": [[1, 0]]}]})")
              .find("policies[0].coefficients") != std::string::npos);
    CHECK(path_of("{" + graph + R"(, "T": -1})").find("T: must be positive") != std::string::npos);
    CHECK(path_of("{" + graph + R"(, "output": {"times": [0.5, 2]}})").find("output.times[1]") != std::string::npos);
    CHECK(path_of(R"({"graph": {"vertices": 3, "edges": [[1, 2, 1], [2, 3, 1], [3, 1, 1]]}})").find("graph:") !=
          std::string::npos);
}

TEST_CASE("canonical JSON round-trips") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        auto spec = builtin_scenario(name);
        auto text = scenario_to_json(spec);
        CHECK(parse_scenario(text, name) == spec);
        CHECK(scenario_to_json(parse_scenario(text, name)) == text);
        CHECK(load_scenario(source_path("scenarios/" + name + ".json")) == spec);
    }
    auto p2 = parse_scenario(p2_text, "p2.json");
    CHECK(parse_scenario(scenario_to_json(p2), "again") == p2);
}

TEST_CASE("graph files") {
    auto tree = parse_graph(R"({"vertices": 4, "edges": [{"tail": 1, "head": 2, "length": 0.5},
                                                         {"tail": 2, "head": 3}, [2, 4, 2.0]]})",
                            "g.json");
    CHECK(tree.edge_count() == 3);
    CHECK(tree.length(0) == 0.5);
    CHECK(tree.length(1) == 1.0);
    CHECK(parse_graph(graph_to_json(tree), "again") == tree);
    auto circle = error_of([] {
        parse_graph(R"({"vertices": 3, "edges": [[1, 2, 1], [2, 3, 1], [3, 1, 1]]})", "circle.json");
    });
    CHECK(circle.code() == Errc::NotATree);
    CHECK(exit_code_for(circle.code()) == ExitValidation);
    CHECK(load_graph(source_path("scenarios/graphs/diamond.json"), {false, Topology::DirectedAcyclic}) ==
          build_diamond());
}

TEST_CASE("overrides") {
    auto spec = builtin_scenario("h3_split");
    apply_override(spec, "a=0.25");
    CHECK(spec.parameters.at("a") == 0.25);
    apply_override(spec, "parameters.a=0.75");
    CHECK(spec.parameters.at("a") == 0.75);
    apply_override(spec, "grid.cells_per_unit=50");
    CHECK(spec.cells_per_unit == 50);
    apply_override(spec, "T=0.3");
    CHECK(spec.T == 0.3);
    CHECK(error_of([&] { apply_override(spec, "b=1"); }).code() == Errc::ValidationError);
    CHECK(error_of([&] { apply_override(spec, "T=soon"); }).code() == Errc::ValidationError);
    CHECK(error_of([&] { apply_override(spec, "T"); }).code() == Errc::ValidationError);
}

TEST_CASE("output times from a stride") {
    auto spec = builtin_scenario("diamond_case2");
    spec.T = 5.0;
    auto p = prepare(spec);
    CHECK(p.times == std::vector<double>{0, 2, 4, 5});
    spec.output.stride = 0.0;
    CHECK(prepare(spec).times == std::vector<double>{5.0});
}

TEST_CASE("two output times, two edges, four cells give 16 rows") {
    auto spec = parse_scenario(p2_text, "p2.json");
    auto r = run_scenario(spec);
    REQUIRE(r.outputs.size() == 1);
    auto csv = snapshots_csv(r.outputs[0].snapshots);
    CHECK(csv.rfind("t,edge,x,u\n", 0) == 0);
    auto rows = parse_csv(csv);
    REQUIRE(rows.size() == 16);
    // Row-major by time, then edge, then x.
    CHECK(rows[0].t == 0.1);
    CHECK(rows[0].edge == 1);
    CHECK(rows[0].x == 0.125);
    CHECK(rows[4].edge == 2);
    CHECK(rows[8].t == 0.2);
    CHECK(rows[15].x == 0.875);
}

TEST_CASE("zero run writes zeros") {
    auto spec = parse_scenario(p2_text, "p2.json");
    spec.initial.clear();
    auto rows = parse_csv(snapshots_csv(run_scenario(spec).outputs[0].snapshots));
    CHECK(rows.size() == 16);
    for (const auto& r : rows) CHECK(r.u == 0.0);
}

TEST_CASE("identical specs give byte-identical output") {
    auto spec = builtin_scenario("h3_split");
    spec.cells_per_unit = 40;
    auto a = run_scenario(spec);
    auto b = run_scenario(spec);
    for (std::size_t k = 0; k < a.outputs.size(); ++k)
        CHECK(snapshots_csv(a.outputs[k].snapshots) == snapshots_csv(b.outputs[k].snapshots));
    CHECK(result_json(spec, a) == result_json(spec, b));
}

TEST_CASE("h3_split matches the piecewise solution") {
    // Edge 1: clamp(x/t, 0, a). Edges 2, 3: b = sqrt(2)/2 a below x = b t, then x/t up to 1.
    auto spec = builtin_scenario("h3_split");
    spec.solver = SolverChoice::LaxOleinik;
    spec.cells_per_unit = 100;
    const double a = spec.parameters.at("a"), b = std::sqrt(0.5) * a;
    auto r = run_scenario(spec);
    CHECK(r.exit_code == ExitOk);
    auto rows = parse_csv(snapshots_csv(r.outputs[0].snapshots));
    CHECK(rows.size() == 3 * 3 * 100);
    int checked = 0;
    for (const auto& row : rows) {
        if (row.t == 0.0) continue;
        double exact = row.edge == 1 ? std::clamp(row.x / row.t, 0.0, a) : std::clamp(row.x / row.t, b, 1.0);
        CHECK(std::abs(row.u - exact) <= 1e-9);
        ++checked;
    }
    CHECK(checked == 600);
}

TEST_CASE("both solvers produce an L1 table and audits") {
    auto spec = builtin_scenario("p2_riemann");
    spec.cells_per_unit = 200;
    auto r = run_scenario(spec);
    REQUIRE(r.outputs.size() == 2);
    CHECK(r.outputs[0].solver == "godunov");
    CHECK(r.outputs[1].solver == "lax_oleinik");
    REQUIRE(r.l1_table.size() == 3);
    CHECK(r.l1_table.back().first == 0.5);
    CHECK(r.l1_table.back().second < spec.l1_tolerance);
    CHECK(r.exit_code == ExitOk);
    for (const auto& out : r.outputs)
        for (const auto& d : out.diagnostics) CHECK(d.holds);

    spec.l1_tolerance = 1e-6;
    auto strict = run_scenario(spec);
    CHECK(strict.exit_code == ExitAudit);
    CHECK_FALSE(strict.audit_failures.empty());
    CHECK(run_scenario(spec, {false, "."}).exit_code == ExitOk);
}

TEST_CASE("solver errors keep the scenario name") {
    const char* text = R"({
      "name": "general",
      "graph": {"vertices": 5, "edges": [[1, 3, 1], [2, 3, 1], [3, 4, 1], [3, 5, 1]]},
      "initial_data": [{"edge": 1, "segments": [[0, 1, 0.5]]}],
      "T": 0.1, "grid": {"cells_per_unit": 10}
    })";
    auto spec = parse_scenario(text, "general.json");
    auto e = error_of([&] { run_scenario(spec); });
    CHECK(e.code() == Errc::UnsupportedVertexClass);
    CHECK(std::string(e.what()).find("scenario 'general'") != std::string::npos);
    CHECK(exit_code_for(e.code()) == ExitSolver);
}

TEST_CASE("emit_outputs") {
    auto dir = std::filesystem::temp_directory_path() / "bnet_emit_test";
    std::filesystem::remove_all(dir);
    auto spec = builtin_scenario("p2_riemann");
    spec.cells_per_unit = 20;
    auto r = run_scenario(spec);
    auto files = emit_outputs(spec, r, dir.string());
    for (const char* f : {"p2_riemann_godunov.csv", "p2_riemann_lax_oleinik.csv", "p2_riemann_godunov.svg",
                          "p2_riemann_lax_oleinik.svg", "p2_riemann.json", "p2_riemann_l1.csv"}) {
        CAPTURE(f);
        CHECK(std::filesystem::exists(dir / f));
    }
    CHECK(files.size() == 6);
    std::ifstream svg(dir / "p2_riemann_godunov.svg");
    std::string head;
    std::getline(svg, head);
    CHECK(head.rfind("<svg", 0) == 0);

    std::ofstream(dir / "blocker") << "x";
    CHECK(error_of([&] { emit_outputs(spec, r, (dir / "blocker").string()); }).code() == Errc::IoError);
    std::filesystem::remove_all(dir);
}
