#include "burgers_net/scenario.hpp"

#include "burgers_net/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace bnet {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& msg) {
    throw Error(Errc::ValidationError, path + ": " + msg);
}

std::string at(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

Json parse_json(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // e.byte is 1-based and points at the offending character.
        std::size_t end = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
        int line = 1, col = 1;
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(Errc::ParseError, origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                                          "malformed JSON");
    }
}

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) invalid(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!ok) invalid(at(path, key), "unknown field");
    }
}

double number(const Json& j, const std::string& path) {
    if (!j.is_number()) invalid(path, "expected a number");
    return j.get<double>();
}

int integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) invalid(path, "expected an integer");
    return j.get<int>();
}

std::string string(const Json& j, const std::string& path) {
    if (!j.is_string()) invalid(path, "expected a string");
    return j.get<std::string>();
}

const Json& array(const Json& j, const std::string& path) {
    if (!j.is_array()) invalid(path, "expected an array");
    return j;
}

Topology topology_of(const std::string& s, const std::string& path) {
    if (s == "tree") return Topology::Tree;
    if (s == "dag") return Topology::DirectedAcyclic;
    invalid(path, "expected \"tree\" or \"dag\"");
}

const char* topology_name(Topology t) { return t == Topology::Tree ? "tree" : "dag"; }

// Inline graph fields; edges are converted to 0-based.
void read_inline_graph(const Json& j, const std::string& path, GraphSpec& g) {
    if (!j.contains("vertices")) invalid(at(path, "vertices"), "missing");
    if (!j.contains("edges")) invalid(at(path, "edges"), "missing");
    g.vertices = integer(j["vertices"], at(path, "vertices"));
    const std::string ep = at(path, "edges");
    const auto& edges = array(j["edges"], ep);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        const std::string p = at(ep, i);
        EdgeSpec s;
        if (e.is_array()) {
            if (e.size() != 3) invalid(p, "expected [tail, head, length]");
            s = {integer(e[0], at(p, 0)) - 1, integer(e[1], at(p, 1)) - 1, number(e[2], at(p, 2))};
        } else {
            check_keys(e, p, {"tail", "head", "length"});
            if (!e.contains("tail") || !e.contains("head")) invalid(p, "needs tail and head");
            s.tail = integer(e["tail"], at(p, "tail")) - 1;
            s.head = integer(e["head"], at(p, "head")) - 1;
            s.length = e.contains("length") ? number(e["length"], at(p, "length")) : 1.0;
        }
        g.edges.push_back(s);
    }
    if (j.contains("labels")) {
        const auto& labels = array(j["labels"], at(path, "labels"));
        for (std::size_t i = 0; i < labels.size(); ++i) g.labels.push_back(string(labels[i], at(at(path, "labels"), i)));
    }
    if (j.contains("topology")) g.topology = topology_of(string(j["topology"], at(path, "topology")), at(path, "topology"));
}

Json inline_graph_json(int vertices, const std::vector<EdgeSpec>& edges, const std::vector<std::string>& labels,
                       Topology topology) {
    Json j;
    j["vertices"] = vertices;
    Json es = Json::array();
    for (const auto& e : edges) es.push_back({{"tail", e.tail + 1}, {"head", e.head + 1}, {"length", e.length}});
    j["edges"] = es;
    if (!labels.empty()) j["labels"] = labels;
    j["topology"] = topology_name(topology);
    return j;
}

DirectedMetricTree build_graph(const GraphSpec& g, const std::string& base_dir) {
    if (!g.builtin.empty()) {
        if (g.builtin == "diamond") return build_diamond();
        invalid("graph.builtin", "unknown graph '" + g.builtin + "'");
    }
    if (!g.file.empty()) {
        fs::path p(g.file);
        if (p.is_relative()) p = fs::path(base_dir) / p;
        return load_graph(p.string());
    }
    try {
        return build_tree(g.vertices, g.edges, {false, g.topology}, g.labels);
    } catch (const Error& e) {
        invalid("graph", e.what());
    }
}

VertexPolicy read_policy(const Json& j, const std::string& path, bool allow_vertex) {
    VertexPolicy p;
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "minimal") return p;
        if (s == "maximal") {
            p.kind = SolverKind::Maximal;
            return p;
        }
        invalid(path, "expected \"minimal\" or \"maximal\"");
    }
    if (allow_vertex)
        check_keys(j, path, {"vertex", "solver", "coefficients", "reverse_coefficients", "tie_break"});
    else
        check_keys(j, path, {"solver", "coefficients", "reverse_coefficients", "tie_break"});
    if (j.contains("solver")) {
        std::string s = string(j["solver"], at(path, "solver"));
        if (s == "minimal")
            p.kind = SolverKind::Minimal;
        else if (s == "maximal")
            p.kind = SolverKind::Maximal;
        else if (s == "explicit")
            p.kind = SolverKind::Explicit;
        else
            invalid(at(path, "solver"), "expected minimal, maximal or explicit");
    }
    if (j.contains("tie_break")) {
        std::string s = string(j["tie_break"], at(path, "tie_break"));
        if (s == "lowest_index")
            p.tie_break = TieBreak::LowestIndex;
        else if (s == "highest_index")
            p.tie_break = TieBreak::HighestIndex;
        else
            invalid(at(path, "tie_break"), "expected lowest_index or highest_index");
    }
    auto matrix = [&](const char* key) {
        const std::string mp = at(path, key);
        const auto& rows = array(j[key], mp);
        if (rows.empty()) invalid(mp, "empty matrix");
        const std::size_t cols = array(rows[0], at(mp, 0)).size();
        Eigen::MatrixXd m(rows.size(), cols);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& row = array(rows[r], at(mp, r));
            if (row.size() != cols) invalid(at(mp, r), "ragged matrix");
            for (std::size_t c = 0; c < cols; ++c) {
                double v = number(row[c], at(at(mp, r), c));
                if (v < 0.0) invalid(at(at(mp, r), c), "coefficients must be non-negative");
                m(r, c) = v;
            }
        }
        return m;
    };
    if (j.contains("coefficients")) p.forward = matrix("coefficients");
    if (j.contains("reverse_coefficients")) p.reverse = matrix("reverse_coefficients");
    if ((p.forward.size() || p.reverse.size()) && p.kind != SolverKind::Explicit)
        invalid(at(path, "coefficients"), "coefficients need solver \"explicit\"");
    return p;
}

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Json policy_json(const VertexPolicy& p) {
    Json j;
    j["solver"] = solver_kind_name(p.kind);
    j["tie_break"] = tie_break_name(p.tie_break);
    if (p.forward.size()) j["coefficients"] = matrix_json(p.forward);
    if (p.reverse.size()) j["reverse_coefficients"] = matrix_json(p.reverse);
    return j;
}

double segment_value(const ScenarioSpec& spec, const SegmentSpec& s, const std::string& path) {
    if (s.parameter.empty()) return s.value;
    auto it = spec.parameters.find(s.parameter);
    if (it == spec.parameters.end()) invalid(path, "unknown parameter '" + s.parameter + "'");
    return it->second;
}

void check_policy_shape(const DirectedMetricTree& tree, int v, const VertexPolicy& p, const std::string& path) {
    if (p.kind != SolverKind::Explicit) return;
    const auto& d = tree.direction(v);
    const auto nin = static_cast<Eigen::Index>(d.in_edges.size());
    const auto nout = static_cast<Eigen::Index>(d.out_edges.size());
    if (p.forward.size() && (p.forward.rows() != nout || p.forward.cols() != nin))
        invalid(at(path, "coefficients"), "expected " + std::to_string(nout) + " rows of " + std::to_string(nin));
    if (p.reverse.size() && (p.reverse.rows() != nin || p.reverse.cols() != nout))
        invalid(at(path, "reverse_coefficients"),
                "expected " + std::to_string(nin) + " rows of " + std::to_string(nout));
}

std::vector<double> output_times(const ScenarioSpec& spec) {
    if (!spec.output.times.empty()) return spec.output.times;
    if (spec.output.stride <= 0.0) return {spec.T};
    std::vector<double> times;
    const double slack = 1e-9 * spec.output.stride;
    for (long k = 0;; ++k) {
        double t = static_cast<double>(k) * spec.output.stride;
        if (t > spec.T + slack) break;
        times.push_back(std::min(t, spec.T));
    }
    if (spec.T - times.back() > slack) times.push_back(spec.T);
    return times;
}

std::string strip_code(const Error& e) {
    std::string w = e.what();
    std::string prefix = std::string(errc_name(e.code())) + ": ";
    return w.rfind(prefix, 0) == 0 ? w.substr(prefix.size()) : w;
}

void snap_zero(double& v) {
    if (v == 0.0) v = 0.0;  // drops the sign of -0
}

}  // namespace

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::ParseError:
        case Errc::ValidationError:
        case Errc::IoError:
        case Errc::NotATree:
        case Errc::MultipleEdge:
        case Errc::NonPositiveLength:
        case Errc::NotIncreasingOrder:
        case Errc::NotConnected:
        case Errc::ContainsCycle:
        case Errc::InvalidIndex: return ExitValidation;
        default: return ExitSolver;
    }
}

const char* solver_choice_name(SolverChoice s) {
    switch (s) {
        case SolverChoice::LaxOleinik: return "lax_oleinik";
        case SolverChoice::Godunov: return "godunov";
        case SolverChoice::Both: return "both";
    }
    return "godunov";
}

DirectedMetricTree parse_graph(const std::string& text, const std::string& origin, const BuildOptions& options) {
    Json j = parse_json(text, origin);
    check_keys(j, "", {"vertices", "edges", "labels", "topology"});
    GraphSpec g;
    g.topology = options.topology;
    read_inline_graph(j, "", g);
    return build_tree(g.vertices, g.edges, {options.strict_order, g.topology}, g.labels);
}

DirectedMetricTree load_graph(const std::string& path, const BuildOptions& options) {
    return parse_graph(read_file(path), path, options);
}

std::string graph_to_json(const DirectedMetricTree& tree) {
    return inline_graph_json(tree.vertex_count(), tree.edges(), tree.labels(),
                             tree.is_tree() ? Topology::Tree : Topology::DirectedAcyclic)
               .dump(2) +
           "\n";
}

DirectedMetricTree build_diamond() {
    return build_tree(4, {{0, 1, 9.0}, {1, 2, 2.0}, {1, 2, 2.0}, {2, 3, 9.0}}, {false, Topology::DirectedAcyclic},
                      {"left", "v1", "v2", "right"});
}

ScenarioSpec parse_scenario(const std::string& text, const std::string& origin, const std::string& base_dir) {
    Json j = parse_json(text, origin);
    check_keys(j, "", {"name", "graph", "parameters", "initial_data", "default_policy", "policies", "mode", "solver",
                       "T", "grid", "cfl", "output", "tolerance"});
    ScenarioSpec s;
    if (j.contains("name")) s.name = string(j["name"], "name");

    if (!j.contains("graph")) invalid("graph", "missing");
    const Json& g = j["graph"];
    if (!g.is_object()) invalid("graph", "expected an object");
    if (g.contains("builtin")) {
        check_keys(g, "graph", {"builtin"});
        s.graph.builtin = string(g["builtin"], "graph.builtin");
    } else if (g.contains("file")) {
        check_keys(g, "graph", {"file"});
        s.graph.file = string(g["file"], "graph.file");
    } else {
        check_keys(g, "graph", {"vertices", "edges", "labels", "topology"});
        read_inline_graph(g, "graph", s.graph);
    }

    if (j.contains("parameters")) {
        if (!j["parameters"].is_object()) invalid("parameters", "expected an object");
        for (const auto& [key, v] : j["parameters"].items()) s.parameters[key] = number(v, at("parameters", key));
    }

    if (j.contains("initial_data")) {
        const auto& items = array(j["initial_data"], "initial_data");
        for (std::size_t i = 0; i < items.size(); ++i) {
            const std::string p = at("initial_data", i);
            check_keys(items[i], p, {"edge", "segments"});
            if (!items[i].contains("edge")) invalid(at(p, "edge"), "missing");
            EdgeData d;
            d.edge = integer(items[i]["edge"], at(p, "edge")) - 1;
            if (items[i].contains("segments")) {
                const auto& segs = array(items[i]["segments"], at(p, "segments"));
                for (std::size_t k = 0; k < segs.size(); ++k) {
                    const std::string sp = at(at(p, "segments"), k);
                    const auto& seg = array(segs[k], sp);
                    if (seg.size() != 3) invalid(sp, "expected [x_start, x_end, value]");
                    SegmentSpec ss;
                    ss.x0 = number(seg[0], at(sp, 0));
                    ss.x1 = number(seg[1], at(sp, 1));
                    if (seg[2].is_string())
                        ss.parameter = seg[2].get<std::string>();
                    else
                        ss.value = number(seg[2], at(sp, 2));
                    d.segments.push_back(ss);
                }
            }
            s.initial.push_back(d);
        }
    }

    if (j.contains("default_policy")) s.default_policy = read_policy(j["default_policy"], "default_policy", false);
    if (j.contains("policies")) {
        const auto& items = array(j["policies"], "policies");
        for (std::size_t i = 0; i < items.size(); ++i) {
            const std::string p = at("policies", i);
            if (!items[i].is_object()) invalid(p, "expected an object");
            if (!items[i].contains("vertex")) invalid(at(p, "vertex"), "missing");
            s.policies.push_back({integer(items[i]["vertex"], at(p, "vertex")) - 1, read_policy(items[i], p, true)});
        }
    }

    if (j.contains("mode")) {
        std::string m = string(j["mode"], "mode");
        if (m == "signed")
            s.mode = CouplingMode::Signed;
        else if (m == "nonnegative")
            s.mode = CouplingMode::NonNegative;
        else
            invalid("mode", "expected signed or nonnegative");
    }
    if (j.contains("solver")) {
        std::string m = string(j["solver"], "solver");
        if (m == "lax_oleinik")
            s.solver = SolverChoice::LaxOleinik;
        else if (m == "godunov")
            s.solver = SolverChoice::Godunov;
        else if (m == "both")
            s.solver = SolverChoice::Both;
        else
            invalid("solver", "expected lax_oleinik, godunov or both");
    }
    if (j.contains("T")) s.T = number(j["T"], "T");
    if (j.contains("grid")) {
        check_keys(j["grid"], "grid", {"cells_per_unit"});
        if (j["grid"].contains("cells_per_unit"))
            s.cells_per_unit = number(j["grid"]["cells_per_unit"], "grid.cells_per_unit");
    }
    if (j.contains("cfl")) s.cfl = number(j["cfl"], "cfl");
    if (j.contains("output")) {
        const Json& o = j["output"];
        check_keys(o, "output", {"times", "stride", "csv", "json", "svg"});
        if (o.contains("times")) {
            const auto& ts = array(o["times"], "output.times");
            for (std::size_t k = 0; k < ts.size(); ++k) s.output.times.push_back(number(ts[k], at("output.times", k)));
        }
        if (o.contains("stride")) s.output.stride = number(o["stride"], "output.stride");
        if (o.contains("csv")) s.output.csv = string(o["csv"], "output.csv");
        if (o.contains("json")) s.output.json = string(o["json"], "output.json");
        if (o.contains("svg")) s.output.svg = string(o["svg"], "output.svg");
    }
    if (j.contains("tolerance")) {
        check_keys(j["tolerance"], "tolerance", {"l1"});
        if (j["tolerance"].contains("l1")) s.l1_tolerance = number(j["tolerance"]["l1"], "tolerance.l1");
    }

    prepare(s, base_dir);
    return s;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::string base = fs::path(path).parent_path().string();
    return parse_scenario(read_file(path), path, base.empty() ? "." : base);
}

std::string scenario_to_json(const ScenarioSpec& spec) {
    Json j;
    j["name"] = spec.name;
    if (!spec.graph.builtin.empty())
        j["graph"] = {{"builtin", spec.graph.builtin}};
    else if (!spec.graph.file.empty())
        j["graph"] = {{"file", spec.graph.file}};
    else
        j["graph"] = inline_graph_json(spec.graph.vertices, spec.graph.edges, spec.graph.labels, spec.graph.topology);
    j["parameters"] = Json::object();
    for (const auto& [k, v] : spec.parameters) j["parameters"][k] = v;
    Json init = Json::array();
    for (const auto& d : spec.initial) {
        Json segs = Json::array();
        for (const auto& s : d.segments) {
            Json value = s.parameter.empty() ? Json(s.value) : Json(s.parameter);
            segs.push_back({s.x0, s.x1, value});
        }
        init.push_back({{"edge", d.edge + 1}, {"segments", segs}});
    }
    j["initial_data"] = init;
    j["default_policy"] = policy_json(spec.default_policy);
    Json pols = Json::array();
    for (const auto& p : spec.policies) {
        Json pj;
        pj["vertex"] = p.vertex + 1;
        const Json policy = policy_json(p.policy);
        for (const auto& [k, v] : policy.items()) pj[k] = v;
        pols.push_back(pj);
    }
    j["policies"] = pols;
    j["mode"] = spec.mode == CouplingMode::Signed ? "signed" : "nonnegative";
    j["solver"] = solver_choice_name(spec.solver);
    j["T"] = spec.T;
    j["grid"] = {{"cells_per_unit", spec.cells_per_unit}};
    j["cfl"] = spec.cfl;
    Json out;
    out["times"] = spec.output.times;
    out["stride"] = spec.output.stride;
    out["csv"] = spec.output.csv;
    out["json"] = spec.output.json;
    out["svg"] = spec.output.svg;
    j["output"] = out;
    j["tolerance"] = {{"l1", spec.l1_tolerance}};
    return j.dump(2) + "\n";
}

Prepared prepare(const ScenarioSpec& spec, const std::string& base_dir) {
    if (!(spec.T > 0.0)) invalid("T", "must be positive");
    if (!(spec.cells_per_unit > 0.0)) invalid("grid.cells_per_unit", "must be positive");
    if (!(spec.cfl > 0.0 && spec.cfl <= 1.0)) invalid("cfl", "must lie in (0, 1]");
    if (!(spec.l1_tolerance > 0.0)) invalid("tolerance.l1", "must be positive");
    if (spec.output.stride < 0.0) invalid("output.stride", "must be non-negative");
    for (std::size_t k = 0; k < spec.output.times.size(); ++k) {
        double t = spec.output.times[k];
        if (!(t >= 0.0 && t <= spec.T)) invalid(at("output.times", k), "must lie in [0, T]");
        if (k && t < spec.output.times[k - 1]) invalid(at("output.times", k), "times must be non-decreasing");
    }

    Prepared p{build_graph(spec.graph, base_dir), {}, {}, output_times(spec)};
    const DirectedMetricTree& tree = p.tree;
    const int m = tree.edge_count();
    const bool lax_oleinik = spec.solver != SolverChoice::Godunov;
    if (lax_oleinik && spec.mode != CouplingMode::NonNegative)
        invalid("mode", "the Lax-Oleinik solver needs mode \"nonnegative\"");
    if (lax_oleinik && !tree.is_tree()) invalid("solver", "the Lax-Oleinik solver needs a tree graph");

    std::vector<std::vector<Segment>> segments(m);
    std::set<int> seen;
    for (std::size_t i = 0; i < spec.initial.size(); ++i) {
        const std::string path = at("initial_data", i);
        const EdgeData& d = spec.initial[i];
        if (d.edge < 0 || d.edge >= m)
            invalid(at(path, "edge"), "edge " + std::to_string(d.edge + 1) + " outside 1.." + std::to_string(m));
        if (!seen.insert(d.edge).second) invalid(at(path, "edge"), "edge listed twice");
        const double l = tree.length(d.edge);
        for (std::size_t k = 0; k < d.segments.size(); ++k) {
            const std::string sp = at(at(path, "segments"), k);
            const SegmentSpec& s = d.segments[k];
            if (!(s.x0 >= 0.0 && s.x0 < s.x1 && s.x1 <= l)) invalid(sp, "need 0 <= x_start < x_end <= edge length");
            double v = segment_value(spec, s, sp);
            if (!std::isfinite(v)) invalid(sp, "value is not finite");
            if (lax_oleinik && v < 0.0) invalid(sp, "the Lax-Oleinik solver needs non-negative values");
            segments[d.edge].push_back({s.x0, s.x1, v});
        }
    }
    for (int j = 0; j < m; ++j) p.initial.push_back(StepFunction::from_segments(tree.length(j), segments[j]));

    auto check_maximal = [&](const VertexPolicy& pol, const std::string& path) {
        if (pol.kind == SolverKind::Maximal && !tree.increasing_order())
            invalid(path, "the maximal solver needs an increasing edge order");
    };
    check_maximal(spec.default_policy, "default_policy.solver");
    p.policies.assign(tree.vertex_count(), spec.default_policy);
    for (int v = 0; v < tree.vertex_count(); ++v) check_policy_shape(tree, v, spec.default_policy, "default_policy");
    seen.clear();
    for (std::size_t i = 0; i < spec.policies.size(); ++i) {
        const std::string path = at("policies", i);
        const PolicySpec& ps = spec.policies[i];
        if (ps.vertex < 0 || ps.vertex >= tree.vertex_count())
            invalid(at(path, "vertex"),
                    "vertex " + std::to_string(ps.vertex + 1) + " outside 1.." + std::to_string(tree.vertex_count()));
        if (!seen.insert(ps.vertex).second) invalid(at(path, "vertex"), "vertex listed twice");
        check_maximal(ps.policy, at(path, "solver"));
        check_policy_shape(tree, ps.vertex, ps.policy, path);
        p.policies[ps.vertex] = ps.policy;
    }
    return p;
}

void apply_override(ScenarioSpec& spec, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) invalid("--set", "expected key=value, got '" + assignment + "'");
    std::string key = assignment.substr(0, eq);
    std::string text = assignment.substr(eq + 1);
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        invalid(key, "'" + text + "' is not a number");
    }
    if (key == "T")
        spec.T = value;
    else if (key == "cfl")
        spec.cfl = value;
    else if (key == "grid.cells_per_unit")
        spec.cells_per_unit = value;
    else if (key == "tolerance.l1")
        spec.l1_tolerance = value;
    else {
        if (key.rfind("parameters.", 0) == 0) key = key.substr(11);
        auto it = spec.parameters.find(key);
        if (it == spec.parameters.end()) invalid(key, "unknown setting");
        it->second = value;
    }
}

std::vector<std::string> builtin_names() {
    return {"p2_riemann", "h3_split", "diamond_case1", "diamond_case2", "diamond_case3"};
}

ScenarioSpec builtin_scenario(const std::string& name) {
    ScenarioSpec s;
    s.name = name;
    s.output.svg = name + ".svg";
    if (name == "p2_riemann") {
        // u0 = (0, 1): a fan x/t opens on edge 2 and edge 1 stays at rest.
        s.graph.vertices = 3;
        s.graph.edges = {{0, 1, 1.0}, {1, 2, 1.0}};
        s.initial = {{1, {{0.0, 1.0, 1.0, ""}}}};
        s.mode = CouplingMode::NonNegative;
        s.solver = SolverChoice::Both;
        s.T = 0.5;
        s.cells_per_unit = 800;
        s.output.times = {0.0, 0.2, 0.5};
    } else if (name == "h3_split") {
        // First-kind star with u0 = (a, 1, 1).
        s.graph.vertices = 4;
        s.graph.edges = {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}};
        s.parameters["a"] = 0.5;
        s.initial = {{0, {{0.0, 1.0, 0.0, "a"}}}, {1, {{0.0, 1.0, 1.0, ""}}}, {2, {{0.0, 1.0, 1.0, ""}}}};
        s.mode = CouplingMode::NonNegative;
        s.solver = SolverChoice::Both;
        s.T = 0.5;
        s.cells_per_unit = 400;
        s.output.times = {0.0, 0.25, 0.5};
    } else if (name == "diamond_case1" || name == "diamond_case2" || name == "diamond_case3") {
        s.graph.builtin = "diamond";
        s.initial = {{0, {{6.0, 7.0, 1.0, ""}}}, {3, {{2.0, 3.0, -1.0, ""}}}};
        s.mode = CouplingMode::Signed;
        s.solver = SolverChoice::Godunov;
        s.T = 40.0;
        s.cells_per_unit = 400;
        s.output.stride = 2.0;
        if (name == "diamond_case1") {
            // The right-moving wave takes e2, the left-moving wave takes e3.
            VertexPolicy v1;
            v1.kind = SolverKind::Explicit;
            v1.forward = Eigen::MatrixXd{{1.0}, {0.0}};
            VertexPolicy v2;
            v2.kind = SolverKind::Explicit;
            v2.reverse = Eigen::MatrixXd{{0.0}, {1.0}};
            s.policies = {{1, v1}, {2, v2}};
        } else if (name == "diamond_case3") {
            VertexPolicy v2;
            v2.kind = SolverKind::Maximal;
            v2.tie_break = TieBreak::HighestIndex;
            s.policies = {{2, v2}};
        }
    } else {
        invalid("builtin", "unknown scenario '" + name + "'");
    }
    return s;
}

RunResult run_scenario(const ScenarioSpec& spec, const RunOptions& options, const std::string& base_dir) {
    Prepared p = prepare(spec, base_dir);
    RunResult result;
    auto audited = [&](const std::string& solver, const DiagnosticReport& r, bool enforce = true) {
        if (!r.holds && enforce) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s: %s %.6g exceeds %.6g", solver.c_str(), r.metric.c_str(), r.total,
                          r.bound.value_or(0.0));
            result.audit_failures.push_back(buf);
        }
        return r;
    };
    auto common = [](const std::vector<Snapshot>& snaps, std::vector<DiagnosticReport>& out) {
        const Snapshot& last = snaps.back();
        const std::size_t m = last.edges.size();
        DiagnosticReport energy{"energy", {}, 0.0, std::nullopt, true};
        DiagnosticReport tv{"tv", tv_norm(last).per_edge, tv_norm(last).total, std::nullopt, true};
        DiagnosticReport sup{"sup_norm", {}, sup_norm(last), std::nullopt, true};
        DiagnosticReport peak{"peak_abs", std::vector<double>(m, 0.0), 0.0, std::nullopt, true};
        for (const auto& e : last.edges) {
            energy.per_edge.push_back(0.5 * e.u.squaredNorm() * e.cell_width);
            sup.per_edge.push_back(e.u.size() ? e.u.cwiseAbs().maxCoeff() : 0.0);
        }
        energy.total = graph_energy(last);
        for (const auto& s : snaps)
            for (std::size_t j = 0; j < m; ++j)
                if (s.edges[j].u.size()) peak.per_edge[j] = std::max(peak.per_edge[j], s.edges[j].u.cwiseAbs().maxCoeff());
        peak.total = *std::max_element(peak.per_edge.begin(), peak.per_edge.end());
        out.insert(out.end(), {energy, tv, sup, peak});
    };
    auto oleinik = [](const std::vector<Snapshot>& snaps, double eps) {
        DiagnosticReport r{"oleinik", std::vector<double>(snaps.front().edges.size(), -1e300), -1e300, eps, true};
        for (const auto& s : snaps) {
            if (s.t <= 0.0) continue;
            for (std::size_t j = 0; j < s.edges.size(); ++j)
                r.per_edge[j] = std::max(r.per_edge[j], oleinik_check(s.edges[j], eps).worst_margin);
        }
        for (double& v : r.per_edge) v = std::max(v, 0.0);  // no pairs before the first positive time
        r.total = *std::max_element(r.per_edge.begin(), r.per_edge.end());
        r.holds = r.total <= eps;
        return r;
    };

    try {
        if (spec.solver != SolverChoice::LaxOleinik) {
            GodunovOptions opt;
            opt.cells_per_unit = spec.cells_per_unit;
            opt.cfl = spec.cfl;
            opt.mode = spec.mode;
            GodunovHistory h = run(p.tree, p.initial, p.policies, spec.T, p.times, opt);
            SolverOutput out{"godunov", h.snapshots, {}};
            common(out.snapshots, out.diagnostics);
            out.diagnostics.push_back(audited("godunov", {"kirchhoff", {}, h.max_kirchhoff, opt.tol.kirchhoff,
                                                          h.max_kirchhoff <= opt.tol.kirchhoff}));
            // 5/N with N cells per unit length. Signed vertices start new fans whenever the flow
            // reverses, and those only obey the bound measured from their own start time, so the
            // check is reported there but not enforced.
            out.diagnostics.push_back(audited("godunov", oleinik(out.snapshots, 5.0 / spec.cells_per_unit),
                                              spec.mode == CouplingMode::NonNegative));
            if (h.initial_min >= 0.0 && p.tree.is_tree()) {
                auto tv = tv_estimate_check(p.tree, h);
                out.diagnostics.push_back(audited("godunov", {"tv_estimate", {}, tv.lhs, tv.rhs, tv.holds}));
            }
            result.outputs.push_back(std::move(out));
        }
        if (spec.solver != SolverChoice::Godunov) {
            std::vector<Eigen::VectorXd> xs;
            for (int j = 0; j < p.tree.edge_count(); ++j)
                xs.push_back(cell_centres(p.tree.length(j), grid_cells(p.tree.length(j), spec.cells_per_unit)));
            TreeSolution sol = solve_tree(p.tree, p.initial, p.policies, spec.T, p.times, xs);
            SolverOutput out{"lax_oleinik", sol.snapshots, {}};
            common(out.snapshots, out.diagnostics);
            out.diagnostics.push_back(audited("lax_oleinik", {"kirchhoff", {}, sol.max_trace_kirchhoff, 1e-8,
                                                              sol.max_trace_kirchhoff <= 1e-8}));
            out.diagnostics.push_back(audited("lax_oleinik", oleinik(out.snapshots, 1e-8)));
            out.diagnostics.push_back(audited("lax_oleinik",
                                              {"monotonicity_violations", {}, double(sol.monotonicity_violations),
                                               0.0, sol.monotonicity_violations == 0}));
            result.outputs.push_back(std::move(out));
        }
    } catch (const Error& e) {
        if (e.code() == Errc::ValidationError) throw;
        throw Error(e.code(), "scenario '" + spec.name + "': " + strip_code(e));
    }

    if (result.outputs.size() == 2) {
        const auto& g = result.outputs[0].snapshots;
        const auto& l = result.outputs[1].snapshots;
        for (std::size_t k = 0; k < std::min(g.size(), l.size()); ++k) {
            double d = l1_distance(g[k], l[k]);
            result.l1_table.push_back({g[k].t, d});
            if (d > spec.l1_tolerance) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "l1 distance %.6g at t = %.6g exceeds %.6g", d, g[k].t,
                              spec.l1_tolerance);
                result.audit_failures.push_back(buf);
            }
        }
    }
    result.exit_code = options.audit && !result.audit_failures.empty() ? ExitAudit : ExitOk;
    return result;
}

std::string snapshots_csv(const std::vector<Snapshot>& snapshots) {
    std::string out = "t,edge,x,u\n";
    char buf[128];
    for (const auto& s : snapshots)
        for (const auto& e : s.edges)
            for (Eigen::Index i = 0; i < e.u.size(); ++i) {
                double t = s.t, x = e.x[i], u = e.u[i];
                snap_zero(t);
                snap_zero(x);
                snap_zero(u);
                std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g,%.12g\n", t, e.edge + 1, x, u);
                out += buf;
            }
    return out;
}

std::string result_json(const ScenarioSpec& spec, const RunResult& result) {
    Json j;
    j["scenario"] = spec.name;
    Json solvers = Json::array();
    for (const auto& out : result.outputs) {
        Json records = Json::array();
        for (const auto& s : out.snapshots)
            for (const auto& e : s.edges) {
                std::vector<double> x(e.x.data(), e.x.data() + e.x.size());
                std::vector<double> u(e.u.data(), e.u.data() + e.u.size());
                records.push_back({{"t", s.t}, {"edge", e.edge + 1}, {"x", x}, {"u", u}});
            }
        Json diags = Json::array();
        for (const auto& d : out.diagnostics) {
            Json r;
            r["metric"] = d.metric;
            r["per_edge"] = d.per_edge;
            r["total"] = d.total;
            r["bound"] = d.bound ? Json(*d.bound) : Json(nullptr);
            r["holds"] = d.holds;
            diags.push_back(r);
        }
        solvers.push_back({{"solver", out.solver}, {"records", records}, {"diagnostics", diags}});
    }
    j["solvers"] = solvers;
    if (!result.l1_table.empty()) {
        Json l1 = Json::array();
        for (const auto& [t, d] : result.l1_table) l1.push_back({{"t", t}, {"l1", d}});
        j["l1_difference"] = l1;
    }
    j["audit_failures"] = result.audit_failures;
    return j.dump(2) + "\n";
}

std::string snapshots_svg(const std::vector<Snapshot>& snapshots, const std::string& title) {
    const double pw = 180, ph = 110, gap = 20, left = 70, top = 40;
    std::size_t cols = snapshots.empty() ? 0 : snapshots.front().edges.size();
    double lo = 0.0, hi = 0.0;
    for (const auto& s : snapshots)
        for (const auto& e : s.edges)
            if (e.u.size()) {
                lo = std::min(lo, e.u.minCoeff());
                hi = std::max(hi, e.u.maxCoeff());
            }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double width = left + cols * (pw + gap), height = top + snapshots.size() * (ph + gap);
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
                  "font-size=\"11\">\n",
                  width, height);
    out += buf;
    out += "<text x=\"10\" y=\"18\" font-size=\"14\">" + title + "</text>\n";
    for (std::size_t c = 0; c < cols; ++c) {
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"34\">edge %d</text>\n", left + c * (pw + gap) + pw / 2 - 20,
                      snapshots.front().edges[c].edge + 1);
        out += buf;
    }
    for (std::size_t r = 0; r < snapshots.size(); ++r) {
        const Snapshot& s = snapshots[r];
        const double y0 = top + r * (ph + gap);
        std::snprintf(buf, sizeof buf, "<text x=\"6\" y=\"%.1f\">t = %.4g</text>\n", y0 + ph / 2, s.t);
        out += buf;
        for (std::size_t c = 0; c < s.edges.size(); ++c) {
            const EdgeProfile& e = s.edges[c];
            const double x0 = left + c * (pw + gap);
            std::snprintf(buf, sizeof buf,
                          "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" stroke=\"#999\"/>\n",
                          x0, y0, pw, ph);
            out += buf;
            if (lo < 0.0 && hi > 0.0) {
                double yz = y0 + ph * (hi / (hi - lo));
                std::snprintf(buf, sizeof buf,
                              "<line x1=\"%.1f\" y1=\"%.2f\" x2=\"%.1f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n", x0, yz,
                              x0 + pw, yz);
                out += buf;
            }
            out += "<polyline fill=\"none\" stroke=\"#1f4e9e\" stroke-width=\"1\" points=\"";
            const double length = e.x.size() ? e.x[e.x.size() - 1] + 0.5 * e.cell_width : 1.0;
            for (Eigen::Index i = 0; i < e.u.size(); ++i) {
                double px = x0 + pw * e.x[i] / length;
                double py = y0 + ph * (hi - e.u[i]) / (hi - lo);
                std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px, py);
                out += buf;
            }
            out += "\"/>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

std::vector<std::string> emit_outputs(const ScenarioSpec& spec, const RunResult& result, const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + out_dir + ": " + ec.message());
    const std::string stem = spec.name.empty() ? "scenario" : spec.name;
    const bool both = result.outputs.size() > 1;
    auto named = [&](const std::string& given, const std::string& ext, const std::string& solver) {
        fs::path p = given.empty() ? fs::path(stem + ext) : fs::path(given);
        if (both && !solver.empty()) p.replace_filename(p.stem().string() + "_" + solver + p.extension().string());
        return fs::path(out_dir) / p;
    };
    std::vector<std::string> files;
    auto put = [&](const fs::path& path, const std::string& text) {
        write_file(path, text);
        files.push_back(path.string());
    };
    for (const auto& out : result.outputs) {
        put(named(spec.output.csv, ".csv", out.solver), snapshots_csv(out.snapshots));
        if (!spec.output.svg.empty())
            put(named(spec.output.svg, ".svg", out.solver), snapshots_svg(out.snapshots, stem + " (" + out.solver + ")"));
    }
    put(named(spec.output.json, ".json", ""), result_json(spec, result));
    if (!result.l1_table.empty()) {
        std::string table = "t,l1\n";
        char buf[64];
        for (const auto& [t, d] : result.l1_table) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", t, d);
            table += buf;
        }
        fs::path p = named(spec.output.csv, ".csv", "");
        p.replace_filename(p.stem().string() + "_l1.csv");
        put(p, table);
    }
    return files;
}

}  // namespace bnet
