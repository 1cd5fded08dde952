#include "burgers_net/graph.hpp"

#include "burgers_net/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace bnet {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

std::vector<VertexDirection> directions_of(int n, const std::vector<EdgeSpec>& edges) {
    std::vector<VertexDirection> dirs(n);
    for (int j = 0; j < static_cast<int>(edges.size()); ++j) {
        dirs[edges[j].head].in_edges.push_back(j);
        dirs[edges[j].tail].out_edges.push_back(j);
    }
    return dirs;
}

bool has_directed_cycle(int n, const std::vector<EdgeSpec>& edges) {
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> succ(n);
    for (const auto& e : edges) {
        succ[e.tail].push_back(e.head);
        ++indeg[e.head];
    }
    std::vector<int> ready;
    for (int v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    int seen = 0;
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        ++seen;
        for (int w : succ[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    return seen != n;
}

}  // namespace

const char* vertex_kind_name(VertexKind kind) {
    switch (kind) {
        case VertexKind::Source: return "Source";
        case VertexKind::Sink: return "Sink";
        case VertexKind::PathVertex: return "PathVertex";
        case VertexKind::FirstKind: return "FirstKind";
        case VertexKind::SecondKind: return "SecondKind";
        case VertexKind::General: return "General";
    }
    return "General";
}

const EdgeSpec& DirectedMetricTree::edge(int j) const {
    if (j < 0 || j >= edge_count()) throw Error(Errc::InvalidIndex, "edge " + std::to_string(j));
    return edges_[j];
}

const VertexDirection& DirectedMetricTree::direction(int v) const {
    if (v < 0 || v >= n_) throw Error(Errc::InvalidIndex, "vertex " + std::to_string(v));
    return dirs_[v];
}

VertexClass DirectedMetricTree::classify(int v) const {
    const auto& d = direction(v);
    VertexClass c;
    c.deg_in = static_cast<int>(d.in_edges.size());
    c.deg_out = static_cast<int>(d.out_edges.size());
    if (c.deg_in == 0)
        c.kind = VertexKind::Source;
    else if (c.deg_out == 0)
        c.kind = VertexKind::Sink;
    else if (c.deg_in == 1 && c.deg_out == 1)
        c.kind = VertexKind::PathVertex;
    else if (c.deg_in == 1 && c.deg_out == 2)
        c.kind = VertexKind::FirstKind;
    else if (c.deg_in == 2 && c.deg_out == 1)
        c.kind = VertexKind::SecondKind;
    else
        c.kind = VertexKind::General;
    return c;
}

std::vector<int> DirectedMetricTree::sources() const {
    std::vector<int> out;
    for (int v = 0; v < n_; ++v)
        if (dirs_[v].in_edges.empty()) out.push_back(v);
    return out;
}

std::vector<int> DirectedMetricTree::sinks() const {
    std::vector<int> out;
    for (int v = 0; v < n_; ++v)
        if (dirs_[v].out_edges.empty()) out.push_back(v);
    return out;
}

std::vector<int> DirectedMetricTree::topological_edges() const {
    const int m = edge_count();
    std::vector<int> pending(n_);
    for (int v = 0; v < n_; ++v) pending[v] = static_cast<int>(dirs_[v].in_edges.size());
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int j = 0; j < m; ++j)
        if (pending[edges_[j].tail] == 0) ready.push(j);
    std::vector<int> order;
    order.reserve(m);
    while (!ready.empty()) {
        int j = ready.top();
        ready.pop();
        order.push_back(j);
        int h = edges_[j].head;
        if (--pending[h] == 0)
            for (int k : dirs_[h].out_edges) ready.push(k);
    }
    return order;
}

bool is_increasing_order(int n, const std::vector<EdgeSpec>& edges) {
    auto dirs = directions_of(n, edges);
    int max_source_edge = -1;
    int min_other_edge = static_cast<int>(edges.size());
    for (int v = 0; v < n; ++v) {
        const auto& d = dirs[v];
        if (d.in_edges.empty()) {
            if (!d.out_edges.empty()) max_source_edge = std::max(max_source_edge, d.out_edges.back());
        } else if (!d.out_edges.empty()) {
            min_other_edge = std::min(min_other_edge, d.out_edges.front());
            if (d.in_edges.back() >= d.out_edges.front()) return false;
        }
    }
    return max_source_edge < min_other_edge;
}

DirectedMetricTree build_tree(int n, std::vector<EdgeSpec> edges, BuildOptions options,
                              std::vector<std::string> labels) {
    if (n < 2) throw Error(Errc::InvalidArgument, "a tree needs at least 2 vertices");
    if (edges.empty()) throw Error(Errc::InvalidArgument, "edge list is empty");
    if (!labels.empty() && static_cast<int>(labels.size()) != n)
        throw Error(Errc::InvalidArgument, "label count differs from vertex count");

    const int m = static_cast<int>(edges.size());
    for (int j = 0; j < m; ++j) {
        const auto& e = edges[j];
        if (e.tail < 0 || e.tail >= n || e.head < 0 || e.head >= n)
            throw Error(Errc::InvalidIndex, "edge " + std::to_string(j + 1) + " references a missing vertex");
        if (e.tail == e.head) throw Error(Errc::NotATree, "edge " + std::to_string(j + 1) + " is a loop");
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            throw Error(Errc::NonPositiveLength, "edge " + std::to_string(j + 1));
    }

    std::set<std::pair<int, int>> pairs;
    for (int j = 0; j < m; ++j) {
        if (!pairs.insert({edges[j].tail, edges[j].head}).second && options.topology == Topology::Tree)
            throw Error(Errc::MultipleEdge, "edge " + std::to_string(j + 1) + " repeats a vertex pair");
    }

    UnionFind uf(n);
    bool cycle = false;
    for (const auto& e : edges)
        if (!uf.unite(e.tail, e.head)) cycle = true;
    int components = 0;
    for (int v = 0; v < n; ++v)
        if (uf.find(v) == v) ++components;

    DirectedMetricTree t;
    if (options.topology == Topology::Tree) {
        if (cycle || components != 1 || m != n - 1)
            throw Error(Errc::NotATree, cycle ? "the undirected graph has a cycle" : "the graph is disconnected");
    } else {
        if (components != 1) throw Error(Errc::NotConnected, "the graph is disconnected");
        if (has_directed_cycle(n, edges)) throw Error(Errc::ContainsCycle, "the graph has a directed cycle");
        t.is_tree_ = !cycle;
    }

    t.increasing_ = is_increasing_order(n, edges);
    if (options.strict_order && !t.increasing_)
        throw Error(Errc::NotIncreasingOrder, "edge indices do not increase along directed paths");

    t.n_ = n;
    t.edges_ = std::move(edges);
    t.dirs_ = directions_of(n, t.edges_);
    t.phi_plus_ = Eigen::MatrixXi::Zero(n, m);
    t.phi_minus_ = Eigen::MatrixXi::Zero(n, m);
    for (int j = 0; j < m; ++j) {
        t.phi_plus_(t.edges_[j].head, j) = 1;
        t.phi_minus_(t.edges_[j].tail, j) = 1;
    }
    t.labels_ = std::move(labels);
    return t;
}

VertexClass classify_vertex(const DirectedMetricTree& tree, int vertex) { return tree.classify(vertex); }

Reindexed reindex_increasing(const DirectedMetricTree& tree) {
    const int n = tree.vertex_count();
    const int m = tree.edge_count();
    std::vector<int> old_of_new;
    old_of_new.reserve(m);
    std::vector<char> placed(m, 0);

    for (int j = 0; j < m; ++j)
        if (tree.direction(tree.edge(j).tail).in_edges.empty()) {
            old_of_new.push_back(j);
            placed[j] = 1;
        }

    std::vector<int> pending(n);
    for (int v = 0; v < n; ++v) pending[v] = static_cast<int>(tree.direction(v).in_edges.size());
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    auto release = [&](int j) {
        int h = tree.edge(j).head;
        if (--pending[h] == 0)
            for (int k : tree.direction(h).out_edges)
                if (!placed[k]) ready.push(k);
    };
    for (int j : old_of_new) release(j);
    while (!ready.empty()) {
        int j = ready.top();
        ready.pop();
        if (placed[j]) continue;
        placed[j] = 1;
        old_of_new.push_back(j);
        release(j);
    }

    std::vector<int> new_of_old(m);
    std::vector<EdgeSpec> edges(m);
    for (int k = 0; k < m; ++k) {
        new_of_old[old_of_new[k]] = k;
        edges[k] = tree.edge(old_of_new[k]);
    }
    BuildOptions opts;
    opts.topology = tree.is_tree() ? Topology::Tree : Topology::DirectedAcyclic;
    return {build_tree(n, std::move(edges), opts, tree.labels()), std::move(new_of_old), std::move(old_of_new)};
}

DirectedMetricTree path_graph(int m, std::vector<double> lengths) {
    if (m < 1) throw Error(Errc::InvalidArgument, "path graph needs at least one edge");
    if (lengths.empty()) lengths.assign(m, 1.0);
    if (static_cast<int>(lengths.size()) != m)
        throw Error(Errc::InvalidArgument, "path graph length list has the wrong size");
    std::vector<EdgeSpec> edges;
    for (int j = 0; j < m; ++j) edges.push_back({j, j + 1, lengths[j]});
    return build_tree(m + 1, std::move(edges));
}

std::array<int, 3> LatticeVertex::triple() const {
    if (kind == LatticeKind::A) return {p + q, -q, p};
    return {p + q + 1, -q, p};
}

std::string LatticeVertex::label() const {
    auto t = triple();
    std::ostringstream os;
    os << '(' << t[0] << ',' << t[1] << ',' << t[2] << ')';
    return os.str();
}

std::vector<LatticeEdge> lattice_out_edges(const LatticeVertex& v) {
    if (v.kind == LatticeKind::A)
        return {{v, {LatticeKind::B, v.p, v.q}}, {v, {LatticeKind::B, v.p, v.q - 1}}};
    return {{v, {LatticeKind::A, v.p + 1, v.q}}};
}

std::vector<LatticeEdge> lattice_in_edges(const LatticeVertex& v) {
    if (v.kind == LatticeKind::A) return {{{LatticeKind::B, v.p - 1, v.q}, v}};
    return {{{LatticeKind::A, v.p, v.q}, v}, {{LatticeKind::A, v.p, v.q + 1}, v}};
}

std::vector<LatticeEdge> hexagon_edges(int p, int q) {
    const LatticeVertex a0{LatticeKind::A, p, q}, b0{LatticeKind::B, p, q}, a1{LatticeKind::A, p + 1, q},
        b1{LatticeKind::B, p + 1, q - 1}, a2{LatticeKind::A, p + 1, q - 1}, b2{LatticeKind::B, p, q - 1};
    return {{a0, b0}, {b0, a1}, {a1, b1}, {a2, b1}, {b2, a2}, {a0, b2}};
}

std::vector<LatticeEdge> star_edges(const LatticeVertex& center) {
    auto edges = lattice_in_edges(center);
    for (const auto& e : lattice_out_edges(center)) edges.push_back(e);
    return edges;
}

DirectedMetricTree honeycomb_from_edges(const std::vector<LatticeEdge>& input, double length) {
    std::set<LatticeEdge> unique(input.begin(), input.end());
    if (unique.empty()) throw Error(Errc::InvalidArgument, "empty honeycomb selection");
    std::set<LatticeVertex> vset;
    for (const auto& e : unique) {
        vset.insert(e.tail);
        vset.insert(e.head);
    }

    // Number vertices in flow order so that the labels read naturally.
    std::map<LatticeVertex, int> indeg;
    std::map<LatticeVertex, std::vector<LatticeVertex>> succ;
    for (const auto& v : vset) indeg[v] = 0;
    for (const auto& e : unique) {
        ++indeg[e.head];
        succ[e.tail].push_back(e.head);
    }
    std::set<LatticeVertex> ready;
    for (const auto& [v, d] : indeg)
        if (d == 0) ready.insert(v);
    std::map<LatticeVertex, int> index;
    std::vector<std::string> labels;
    while (!ready.empty()) {
        LatticeVertex v = *ready.begin();
        ready.erase(ready.begin());
        index[v] = static_cast<int>(labels.size());
        labels.push_back(v.label());
        for (const auto& w : succ[v])
            if (--indeg[w] == 0) ready.insert(w);
    }

    const int n = static_cast<int>(vset.size());
    UnionFind uf(n);
    for (const auto& e : unique)
        if (!uf.unite(index[e.tail], index[e.head]))
            throw Error(Errc::ContainsCycle, "selection keeps a closed hexagon loop");
    int components = 0;
    for (int v = 0; v < n; ++v)
        if (uf.find(v) == v) ++components;
    if (components != 1) throw Error(Errc::NotConnected, "selection is not connected");

    std::vector<EdgeSpec> edges;
    for (const auto& e : unique) edges.push_back({index[e.tail], index[e.head], length});
    auto built = build_tree(n, std::move(edges), {}, std::move(labels));
    return reindex_increasing(built).tree;
}

DirectedMetricTree honeycomb_tree(const std::vector<std::pair<int, int>>& cells,
                                  const std::vector<LatticeEdge>& pruned, double length) {
    std::set<LatticeEdge> edges;
    for (const auto& [p, q] : cells)
        for (const auto& e : hexagon_edges(p, q)) edges.insert(e);
    for (const auto& e : pruned) edges.erase(e);
    return honeycomb_from_edges({edges.begin(), edges.end()}, length);
}

}  // namespace bnet
