#pragma once

#include <Eigen/Core>

#include <array>
#include <compare>
#include <string>
#include <utility>
#include <vector>

namespace bnet {

// Indices are 0-based internally; files use 1-based indices.
struct EdgeSpec {
    int tail = 0;
    int head = 0;
    double length = 1.0;

    bool operator==(const EdgeSpec&) const = default;
};

enum class VertexKind { Source, Sink, PathVertex, FirstKind, SecondKind, General };

const char* vertex_kind_name(VertexKind kind);

struct VertexClass {
    VertexKind kind = VertexKind::General;
    int deg_in = 0;   // deg+ : edges whose head is the vertex
    int deg_out = 0;  // deg- : edges whose tail is the vertex
};

struct VertexDirection {
    std::vector<int> in_edges;   // ascending edge index
    std::vector<int> out_edges;  // ascending edge index
};

enum class Topology {
    Tree,             // connected, m = n - 1, no parallel edges
    DirectedAcyclic,  // connected, no directed cycle, parallel edges allowed
};

struct BuildOptions {
    bool strict_order = false;
    Topology topology = Topology::Tree;
};

class DirectedMetricTree {
public:
    int vertex_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<EdgeSpec>& edges() const { return edges_; }
    const EdgeSpec& edge(int j) const;
    double length(int j) const { return edge(j).length; }

    const VertexDirection& direction(int v) const;
    VertexClass classify(int v) const;

    // n x m, entry 1 where edge j enters (phi_plus) or leaves (phi_minus) vertex i.
    const Eigen::MatrixXi& phi_plus() const { return phi_plus_; }
    const Eigen::MatrixXi& phi_minus() const { return phi_minus_; }
    Eigen::MatrixXi incidence() const { return phi_plus_ - phi_minus_; }

    bool is_tree() const { return is_tree_; }
    bool increasing_order() const { return increasing_; }

    const std::vector<std::string>& labels() const { return labels_; }

    std::vector<int> sources() const;
    std::vector<int> sinks() const;

    // Edge indices such that every edge comes after all edges feeding its tail.
    std::vector<int> topological_edges() const;

    bool operator==(const DirectedMetricTree& other) const {
        return n_ == other.n_ && edges_ == other.edges_ && labels_ == other.labels_;
    }

private:
    friend DirectedMetricTree build_tree(int, std::vector<EdgeSpec>, BuildOptions, std::vector<std::string>);

    int n_ = 0;
    std::vector<EdgeSpec> edges_;
    std::vector<VertexDirection> dirs_;
    Eigen::MatrixXi phi_plus_;
    Eigen::MatrixXi phi_minus_;
    std::vector<std::string> labels_;
    bool is_tree_ = true;
    bool increasing_ = true;
};

DirectedMetricTree build_tree(int vertex_count, std::vector<EdgeSpec> edges, BuildOptions options = {},
                              std::vector<std::string> labels = {});

VertexClass classify_vertex(const DirectedMetricTree& tree, int vertex);

// Edges into a vertex precede edges out of it, and edges leaving sources come first.
bool is_increasing_order(int vertex_count, const std::vector<EdgeSpec>& edges);

struct Reindexed {
    DirectedMetricTree tree;
    std::vector<int> new_of_old;
    std::vector<int> old_of_new;
};

Reindexed reindex_increasing(const DirectedMetricTree& tree);

DirectedMetricTree path_graph(int m, std::vector<double> lengths = {});

// Directed honeycomb lattice. A(p,q) sits at (p+q, -q, p) and is a first-kind
// point; B(p,q) sits at (p+q+1, -q, p) and is a second-kind point.
//   A(p,q) -> B(p,q),  A(p,q) -> B(p,q-1),  B(p,q) -> A(p+1,q)
enum class LatticeKind { A, B };

struct LatticeVertex {
    LatticeKind kind = LatticeKind::A;
    int p = 0;
    int q = 0;

    auto operator<=>(const LatticeVertex&) const = default;
    std::array<int, 3> triple() const;
    std::string label() const;
};

struct LatticeEdge {
    LatticeVertex tail;
    LatticeVertex head;

    auto operator<=>(const LatticeEdge&) const = default;
};

std::vector<LatticeEdge> lattice_out_edges(const LatticeVertex& v);
std::vector<LatticeEdge> lattice_in_edges(const LatticeVertex& v);

// Cell (p,q): A(p,q) B(p,q) A(p+1,q) B(p+1,q-1) A(p+1,q-1) B(p,q-1).
std::vector<LatticeEdge> hexagon_edges(int p, int q);

// All lattice edges incident to the vertex.
std::vector<LatticeEdge> star_edges(const LatticeVertex& center);

DirectedMetricTree honeycomb_from_edges(const std::vector<LatticeEdge>& edges, double length = 1.0);

DirectedMetricTree honeycomb_tree(const std::vector<std::pair<int, int>>& cells,
                                  const std::vector<LatticeEdge>& pruned = {}, double length = 1.0);

}  // namespace bnet
