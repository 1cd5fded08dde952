#pragma once

#include "burgers_net/godunov.hpp"
#include "burgers_net/graph.hpp"
#include "burgers_net/profile.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bnet {

struct TvReport {
    std::vector<double> per_edge;
    double total = 0.0;
    std::vector<double> per_edge_sq;  // TV of u^2
    double total_sq = 0.0;
};

double total_variation(const Eigen::VectorXd& u);
double total_variation_sq(const Eigen::VectorXd& u);
TvReport tv_norm(const Snapshot& state);

// sum_j int u_j^2/2, midpoint rule on the samples.
double graph_energy(const Snapshot& state);

// sum_j int |a_j - b_j|; both snapshots must share their sampling.
double l1_distance(const Snapshot& a, const Snapshot& b);

double sup_norm(const Snapshot& state);

struct ShockRecord {
    int edge = 0;
    double position = 0.0;
    double left = 0.0;   // u(xi-)
    double right = 0.0;  // u(xi+)
    double speed = 0.0;  // (left + right)/2
    bool lax_ok = false;
};

// 5 TV(u)/N.
double default_shock_threshold(const EdgeProfile& profile);

// Interfaces whose jump exceeds threshold; runs of consecutive same-sign jumps
// (a smeared shock) become one record. threshold < 0 selects the default.
std::vector<ShockRecord> detect_shocks(const EdgeProfile& profile, double threshold = -1.0);

// u_A^3/3 - u_B^3/3 - sum (u- - u+)^3/12 for an edge with end values u_A (tail) and u_B (head).
double energy_dissipation_rate(const std::vector<ShockRecord>& shocks, double tail_value, double head_value);
double energy_dissipation_rate(const EdgeProfile& profile, const std::vector<ShockRecord>& shocks);

struct VertexFactor {
    int vertex = 0;
    VertexKind kind = VertexKind::PathVertex;
    double factor = 1.0;
};

struct TvEstimateReport {
    bool honeycomb_form = false;  // one source, one sink, only honeycomb vertex classes
    int kappa = 0;                // honeycomb form only
    double constant = 0.0;
    std::vector<VertexFactor> factors;
    double lhs = 0.0;  // sup_t TV(u^2) + boundary variation at the sink
    double rhs = 0.0;  // constant * (TV(u0^2) + vertex jumps of u0^2 + boundary variation at the source)
    double margin = 0.0;
    bool holds = false;
};

// Honeycomb form: 2^kappa with kappa = 1 + #first-kind + #second-kind.
// Otherwise C = 2 prod_v max(deg+, deg-). TV(u0^2) counts the squared-flux imbalance
// of the data at each coupled vertex; a P2 Riemann datum that is constant on both
// edges would otherwise have zero variation. Throws HypothesisViolated on negative data.
TvEstimateReport tv_estimate_check(const DirectedMetricTree& tree, const GodunovHistory& history);

enum class WKind { WPlus, WMinus, W, None };
const char* w_kind_name(WKind kind);

struct WBlock {
    int begin = 0;  // sample index range [begin, end)
    int end = 0;
    int sign = 0;   // +1, -1, or 0 for an all-zero profile
    bool ok = false;
};

struct WClassReport {
    WKind kind = WKind::None;
    std::vector<WBlock> blocks;
};

// W+: non-negative, non-decreasing except for downward jumps larger than jump_threshold.
// W-: the same with non-positive values. W: finitely many sign blocks, each W+ or W-.
WClassReport w_class_membership(const EdgeProfile& profile, double jump_threshold, double tol = 1e-12);

// Serializable summary of a diagnostic.
struct DiagnosticReport {
    std::string metric;
    std::vector<double> per_edge;
    double total = 0.0;
    std::optional<double> bound;
    bool holds = true;
};

}  // namespace bnet
