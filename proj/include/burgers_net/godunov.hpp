#pragma once

#include "burgers_net/graph.hpp"
#include "burgers_net/profile.hpp"
#include "burgers_net/transmission.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bnet {

// Exact Riemann flux for f(u) = u^2/2.
inline double godunov_flux(double uL, double uR) {
    double a = uL > 0.0 ? uL : 0.0;
    double b = uR < 0.0 ? uR : 0.0;
    return 0.5 * std::max(a * a, b * b);
}

struct EdgeGrid {
    int edge = 0;
    double dx = 0.0;
    Eigen::VectorXd u;  // cell averages

    int cells() const { return static_cast<int>(u.size()); }
};

struct NetworkState {
    std::vector<EdgeGrid> edges;
    double t = 0.0;
};

// N_j = max(4, round(l_j * cells_per_unit)).
inline int grid_cells(double length, double cells_per_unit) {
    return std::max(4, static_cast<int>(std::lround(length * cells_per_unit)));
}

// Values are exact cell averages of the step data.
NetworkState make_state(const DirectedMetricTree& tree, const std::vector<StepFunction>& initial,
                        double cells_per_unit);

Snapshot snapshot(const NetworkState& state);

constexpr double velocity_floor = 1e-8;

double cfl_dt(const NetworkState& state, double cfl);

enum class CouplingMode { Signed, NonNegative };

struct Ghosts {
    std::vector<double> left;   // per edge, value beyond the tail
    std::vector<double> right;  // per edge, value beyond the head
};

// Per-vertex before/after values from one coupling pass.
struct CouplingPass {
    Ghosts ghosts;
    std::vector<VertexTrace<double>> traces;  // empty for sources and sinks
    double max_kirchhoff = 0.0;
};

CouplingPass couple(const DirectedMetricTree& tree, const NetworkState& state,
                    const std::vector<VertexPolicy>& policies, CouplingMode mode, const Tolerances& tol = {});

// Godunov update with fixed ghosts; throws CflViolation when dt |u| / dx > 1 anywhere.
void advance(NetworkState& state, const Ghosts& ghosts, double dt);

// couple + advance. Returns the Kirchhoff residual of the coupling pass.
double step(const DirectedMetricTree& tree, NetworkState& state, double dt, const std::vector<VertexPolicy>& policies,
            CouplingMode mode, const Tolerances& tol = {});

struct GodunovOptions {
    double cells_per_unit = 100.0;
    double cfl = 0.45;
    CouplingMode mode = CouplingMode::Signed;
    Tolerances tol;
    int trace_stride = 0;  // record vertex traces every n steps; 0 records none
};

struct VertexLog {
    int vertex = 0;
    std::vector<double> t;
    std::vector<Eigen::VectorXd> before;
    std::vector<Eigen::VectorXd> after;
};

struct GodunovHistory {
    std::vector<Snapshot> snapshots;
    std::vector<VertexLog> vertex_logs;  // only coupled vertices
    double max_kirchhoff = 0.0;
    long steps = 0;
    double initial_tv_sq = 0.0;  // sum_j TV(u_j^2) of the initial cell averages
    double initial_min = 0.0;
    // sum over coupled vertices of |sum_in u^2 - sum_out u^2| at t = 0: the part of TV(u0^2)
    // sitting on the vertices themselves.
    double initial_vertex_jump_sq = 0.0;
    // sup over steps of sum_j TV(u_j^2), including t = 0.
    double max_tv_sq = 0.0;
    // Summed |increment of u^2| in the first and last cell of each edge.
    std::vector<double> tail_sq_variation;
    std::vector<double> head_sq_variation;
};

// Output times beyond T are dropped; dt is shortened to land on each output time.
GodunovHistory run(const DirectedMetricTree& tree, const std::vector<StepFunction>& initial,
                   const std::vector<VertexPolicy>& policies, double T, std::vector<double> times,
                   const GodunovOptions& options = {});

}  // namespace bnet
