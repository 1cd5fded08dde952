#pragma once

#include "burgers_net/graph.hpp"
#include "burgers_net/profile.hpp"
#include "burgers_net/transmission.hpp"

#include <vector>

namespace bnet {

// u at one edge end over time, linear between samples. F is the running
// integral of u^2/2, exact for the linear interpolant.
class BoundaryTrace {
public:
    BoundaryTrace() = default;
    BoundaryTrace(std::vector<double> times, std::vector<double> values);

    static BoundaryTrace zero(double horizon);

    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& values() const { return u_; }
    const std::vector<double>& flux() const { return F_; }
    double horizon() const { return t_.back(); }
    int size() const { return static_cast<int>(t_.size()); }

    double value(double s) const;
    double flux(double s) const;
    bool is_zero() const;

private:
    std::vector<double> t_{0.0, 0.0};
    std::vector<double> u_{0.0, 0.0};
    std::vector<double> F_{0.0, 0.0};
};

// G(x,t,y): (x-y)^2/(2t) + int_0^y u0 for y in [0,x]; x(x-y)/(2t) - F(-y t/(x-y)) for y < 0.
double g_functional(double x, double t, double y, const StepFunction& u0, const BoundaryTrace& tail);

struct Minimizer {
    double y = 0.0;
    double u = 0.0;
    double value = 0.0;
    bool boundary_branch = false;  // minimizer found through the tail history (y < 0)
    double tau = 0.0;              // tail crossing time when boundary_branch
};

struct SearchControl {
    // Result at a smaller x at the same t; restricts the search by monotonicity of y.
    const Minimizer* previous = nullptr;
};

Minimizer minimize_g(double x, double t, const StepFunction& u0, const BoundaryTrace& tail,
                     const SearchControl& control = {});

struct TraceControl {
    int initial_intervals = 256;
    double tolerance = 1e-7;  // linear-interpolation defect that triggers a split
    int max_depth = 24;
};

// u(l, t) on [0, horizon], adaptively sampled.
BoundaryTrace head_trace(const StepFunction& u0, const BoundaryTrace& tail, double horizon,
                         const TraceControl& control = {});

struct EdgeSolution {
    std::vector<EdgeProfile> profiles;
    BoundaryTrace head;
    int monotonicity_violations = 0;
};

EdgeSolution solve_edge(int edge, const StepFunction& u0, const BoundaryTrace& tail, const std::vector<double>& times,
                        const Eigen::VectorXd& xs, bool warm_start = true, const TraceControl& control = {});

struct TreeSolution {
    std::vector<Snapshot> snapshots;
    std::vector<BoundaryTrace> tail_traces;  // per edge, u(0,t)
    std::vector<BoundaryTrace> head_traces;  // per edge, u(l,t)
    double max_trace_kirchhoff = 0.0;        // largest |sum_in u^2 - sum_out u^2|/2 over coupled samples
    int monotonicity_violations = 0;
};

// policies: one per vertex; xs: sample positions per edge.
TreeSolution solve_tree(const DirectedMetricTree& tree, const std::vector<StepFunction>& initial,
                        const std::vector<VertexPolicy>& policies, double horizon, const std::vector<double>& times,
                        const std::vector<Eigen::VectorXd>& xs, const TraceControl& control = {});

struct UnrolledDatum {
    StepFunction datum;             // on [-upstream length, l_target]
    std::vector<int> path;          // edges from the most upstream one to the target
    std::vector<double> offsets;    // coordinate of each path edge's tail in the unrolled line
    std::vector<double> scale;      // factor applied to each path edge's data
};

UnrolledDatum path_unroll(const DirectedMetricTree& tree, int target, const std::vector<StepFunction>& initial,
                          const std::vector<VertexPolicy>& policies);

// Classical Lax–Oleinik on a line, datum zero left of its support.
double lax_oleinik_line(const StepFunction& datum, double x, double t);

struct OleinikReport {
    bool holds = true;
    double worst_margin = 0.0;  // max over pairs of u(x2)-u(x1)-(x2-x1)/t
};

OleinikReport oleinik_check(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t, double eps);
OleinikReport oleinik_check(const EdgeProfile& profile, double eps);

}  // namespace bnet
