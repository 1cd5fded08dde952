#include "burgers_net/godunov.hpp"

#include "burgers_net/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace bnet {

NetworkState make_state(const DirectedMetricTree& tree, const std::vector<StepFunction>& initial,
                        double cells_per_unit) {
    if (static_cast<int>(initial.size()) != tree.edge_count())
        throw Error(Errc::InvalidArgument, "need initial data for every edge");
    if (!(cells_per_unit > 0.0)) throw Error(Errc::InvalidArgument, "cells per unit must be positive");
    NetworkState s;
    for (int j = 0; j < tree.edge_count(); ++j) {
        const double l = tree.length(j);
        const int n = grid_cells(l, cells_per_unit);
        if (std::abs(initial[j].end() - l) > 1e-12 * l)
            throw Error(Errc::InvalidArgument, "initial data length differs from edge " + std::to_string(j + 1));
        s.edges.push_back({j, l / n, initial[j].cell_averages(n)});
    }
    return s;
}

Snapshot snapshot(const NetworkState& state) {
    Snapshot snap;
    snap.t = state.t;
    for (const auto& g : state.edges)
        snap.edges.push_back({g.edge, state.t, g.dx, cell_centres(g.dx * g.cells(), g.cells()), g.u});
    return snap;
}

double cfl_dt(const NetworkState& state, double cfl) {
    if (state.edges.empty()) throw Error(Errc::InvalidArgument, "empty state");
    double dx = std::numeric_limits<double>::infinity(), umax = 0.0;
    for (const auto& g : state.edges) {
        dx = std::min(dx, g.dx);
        umax = std::max(umax, g.u.cwiseAbs().maxCoeff());
    }
    return cfl * dx / std::max(umax, velocity_floor);
}

CouplingPass couple(const DirectedMetricTree& tree, const NetworkState& state,
                    const std::vector<VertexPolicy>& policies, CouplingMode mode, const Tolerances& tol) {
    const int m = tree.edge_count();
    if (static_cast<int>(policies.size()) != tree.vertex_count())
        throw Error(Errc::InvalidArgument, "need one policy per vertex");
    CouplingPass pass;
    pass.ghosts.left.assign(m, 0.0);
    pass.ghosts.right.assign(m, 0.0);
    for (int v = 0; v < tree.vertex_count(); ++v) {
        const auto& d = tree.direction(v);
        if (d.in_edges.empty() || d.out_edges.empty()) continue;  // sources and sinks keep ghost 0
        const int nin = static_cast<int>(d.in_edges.size());
        Eigen::VectorXd before(nin + static_cast<int>(d.out_edges.size()));
        for (int i = 0; i < nin; ++i) {
            const auto& u = state.edges[d.in_edges[i]].u;
            before[i] = u[u.size() - 1];
        }
        for (std::size_t o = 0; o < d.out_edges.size(); ++o) before[nin + static_cast<int>(o)] = state.edges[d.out_edges[o]].u[0];
        auto tr = mode == CouplingMode::Signed ? solve_signed(d, before, policies[v], tol)
                                               : solve_nonnegative(d, before, policies[v], tol);
        pass.max_kirchhoff = std::max(pass.max_kirchhoff, std::abs(kirchhoff_residual(tr)));
        for (int i = 0; i < nin; ++i) pass.ghosts.right[d.in_edges[i]] = tr.after[i];
        for (std::size_t o = 0; o < d.out_edges.size(); ++o)
            pass.ghosts.left[d.out_edges[o]] = tr.after[nin + static_cast<int>(o)];
        pass.traces.push_back(std::move(tr));
    }
    return pass;
}

void advance(NetworkState& state, const Ghosts& ghosts, double dt) {
    for (auto& g : state.edges) {
        const int n = g.cells();
        const double gl = ghosts.left[g.edge], gr = ghosts.right[g.edge];
        const double umax = std::max({g.u.cwiseAbs().maxCoeff(), std::abs(gl), std::abs(gr)});
        if (dt * umax / g.dx > 1.0) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "edge %d: Courant number %.4g", g.edge + 1, dt * umax / g.dx);
            throw Error(Errc::CflViolation, msg);
        }
        const double r = dt / g.dx;
        double left_flux = godunov_flux(gl, g.u[0]);
        double prev = g.u[0];
        for (int i = 0; i < n; ++i) {
            double right_flux = godunov_flux(prev, i + 1 < n ? g.u[i + 1] : gr);
            double next = i + 1 < n ? g.u[i + 1] : 0.0;
            g.u[i] = prev - r * (right_flux - left_flux);
            left_flux = right_flux;
            prev = next;
        }
    }
    state.t += dt;
}

double step(const DirectedMetricTree& tree, NetworkState& state, double dt, const std::vector<VertexPolicy>& policies,
            CouplingMode mode, const Tolerances& tol) {
    auto pass = couple(tree, state, policies, mode, tol);
    advance(state, pass.ghosts, dt);
    return pass.max_kirchhoff;
}

namespace {

double tv_sq(const NetworkState& s) {
    double tv = 0.0;
    for (const auto& g : s.edges)
        for (int i = 1; i < g.cells(); ++i) tv += std::abs(g.u[i] * g.u[i] - g.u[i - 1] * g.u[i - 1]);
    return tv;
}

}  // namespace

GodunovHistory run(const DirectedMetricTree& tree, const std::vector<StepFunction>& initial,
                   const std::vector<VertexPolicy>& policies, double T, std::vector<double> times,
                   const GodunovOptions& options) {
    if (!(T > 0.0)) throw Error(Errc::InvalidArgument, "final time must be positive");
    if (!(options.cfl > 0.0 && options.cfl <= 1.0)) throw Error(Errc::InvalidArgument, "cfl must lie in (0, 1]");
    if (static_cast<int>(policies.size()) != tree.vertex_count())
        throw Error(Errc::InvalidArgument, "need one policy per vertex");
    for (int v = 0; v < tree.vertex_count(); ++v) {
        if (options.mode == CouplingMode::Signed && tree.classify(v).kind == VertexKind::General)
            throw Error(Errc::UnsupportedVertexClass,
                        "signed coupling is defined for path, first- and second-kind vertices; vertex " +
                            std::to_string(v + 1) + " is general");
    }
    if (options.mode == CouplingMode::NonNegative)
        for (const auto& f : initial)
            if (f.min_value() < 0.0) throw Error(Errc::NegativeInput, "non-negative coupling with negative data");

    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    times.erase(std::remove_if(times.begin(), times.end(), [&](double t) { return t < 0.0 || t > T; }), times.end());

    GodunovHistory h;
    NetworkState state = make_state(tree, initial, options.cells_per_unit);
    const int m = tree.edge_count();
    h.tail_sq_variation.assign(m, 0.0);
    h.head_sq_variation.assign(m, 0.0);
    h.initial_tv_sq = h.max_tv_sq = tv_sq(state);
    h.initial_min = std::numeric_limits<double>::infinity();
    for (const auto& g : state.edges) h.initial_min = std::min(h.initial_min, g.u.minCoeff());
    for (int v = 0; v < tree.vertex_count(); ++v) {
        const auto& d = tree.direction(v);
        if (d.in_edges.empty() || d.out_edges.empty()) continue;
        h.vertex_logs.push_back({v, {}, {}, {}});
        double balance = 0.0;
        for (int j : d.in_edges) balance += std::pow(state.edges[j].u[state.edges[j].cells() - 1], 2);
        for (int j : d.out_edges) balance -= std::pow(state.edges[j].u[0], 2);
        h.initial_vertex_jump_sq += std::abs(balance);
    }

    double min_dx = std::numeric_limits<double>::infinity();
    for (const auto& g : state.edges) min_dx = std::min(min_dx, g.dx);

    std::size_t next_out = 0;
    auto emit_due = [&] {
        while (next_out < times.size() && times[next_out] <= state.t + 1e-12 * std::max(1.0, T)) {
            h.snapshots.push_back(snapshot(state));
            h.snapshots.back().t = times[next_out];
            for (auto& e : h.snapshots.back().edges) e.t = times[next_out];
            ++next_out;
        }
    };
    emit_due();

    const double stop = T * (1.0 - 1e-14);
    while (state.t < stop) {
        auto pass = couple(tree, state, policies, options.mode, options.tol);
        h.max_kirchhoff = std::max(h.max_kirchhoff, pass.max_kirchhoff);
        if (options.trace_stride > 0 && h.steps % options.trace_stride == 0) {
            for (std::size_t k = 0; k < pass.traces.size(); ++k) {
                h.vertex_logs[k].t.push_back(state.t);
                h.vertex_logs[k].before.push_back(pass.traces[k].before);
                h.vertex_logs[k].after.push_back(pass.traces[k].after);
            }
        }

        double gmax = 0.0;
        for (int j = 0; j < m; ++j) gmax = std::max({gmax, std::abs(pass.ghosts.left[j]), std::abs(pass.ghosts.right[j])});
        double dt = std::min(cfl_dt(state, options.cfl), options.cfl * min_dx / std::max(gmax, velocity_floor));
        double target = next_out < times.size() ? times[next_out] : T;
        if (state.t + dt >= target) dt = target - state.t;

        std::vector<double> first(m), last(m);
        for (int j = 0; j < m; ++j) {
            const auto& u = state.edges[j].u;
            first[j] = u[0] * u[0];
            last[j] = u[u.size() - 1] * u[u.size() - 1];
        }
        advance(state, pass.ghosts, dt);
        if (state.t + 1e-12 * std::max(1.0, T) >= target) state.t = target;
        ++h.steps;
        for (int j = 0; j < m; ++j) {
            const auto& u = state.edges[j].u;
            h.tail_sq_variation[j] += std::abs(u[0] * u[0] - first[j]);
            h.head_sq_variation[j] += std::abs(u[u.size() - 1] * u[u.size() - 1] - last[j]);
        }
        h.max_tv_sq = std::max(h.max_tv_sq, tv_sq(state));
        emit_due();
    }
    return h;
}

}  // namespace bnet
