#pragma once

#include "burgers_net/error.hpp"
#include "burgers_net/graph.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace bnet {

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Endpoint values at one vertex. Position k < in_count() is the head (x = l)
// of direction.in_edges[k]; the remaining positions are tails (x = 0) of
// direction.out_edges in order.
template <class Scalar = double>
struct VertexTrace {
    VertexDirection direction;
    Vec<Scalar> before;
    Vec<Scalar> after;

    int in_count() const { return static_cast<int>(direction.in_edges.size()); }
    int out_count() const { return static_cast<int>(direction.out_edges.size()); }
    int size() const { return in_count() + out_count(); }
    bool incoming(int k) const { return k < in_count(); }
    int edge_at(int k) const {
        return incoming(k) ? direction.in_edges[k] : direction.out_edges[k - in_count()];
    }
};

enum class SolverKind { Minimal, Maximal, Explicit };
enum class TieBreak { LowestIndex, HighestIndex };

inline const char* solver_kind_name(SolverKind kind) {
    switch (kind) {
        case SolverKind::Minimal: return "minimal";
        case SolverKind::Maximal: return "maximal";
        case SolverKind::Explicit: return "explicit";
    }
    return "minimal";
}

inline const char* tie_break_name(TieBreak tie) {
    return tie == TieBreak::LowestIndex ? "lowest_index" : "highest_index";
}

struct VertexPolicy {
    SolverKind kind = SolverKind::Minimal;
    TieBreak tie_break = TieBreak::LowestIndex;
    Eigen::MatrixXd forward;  // deg- x deg+, rows b01 for flow along the edges
    Eigen::MatrixXd reverse;  // deg+ x deg-, rows b10 for flow against them

    bool operator==(const VertexPolicy& o) const {
        return kind == o.kind && tie_break == o.tie_break && forward == o.forward && reverse == o.reverse;
    }
};

struct Tolerances {
    double kirchhoff = 1e-10;
    double flow = 1e-12;
};

template <class Scalar>
struct FlowDirection {
    int sign = 0;
    std::vector<int> effective_in;   // edge indices
    std::vector<int> effective_out;  // edge indices
    std::vector<bool> entering;      // per trace position: mass enters the vertex here
    Scalar sum_in = 0;               // sum of u^2 over entering incoming edges
    Scalar sum_out = 0;              // sum of u^2 over entering outgoing edges
};

namespace detail {

inline int degree_total(const VertexDirection& d) {
    return static_cast<int>(d.in_edges.size() + d.out_edges.size());
}

template <class Scalar>
void require_values(const VertexDirection& d, const Vec<Scalar>& v, const char* what) {
    using std::isfinite;
    if (v.size() != degree_total(d)) throw Error(Errc::MissingValue, std::string(what) + " has the wrong size");
    for (int k = 0; k < v.size(); ++k)
        if (!isfinite(v[k])) throw Error(Errc::MissingValue, std::string(what) + " contains a non-finite value");
}

template <class Scalar>
void require_nonnegative_branch(const VertexDirection& d, const Vec<Scalar>& before) {
    require_values(d, before, "values_before");
    if (d.in_edges.empty() || d.out_edges.empty())
        throw Error(Errc::SourceOrSink, "transmission solvers act on interior vertices");
    for (int k = 0; k < before.size(); ++k)
        if (before[k] < Scalar(0)) throw Error(Errc::NegativeInput, "negative endpoint value; use solve_signed");
}

template <class Scalar>
VertexTrace<Scalar> start_trace(const VertexDirection& d, const Vec<Scalar>& before) {
    VertexTrace<Scalar> t{d, before, before};
    return t;
}

template <class Scalar>
Scalar heaviside_cube(Scalar jump) {
    return jump > Scalar(0) ? jump * jump * jump / Scalar(12) : Scalar(0);
}

// Position (within the value vector) of the outgoing edge chosen by the tie break.
inline int target_position(const std::vector<int>& positions, const std::vector<int>& edges, TieBreak tie) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(positions.size()); ++i) {
        bool better = tie == TieBreak::LowestIndex ? edges[i] < edges[best] : edges[i] > edges[best];
        if (better) best = i;
    }
    return best;
}

// Smallest-spread magnitudes w >= lower with sum w^2 = total.
template <class Scalar>
Vec<Scalar> water_fill(const Vec<Scalar>& lower, Scalar total) {
    using std::sqrt;
    const int n = static_cast<int>(lower.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return lower[a] > lower[b]; });
    Vec<Scalar> w(n);
    Scalar rest = total;
    int clamped = 0;
    while (clamped < n) {
        Scalar level2 = rest / Scalar(n - clamped);
        if (level2 < Scalar(0)) level2 = Scalar(0);
        Scalar top = lower[order[clamped]];
        if (top * top > level2) {
            w[order[clamped]] = top;
            rest -= top * top;
            ++clamped;
            continue;
        }
        Scalar level = sqrt(level2);
        for (int i = clamped; i < n; ++i) w[order[i]] = level;
        break;
    }
    return w;
}

}  // namespace detail

template <class Scalar>
Scalar kirchhoff_residual(const VertexTrace<Scalar>& trace) {
    detail::require_values(trace.direction, trace.after, "values_after");
    Scalar r = 0;
    for (int k = 0; k < trace.size(); ++k) {
        Scalar half = trace.after[k] * trace.after[k] / Scalar(2);
        r += trace.incoming(k) ? half : -half;
    }
    return r;
}

template <class Scalar>
FlowDirection<Scalar> flow_direction(const VertexDirection& d, const Vec<Scalar>& before, double eps_flow = 1e-12) {
    detail::require_values(d, before, "values_before");
    FlowDirection<Scalar> f;
    const int nin = static_cast<int>(d.in_edges.size());
    f.entering.resize(before.size());
    for (int k = 0; k < before.size(); ++k) {
        bool in = k < nin;
        f.entering[k] = in ? before[k] >= Scalar(0) : before[k] <= Scalar(0);
        if (f.entering[k]) (in ? f.sum_in : f.sum_out) += before[k] * before[k];
    }
    Scalar diff = f.sum_in - f.sum_out;
    f.sign = diff > Scalar(eps_flow) ? 1 : (diff < Scalar(-eps_flow) ? -1 : 0);
    if (f.sign >= 0) {
        f.effective_in = d.in_edges;
        f.effective_out = d.out_edges;
    } else {
        f.effective_in = d.out_edges;
        f.effective_out = d.in_edges;
    }
    return f;
}

// Flow along the structural direction with every edge counted as entering.
template <class Scalar>
FlowDirection<Scalar> structural_flow(const VertexDirection& d) {
    FlowDirection<Scalar> f;
    f.sign = 1;
    f.effective_in = d.in_edges;
    f.effective_out = d.out_edges;
    f.entering.assign(detail::degree_total(d), true);
    return f;
}

// Energy change at the vertex: incoming edges contribute
// (u-^3 - u+^3)/3 - (u- - u+)^3/12 * H(u- - u+), outgoing edges the same with
// before and after exchanged; effective directions and the overall sign follow
// the flow sign.
template <class Scalar>
Scalar vertex_energy_change(const VertexTrace<Scalar>& trace, const FlowDirection<Scalar>& flow) {
    detail::require_values(trace.direction, trace.before, "values_before");
    detail::require_values(trace.direction, trace.after, "values_after");
    if (flow.sign == 0) return Scalar(0);
    const Scalar s = Scalar(flow.sign);
    Scalar total = 0;
    for (int k = 0; k < trace.size(); ++k) {
        bool eff_in = (trace.incoming(k) == (flow.sign > 0));
        Scalar first = eff_in ? trace.before[k] : trace.after[k];
        Scalar second = eff_in ? trace.after[k] : trace.before[k];
        Scalar jump = first - second;
        total += (first * first * first - second * second * second) / Scalar(3) - s * detail::heaviside_cube(s * jump);
    }
    return s * total;
}

template <class Scalar>
Scalar vertex_energy_change(const VertexTrace<Scalar>& trace) {
    return vertex_energy_change(trace, structural_flow<Scalar>(trace.direction));
}

template <class Scalar>
VertexTrace<Scalar> solve_minimal(const VertexDirection& d, const Vec<Scalar>& before) {
    using std::sqrt;
    detail::require_nonnegative_branch(d, before);
    auto t = detail::start_trace(d, before);
    const int nin = t.in_count();
    Scalar s = before.head(nin).squaredNorm();
    Scalar w = sqrt(s / Scalar(t.out_count()));
    t.after.tail(t.out_count()).setConstant(w);
    return t;
}

template <class Scalar>
VertexTrace<Scalar> solve_maximal(const VertexDirection& d, const Vec<Scalar>& before,
                                  TieBreak tie = TieBreak::LowestIndex) {
    using std::sqrt;
    detail::require_nonnegative_branch(d, before);
    auto t = detail::start_trace(d, before);
    const int nin = t.in_count();
    Scalar s = before.head(nin).squaredNorm();
    t.after.tail(t.out_count()).setZero();
    int pick = tie == TieBreak::LowestIndex ? 0 : t.out_count() - 1;
    t.after[nin + pick] = sqrt(s);
    return t;
}

namespace detail {

template <class Scalar>
Vec<Scalar> apply_explicit(const Eigen::MatrixXd& rows, const Vec<Scalar>& in, Scalar total, double tol) {
    using std::abs;
    if (rows.cols() != in.size() || rows.rows() == 0)
        throw Error(Errc::InfeasibleCoefficients, "coefficient matrix has the wrong shape");
    if ((rows.array() < 0.0).any()) throw Error(Errc::InfeasibleCoefficients, "negative coefficient");
    Vec<Scalar> out = rows.template cast<Scalar>() * in;
    Scalar gap = out.squaredNorm() - total;
    if (abs(gap) > Scalar(tol) * std::max(Scalar(1), total))
        throw Error(Errc::InfeasibleCoefficients, "coefficients violate the Kirchhoff condition");
    return out;
}

}  // namespace detail

// Non-negative data: dispatch on the policy kind.
template <class Scalar>
VertexTrace<Scalar> solve_nonnegative(const VertexDirection& d, const Vec<Scalar>& before, const VertexPolicy& policy,
                                      const Tolerances& tol = {}) {
    switch (policy.kind) {
        case SolverKind::Minimal: return solve_minimal(d, before);
        case SolverKind::Maximal: return solve_maximal(d, before, policy.tie_break);
        case SolverKind::Explicit: {
            if (policy.forward.size() == 0) return solve_maximal(d, before, policy.tie_break);
            detail::require_nonnegative_branch(d, before);
            auto t = detail::start_trace(d, before);
            Vec<Scalar> in = before.head(t.in_count());
            t.after.tail(t.out_count()) = detail::apply_explicit(policy.forward, in, in.squaredNorm(), tol.kirchhoff);
            return t;
        }
    }
    throw Error(Errc::InvalidArgument, "unknown solver kind");
}

template <class Scalar>
struct Coupling {
    Mat<Scalar> rows;  // deg- x deg+
    bool zero_inflow = false;
};

// b_js = TS_j(u) u_s / sum_k u_k^2, so that sum_s b_js u_s = TS_j(u).
template <class Scalar>
Coupling<Scalar> coupling_coefficients(const VertexDirection& d, const Vec<Scalar>& before, const VertexPolicy& policy,
                                       const Tolerances& tol = {}) {
    auto t = solve_nonnegative(d, before, policy, tol);
    const int nin = t.in_count(), nout = t.out_count();
    Coupling<Scalar> c;
    c.rows = Mat<Scalar>::Zero(nout, nin);
    Vec<Scalar> in = before.head(nin);
    Scalar s = in.squaredNorm();
    if (s == Scalar(0)) {
        c.zero_inflow = true;
        return c;
    }
    c.rows = t.after.tail(nout) * in.transpose() / s;
    return c;
}

template <class Scalar>
Coupling<Scalar> coupling_coefficients(const VertexDirection& d, const Vec<Scalar>& before, SolverKind kind,
                                       TieBreak tie = TieBreak::LowestIndex) {
    VertexPolicy p;
    p.kind = kind;
    p.tie_break = tie;
    return coupling_coefficients(d, before, p);
}

template <class Scalar>
struct FixedPointResult {
    VertexTrace<Scalar> trace;
    int iterations = 0;
    Scalar closed_form_gap = 0;
};

// Starts from the outgoing before-values rescaled onto the Kirchhoff sphere and
// repeats one greedy move per iteration: the minimal kind averages the squares
// of the largest and smallest outgoing values, the maximal kind empties the
// non-target edge holding the least flux into the target edge.
template <class Scalar>
FixedPointResult<Scalar> fixed_point_solver(const VertexDirection& d, const Vec<Scalar>& before, SolverKind kind,
                                            int max_iter = 100, double eps = 1e-13,
                                            TieBreak tie = TieBreak::LowestIndex) {
    using std::abs;
    using std::sqrt;
    if (kind == SolverKind::Explicit) throw Error(Errc::InvalidArgument, "fixed point iteration needs min or max");
    detail::require_nonnegative_branch(d, before);
    FixedPointResult<Scalar> r{detail::start_trace(d, before)};
    const int nin = r.trace.in_count(), nout = r.trace.out_count();
    const Scalar total = before.head(nin).squaredNorm();

    Vec<Scalar> f = before.tail(nout).array().square().matrix();
    Scalar fs = f.sum();
    if (fs > Scalar(0))
        f *= total / fs;
    else
        f.setConstant(total / Scalar(nout));
    const int target = tie == TieBreak::LowestIndex ? 0 : nout - 1;

    Vec<Scalar> prev = f.cwiseSqrt();
    bool converged = false;
    while (r.iterations < max_iter) {
        ++r.iterations;
        if (kind == SolverKind::Minimal) {
            int hi = 0, lo = 0;
            for (int i = 1; i < nout; ++i) {
                if (f[i] > f[hi]) hi = i;
                if (f[i] < f[lo]) lo = i;
            }
            Scalar mean = (f[hi] + f[lo]) / Scalar(2);
            f[hi] = mean;
            f[lo] = mean;
        } else {
            int donor = -1;
            for (int i = 0; i < nout; ++i)
                if (i != target && f[i] > Scalar(0) && (donor < 0 || f[i] < f[donor])) donor = i;
            if (donor >= 0) {
                f[target] += f[donor];
                f[donor] = Scalar(0);
            }
        }
        Vec<Scalar> cur = f.cwiseSqrt();
        Scalar step = (cur - prev).cwiseAbs().maxCoeff();
        prev = cur;
        if (step < Scalar(eps)) {
            converged = true;
            break;
        }
    }
    if (!converged) throw Error(Errc::NoConvergence, "fixed point iteration hit max_iter");
    r.trace.after.tail(nout) = prev;

    auto closed = kind == SolverKind::Minimal ? solve_minimal(d, before) : solve_maximal(d, before, tie);
    r.closed_form_gap = (closed.after - r.trace.after).cwiseAbs().maxCoeff();
    if (r.closed_form_gap > Scalar(std::max(eps, 1e-12)) * std::max(Scalar(1), sqrt(total)) * Scalar(10))
        throw Error(Errc::NoConvergence, "iteration limit differs from the closed form");
    return r;
}

// Signed endpoint values at a source, sink, path or honeycomb vertex.
template <class Scalar>
VertexTrace<Scalar> solve_signed(const VertexDirection& d, const Vec<Scalar>& before, const VertexPolicy& policy,
                                 const Tolerances& tol = {}) {
    using std::abs;
    using std::sqrt;
    detail::require_values(d, before, "values_before");
    auto t = detail::start_trace(d, before);
    const int nin = t.in_count(), nout = t.out_count();

    if (nin == 0 || nout == 0) {
        t.after.setZero();
        return t;
    }
    const bool honeycomb = (nin == 1 && nout <= 2) || (nin == 2 && nout == 1);
    if (!honeycomb)
        throw Error(Errc::UnsupportedVertexClass,
                    "signed transmission needs a path or honeycomb vertex, got deg+=" + std::to_string(nin) +
                        " deg-=" + std::to_string(nout));

    auto flow = flow_direction(d, before, tol.flow);
    for (int k = 0; k < t.size(); ++k)
        if (!flow.entering[k]) t.after[k] = Scalar(0);
    if (flow.sign == 0) return t;

    const Scalar s = Scalar(flow.sign);
    std::vector<int> pin, pout;
    for (int k = 0; k < t.size(); ++k) (t.incoming(k) == (flow.sign > 0) ? pin : pout).push_back(k);

    Vec<Scalar> vin(pin.size());
    for (std::size_t i = 0; i < pin.size(); ++i) vin[i] = s * t.after[pin[i]];
    const Scalar total = vin.squaredNorm();

    Vec<Scalar> lower(pout.size());
    std::vector<int> out_edges(pout.size());
    for (std::size_t i = 0; i < pout.size(); ++i) {
        lower[i] = flow.entering[pout[i]] ? abs(before[pout[i]]) : Scalar(0);
        out_edges[i] = t.edge_at(pout[i]);
    }

    const Eigen::MatrixXd& rows = flow.sign > 0 ? policy.forward : policy.reverse;
    SolverKind kind = policy.kind;
    if (kind == SolverKind::Explicit && rows.size() == 0) kind = SolverKind::Maximal;

    Vec<Scalar> w;
    switch (kind) {
        case SolverKind::Minimal: w = detail::water_fill(lower, total); break;
        case SolverKind::Maximal: {
            int target = detail::target_position(pout, out_edges, policy.tie_break);
            w = lower;
            Scalar rest = total - (lower.squaredNorm() - lower[target] * lower[target]);
            w[target] = sqrt(rest > Scalar(0) ? rest : Scalar(0));
            break;
        }
        case SolverKind::Explicit: w = detail::apply_explicit(rows, vin, total, tol.kirchhoff); break;
    }
    for (std::size_t i = 0; i < pout.size(); ++i) t.after[pout[i]] = s * w[i];
    return t;
}

}  // namespace bnet
