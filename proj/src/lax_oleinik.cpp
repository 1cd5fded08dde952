#include "burgers_net/lax_oleinik.hpp"

#include "burgers_net/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace bnet {

BoundaryTrace::BoundaryTrace(std::vector<double> times, std::vector<double> values)
    : t_(std::move(times)), u_(std::move(values)) {
    if (t_.size() < 2 || t_.size() != u_.size()) throw Error(Errc::InvalidArgument, "trace needs matching samples");
    if (t_.front() != 0.0) throw Error(Errc::InvalidArgument, "trace must start at t = 0");
    F_.assign(t_.size(), 0.0);
    for (std::size_t k = 0; k + 1 < t_.size(); ++k) {
        double h = t_[k + 1] - t_[k];
        if (!(h > 0.0)) throw Error(Errc::InvalidArgument, "trace times must increase");
        F_[k + 1] = F_[k] + h * (u_[k] * u_[k] + u_[k] * u_[k + 1] + u_[k + 1] * u_[k + 1]) / 6.0;
    }
}

BoundaryTrace BoundaryTrace::zero(double horizon) { return BoundaryTrace({0.0, horizon}, {0.0, 0.0}); }

namespace {

std::size_t interval_of(const std::vector<double>& t, double s) {
    auto it = std::upper_bound(t.begin(), t.end(), s);
    if (it == t.begin()) return 0;
    std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(k, t.size() - 2);
}

}  // namespace

double BoundaryTrace::value(double s) const {
    if (s <= t_.front()) return u_.front();
    if (s >= t_.back()) return u_.back();
    std::size_t k = interval_of(t_, s);
    double w = (s - t_[k]) / (t_[k + 1] - t_[k]);
    return u_[k] + w * (u_[k + 1] - u_[k]);
}

double BoundaryTrace::flux(double s) const {
    if (s <= t_.front()) return 0.0;
    if (s >= t_.back()) return F_.back();
    std::size_t k = interval_of(t_, s);
    double sig = s - t_[k];
    double slope = (u_[k + 1] - u_[k]) / (t_[k + 1] - t_[k]);
    double g = u_[k];
    return F_[k] + 0.5 * (g * g * sig + g * slope * sig * sig + slope * slope * sig * sig * sig / 3.0);
}

bool BoundaryTrace::is_zero() const {
    return std::all_of(u_.begin(), u_.end(), [](double v) { return v == 0.0; });
}

double g_functional(double x, double t, double y, const StepFunction& u0, const BoundaryTrace& tail) {
    if (!(t > 0.0)) throw Error(Errc::DomainViolation, "t must be positive");
    if (x < u0.start() || x > u0.end()) throw Error(Errc::DomainViolation, "x outside the edge");
    if (y > x) throw Error(Errc::DomainViolation, "y must not exceed x");
    if (y >= 0.0) return (x - y) * (x - y) / (2.0 * t) + u0.integral(y);
    return x * (x - y) / (2.0 * t) - tail.flux(-y * t / (x - y));
}

namespace {

struct Best {
    Minimizer m;
    bool set = false;

    void offer(double value, double y, double u, bool boundary, double tau) {
        // Ties within rounding go to the rightmost foot.
        const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
        bool take = !set || value < m.value - tol || (value <= m.value + tol && y > m.y);
        if (take) {
            m = {y, u, value, boundary, tau};
            set = true;
        }
    }
};

// Minimize (x-y)^2/(2t) + int u0 over y in [lo, x]; G is a convex quadratic on each piece.
void search_interior(double x, double t, const StepFunction& u0, double lo, Best& best) {
    lo = std::max(lo, u0.start());
    auto offer = [&](double y) {
        double g = (x - y) * (x - y) / (2.0 * t) + u0.integral(y);
        best.offer(g, y, (x - y) / t, false, 0.0);
    };
    if (lo >= x) {
        offer(x);
        return;
    }
    const auto& br = u0.breaks();
    const auto& val = u0.values();
    auto it = std::upper_bound(br.begin(), br.end(), lo);
    std::size_t k = it == br.begin() ? 0 : static_cast<std::size_t>(it - br.begin()) - 1;
    for (; k < val.size() && br[k] < x; ++k) {
        double a = std::max(br[k], lo), b = std::min(br[k + 1], x);
        offer(a);
        double ys = x - val[k] * t;
        if (ys > a && ys < b) offer(ys);
    }
    offer(x);
}

// Minimize H(tau) = x^2/(2(t-tau)) - F(tau) over tau in [0, tau_max].
void search_boundary(double x, double t, const BoundaryTrace& tail, double tau_max, Best& best) {
    const auto& ts = tail.times();
    const auto& us = tail.values();
    auto offer = [&](double tau) {
        if (tau < 0.0 || tau > tau_max || !(t - tau > 0.0)) return;
        double d = t - tau;
        double h = x * x / (2.0 * d) - tail.flux(tau);
        best.offer(h, -tau * x / d, x / d, true, tau);
    };
    for (std::size_t k = 0; k + 1 < ts.size() && ts[k] <= tau_max; ++k) {
        double a = ts[k], b = std::min(ts[k + 1], tau_max);
        offer(a);
        offer(b);
        double h = ts[k + 1] - ts[k];
        double s = (us[k + 1] - us[k]) / h;
        double g = us[k];
        double D = t - a;
        // Characteristic from (0, a + sig) reaches (x, t): x = (g + s sig)(D - sig).
        double A = s, B = g - s * D, C = x - g * D;
        auto try_sigma = [&](double sig) {
            if (sig > 0.0 && a + sig < b) offer(a + sig);
        };
        if (std::abs(A) < 1e-14) {
            if (B != 0.0) try_sigma(-C / B);
        } else {
            double disc = B * B - 4.0 * A * C;
            if (disc >= 0.0) {
                double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
                if (q != 0.0) {
                    try_sigma(q / A);
                    try_sigma(C / q);
                } else {
                    try_sigma(0.0);
                }
            }
        }
    }
}

// Feet of characteristics ordered along the boundary of the space-time strip:
// tail crossings by decreasing tau, then initial positions by increasing y.
// The virtual foot y = -tau x/(t - tau) is not monotone on the boundary branch
// when the tail trace decreases in time.
bool foot_precedes(const Minimizer& a, const Minimizer& b) {
    const double tol = 1e-12;
    if (a.boundary_branch != b.boundary_branch) return a.boundary_branch;
    if (a.boundary_branch) return a.tau > b.tau + tol * (1.0 + b.tau);
    return a.y < b.y - tol * (1.0 + std::abs(b.y));
}

}  // namespace

Minimizer minimize_g(double x, double t, const StepFunction& u0, const BoundaryTrace& tail,
                     const SearchControl& control) {
    if (!(t > 0.0)) throw Error(Errc::DomainViolation, "t must be positive");
    const double slack = 1e-12 * std::max(1.0, u0.end());
    if (x < u0.start() - slack || x > u0.end() + slack) throw Error(Errc::DomainViolation, "x outside the edge");
    x = std::clamp(x, u0.start(), u0.end());

    const Minimizer* prev = control.previous;
    Best best;
    double lo = 0.0;
    if (prev && !prev->boundary_branch) lo = std::max(0.0, prev->y);
    search_interior(x, t, u0, lo, best);

    bool boundary_allowed = !(prev && !prev->boundary_branch && prev->y > 0.0);
    if (boundary_allowed && !tail.is_zero()) {
        if (tail.horizon() < t * (1.0 - 1e-12)) throw Error(Errc::DomainViolation, "tail trace ends before t");
        if (x == 0.0) {
            double g = tail.value(t);
            if (g > 0.0) return {0.0, g, -tail.flux(t), true, t};
        } else {
            double tau_max = std::min(t, tail.horizon());
            if (prev && prev->boundary_branch) tau_max = std::min(tau_max, prev->tau);
            search_boundary(x, t, tail, tau_max, best);
        }
    }
    return best.m;
}

BoundaryTrace head_trace(const StepFunction& u0, const BoundaryTrace& tail, double horizon,
                         const TraceControl& control) {
    const double l = u0.end();
    auto eval = [&](double s) { return s <= 0.0 ? u0.left_limit_at_end() : minimize_g(l, s, u0, tail).u; };
    std::vector<double> ts{0.0}, us{eval(0.0)};
    std::function<void(double, double, double, double, int)> refine = [&](double a, double ua, double b, double ub,
                                                                         int depth) {
        double m = 0.5 * (a + b);
        double um = eval(m);
        if (depth < control.max_depth && std::abs(um - 0.5 * (ua + ub)) > control.tolerance) {
            refine(a, ua, m, um, depth + 1);
            refine(m, um, b, ub, depth + 1);
        } else {
            ts.push_back(m);
            us.push_back(um);
            ts.push_back(b);
            us.push_back(ub);
        }
    };
    const int n = std::max(1, control.initial_intervals);
    double prev_t = 0.0, prev_u = us[0];
    for (int i = 1; i <= n; ++i) {
        double b = horizon * i / n;
        double ub = eval(b);
        refine(prev_t, prev_u, b, ub, 0);
        prev_t = b;
        prev_u = ub;
    }
    return BoundaryTrace(std::move(ts), std::move(us));
}

EdgeSolution solve_edge(int edge, const StepFunction& u0, const BoundaryTrace& tail, const std::vector<double>& times,
                        const Eigen::VectorXd& xs, bool warm_start, const TraceControl& control) {
    if (u0.min_value() < 0.0) throw Error(Errc::NegativeInput, "Lax-Oleinik needs non-negative data");
    for (Eigen::Index i = 1; i < xs.size(); ++i)
        if (xs[i] < xs[i - 1]) throw Error(Errc::InvalidArgument, "sample positions must be sorted");
    EdgeSolution out;
    const double width = xs.size() > 0 ? u0.end() / static_cast<double>(xs.size()) : 0.0;
    double horizon = 0.0;
    for (double t : times) horizon = std::max(horizon, t);
    for (double t : times) {
        EdgeProfile p{edge, t, width, xs, Eigen::VectorXd(xs.size())};
        if (t <= 0.0) {
            for (Eigen::Index i = 0; i < xs.size(); ++i) p.u[i] = u0(xs[i]);
        } else {
            Minimizer prev;
            bool have_prev = false;
            for (Eigen::Index i = 0; i < xs.size(); ++i) {
                SearchControl c;
                if (warm_start && have_prev) c.previous = &prev;
                Minimizer m = minimize_g(xs[i], t, u0, tail, c);
                if (have_prev && foot_precedes(m, prev)) ++out.monotonicity_violations;
                p.u[i] = m.u;
                prev = m;
                have_prev = true;
            }
        }
        out.profiles.push_back(std::move(p));
    }
    out.head = horizon > 0.0 ? head_trace(u0, tail, horizon, control) : BoundaryTrace::zero(0.0);
    return out;
}

TreeSolution solve_tree(const DirectedMetricTree& tree, const std::vector<StepFunction>& initial,
                        const std::vector<VertexPolicy>& policies, double horizon, const std::vector<double>& times,
                        const std::vector<Eigen::VectorXd>& xs, const TraceControl& control) {
    const int m = tree.edge_count();
    if (!tree.is_tree()) throw Error(Errc::NotATree, "the Lax-Oleinik recursion needs a tree");
    if (static_cast<int>(initial.size()) != m || static_cast<int>(xs.size()) != m)
        throw Error(Errc::InvalidArgument, "need initial data and samples for every edge");
    if (static_cast<int>(policies.size()) != tree.vertex_count())
        throw Error(Errc::InvalidArgument, "need one policy per vertex");
    if (!(horizon > 0.0)) throw Error(Errc::InvalidArgument, "horizon must be positive");
    for (int j = 0; j < m; ++j) {
        if (initial[j].min_value() < 0.0) throw Error(Errc::NegativeInput, "edge " + std::to_string(j + 1));
        if (std::abs(initial[j].end() - tree.length(j)) > 1e-12 * tree.length(j))
            throw Error(Errc::InvalidArgument, "initial data length differs from edge " + std::to_string(j + 1));
    }

    TreeSolution sol;
    sol.tail_traces.resize(m);
    sol.head_traces.resize(m);
    std::vector<std::vector<EdgeProfile>> profiles(m);
    std::vector<char> tail_ready(m, 0);
    std::vector<double> solve_times = times;
    solve_times.erase(std::remove_if(solve_times.begin(), solve_times.end(), [&](double t) { return t > horizon; }),
                      solve_times.end());

    for (int j : tree.topological_edges()) {
        const int v = tree.edge(j).tail;
        if (!tail_ready[j]) {
            const auto& dir = tree.direction(v);
            if (dir.in_edges.empty()) {
                for (int k : dir.out_edges) {
                    sol.tail_traces[k] = BoundaryTrace::zero(horizon);
                    tail_ready[k] = 1;
                }
            } else {
                std::vector<double> grid;
                for (int s : dir.in_edges)
                    grid.insert(grid.end(), sol.head_traces[s].times().begin(), sol.head_traces[s].times().end());
                std::sort(grid.begin(), grid.end());
                grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
                const int nin = static_cast<int>(dir.in_edges.size());
                const int nout = static_cast<int>(dir.out_edges.size());
                std::vector<std::vector<double>> outs(nout, std::vector<double>(grid.size()));
                for (std::size_t g = 0; g < grid.size(); ++g) {
                    Eigen::VectorXd before = Eigen::VectorXd::Zero(nin + nout);
                    for (int i = 0; i < nin; ++i)
                        before[i] = std::max(0.0, sol.head_traces[dir.in_edges[i]].value(grid[g]));
                    auto tr = solve_nonnegative(dir, before, policies[v]);
                    sol.max_trace_kirchhoff = std::max(sol.max_trace_kirchhoff, std::abs(kirchhoff_residual(tr)));
                    for (int o = 0; o < nout; ++o) outs[o][g] = tr.after[nin + o];
                }
                for (int o = 0; o < nout; ++o) {
                    sol.tail_traces[dir.out_edges[o]] = BoundaryTrace(grid, outs[o]);
                    tail_ready[dir.out_edges[o]] = 1;
                }
            }
        }
        auto es = solve_edge(j, initial[j], sol.tail_traces[j], solve_times, xs[j], true, control);
        // solve_edge samples the head on [0, max(times)]; downstream coupling needs the full horizon.
        sol.head_traces[j] = head_trace(initial[j], sol.tail_traces[j], horizon, control);
        sol.monotonicity_violations += es.monotonicity_violations;
        profiles[j] = std::move(es.profiles);
    }

    for (std::size_t i = 0; i < solve_times.size(); ++i) {
        Snapshot s;
        s.t = solve_times[i];
        for (int j = 0; j < m; ++j) s.edges.push_back(profiles[j][i]);
        sol.snapshots.push_back(std::move(s));
    }
    return sol;
}

UnrolledDatum path_unroll(const DirectedMetricTree& tree, int target, const std::vector<StepFunction>& initial,
                          const std::vector<VertexPolicy>& policies) {
    for (int v = 0; v < tree.vertex_count(); ++v)
        if (tree.direction(v).in_edges.size() > 1)
            throw Error(Errc::NotUnrollable, "vertex " + std::to_string(v + 1) + " has more than one incoming edge");
    tree.edge(target);

    UnrolledDatum out;
    std::vector<int> path{target};
    std::vector<double> scale{1.0};
    int k = target;
    while (true) {
        int v = tree.edge(k).tail;
        const auto& dir = tree.direction(v);
        if (dir.in_edges.empty()) break;
        int s = dir.in_edges.front();
        const auto& pol = policies.at(v);
        const int nout = static_cast<int>(dir.out_edges.size());
        const int row = static_cast<int>(std::find(dir.out_edges.begin(), dir.out_edges.end(), k) - dir.out_edges.begin());
        double b = 0.0;
        switch (pol.kind) {
            case SolverKind::Minimal: b = 1.0 / std::sqrt(static_cast<double>(nout)); break;
            case SolverKind::Maximal:
                b = row == (pol.tie_break == TieBreak::LowestIndex ? 0 : nout - 1) ? 1.0 : 0.0;
                break;
            case SolverKind::Explicit:
                b = pol.forward.size() ? pol.forward(row, 0) : (row == 0 ? 1.0 : 0.0);
                break;
        }
        if (b == 0.0) break;
        path.push_back(s);
        scale.push_back(scale.back() / b);
        k = s;
    }
    std::reverse(path.begin(), path.end());
    std::reverse(scale.begin(), scale.end());

    double upstream = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) upstream += tree.length(path[i]);
    std::vector<double> breaks{-upstream}, values;
    double offset = -upstream;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const auto& f = initial.at(path[i]);
        out.offsets.push_back(offset);
        for (int p = 0; p < f.pieces(); ++p) {
            values.push_back(scale[i] * f.values()[p]);
            breaks.push_back(offset + f.breaks()[p + 1]);
        }
        offset += tree.length(path[i]);
    }
    out.datum = StepFunction(std::move(breaks), std::move(values));
    out.path = std::move(path);
    out.scale = std::move(scale);
    return out;
}

double lax_oleinik_line(const StepFunction& datum, double x, double t) {
    if (!(t > 0.0)) throw Error(Errc::DomainViolation, "t must be positive");
    if (x <= datum.start()) return 0.0;
    x = std::min(x, datum.end());
    Best best;
    search_interior(x, t, datum, datum.start(), best);
    return best.m.u;
}

OleinikReport oleinik_check(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t, double eps) {
    if (!(t > 0.0)) throw Error(Errc::DomainViolation, "t must be positive");
    OleinikReport r;
    r.worst_margin = -std::numeric_limits<double>::infinity();
    double lowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double v = u[i] - x[i] / t;
        if (i > 0) r.worst_margin = std::max(r.worst_margin, v - lowest);
        lowest = std::min(lowest, v);
    }
    if (x.size() < 2) r.worst_margin = 0.0;
    r.holds = r.worst_margin <= eps;
    return r;
}

OleinikReport oleinik_check(const EdgeProfile& profile, double eps) {
    return oleinik_check(profile.x, profile.u, profile.t, eps);
}

}  // namespace bnet
