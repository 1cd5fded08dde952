#include "burgers_net/diagnostics.hpp"

#include "burgers_net/error.hpp"

#include <cmath>

namespace bnet {

double total_variation(const Eigen::VectorXd& u) {
    double s = 0.0;
    for (Eigen::Index i = 1; i < u.size(); ++i) s += std::abs(u[i] - u[i - 1]);
    return s;
}

double total_variation_sq(const Eigen::VectorXd& u) {
    double s = 0.0;
    for (Eigen::Index i = 1; i < u.size(); ++i) s += std::abs(u[i] * u[i] - u[i - 1] * u[i - 1]);
    return s;
}

TvReport tv_norm(const Snapshot& state) {
    TvReport r;
    for (const auto& e : state.edges) {
        r.per_edge.push_back(total_variation(e.u));
        r.per_edge_sq.push_back(total_variation_sq(e.u));
        r.total += r.per_edge.back();
        r.total_sq += r.per_edge_sq.back();
    }
    return r;
}

double graph_energy(const Snapshot& state) {
    double s = 0.0;
    for (const auto& e : state.edges) s += 0.5 * e.u.squaredNorm() * e.cell_width;
    return s;
}

double l1_distance(const Snapshot& a, const Snapshot& b) {
    if (a.edges.size() != b.edges.size()) throw Error(Errc::InvalidArgument, "snapshots cover different edges");
    double s = 0.0;
    for (std::size_t j = 0; j < a.edges.size(); ++j) {
        const auto& ea = a.edges[j];
        const auto& eb = b.edges[j];
        if (ea.u.size() != eb.u.size()) throw Error(Errc::InvalidArgument, "snapshots use different grids");
        s += (ea.u - eb.u).cwiseAbs().sum() * ea.cell_width;
    }
    return s;
}

double sup_norm(const Snapshot& state) {
    double s = 0.0;
    for (const auto& e : state.edges)
        if (e.u.size()) s = std::max(s, e.u.cwiseAbs().maxCoeff());
    return s;
}

double default_shock_threshold(const EdgeProfile& profile) {
    const auto n = profile.u.size();
    return n ? 5.0 * total_variation(profile.u) / static_cast<double>(n) : 0.0;
}

std::vector<ShockRecord> detect_shocks(const EdgeProfile& profile, double threshold) {
    if (threshold < 0.0) threshold = default_shock_threshold(profile);
    std::vector<ShockRecord> out;
    const auto& u = profile.u;
    const auto& x = profile.x;
    Eigen::Index i = 1;
    while (i < u.size()) {
        double d = u[i] - u[i - 1];
        if (std::abs(d) <= threshold || d == 0.0) {
            ++i;
            continue;
        }
        Eigen::Index k = i;
        while (k + 1 < u.size()) {
            double dk = u[k + 1] - u[k];
            if (std::abs(dk) <= threshold || (dk > 0) != (d > 0)) break;
            ++k;
        }
        ShockRecord s;
        s.edge = profile.edge;
        s.left = u[i - 1];
        s.right = u[k];
        s.position = 0.5 * (x[i - 1] + x[k]);
        s.speed = 0.5 * (s.left + s.right);
        s.lax_ok = s.left > s.right;
        out.push_back(s);
        i = k + 1;
    }
    return out;
}

double energy_dissipation_rate(const std::vector<ShockRecord>& shocks, double tail_value, double head_value) {
    double r = (tail_value * tail_value * tail_value - head_value * head_value * head_value) / 3.0;
    for (const auto& s : shocks) {
        double j = s.left - s.right;
        r -= j * j * j / 12.0;
    }
    return r;
}

double energy_dissipation_rate(const EdgeProfile& profile, const std::vector<ShockRecord>& shocks) {
    if (profile.u.size() == 0) return 0.0;
    return energy_dissipation_rate(shocks, profile.u[0], profile.u[profile.u.size() - 1]);
}

TvEstimateReport tv_estimate_check(const DirectedMetricTree& tree, const GodunovHistory& history) {
    if (history.initial_min < 0.0)
        throw Error(Errc::HypothesisViolated, "the TV estimate assumes non-negative initial data");
    TvEstimateReport r;
    const auto sources = tree.sources();
    const auto sinks = tree.sinks();
    bool honeycomb_classes = true;
    for (int v = 0; v < tree.vertex_count(); ++v)
        if (tree.classify(v).kind == VertexKind::General) honeycomb_classes = false;
    r.honeycomb_form = honeycomb_classes && sources.size() == 1 && sinks.size() == 1;

    if (r.honeycomb_form) {
        r.kappa = 1;
        for (int v = 0; v < tree.vertex_count(); ++v) {
            auto k = tree.classify(v).kind;
            bool doubles = k == VertexKind::FirstKind || k == VertexKind::SecondKind;
            r.kappa += doubles ? 1 : 0;
            r.factors.push_back({v, k, doubles ? 2.0 : 1.0});
        }
        r.constant = std::ldexp(1.0, r.kappa);
    } else {
        r.constant = 2.0;
        for (int v = 0; v < tree.vertex_count(); ++v) {
            auto c = tree.classify(v);
            double f = std::max(c.deg_in, c.deg_out);
            r.factors.push_back({v, c.kind, f});
            r.constant *= f;
        }
    }

    double sink_var = 0.0, source_var = 0.0;
    for (int v : sinks)
        for (int j : tree.direction(v).in_edges) sink_var += history.head_sq_variation.at(j);
    for (int v : sources)
        for (int j : tree.direction(v).out_edges) source_var += history.tail_sq_variation.at(j);
    r.lhs = history.max_tv_sq + sink_var;
    r.rhs = r.constant * (history.initial_tv_sq + history.initial_vertex_jump_sq + source_var);
    r.margin = r.rhs - r.lhs;
    r.holds = r.margin >= 0.0;
    return r;
}

const char* w_kind_name(WKind kind) {
    switch (kind) {
        case WKind::WPlus: return "W+";
        case WKind::WMinus: return "W-";
        case WKind::W: return "W";
        case WKind::None: return "none";
    }
    return "?";
}

WClassReport w_class_membership(const EdgeProfile& profile, double jump_threshold, double tol) {
    const auto& u = profile.u;
    const int n = static_cast<int>(u.size());
    WClassReport r;
    auto sign_of = [&](double v) { return v > tol ? 1 : (v < -tol ? -1 : 0); };

    // Near-zero samples join the block they follow (or the first signed block).
    int i = 0;
    while (i < n) {
        int sign = 0;
        int k = i;
        while (k < n) {
            int s = sign_of(u[k]);
            if (s != 0 && sign != 0 && s != sign) break;
            if (s != 0) sign = s;
            ++k;
        }
        WBlock b{i, k, sign, true};
        for (int m = i + 1; m < k; ++m) {
            double d = u[m] - u[m - 1];
            if (d < -tol && -d <= jump_threshold) b.ok = false;
        }
        r.blocks.push_back(b);
        i = k;
    }

    bool all_ok = std::all_of(r.blocks.begin(), r.blocks.end(), [](const WBlock& b) { return b.ok; });
    if (!all_ok) r.kind = WKind::None;
    else if (r.blocks.size() > 1) r.kind = WKind::W;
    else if (!r.blocks.empty() && r.blocks[0].sign < 0) r.kind = WKind::WMinus;
    else r.kind = WKind::WPlus;
    return r;
}

}  // namespace bnet
