#include <doctest.h>

#include "burgers_net/error.hpp"
#include "burgers_net/lax_oleinik.hpp"

#include <cmath>
#include <random>

using namespace bnet;
using Eigen::VectorXd;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::InvalidArgument;
}

std::vector<VertexPolicy> uniform_policy(const DirectedMetricTree& tree, SolverKind kind) {
    VertexPolicy p;
    p.kind = kind;
    return std::vector<VertexPolicy>(tree.vertex_count(), p);
}

StepFunction random_steps(std::mt19937& rng, double length, int pieces) {
    std::uniform_real_distribution<double> pos(0.0, length), val(0.0, 2.0);
    std::vector<double> b{0.0, length};
    for (int i = 1; i < pieces; ++i) b.push_back(pos(rng));
    std::sort(b.begin(), b.end());
    std::vector<double> v;
    for (int i = 0; i < pieces; ++i) v.push_back(val(rng));
    return StepFunction(b, v);
}

}  // namespace

TEST_CASE("BoundaryTrace") {
    BoundaryTrace tr({0.0, 1.0, 2.0}, {0.0, 2.0, 2.0});
    CHECK(tr.value(0.5) == doctest::Approx(1.0));
    CHECK(tr.value(5.0) == 2.0);
    // int_0^1 (2s)^2/2 ds = 2/3, then 2 per unit time.
    CHECK(tr.flux(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(tr.flux(0.5) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(tr.flux(1.5) == doctest::Approx(2.0 / 3.0 + 1.0).epsilon(1e-14));
    for (std::size_t k = 1; k < tr.flux().size(); ++k) CHECK(tr.flux()[k] >= tr.flux()[k - 1]);
    CHECK(BoundaryTrace::zero(3.0).is_zero());
    CHECK(code_of([] { BoundaryTrace({0.0, 0.0}, {1.0, 1.0}); }) == Errc::InvalidArgument);
}

TEST_CASE("g_functional") {
    auto zero = StepFunction::constant(2.0, 0.0);
    auto one = StepFunction::constant(2.0, 1.0);
    auto none = BoundaryTrace::zero(5.0);
    CHECK(g_functional(1.5, 0.7, 0.4, zero, none) == doctest::Approx(1.1 * 1.1 / 1.4));
    CHECK(g_functional(1.0, 1e-3, 1.0, one, none) == doctest::Approx(1.0));
    CHECK(g_functional(1.0, 2.0, -3.0, zero, none) == doctest::Approx(1.0 * 4.0 / 4.0));
    CHECK(code_of([&] { g_functional(3.0, 1.0, 0.0, zero, none); }) == Errc::DomainViolation);
    CHECK(code_of([&] { g_functional(1.0, 0.0, 0.0, zero, none); }) == Errc::DomainViolation);
}

TEST_CASE("minimize_g closed-form cases") {
    auto none = BoundaryTrace::zero(10.0);
    SUBCASE("constant state away from the tail") {
        auto c = StepFunction::constant(4.0, 0.6);
        auto m = minimize_g(3.0, 1.0, c, none);
        CHECK(m.u == doctest::Approx(0.6).epsilon(1e-14));
        CHECK(m.y == doctest::Approx(2.4).epsilon(1e-14));
        CHECK_FALSE(m.boundary_branch);
    }
    SUBCASE("rarefaction behind a zero tail") {
        auto one = StepFunction::constant(1.0, 1.0);
        for (double x : {0.1, 0.25, 0.4}) {
            auto m = minimize_g(x, 0.5, one, none);
            CHECK(m.u == doctest::Approx(x / 0.5).epsilon(1e-13));
        }
    }
    SUBCASE("Riemann shock 1|0 at x0 + t/2") {
        auto data = StepFunction::from_segments(2.0, {{0.0, 0.5, 1.0}});
        auto one = BoundaryTrace({0.0, 10.0}, {1.0, 1.0});
        const double t = 0.6, xi = 0.5 + t / 2;
        CHECK(minimize_g(xi - 1e-6, t, data, one).u == doctest::Approx(1.0));
        CHECK(minimize_g(xi + 1e-6, t, data, one).u == doctest::Approx(0.0));
    }
    SUBCASE("inflow through the tail") {
        auto zero = StepFunction::constant(2.0, 0.0);
        auto tail = BoundaryTrace({0.0, 10.0}, {0.5, 0.5});
        auto m = minimize_g(0.4, 2.0, zero, tail);
        CHECK(m.boundary_branch);
        CHECK(m.u == doctest::Approx(0.5).epsilon(1e-13));
        CHECK(m.tau == doctest::Approx(1.2).epsilon(1e-13));
        // Ahead of the inflow shock (speed 1/4) the state is still zero.
        CHECK(minimize_g(0.6, 2.0, zero, tail).u == doctest::Approx(0.0));
        CHECK(minimize_g(0.0, 2.0, zero, tail).u == 0.5);
    }
}

TEST_CASE("minimize_g matches a dense scan of G") {
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const double l = 1.0 + 2.0 * unit(rng);
        auto u0 = random_steps(rng, l, 6);
        std::vector<double> ts{0.0}, gs{2.0 * unit(rng)};
        for (int k = 1; k <= 5; ++k) {
            ts.push_back(ts.back() + 0.2 + unit(rng));
            gs.push_back(2.0 * unit(rng));
        }
        BoundaryTrace tail(ts, gs);
        const double x = l * unit(rng), t = 0.2 + 2.0 * unit(rng);
        auto m = minimize_g(x, t, u0, tail);

        // Scan y over [-Y, x] with Y large enough to reach tau near t on the negative branch.
        const double Y = 50.0 * (x + 1.0);
        const int n = 100000;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= n; ++i) {
            double y = std::min(x, -Y + (x + Y) * i / n);
            if (y < 0.0 && x == 0.0) continue;
            best = std::min(best, g_functional(x, t, y, u0, tail));
        }
        CHECK(m.value <= best + 1e-12);
        CHECK(m.value >= best - 1e-3);
        CHECK(g_functional(x, t, m.y, u0, tail) == doctest::Approx(m.value).epsilon(1e-9));
    }
}

TEST_CASE("solve_edge") {
    auto none = BoundaryTrace::zero(4.0);
    std::vector<double> times{0.0, 0.5, 1.0, 2.0};

    SUBCASE("zero data and zero inflow stay zero") {
        auto es = solve_edge(0, StepFunction::constant(1.0, 0.0), none, times, cell_centres(1.0, 50));
        for (const auto& p : es.profiles) CHECK(p.u.cwiseAbs().maxCoeff() == 0.0);
        CHECK(es.head.is_zero());
    }
    SUBCASE("rarefaction fan of the P2 downstream edge") {
        auto xs = cell_centres(1.0, 200);
        auto es = solve_edge(1, StepFunction::constant(1.0, 1.0), none, times, xs);
        const auto& p = es.profiles[1];
        for (Eigen::Index i = 0; i < xs.size(); ++i) {
            double expect = xs[i] < 0.5 ? xs[i] / 0.5 : 1.0;
            CHECK(p.u[i] == doctest::Approx(expect).epsilon(1e-12));
        }
        CHECK(es.monotonicity_violations == 0);
        // Head sees u = 1 until the fan arrives at t = 1, then 1/t.
        CHECK(es.head.value(0.5) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(es.head.value(1.6) == doctest::Approx(1.0 / 1.6).epsilon(1e-6));
    }
    SUBCASE("warm start gives the same answer as independent searches") {
        std::mt19937 rng(7);
        auto u0 = random_steps(rng, 2.0, 8);
        BoundaryTrace tail({0.0, 0.7, 1.5, 4.0}, {0.3, 1.4, 0.2, 0.9});
        auto xs = cell_centres(2.0, 300);
        auto warm = solve_edge(0, u0, tail, times, xs, true);
        auto cold = solve_edge(0, u0, tail, times, xs, false);
        CHECK(warm.monotonicity_violations == 0);
        CHECK(cold.monotonicity_violations == 0);
        for (std::size_t k = 0; k < times.size(); ++k)
            CHECK((warm.profiles[k].u - cold.profiles[k].u).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("negative data is refused") {
        CHECK(code_of([&] { solve_edge(0, StepFunction::constant(1.0, -0.1), none, times, cell_centres(1.0, 4)); }) ==
              Errc::NegativeInput);
    }
}

TEST_CASE("solve_tree") {
    SUBCASE("H3 minimal split gives sqrt(2)/2 a downstream") {
        const double a = 0.5;
        auto h3 = honeycomb_from_edges(star_edges({LatticeKind::A, 0, 0}));
        std::vector<StepFunction> u0{StepFunction::constant(1.0, a), StepFunction::constant(1.0, 1.0),
                                     StepFunction::constant(1.0, 1.0)};
        std::vector<VectorXd> xs(3, cell_centres(1.0, 40));
        auto sol = solve_tree(h3, u0, uniform_policy(h3, SolverKind::Minimal), 3.0, {1.0}, xs);
        for (int j : {1, 2})
            for (double t : {0.1, 0.8, 1.9}) CHECK(sol.tail_traces[j].value(t) == doctest::Approx(std::sqrt(0.5) * a));
        CHECK(sol.max_trace_kirchhoff < 1e-12);
        CHECK(sol.monotonicity_violations == 0);
    }
    SUBCASE("zero data stays zero") {
        auto tree = honeycomb_tree({{0, 0}}, {hexagon_edges(0, 0)[2]});
        std::vector<StepFunction> u0;
        std::vector<VectorXd> xs;
        for (int j = 0; j < tree.edge_count(); ++j) {
            u0.push_back(StepFunction::constant(tree.length(j), 0.0));
            xs.push_back(cell_centres(tree.length(j), 10));
        }
        auto sol = solve_tree(tree, u0, uniform_policy(tree, SolverKind::Minimal), 2.0, {0.5, 2.0}, xs);
        for (const auto& s : sol.snapshots)
            for (const auto& p : s.edges) CHECK(p.u.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("P3 equals the line solution of the unrolled datum") {
        auto p3 = path_graph(3, {1.0, 0.7, 1.2});
        std::vector<StepFunction> u0{StepFunction::from_segments(1.0, {{0.2, 0.6, 1.5}}),
                                     StepFunction::from_segments(0.7, {{0.0, 0.3, 0.4}, {0.3, 0.7, 0.9}}),
                                     StepFunction::from_segments(1.2, {{0.5, 1.0, 0.3}})};
        auto pol = uniform_policy(p3, SolverKind::Minimal);
        // Odd counts keep samples off shock positions, where trace interpolation error can flip a G tie.
        std::vector<VectorXd> xs{cell_centres(1.0, 53), cell_centres(0.7, 37), cell_centres(1.2, 61)};
        std::vector<double> times{0.4, 1.3, 2.5};
        auto sol = solve_tree(p3, u0, pol, 2.5, times, xs);
        auto un = path_unroll(p3, 2, u0, pol);
        for (std::size_t k = 0; k < times.size(); ++k) {
            const auto& p = sol.snapshots[k].edges[2];
            double worst = 0.0;
            for (Eigen::Index i = 0; i < p.x.size(); ++i)
                worst = std::max(worst, std::abs(p.u[i] - lax_oleinik_line(un.datum, p.x[i], times[k])));
            CHECK(worst < 1e-5);
        }
    }
    SUBCASE("refusals") {
        auto p2 = path_graph(2);
        std::vector<VectorXd> xs(2, cell_centres(1.0, 4));
        std::vector<StepFunction> neg{StepFunction::constant(1.0, 1.0), StepFunction::constant(1.0, -1.0)};
        CHECK(code_of([&] { solve_tree(p2, neg, uniform_policy(p2, SolverKind::Minimal), 1.0, {1.0}, xs); }) ==
              Errc::NegativeInput);
        auto dag = build_tree(4, {{0, 1, 1.0}, {1, 2, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}},
                              {false, Topology::DirectedAcyclic});
        std::vector<StepFunction> z(4, StepFunction::constant(1.0, 0.0));
        std::vector<VectorXd> xs4(4, cell_centres(1.0, 4));
        CHECK(code_of([&] { solve_tree(dag, z, uniform_policy(dag, SolverKind::Minimal), 1.0, {1.0}, xs4); }) ==
              Errc::NotATree);
    }
}

TEST_CASE("path_unroll") {
    SUBCASE("P2 concatenates the data") {
        auto p2 = path_graph(2);
        std::vector<StepFunction> u0{StepFunction::constant(1.0, 0.3), StepFunction::constant(1.0, 1.0)};
        auto un = path_unroll(p2, 1, u0, uniform_policy(p2, SolverKind::Minimal));
        CHECK(un.datum.start() == -1.0);
        CHECK(un.datum.end() == 1.0);
        CHECK(un.datum(-0.5) == 0.3);
        CHECK(un.datum(0.5) == 1.0);
        CHECK(un.path == std::vector<int>{0, 1});
    }
    SUBCASE("first-kind vertex scales upstream data by sqrt(2)") {
        auto h3 = honeycomb_from_edges(star_edges({LatticeKind::A, 0, 0}));
        std::vector<StepFunction> u0(3, StepFunction::constant(1.0, 1.0));
        auto un = path_unroll(h3, 2, u0, uniform_policy(h3, SolverKind::Minimal));
        CHECK(un.scale[0] == doctest::Approx(std::sqrt(2.0)));
        CHECK(un.datum(-0.5) == doctest::Approx(std::sqrt(2.0)));
        // Maximal with lowest-index target: the higher out-edge sees nothing upstream.
        auto cut = path_unroll(h3, 2, u0, uniform_policy(h3, SolverKind::Maximal));
        CHECK(cut.path == std::vector<int>{2});
    }
    SUBCASE("second-kind vertex is not unrollable") {
        auto tree = honeycomb_from_edges(star_edges({LatticeKind::B, 0, 0}));
        std::vector<StepFunction> u0(3, StepFunction::constant(1.0, 1.0));
        CHECK(code_of([&] { path_unroll(tree, 2, u0, uniform_policy(tree, SolverKind::Minimal)); }) ==
              Errc::NotUnrollable);
    }
}

TEST_CASE("oleinik_check") {
    VectorXd x = VectorXd::LinSpaced(101, 0.0, 1.0);
    const double t = 2.0;
    VectorXd fan = x / t;
    auto r = oleinik_check(x, fan, t, 1e-12);
    CHECK(r.holds);
    CHECK(std::abs(r.worst_margin) < 1e-15);

    VectorXd shock = (x.array() < 0.5).select(VectorXd::Ones(101), VectorXd::Zero(101));
    CHECK(oleinik_check(x, shock, t, 1e-12).holds);

    VectorXd up = (x.array() < 0.5).select(VectorXd::Zero(101), VectorXd::Ones(101));
    auto bad = oleinik_check(x, up, t, 1e-12);
    CHECK_FALSE(bad.holds);
    CHECK(bad.worst_margin == doctest::Approx(1.0 - 0.01 / t));
}
