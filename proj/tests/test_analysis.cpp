#include <doctest.h>

#include <cmath>
#include <random>

#include "dwg/analysis.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dwg;
using fixture::edge;
using fixture::json;

namespace {
double edge_norm(const EdgeSamples& s) {
    double acc = 0.0;
    for (std::size_t k = 1; k < s.x.size(); ++k)
        acc += 0.5 * (std::norm(s.u[k]) + std::norm(s.u[k - 1])) * (s.x[k] - s.x[k - 1]);
    return std::sqrt(acc);
}

/// max_k | |u(x_k)| - |v(L - x_k)| | for two edges sampled on the same grid.
double mirror_defect(const EdgeSamples& u, const EdgeSamples& v) {
    REQUIRE(u.u.size() == v.u.size());
    double worst = 0.0;
    const std::size_t n = u.u.size();
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(std::abs(u.u[k]) - std::abs(v.u[n - 1 - k])));
    return worst;
}
}  // namespace

TEST_CASE("eigenfunction of the undamped Dirichlet edge") {
    SecularSystem f(fixture::dirichlet_edge(), Backend::flower);
    auto ef = eigenfunction_at(f, Complex(0.0, oracle::pi));
    REQUIRE(ef.edges.size() == 1);
    const auto& s = ef.edges[0];
    CHECK(s.x.size() >= 64);
    CHECK(ef.near_null_dimension == 1);
    CHECK(std::abs(squared_norm(ef) - 1.0) < 1e-10);
    for (std::size_t k = 0; k < s.x.size(); ++k)
        CHECK(std::abs(s.u[k] - std::sqrt(2.0) * std::sin(oracle::pi * s.x[k])) < 1e-8);
    CHECK(ef.coupling_residual < 1e-6);
    CHECK(ef.ode_residual < 1e-6);
    CHECK(gradient_ratio(ef) == doctest::Approx(oracle::pi * oracle::pi).epsilon(1e-6));
}

TEST_CASE("loop eigenfunctions vanish at the loop vertices") {
    auto g = fixture::corpus("loop_pendant.json");
    SecularSystem f(g, Backend::flower);
    for (int n : {3, 10}) {
        auto ef = eigenfunction_at(f, Complex(0.0, kTwoPi * n));
        CHECK(ef.near_null_dimension == 1);
        CHECK(ef.coupling_residual < 1e-6);
        CHECK(ef.ode_residual < 1e-6);
        double loop_mass = 0.0;
        for (std::size_t j = 0; j < g.graph.edge_count(); ++j) {
            const auto& s = ef.edges[j];
            CHECK(std::abs(s.u.front()) < 1e-5);
            CHECK(std::abs(s.u.back()) < 1e-5);
            const bool pendant = g.graph.degree(g.graph.head_index(j)) == 1 || g.graph.degree(g.graph.tail_index(j)) == 1;
            if (pendant)
                CHECK(edge_norm(s) < 1e-5);
            else
                loop_mass += edge_norm(s) * edge_norm(s);
        }
        CHECK(loop_mass == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("two loops: the mixed sequence lives on both loops symmetrically") {
    auto g = fixture::corpus("two_loops.json");
    SecularSystem f(g, Backend::flower);
    auto set = find_roots(f, {-1.6, -1.4, kTwoPi * 10 - oracle::pi, kTwoPi * 10 + oracle::pi});
    REQUIRE(!set.roots.empty());
    for (const auto& r : set.roots) {
        auto space = eigenspace_at(f, r.lambda);
        REQUIRE(!space.basis.empty());
        for (const auto& ef : space.basis) {
            CHECK(ef.coupling_residual < 1e-6);
            CHECK(ef.ode_residual < 1e-6);
        }
        if (space.basis.size() != 1) continue;
        const auto& ef = space.basis[0];
        // e1..e3 form the loop C-P1-P2-C, e4..e6 the loop C-Q1-Q2-C.
        double first = 0.0, second = 0.0;
        for (std::size_t j = 0; j < 3; ++j) first += std::pow(edge_norm(ef.edges[j]), 2);
        for (std::size_t j = 3; j < 6; ++j) second += std::pow(edge_norm(ef.edges[j]), 2);
        CHECK(first > 0.05);
        CHECK(second > 0.05);
        CHECK(mirror_defect(ef.edges[0], ef.edges[2]) < 1e-5);
        CHECK(mirror_defect(ef.edges[1], ef.edges[1]) < 1e-5);
        CHECK(mirror_defect(ef.edges[3], ef.edges[5]) < 1e-5);
        CHECK(mirror_defect(ef.edges[4], ef.edges[4]) < 1e-5);
    }
}

TEST_CASE("Rayleigh identity") {
    SUBCASE("constant damping everywhere") {
        auto g = fixture::star({1.0, 1.5, 2.0}, {1.3, 1.3, 1.3});
        SecularSystem f(g, Backend::flower);
        auto set = find_roots(f, {-3.0, 0.5, 0.5, 25.0});
        REQUIRE(set.roots.size() > 5);
        for (const auto& r : set.roots) {
            auto ef = eigenfunction_at(f, r.lambda);
            CHECK(damping_expectation(ef, g) == doctest::Approx(1.3).epsilon(1e-12));
            CHECK(rayleigh_identity_residual(ef, g) < 1e-8);
        }
    }
    SUBCASE("loop with pendant near n = 30") {
        auto g = fixture::corpus("loop_pendant.json");
        SecularSystem f(g, Backend::flower);
        auto set = find_roots(f, {-3.5, 0.5, kTwoPi * 30 - oracle::pi, kTwoPi * 30 + oracle::pi});
        CHECK(set.total_multiplicity() == 8);
        for (const auto& r : set.roots) CHECK(rayleigh_identity_residual(eigenfunction_at(f, r.lambda), g) < 1e-6);
    }
    SUBCASE("random two-edge graphs") {
        std::mt19937 rng(42);
        std::uniform_real_distribution<double> U(0.0, 3.0), L(0.5, 2.0);
        double worst = 0.0;
        int pairs = 0;
        for (int trial = 0; trial < 4 && pairs < 20; ++trial) {
            auto g = fixture::build({"A", "B", "C"}, {edge("e1", "A", "B", L(rng), U(rng)), edge("e2", "B", "C", L(rng), U(rng))},
                                    {{"A", fixture::dirichlet()}, {"C", json{{"type", "robin"}, {"theta", 0.4}}}});
            SecularSystem f(g, Backend::flower);
            auto [lo, hi] = damping_range(g);
            auto set = find_roots(f, {-hi - 0.5, -lo + 0.5, 0.5, 20.0});
            for (const auto& r : set.roots) {
                worst = std::max(worst, rayleigh_identity_residual(eigenfunction_at(f, r.lambda), g));
                ++pairs;
            }
        }
        CHECK(pairs >= 20);
        CHECK(worst < 1e-6);
    }
    SUBCASE("variable damping profile") {
        auto g = fixture::corpus("variable_sine.json");
        SecularSystem f(g, Backend::flower);
        auto set = find_roots(f, {-2.5, 0.5, 0.5, 30.0});
        REQUIRE(!set.roots.empty());
        for (const auto& r : set.roots) {
            auto ef = eigenfunction_at(f, r.lambda);
            CHECK(ef.ode_residual < 1e-6);
            CHECK(rayleigh_identity_residual(ef, g) < 1e-6);
        }
    }
    SUBCASE("real eigenvalues are rejected") {
        auto g = fixture::dirichlet_edge(5.0);
        SecularSystem f(g, Backend::flower);
        // a^2 > pi^2: the k = 1 pair is real.
        const Complex z = oracle::dirichlet_edge_root(5.0, 0.0, 1.0, 1);
        REQUIRE(std::abs(z.imag()) < 1e-12);
        auto ef = eigenfunction_at(f, z);
        CHECK_THROWS_AS(rayleigh_identity_residual(ef, g), ValidationError);
    }
}

TEST_CASE("damping range and fractions") {
    auto g = fixture::corpus("variable_sine.json");
    auto [lo, hi] = damping_range(g);
    CHECK(lo == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(hi == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(reduce_fraction(6, 12) == std::pair<long, long>{1, 2});
    CHECK(reduce_fraction(-4, -6) == std::pair<long, long>{2, 3});
    CHECK(reduce_fraction(0, 5) == std::pair<long, long>{0, 1});
}

TEST_CASE("mu measure on two loops") {
    auto g = fixture::corpus("two_loops.json");
    SecularSystem f(g, Backend::flower);
    const std::vector<double> radii{kTwoPi * 12, kTwoPi * 18, kTwoPi * 24};
    auto window = spectrum_window(f, radii.back() + 1.0);
    CHECK(window.im_min <= -radii.back());
    CHECK(window.im_max >= radii.back());
    auto set = find_roots(f, window);
    CHECK(set.count == set.total_multiplicity());
    int real_roots = 0;
    for (const auto& r : set.roots) real_roots += std::abs(r.lambda.imag()) < 1e-9 ? r.multiplicity : 0;
    CHECK(real_roots == 4);

    auto report = abscissa_report(orbit_polynomial(g));
    SUBCASE("each cluster receives exactly its weight") {
        for (const auto& cl : report.clusters) {
            auto sweep = mu_sweep(set, cl.re - 0.1, cl.re + 0.1, radii);
            attach_prediction(sweep, report);
            CHECK(sweep.stabilized);
            const auto [p, q] = reduce_fraction(cl.multiplicity, 12);
            CHECK(sweep.limit == std::to_string(p) + "/" + std::to_string(q));
            CHECK(sweep.prediction() == cl.mu);
            for (const auto& m : sweep.table) {
                CHECK(m.value() >= 0.0);
                CHECK(m.value() <= 1.0);
            }
        }
    }
    SUBCASE("empty and full intervals") {
        auto empty = mu_sweep(set, 0.5, 1.0, radii);
        for (const auto& m : empty.table) CHECK(m.numerator == 0);
        CHECK(empty.limit == "0/1");
        auto full = mu_sweep(set, -3.0, 0.0 + 1.0, radii);
        CHECK(full.limit == "1/1");
        CHECK(full.stabilized);
        for (const auto& m : full.table) CHECK(m.denominator - m.numerator <= 4);
        // Monotone under inclusion.
        auto inner = mu_sweep(set, -1.6, -1.4, radii);
        for (std::size_t k = 0; k < radii.size(); ++k) CHECK(inner.table[k].numerator <= full.table[k].numerator);
    }
    SUBCASE("incomplete coverage") {
        CHECK_THROWS_AS(mu_measure(set, -1.6, -1.4, kTwoPi * 40), SolverError);
    }
    SUBCASE("counting slopes") {
        std::vector<double> cr;
        for (int k = 10; k <= 23; ++k) cr.push_back(kTwoPi * (k + 0.5));
        for (const auto& fit : counting_slopes(set, report, cr)) {
            CHECK(fit.expected == doctest::Approx(1.0 / kTwoPi));
            CHECK(fit.relative_error() < 1e-2);
        }
    }
}

TEST_CASE("abscissa crosscheck") {
    SUBCASE("constant profiles against themselves") {
        auto c = abscissa_crosscheck(fixture::corpus("star3_dirichlet.json"), n_range(38, 42));
        CHECK(c.agree);
        CHECK(c.max_difference < 1e-10);
        CHECK(c.entries.size() >= 5);
    }
    SUBCASE("incommensurate lengths") {
        auto g = fixture::star({1.0, std::sqrt(2.0)}, {1.0, 2.0});
        CHECK_FALSE(equilateral_version(g).has_value());
        CHECK_THROWS_AS(abscissa_crosscheck(g, n_range(38, 42)), IncommensurateError);
    }
}

TEST_CASE("verify_graph") {
    SUBCASE("a clean graph passes every check") {
        VerifyOptions opt;
        opt.strips = 1;
        auto rep = verify_graph(fixture::corpus("star3_dirichlet.json"), opt);
        CHECK(rep.passed());
        for (const auto& c : rep.checks) {
            CAPTURE(c.name);
            CAPTURE(c.detail);
            CHECK((c.passed || c.skipped));
        }
        CHECK(rep.abscissas.has_value());
        CHECK(rep.rayleigh.size() == rep.roots.roots.size());
    }
    SUBCASE("a non-unitary coupling fails with a unitarity violation") {
        auto g = fixture::corpus("star3_dirichlet.json");
        CMatrix U = g.couplings[0].matrix();
        U(0, 1) += 0.25;
        g.couplings[0] = UnitaryCoupling::custom(U);
        auto rep = verify_graph(g);
        CHECK_FALSE(rep.passed());
        REQUIRE(!rep.checks.empty());
        CHECK(rep.checks[0].name == "couplings");
        CHECK_FALSE(rep.checks[0].passed);
        CHECK(rep.checks[0].detail.find("unitarity violation") != std::string::npos);
    }
}
