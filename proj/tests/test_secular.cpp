#include <doctest.h>

#include <cmath>
#include <random>

#include "dwg/graph.hpp"
#include "dwg/linalg.hpp"
#include "dwg/rootfinding.hpp"
#include "dwg/secular.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dwg;

namespace {
Edge constant_edge(double l, double a, double b = 0.0) {
    return Edge{"e1", "A", "B", l, CoefficientProfile::constant(a, l), CoefficientProfile::constant(b, l)};
}

Edge sampled_edge(double l, int n, double (*f)(double)) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = f(l * k / (n - 1));
    return Edge{"e1", "A", "B", l, CoefficientProfile::sampled(v, l), CoefficientProfile::constant(0.0, l)};
}

double one_plus_sine(double x) { return 1.0 + std::sin(2.0 * oracle::pi * x); }
double identity(double x) { return x; }
}  // namespace

TEST_CASE("linear algebra helpers") {
    std::mt19937 rng(5);
    std::normal_distribution<double> n01;
    CMatrix A(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 6; ++k) A(i, k) = Complex(n01(rng), n01(rng));
    const Complex ref = A.determinant();
    CHECK(std::abs(log_determinant(A).value() - ref) < 1e-12 * std::abs(ref));
    CMatrix big = A * 1e200;
    CHECK(std::abs(log_determinant(big).log_abs() - (std::log(std::abs(ref)) + 6 * 200 * std::log(10.0))) < 1e-9);

    CMatrix singular = A;
    singular.col(3) = singular.col(1) * Complex(2.0, -1.0);
    CHECK(normalized_singular_ratio(singular) < 1e-14);
    CHECK(normalized_singular_ratio(CMatrix::Identity(4, 4)) == doctest::Approx(1.0));

    const std::vector<Complex> roots{{1.0, 2.0}, {-0.5, 0.0}, {0.3, -0.1}, {2.0, 0.0}};
    auto found = polynomial_roots(oracle::poly_from_roots(roots));
    REQUIRE(found.size() == 4);
    for (const auto& r : roots) CHECK(oracle::nearest(r, found) < 1e-12);
    CHECK(std::abs(polynomial_value(oracle::poly_from_roots(roots), roots[0])) < 1e-13);
}

TEST_CASE("lambda tilde") {
    const Complex lam(1.0, 2.0);
    const Complex t = lambda_tilde_right(lam, 1.0, 0.0);
    CHECK(std::abs(t - Complex(1.8791, 2.1287)) < 1e-3);
    CHECK(std::abs(t * t - (lam * lam + 2.0 * lam)) < 1e-12);
    CHECK(t.real() >= 0.0);
    // The asymptotic branch follows lambda + a even for Re lambda + a < 0.
    const Complex far(-3.0, 200.0);
    CHECK(std::abs(lambda_tilde(far, 1.0, 0.5) - (far + 1.0)) < 1e-2);
    const Complex sq = lambda_tilde(far, 1.0, 0.5);
    CHECK(std::abs(sq * sq - (far * far + 2.0 * far - 0.5)) < 1e-9 * std::norm(far));
}

TEST_CASE("WKB phase coefficients") {
    SUBCASE("constant a") {
        const double a = 1.7;
        auto phi = wkb_phase_coefficients(constant_edge(1.0, a), 2, +1);
        for (std::size_t k = 0; k < phi[0].size(); k += 16) {
            CHECK(phi[0][k] == doctest::Approx(a));
            CHECK(phi[1][k] == doctest::Approx(-a * a / 2));
            CHECK(phi[2][k] == doctest::Approx(a * a * a / 2));
        }
    }
    SUBCASE("zero coefficients") {
        auto phi = wkb_phase_coefficients(constant_edge(1.0, 0.0), 3, -1);
        for (const auto& row : phi)
            for (double v : row) CHECK(v == 0.0);
        auto w = fundamental_solution_data(constant_edge(1.0, 0.0), Complex(0.3, 2.0));
        CHECK(std::abs(w.u_plus * std::exp(w.log_scale) - std::exp(Complex(0.3, 2.0))) < 1e-12);
        CHECK(std::abs(w.u_minus * std::exp(w.log_scale) - std::exp(-Complex(0.3, 2.0))) < 1e-12);
    }
    SUBCASE("a(x) = x") {
        auto e = sampled_edge(1.0, 65, identity);
        const int grid = 129;
        auto phi = wkb_phase_coefficients(e, 1, +1, grid);
        for (int k = 0; k < grid; k += 8) {
            const double x = static_cast<double>(k) / (grid - 1);
            CHECK(std::abs(phi[1][static_cast<std::size_t>(k)] + 0.5 * (1.0 + x * x)) < 1e-8);
        }
    }
    SUBCASE("coarse grids are rejected") {
        std::vector<double> v{0.0, 1.0, 0.0, 1.0, 0.0};
        Edge e{"e1", "A", "B", 1.0, CoefficientProfile::sampled(v, 1.0), {}};
        CHECK_THROWS_AS(wkb_phase_coefficients(e, 2, +1), ValidationError);
    }
}

TEST_CASE("fundamental solutions") {
    SUBCASE("u+(1) at i pi on an undamped edge") {
        auto w = fundamental_solution_data(constant_edge(1.0, 0.0), Complex(0.0, oracle::pi));
        CHECK(std::abs(w.u_plus * std::exp(w.log_scale) + 1.0) < 1e-12);
    }
    SUBCASE("Wronskian is constant") {
        for (const Edge& e : {constant_edge(2.0, 1.0, 0.5), sampled_edge(1.0, 33, one_plus_sine)}) {
            for (Complex lam : {Complex(-1.0, 3.0), Complex(0.5, 40.0), Complex(-2.0, 250.0)}) {
                auto w = fundamental_solution_data(e, lam);
                const Complex w0 = w.initial_wronskian();
                // Global integrator error over ~40 oscillations at Im lambda = 250.
                CHECK(std::abs(w.wronskian() - w0) < 1e-6 * std::abs(w0));
                CHECK(std::isfinite(w.log_scale));
            }
        }
    }
    SUBCASE("high-frequency growth e^{lambda + mean a}") {
        const Complex lam(0.0, kTwoPi * 40);
        for (const Edge& e : {constant_edge(1.0, 1.0), sampled_edge(1.0, 33, one_plus_sine)}) {
            auto w = fundamental_solution_data(e, lam);
            const Complex u = w.u_plus * std::exp(w.log_scale);
            const double rel = std::abs(u / std::exp(lam + 1.0) - 1.0);
            CHECK(rel < 2.0 / std::abs(lam));
        }
    }
    SUBCASE("WKB agrees with the integrator at high frequency") {
        auto e = sampled_edge(1.0, 33, one_plus_sine);
        for (int n : {20, 40}) {
            const Complex lam(-0.8, kTwoPi * n);
            auto exact = fundamental_solution_data(e, lam, 2);
            auto wkb = wkb_edge_wave(e, lam, 2);
            const Complex up = exact.u_plus * std::exp(exact.log_scale);
            const Complex um = exact.u_minus * std::exp(exact.log_scale);
            CHECK(std::abs(wkb.u_plus / up - 1.0) < 1e-4);
            CHECK(std::abs(wkb.u_minus / um - 1.0) < 1e-4);
        }
    }
    SUBCASE("transfer determinant is one") {
        for (const Edge& e : {constant_edge(1.5, 2.0, 1.0), sampled_edge(1.0, 33, one_plus_sine)}) {
            auto T = edge_transfer(e, Complex(-1.2, 17.0));
            CHECK(std::abs(T.m.determinant() * std::exp(2 * T.log_scale) - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("Dirichlet edge determinants") {
    SUBCASE("undamped: zeros at i k pi in both backends") {
        auto g = fixture::dirichlet_edge();
        SecularSystem f(g, Backend::flower), s(g, Backend::scattering);
        for (int k = 1; k <= 5; ++k) {
            const Complex z(0.0, k * oracle::pi);
            CHECK(f.residual(z) < 1e-12);
            CHECK(s.residual(z) < 1e-12);
            CHECK(f.residual(z + 0.3) > 1e-3);
        }
        // The scattering determinant is 1 - e^{-2 lambda}.
        const Complex z(0.4, 1.1);
        CHECK(std::abs(s.determinant(z).value() - (1.0 - std::exp(-2.0 * z))) < 1e-12);
    }
    SUBCASE("damped: closed-form roots") {
        for (double a : {1.0, 2.5}) {
            for (double b : {0.0, 1.5}) {
                auto g = fixture::dirichlet_edge(a, b, 1.3);
                SecularSystem f(g, Backend::flower), s(g, Backend::scattering);
                for (int k = 1; k <= 6; ++k) {
                    const Complex z = oracle::dirichlet_edge_root(a, b, 1.3, k);
                    CHECK(f.residual(z) < 1e-10);
                    CHECK(s.residual(z) < 1e-10);
                }
            }
        }
        const Complex z = oracle::dirichlet_edge_root(1.0, 0.0, 1.0, 2);
        CHECK(std::abs(z - Complex(-1.0, 6.20306)) < 1e-4);
    }
}

TEST_CASE("star graphs against the sum-product secular function") {
    const std::vector<double> l{1.0, 1.0, 1.0}, a{3.0, 4.0, 5.0}, b{0.0, 0.0, 0.0};
    auto g = fixture::star(l, a);
    SecularSystem f(g, Backend::flower), s(g, Backend::scattering);
    auto roots = find_roots(f, {-6.0, 0.5, 0.5, 40.0});
    REQUIRE(roots.roots.size() >= 10);
    for (const auto& r : roots.roots) {
        auto [value, scale] = oracle::star_secular(l, a, b, r.lambda);
        CHECK(std::abs(value) < 1e-8 * scale);
        CHECK(s.residual(r.lambda) < 1e-8);
        Complex prod = 1.0;
        for (std::size_t j = 0; j < 3; ++j) prod *= std::sqrt(r.lambda * r.lambda + 2.0 * a[j] * r.lambda - b[j]);
        CHECK(std::abs(star_secular_closed_form(l, a, b, r.lambda).value() * prod) < 1e-7 * scale);
    }
    SUBCASE("one edge reduces to cosh: Neumann-Dirichlet") {
        auto one = fixture::star({1.0}, {0.0});
        SecularSystem f1(one, Backend::flower);
        for (int k = 0; k < 4; ++k) CHECK(f1.residual(Complex(0.0, (k + 0.5) * oracle::pi)) < 1e-12);
    }
    SUBCASE("mixed lengths 1, 1, 1.03 against the subdivided scattering system") {
        auto mixed = fixture::star({1.0, 1.0, 1.03}, a);
        auto r = find_roots(SecularSystem(mixed, Backend::flower), {-6.0, 0.5, 20.0, 26.0});
        REQUIRE(!r.roots.empty());
        SecularSystem sub(subdivide(mixed, 0.01), Backend::scattering);
        for (std::size_t k = 0; k < std::min<std::size_t>(r.roots.size(), 2); ++k) {
            Complex z = r.roots[k].lambda;
            CHECK(newton_refine(sub, z, 1e-12));
            CHECK(std::abs(z - r.roots[k].lambda) < 1e-6);
        }
    }
}

TEST_CASE("branch flips and conjugate symmetry") {
    auto g = fixture::corpus("delta_robin.json");
    SecularSystem f(g, Backend::flower);
    RootOptions opt;
    opt.symmetrize = false;
    auto up = find_roots(f, {-3.0, 0.5, 0.5, 15.0}, opt);
    auto down = find_roots(f, {-3.0, 0.5, -15.0, -0.5}, opt);
    REQUIRE(up.roots.size() == down.roots.size());
    std::vector<Complex> lower;
    for (const auto& r : down.roots) lower.push_back(r.lambda);
    for (const auto& r : up.roots) CHECK(oracle::nearest(std::conj(r.lambda), lower) < 1e-8);

    for (std::size_t j = 0; j < g.graph.edge_count(); ++j) {
        SecularOptions so;
        so.flipped_edges = {j};
        SecularSystem flipped(g, Backend::scattering, so);
        for (const auto& r : up.roots) CHECK(flipped.residual(r.lambda) < 1e-8);
    }
    const Complex z(-0.7, 3.3);
    const ScaledComplex d1 = f.determinant(z), d2 = f.determinant(std::conj(z));
    // det at the conjugate point is the conjugate up to a constant phase.
    const Complex ratio1 = d2.ratio(ScaledComplex(std::conj(d1.mantissa), d1.log_scale));
    const Complex z2(-1.9, 7.1);
    const ScaledComplex e1 = f.determinant(z2), e2 = f.determinant(std::conj(z2));
    const Complex ratio2 = e2.ratio(ScaledComplex(std::conj(e1.mantissa), e1.log_scale));
    CHECK(std::abs(ratio1 - ratio2) < 1e-8 * std::abs(ratio1));
}

TEST_CASE("backend equivalence on piecewise profiles") {
    auto g = fixture::corpus("variable_piecewise.json");
    SecularSystem f(g, Backend::flower), s(g, Backend::scattering);
    CHECK(s.working_graph().graph.edge_count() > g.graph.edge_count());
    auto r = find_roots(f, {-3.0, 0.5, 0.5, 30.0});
    REQUIRE(!r.roots.empty());
    for (const auto& x : r.roots) CHECK(s.residual(x.lambda) < 1e-8);
    CHECK_THROWS_AS(SecularSystem(fixture::corpus("variable_sine.json"), Backend::scattering), ValidationError);
}
