#include "dwg/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dwg/linalg.hpp"

namespace dwg {

BondData bond_data(const CoupledGraph& g) {
    require_valid(g);
    if (!is_equilateral(g.graph)) throw ValidationError("abscissa polynomial requires an equilateral graph");
    const auto& graph = g.graph;
    const DirectedDouble dd = directed_double(graph);
    BondData out;
    out.l0 = graph.edge(0).length;
    out.two_n = dd.size();
    const auto n = static_cast<Eigen::Index>(dd.size());
    out.S0 = CMatrix::Zero(n, n);
    out.decay.resize(n);
    for (std::size_t b = 0; b < dd.size(); ++b)
        out.decay(static_cast<Eigen::Index>(b)) = std::exp(-graph.edge(dd.bonds[b].edge).damping.average() * out.l0);
    for (std::size_t w = 0; w < graph.vertex_count(); ++w) {
        const CMatrix& s0 = g.couplings[w].sigma0();
        for (auto bout : dd.outgoing[w]) {
            const auto k = static_cast<Eigen::Index>(graph.local_index(dd.bonds[bout].departure()));
            for (auto bin : dd.incoming[w]) {
                const auto i = static_cast<Eigen::Index>(graph.local_index(dd.bonds[bin].arrival()));
                out.S0(static_cast<Eigen::Index>(bout), static_cast<Eigen::Index>(bin)) = s0(k, i);
            }
        }
    }
    return out;
}

namespace {

class OrbitWalker {
public:
    OrbitWalker(const BondData& bd, const std::function<void(const PseudoOrbit&)>& visit)
        : bd_(bd), visit_(visit), n_(bd.two_n), used_(n_, false), on_path_(n_, false), next_(n_) {
        for (std::size_t b = 0; b < n_; ++b)
            for (std::size_t c = 0; c < n_; ++c)
                if (bd.S0(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b)) != Complex{0.0, 0.0})
                    next_[b].push_back(c);
    }

    void run() { decide(0); }

private:
    // Bonds below `from` are decided: either in a chosen orbit or excluded.
    void decide(std::size_t from) {
        std::size_t b = from;
        while (b < n_ && used_[b]) ++b;
        if (b == n_) {
            visit_(current_);
            return;
        }
        decide(b + 1);
        path_.assign(1, b);
        on_path_[b] = true;
        extend(b, b, Complex{1.0, 0.0});
        on_path_[b] = false;
    }

    void extend(std::size_t start, std::size_t cur, Complex amp) {
        for (auto nb : next_[cur]) {
            const Complex a = amp * bd_.S0(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(cur));
            if (nb == start) {
                close(start, a);
            } else if (nb > start && !used_[nb] && !on_path_[nb]) {
                path_.push_back(nb);
                on_path_[nb] = true;
                extend(start, nb, a);
                on_path_[nb] = false;
                path_.pop_back();
            }
        }
    }

    void close(std::size_t start, Complex amp) {
        const std::vector<std::size_t> orbit = path_;
        const PseudoOrbit saved = current_;
        for (auto b : orbit) used_[b] = true;
        current_.orbits.push_back(orbit);
        current_.m += 1;
        current_.length += static_cast<int>(orbit.size());
        current_.amplitude *= amp;
        // The recursion below reuses path_, so restore it afterwards.
        const std::vector<std::size_t> path_copy = path_;
        std::vector<char> on_path_copy(on_path_.begin(), on_path_.end());
        std::fill(on_path_.begin(), on_path_.end(), false);
        decide(start + 1);
        path_ = path_copy;
        for (std::size_t i = 0; i < n_; ++i) on_path_[i] = on_path_copy[i];
        current_ = saved;
        for (auto b : orbit) used_[b] = false;
    }

    const BondData& bd_;
    const std::function<void(const PseudoOrbit&)>& visit_;
    std::size_t n_;
    std::vector<bool> used_;
    std::vector<bool> on_path_;
    std::vector<std::vector<std::size_t>> next_;
    std::vector<std::size_t> path_;
    PseudoOrbit current_;
};

}  // namespace

void for_each_pseudo_orbit(const CoupledGraph& g, const std::function<void(const PseudoOrbit&)>& visit,
                           std::size_t max_bonds) {
    const BondData bd = bond_data(g);
    if (bd.two_n > max_bonds)
        throw ValidationError("pseudo-orbit enumeration limited to " + std::to_string(max_bonds) +
                              " directed edges; use the characteristic method");
    OrbitWalker(bd, visit).run();
}

std::vector<PseudoOrbit> enumerate_pseudo_orbits(const CoupledGraph& g, std::size_t max_bonds) {
    std::vector<PseudoOrbit> out;
    for_each_pseudo_orbit(g, [&](const PseudoOrbit& p) { out.push_back(p); }, max_bonds);
    return out;
}

AbscissaPolynomial orbit_polynomial(const CoupledGraph& g, std::size_t max_bonds) {
    const BondData bd = bond_data(g);
    AbscissaPolynomial poly;
    poly.two_n = bd.two_n;
    poly.l0 = bd.l0;
    poly.method = "orbit";
    poly.coeffs.assign(bd.two_n + 1, Complex{0.0, 0.0});
    std::vector<double> magnitude(bd.two_n + 1, 0.0);
    for_each_pseudo_orbit(
        g,
        [&](const PseudoOrbit& p) {
            double decay = 1.0;
            for (const auto& orbit : p.orbits)
                for (auto b : orbit) decay *= bd.decay(static_cast<Eigen::Index>(b));
            const Complex term = ((p.m % 2) ? -1.0 : 1.0) * p.amplitude * decay;
            const std::size_t k = bd.two_n - static_cast<std::size_t>(p.length);
            poly.coeffs[k] += term;
            magnitude[k] += std::abs(term);
        },
        max_bonds);
    // Coefficients that cancel to roundoff are structural zeros.
    for (std::size_t k = 0; k <= bd.two_n; ++k)
        if (std::abs(poly.coeffs[k]) <= 1e-12 * magnitude[k]) poly.coeffs[k] = 0.0;
    return poly;
}

AbscissaPolynomial characteristic_polynomial(const CoupledGraph& g) {
    const BondData bd = bond_data(g);
    const std::size_t deg = bd.two_n;
    const auto n = static_cast<Eigen::Index>(deg);
    const CMatrix B = bd.decay.asDiagonal() * bd.S0;
    const bool real = B.imag().cwiseAbs().maxCoeff() == 0.0;

    const double lo = bd.decay.minCoeff(), hi = bd.decay.maxCoeff();
    const int nradii = 9;
    const std::size_t nodes = deg + 1;
    std::vector<Complex> best(deg + 1, Complex{0.0, 0.0});
    std::vector<double> dominance(deg + 1, -1.0);
    for (int ri = 0; ri < nradii; ++ri) {
        const double t = static_cast<double>(ri) / (nradii - 1);
        const double r = std::exp(std::log(0.5 * lo) + t * (std::log(2.0 * hi) - std::log(0.5 * lo)));
        std::vector<Complex> values(nodes);
        double vmax = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) {
            const Complex y = r * std::exp(kI * (kTwoPi * static_cast<double>(j) / static_cast<double>(nodes)));
            values[j] = log_determinant(y * CMatrix::Identity(n, n) - B).value();
            vmax = std::max(vmax, std::abs(values[j]));
        }
        for (std::size_t k = 0; k <= deg; ++k) {
            Complex acc{0.0, 0.0};
            for (std::size_t j = 0; j < nodes; ++j)
                acc += values[j] * std::exp(-kI * (kTwoPi * static_cast<double>(j * k % nodes) / static_cast<double>(nodes)));
            acc /= static_cast<double>(nodes);
            const double dom = std::abs(acc) / vmax;
            if (dom > dominance[k]) {
                dominance[k] = dom;
                best[k] = acc / std::pow(r, static_cast<double>(k));
            }
        }
    }
    AbscissaPolynomial poly;
    poly.two_n = deg;
    poly.l0 = bd.l0;
    poly.method = "characteristic";
    poly.coeffs = best;
    for (std::size_t k = 0; k <= deg; ++k) {
        if (dominance[k] < 1e-10) poly.coeffs[k] = 0.0;
        if (real) poly.coeffs[k] = {poly.coeffs[k].real(), 0.0};
    }
    poly.coeffs[deg] = 1.0;
    return poly;
}

PolynomialComparison compare_polynomials(const AbscissaPolynomial& a, const AbscissaPolynomial& b, double rel_tol) {
    PolynomialComparison cmp;
    if (a.coeffs.size() != b.coeffs.size()) return cmp;
    bool ok = true;
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
        const Complex x = a.coeffs[k], y = b.coeffs[k];
        const bool zx = x == Complex{0.0, 0.0}, zy = y == Complex{0.0, 0.0};
        if (zx && zy) continue;
        if (zx || zy) {
            cmp.max_absolute_zero = std::max(cmp.max_absolute_zero, std::abs(zx ? y : x));
            ok = false;
            continue;
        }
        const double rel = std::abs(x - y) / std::max(std::abs(x), std::abs(y));
        cmp.max_relative = std::max(cmp.max_relative, rel);
        if (rel > rel_tol) ok = false;
    }
    cmp.agree = ok;
    return cmp;
}

int AbscissaReport::total_multiplicity() const {
    int t = 0;
    for (const auto& c : clusters) t += c.multiplicity;
    return t;
}

std::vector<AbscissaCluster> cluster_real_parts(const std::vector<Complex>& c0, double tol, std::size_t two_n) {
    std::vector<std::size_t> order(c0.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (c0[a].real() != c0[b].real()) return c0[a].real() < c0[b].real();
        return c0[a].imag() < c0[b].imag();
    });
    std::vector<AbscissaCluster> out;
    double last = 0.0;
    for (auto i : order) {
        if (out.empty() || c0[i].real() - last > tol) out.emplace_back();
        out.back().c0.push_back(c0[i]);
        last = c0[i].real();
    }
    for (auto& c : out) {
        double sum = 0.0;
        for (auto z : c.c0) sum += z.real();
        c.multiplicity = static_cast<int>(c.c0.size());
        c.re = sum / c.multiplicity;
        c.mu = std::to_string(c.multiplicity) + "/" + std::to_string(two_n);
    }
    return out;
}

AbscissaReport abscissa_report(const AbscissaPolynomial& poly, double cluster_tol) {
    if (std::all_of(poly.coeffs.begin(), poly.coeffs.end(), [](Complex z) { return z == Complex{0.0, 0.0}; }))
        throw ValidationError("abscissa report of the zero polynomial");
    AbscissaReport rep;
    rep.polynomial = poly;
    rep.cluster_tol = cluster_tol;
    // Scale y so the roots sit near the unit circle before forming the companion matrix.
    const std::size_t deg = poly.coeffs.size() - 1;
    double rho = 1.0;
    if (poly.coeffs[0] != Complex{0.0, 0.0} && poly.coeffs[deg] != Complex{0.0, 0.0})
        rho = std::pow(std::abs(poly.coeffs[0]) / std::abs(poly.coeffs[deg]), 1.0 / static_cast<double>(deg));
    std::vector<Complex> scaled(poly.coeffs.size());
    for (std::size_t k = 0; k <= deg; ++k) scaled[k] = poly.coeffs[k] * std::pow(rho, static_cast<double>(k));
    auto roots = polynomial_roots(scaled);
    for (auto& r : roots) r *= rho;

    // Roots closer than 1e-7 relative are one multiple root.
    std::vector<bool> done(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (done[i]) continue;
        std::vector<std::size_t> group{i};
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (!done[j] && std::abs(roots[j] - roots[i]) < 1e-7 * std::abs(roots[i])) group.push_back(j);
        Complex mean{0.0, 0.0};
        for (auto g : group) mean += roots[g];
        mean /= static_cast<double>(group.size());
        for (auto g : group) {
            done[g] = true;
            rep.roots.push_back(mean);
        }
    }
    for (auto y : rep.roots) {
        if (y == Complex{0.0, 0.0}) continue;
        rep.c0.push_back(std::log(y) / poly.l0);
    }
    rep.clusters = cluster_real_parts(rep.c0, cluster_tol, poly.two_n);
    for (double t : {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2})
        rep.sensitivity.emplace_back(t, static_cast<int>(cluster_real_parts(rep.c0, t, poly.two_n).size()));
    return rep;
}

double vertex_coefficient(int d, int v) {
    if (d < 1 || v < 1 || v > d) throw ValidationError("vertex_coefficient requires 1 <= v <= d");
    const double s1 = 2.0 / d - 1.0, s2 = 2.0 / d;
    return -std::pow(s2 - s1, v - 1) * ((v - 1) * s2 + s1);
}

CoupledGraph tree_max_abscissas_damping(const CoupledGraph& tree, double separation) {
    require_valid(tree);
    const auto& g = tree.graph;
    if (g.edge_count() + 1 != g.vertex_count()) throw ValidationError("graph is not a tree");
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        if (g.degree(v) % 2 == 0)
            throw ValidationError("vertex " + g.vertices()[v] + " has even degree " + std::to_string(g.degree(v)));
    std::vector<Edge> edges = g.edges();
    const std::size_t N = edges.size();
    for (std::size_t j = 0; j < N; ++j)
        edges[j].damping = CoefficientProfile::constant(static_cast<double>(N - j) * separation, edges[j].length);
    return CoupledGraph{MetricGraph(g.vertices(), std::move(edges)), tree.couplings};
}

std::vector<Complex> predicted_tree_abscissas(const AbscissaPolynomial& poly) {
    std::vector<Complex> x;
    for (std::size_t k = 0; k < poly.coeffs.size(); k += 2) x.push_back(poly.coeffs[k]);
    std::vector<Complex> out;
    for (std::size_t j = 1; j < x.size(); ++j) {
        if (x[j] == Complex{0.0, 0.0}) continue;
        out.push_back(std::log(-x[j - 1] / x[j]) / (2.0 * poly.l0));
    }
    return out;
}

}  // namespace dwg
