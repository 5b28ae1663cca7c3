#include "dwg/analysis.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dwg {

namespace {

std::vector<double> profile_cuts(const Edge& e) {
    std::vector<double> cuts;
    for (const auto* p : {&e.damping, &e.potential})
        if (p->kind() == CoefficientProfile::Kind::piecewise)
            cuts.insert(cuts.end(), p->breakpoints().begin(), p->breakpoints().end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               cuts.end());
    return cuts;
}

bool is_sampled(const Edge& e) {
    return e.damping.kind() == CoefficientProfile::Kind::sampled ||
           e.potential.kind() == CoefficientProfile::Kind::sampled;
}

// Upper estimate of |lambda~| on [x0, x1].
double local_wavenumber(const Edge& e, Complex lambda, double x0, double x1) {
    double best = 0.0;
    for (int k = 0; k <= 8; ++k) {
        const double x = x0 + (x1 - x0) * k / 8.0;
        best = std::max(best, std::abs(std::sqrt(lambda * lambda + 2.0 * lambda * e.damping(x) - e.potential(x))));
    }
    return best;
}

EdgeSamples sample_edge(const Edge& e, Complex lambda, Complex u0, Complex du0, int min_points) {
    std::vector<double> bounds{0.0};
    for (double c : profile_cuts(e)) bounds.push_back(c);
    bounds.push_back(e.length);

    EdgeSamples s;
    std::vector<double> unique_x;
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        const double x0 = bounds[k], x1 = bounds[k + 1];
        const double want = std::ceil(60.0 * local_wavenumber(e, lambda, x0, x1) * (x1 - x0)) + 1.0;
        int n = std::max(min_points, static_cast<int>(std::min(want, 2.0e6)));
        if (n % 2 == 0) ++n;
        for (int i = 0; i < n; ++i) {
            const double x = (i == n - 1) ? x1 : x0 + (x1 - x0) * i / (n - 1);
            s.x.push_back(x);
            if (unique_x.empty() || x > unique_x.back()) unique_x.push_back(x);
        }
        s.segment_ends.push_back(s.x.size());
    }
    const auto T = edge_transfers(e, lambda, unique_x);
    std::size_t j = 0;
    for (double x : s.x) {
        while (unique_x[j] < x) ++j;
        const Eigen::Matrix2cd m = T[j].value();
        s.u.push_back(m(0, 0) * u0 + m(0, 1) * du0);
        s.du.push_back(m(1, 0) * u0 + m(1, 1) * du0);
    }
    return s;
}

template <class F>
double simpson(const EdgeSamples& s, F f) {
    double total = 0.0;
    std::size_t b = 0;
    for (std::size_t e : s.segment_ends) {
        const std::size_t n = e - b;
        if (n >= 3) {
            const double h = (s.x[e - 1] - s.x[b]) / static_cast<double>(n - 1);
            double acc = f(b, b, e) + f(e - 1, b, e);
            for (std::size_t i = b + 1; i + 1 < e; ++i) acc += ((i - b) % 2 ? 4.0 : 2.0) * f(i, b, e);
            total += acc * h / 3.0;
        }
        b = e;
    }
    return total;
}

double coupling_mismatch(const CoupledGraph& g, const Eigenfunction& f) {
    const auto& graph = g.graph;
    const double s = std::max(1.0, std::abs(f.lambda));
    double amp = 0.0, worst = 0.0;
    for (const auto& e : f.edges) {
        amp = std::max({amp, std::abs(e.u.front()), std::abs(e.u.back())});
        amp = std::max({amp, std::abs(e.du.front()) / s, std::abs(e.du.back()) / s});
    }
    if (amp == 0.0) return 0.0;
    for (std::size_t w = 0; w < graph.vertex_count(); ++w) {
        const auto& slots = graph.slots_at(w);
        const auto d = static_cast<Eigen::Index>(slots.size());
        CVector psi(d), dpsi(d);
        for (Eigen::Index k = 0; k < d; ++k) {
            const auto& sl = slots[static_cast<std::size_t>(k)];
            const auto& es = f.edges[sl.edge];
            psi(k) = sl.end == 0 ? es.u.front() : es.u.back();
            dpsi(k) = sl.end == 0 ? es.du.front() : -es.du.back();
        }
        const CMatrix& U = g.couplings[w].matrix();
        const CMatrix I = CMatrix::Identity(d, d);
        const CVector r = (U - I) * psi + kI * (U + I) * dpsi;
        worst = std::max(worst, r.norm() / (s * amp));
    }
    return worst;
}

double ode_mismatch(const CoupledGraph& g, const Eigenfunction& f) {
    const double s = std::max(1.0, std::abs(f.lambda));
    double amp = 0.0, worst = 0.0;
    for (const auto& e : f.edges)
        for (std::size_t i = 0; i < e.x.size(); ++i) amp = std::max(amp, std::abs(e.u[i]) + std::abs(e.du[i]) / s);
    if (amp == 0.0) return 0.0;
    for (std::size_t j = 0; j < f.edges.size(); ++j) {
        const Edge& edge = g.graph.edge(j);
        const auto& es = f.edges[j];
        std::size_t b = 0;
        for (std::size_t end : es.segment_ends) {
            for (std::size_t i = b; i + 1 < end; ++i) {
                const double x0 = es.x[i], x1 = es.x[i + 1];
                Eigen::Matrix2cd T;
                if (is_sampled(edge)) {
                    Edge piece{edge.id, edge.tail, edge.head, x1 - x0, edge.damping.restricted(x0, x1),
                               edge.potential.restricted(x0, x1)};
                    T = edge_transfer(piece, f.lambda).value();
                } else {
                    const double mid = 0.5 * (x0 + x1);
                    const Complex k2 = f.lambda * f.lambda + 2.0 * f.lambda * edge.damping(mid) - edge.potential(mid);
                    T = constant_transfer(k2, x1 - x0).value();
                }
                const Complex u = T(0, 0) * es.u[i] + T(0, 1) * es.du[i];
                const Complex du = T(1, 0) * es.u[i] + T(1, 1) * es.du[i];
                worst = std::max(worst, (std::abs(u - es.u[i + 1]) + std::abs(du - es.du[i + 1]) / s) / amp);
            }
            b = end;
        }
    }
    return worst;
}

Eigenfunction build_eigenfunction(const SecularSystem& flower, Complex lambda, const CVector& x, int min_points) {
    const auto& g = flower.graph();
    Eigenfunction f;
    f.lambda = lambda;
    for (std::size_t j = 0; j < g.graph.edge_count(); ++j) {
        const Complex u0 = x(static_cast<Eigen::Index>(2 * j)), du0 = x(static_cast<Eigen::Index>(2 * j + 1));
        f.initial.emplace_back(u0, du0);
        f.edges.push_back(sample_edge(g.graph.edge(j), lambda, u0, du0, min_points));
    }
    const double n2 = squared_norm(f);
    if (!(n2 > 0.0) || !std::isfinite(n2)) throw SolverError("eigenfunction has zero or non-finite norm");
    Complex peak{0.0, 0.0};
    for (const auto& e : f.edges)
        for (const auto& u : e.u)
            if (std::abs(u) > std::abs(peak)) peak = u;
    const Complex scale = std::conj(peak) / std::abs(peak) / std::sqrt(n2);
    for (auto& p : f.initial) p = {p.first * scale, p.second * scale};
    for (auto& e : f.edges) {
        for (auto& u : e.u) u *= scale;
        for (auto& du : e.du) du *= scale;
    }
    f.coupling_residual = coupling_mismatch(g, f);
    f.ode_residual = ode_mismatch(g, f);
    return f;
}

}  // namespace

Eigenspace eigenspace_at(const SecularSystem& flower, Complex lambda, double null_tol, int min_points) {
    if (flower.backend() != Backend::flower) throw ValidationError("eigenfunctions require the flower backend");
    CMatrix A = flower.matrix(lambda);
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        const double n = A.row(r).norm();
        if (n > 0.0) A.row(r) /= n;
    }
    Eigen::VectorXd colscale(A.cols());
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
        const double n = A.col(c).norm();
        colscale(c) = n > 0.0 ? n : 1.0;
        A.col(c) /= colscale(c);
    }
    Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const Eigen::Index n = sv.size();
    Eigenspace space;
    for (Eigen::Index k = n - 1; k >= 0; --k) space.singular_values.push_back(sv(k) / sv(0));
    int dim = 1;
    while (dim < n && space.singular_values[static_cast<std::size_t>(dim)] < null_tol) ++dim;
    for (int k = 0; k < dim; ++k) {
        const CVector v = svd.matrixV().col(n - 1 - k).cwiseQuotient(colscale.cast<Complex>());
        Eigenfunction f = build_eigenfunction(flower, lambda, v, min_points);
        f.near_null_dimension = dim;
        f.singular_ratio = space.singular_values[static_cast<std::size_t>(k)];
        space.basis.push_back(std::move(f));
    }
    return space;
}

Eigenfunction eigenfunction_at(const SecularSystem& flower, Complex lambda, int min_points) {
    return std::move(eigenspace_at(flower, lambda, 1e-6, min_points).basis.front());
}

double squared_norm(const Eigenfunction& f) {
    double total = 0.0;
    for (const auto& e : f.edges) total += simpson(e, [&](std::size_t i, std::size_t, std::size_t) { return std::norm(e.u[i]); });
    return total;
}

double derivative_squared_norm(const Eigenfunction& f) {
    double total = 0.0;
    for (const auto& e : f.edges) total += simpson(e, [&](std::size_t i, std::size_t, std::size_t) { return std::norm(e.du[i]); });
    return total;
}

double damping_expectation(const Eigenfunction& f, const CoupledGraph& g) {
    double num = 0.0;
    for (std::size_t j = 0; j < f.edges.size(); ++j) {
        const auto& e = f.edges[j];
        const auto& a = g.graph.edge(j).damping;
        const double eps = 1e-12 * g.graph.edge(j).length;
        num += simpson(e, [&](std::size_t i, std::size_t b, std::size_t end) {
            // evaluate on the segment's own side of a breakpoint
            return a(std::clamp(e.x[i], e.x[b] + eps, e.x[end - 1] - eps)) * std::norm(e.u[i]);
        });
    }
    return num / squared_norm(f);
}

double rayleigh_identity_residual(const Eigenfunction& f, const CoupledGraph& g) {
    if (std::abs(f.lambda.imag()) <= 1e-6)
        throw ValidationError("the damping identity needs a nonreal eigenvalue");
    return std::abs(f.lambda.real() + damping_expectation(f, g));
}

double gradient_ratio(const Eigenfunction& f) { return derivative_squared_norm(f) / squared_norm(f); }

std::pair<double, double> damping_range(const CoupledGraph& g) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& e : g.graph.edges()) {
        const auto& a = e.damping;
        if (a.is_piecewise_constant()) {
            for (const auto& p : a.pieces()) {
                lo = std::min(lo, p.value);
                hi = std::max(hi, p.value);
            }
        } else {
            for (int k = 0; k <= 1024; ++k) {
                const double v = a(e.length * k / 1024.0);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    return {lo, hi};
}

std::pair<long, long> reduce_fraction(long p, long q) {
    if (q == 0) return {p == 0 ? 0 : (p > 0 ? 1 : -1), 0};
    if (q < 0) {
        p = -p;
        q = -q;
    }
    const long d = std::gcd(p, q);
    return d ? std::pair{p / d, q / d} : std::pair{p, q};
}

std::string MuDistribution::rational() const {
    const auto [p, q] = reduce_fraction(numerator, denominator);
    return std::to_string(p) + "/" + std::to_string(q);
}

std::string MuSweep::prediction() const {
    if (!predicted_weight) return {};
    return std::to_string(*predicted_weight) + "/" + std::to_string(two_n);
}

MuDistribution mu_measure(const EigenvalueSet& set, double lo, double hi, double R) {
    if (!(hi > lo)) throw ValidationError("empty interval");
    if (set.window.im_min > -R || set.window.im_max < R)
        throw SolverError("incomplete coverage: the root window does not contain |Im| < " + std::to_string(R));
    MuDistribution mu{lo, hi, R};
    for (const auto& r : set.roots) {
        if (std::abs(r.lambda.imag()) >= R) continue;
        mu.denominator += r.multiplicity;
        if (r.lambda.real() > lo && r.lambda.real() < hi) mu.numerator += r.multiplicity;
    }
    return mu;
}

MuSweep mu_sweep(const EigenvalueSet& set, double lo, double hi, const std::vector<double>& radii) {
    MuSweep sweep;
    sweep.lo = lo;
    sweep.hi = hi;
    std::vector<double> rs = radii;
    std::sort(rs.begin(), rs.end());
    for (double R : rs) sweep.table.push_back(mu_measure(set, lo, hi, R));
    for (std::size_t k = 1; k < sweep.table.size(); ++k)
        sweep.increments.emplace_back(sweep.table[k].numerator - sweep.table[k - 1].numerator,
                                      sweep.table[k].denominator - sweep.table[k - 1].denominator);
    if (sweep.increments.empty()) {
        if (!sweep.table.empty()) sweep.limit = sweep.table.back().rational();
        return sweep;
    }
    const auto last = reduce_fraction(sweep.increments.back().first, sweep.increments.back().second);
    sweep.limit = std::to_string(last.first) + "/" + std::to_string(last.second);
    sweep.stabilized = std::all_of(sweep.increments.begin(), sweep.increments.end(), [&](const auto& inc) {
        return inc.second > 0 && reduce_fraction(inc.first, inc.second) == last;
    });
    return sweep;
}

void attach_prediction(MuSweep& sweep, const AbscissaReport& report) {
    int m = 0;
    for (const auto& c : report.clusters)
        if (c.re > sweep.lo && c.re < sweep.hi) m += c.multiplicity;
    sweep.predicted_weight = m;
    sweep.two_n = report.polynomial.two_n;
}

ComplexWindow spectrum_window(const SecularSystem& flower, double R, const RootOptions& opt) {
    const auto [lo, hi] = damping_range(flower.graph());
    double bmax = 0.0;
    for (const auto& e : flower.graph().graph.edges()) {
        const auto& b = e.potential;
        if (b.is_piecewise_constant())
            for (const auto& p : b.pieces()) bmax = std::max(bmax, p.value);
        else
            for (double v : b.values()) bmax = std::max(bmax, v);
    }
    const double pad = 1.0 + std::sqrt(bmax);
    ComplexWindow w{-2.0 * std::max(hi, 0.0) - pad, -std::min(lo, 0.0) + pad, -R, R};
    int count = count_zeros(flower, w, opt);
    for (int attempt = 0; attempt < 6; ++attempt) {
        const double grow = w.width();
        ComplexWindow wider{w.re_min - grow, w.re_max + grow, -R, R};
        const int c = count_zeros(flower, wider, opt);
        if (c == count) return w;
        w = wider;
        count = c;
    }
    throw SolverError("could not enclose the real eigenvalues");
}

std::vector<CountingFit> counting_slopes(const EigenvalueSet& set, const AbscissaReport& report,
                                         const std::vector<double>& radii, double assign_tol) {
    if (radii.size() < 2) throw ValidationError("counting fit needs at least two radii");
    const double rmax = *std::max_element(radii.begin(), radii.end());
    if (set.window.im_max < rmax || set.window.im_min > 0.0)
        throw SolverError("incomplete coverage for the counting fit");
    std::vector<CountingFit> fits;
    for (const auto& c : report.clusters) {
        CountingFit f;
        f.re = c.re;
        f.multiplicity = c.multiplicity;
        f.radii = radii;
        f.expected = report.polynomial.l0 / kTwoPi;
        f.counts.assign(radii.size(), 0);
        fits.push_back(f);
    }
    for (const auto& r : set.roots) {
        if (r.lambda.imag() <= 0.0) continue;
        std::size_t best = fits.size();
        double dist = assign_tol;
        for (std::size_t k = 0; k < fits.size(); ++k)
            if (std::abs(r.lambda.real() - fits[k].re) < dist) {
                dist = std::abs(r.lambda.real() - fits[k].re);
                best = k;
            }
        if (best == fits.size()) continue;
        for (std::size_t i = 0; i < radii.size(); ++i)
            if (r.lambda.imag() < radii[i]) fits[best].counts[i] += r.multiplicity;
    }
    const double n = static_cast<double>(radii.size());
    const double mr = std::accumulate(radii.begin(), radii.end(), 0.0) / n;
    for (auto& f : fits) {
        const double mc = std::accumulate(f.counts.begin(), f.counts.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < radii.size(); ++i) {
            sxy += (radii[i] - mr) * (static_cast<double>(f.counts[i]) - mc);
            sxx += (radii[i] - mr) * (radii[i] - mr);
        }
        f.slope_per_sequence = sxy / sxx / f.multiplicity;
    }
    return fits;
}

std::optional<CoupledGraph> equilateral_version(const CoupledGraph& g) {
    std::vector<double> lengths;
    for (const auto& e : g.graph.edges()) lengths.push_back(e.length);
    const auto l0 = commensurate_unit(lengths);
    if (!l0) return std::nullopt;
    return subdivide(g, *l0);
}

AbscissaCrosscheck abscissa_crosscheck(const CoupledGraph& g, const std::vector<int>& n_values, double tolerance) {
    require_valid(g);
    const CoupledGraph avg = averaged(g);
    const auto eq = equilateral_version(avg);
    if (!eq) throw IncommensurateError("edge lengths are incommensurate; no abscissa polynomial");
    const AbscissaReport rep = abscissa_report(characteristic_polynomial(*eq));
    const double period = kTwoPi / rep.polynomial.l0;

    std::vector<Complex> guesses;
    for (const Complex& c : rep.c0)
        if (std::none_of(guesses.begin(), guesses.end(), [&](Complex z) { return std::abs(z - c) < 1e-6; }))
            guesses.push_back(c);

    const SecularSystem original(g, Backend::flower), flat(avg, Backend::flower);
    AbscissaCrosscheck out;
    out.tolerance = tolerance;
    out.agree = true;
    for (const Complex& c : guesses) {
        CrosscheckEntry entry;
        entry.c0_guess = c;
        entry.averaged = track_sequence(flat, c, n_values, period);
        entry.original = track_sequence(original, c, n_values, period);
        entry.difference = std::abs(entry.original.c0 - entry.averaged.c0);
        out.max_difference = std::max(out.max_difference, entry.difference);
        const bool fitted = entry.original.lambdas.size() > entry.original.jumps.size() &&
                            entry.averaged.lambdas.size() > entry.averaged.jumps.size();
        if (!fitted || entry.difference > tolerance) out.agree = false;
        out.entries.push_back(std::move(entry));
    }
    return out;
}

bool VerificationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed || c.skipped; });
}

namespace {

CheckResult skipped(std::string name, std::string why) {
    CheckResult c;
    c.name = std::move(name);
    c.skipped = true;
    c.detail = std::move(why);
    return c;
}

CheckResult make_check(std::string name, double value, double threshold, bool passed, std::string detail = {}) {
    CheckResult c;
    c.name = std::move(name);
    c.value = value;
    c.threshold = threshold;
    c.passed = passed;
    c.detail = std::move(detail);
    return c;
}

double odd_coefficient_ratio(const AbscissaPolynomial& p) {
    double big = 0.0, odd = 0.0;
    for (std::size_t k = 0; k < p.coeffs.size(); ++k) {
        big = std::max(big, std::abs(p.coeffs[k]));
        if (k % 2) odd = std::max(odd, std::abs(p.coeffs[k]));
    }
    return big > 0.0 ? odd / big : 0.0;
}

void polynomial_checks(const CoupledGraph& g, const VerifyOptions& opt, VerificationReport& rep) {
    const auto eq = equilateral_version(g);
    if (!eq) {
        for (const char* n : {"polynomial_agreement", "abscissa_weights", "bipartite_parity"})
            rep.checks.push_back(skipped(n, "incommensurate edge lengths"));
        return;
    }
    const std::size_t two_n = 2 * eq->graph.edge_count();
    if (two_n > opt.max_polynomial_degree) {
        for (const char* n : {"polynomial_agreement", "abscissa_weights", "bipartite_parity"})
            rep.checks.push_back(skipped(n, "2N = " + std::to_string(two_n) + " exceeds the polynomial limit"));
        return;
    }
    const AbscissaPolynomial ch = characteristic_polynomial(*eq);
    std::optional<AbscissaPolynomial> orb;
    if (two_n <= 24) {
        orb = orbit_polynomial(*eq);
        const auto cmp = compare_polynomials(*orb, ch, opt.polynomial_tol);
        std::ostringstream d;
        d << "max relative " << cmp.max_relative << ", largest one-sided " << cmp.max_absolute_zero;
        rep.checks.push_back(make_check("polynomial_agreement", cmp.max_relative, opt.polynomial_tol, cmp.agree, d.str()));
    } else {
        rep.checks.push_back(skipped("polynomial_agreement", "orbit enumeration limited to 2N <= 24"));
    }
    rep.abscissas = abscissa_report(orb ? *orb : ch);
    const int total = rep.abscissas->total_multiplicity();
    rep.checks.push_back(make_check("abscissa_weights", total, static_cast<double>(two_n),
                                    total == static_cast<int>(two_n),
                                    "sum of cluster weights " + std::to_string(total) + " vs 2N = " +
                                        std::to_string(two_n)));
    if (is_bipartite(eq->graph)) {
        double odd = odd_coefficient_ratio(ch);
        if (orb) odd = std::max(odd, odd_coefficient_ratio(*orb));
        rep.checks.push_back(make_check("bipartite_parity", odd, 1e-10, odd <= 1e-10, "largest odd coefficient / largest"));
    } else {
        rep.checks.push_back(skipped("bipartite_parity", "graph is not bipartite"));
    }
}

}  // namespace

VerificationReport verify_graph(const CoupledGraph& g, const VerifyOptions& opt) {
    VerificationReport rep;
    const auto errors = coupling_errors(g);
    if (!errors.empty()) {
        std::string joined;
        for (const auto& e : errors) joined += (joined.empty() ? "" : "; ") + e;
        rep.checks.push_back(make_check("couplings", static_cast<double>(errors.size()), 0.0, false, joined));
        return rep;
    }
    rep.checks.push_back(make_check("couplings", 0.0, 0.0, true));

    const auto [alo, ahi] = damping_range(g);
    const ComplexWindow window{-ahi - 1.0, -alo + 1.0, 0.5, 0.5 + kTwoPi * opt.strips};
    const SecularSystem flower(g, Backend::flower);
    std::optional<SecularSystem> scattering;
    if (has_piecewise_constant_profiles(g.graph)) scattering.emplace(g, Backend::scattering);

    RootOptions ro;
    ro.tol = opt.tol;
    ro.workers = opt.workers;
    try {
        rep.roots = find_roots(flower, window, ro);
        rep.checks.push_back(make_check("argument_principle", rep.roots.total_multiplicity(), rep.roots.count,
                                        rep.roots.total_multiplicity() == rep.roots.count,
                                        std::to_string(rep.roots.total_multiplicity()) + " roots found, winding number " +
                                            std::to_string(rep.roots.count)));
    } catch (const SolverError& e) {
        rep.checks.push_back(make_check("argument_principle", 0.0, 0.0, false, e.what()));
        polynomial_checks(g, opt, rep);
        return rep;
    }

    double violation = 0.0;
    for (const auto& r : rep.roots.roots)
        violation = std::max({violation, -ahi - r.lambda.real(), r.lambda.real() + alo});
    {
        std::ostringstream d;
        d << "Re lambda in [" << -ahi << ", " << -alo << "] for " << rep.roots.roots.size() << " nonreal roots";
        rep.checks.push_back(make_check("bound", std::max(violation, 0.0), 1e-6, violation <= 1e-6, d.str()));
    }

    double worst = 0.0;
    std::string uncertified;
    for (const auto& r : rep.roots.roots) {
        if (r.residual > 1e-6) {
            uncertified += " uncertified root (" + std::to_string(r.lambda.real()) + ", " +
                           std::to_string(r.lambda.imag()) + ")";
            rep.rayleigh.push_back(NAN);
            rep.gradient_ratios.push_back(NAN);
            continue;
        }
        const Eigenfunction f = eigenfunction_at(flower, r.lambda);
        const double res = rayleigh_identity_residual(f, g);
        rep.rayleigh.push_back(res);
        rep.gradient_ratios.push_back(gradient_ratio(f));
        worst = std::max(worst, res);
    }
    rep.checks.push_back(make_check("rayleigh", worst, opt.rayleigh_tol,
                                    worst < opt.rayleigh_tol && uncertified.empty(),
                                    uncertified.empty() ? "max residual over certified pairs" : uncertified));

    if (scattering) {
        double gap = 0.0;
        std::string notes;
        for (const auto& r : rep.roots.roots) {
            Complex z = r.lambda;
            try {
                if (r.multiplicity > 1) {
                    const double res = scattering->residual(z);
                    gap = std::max(gap, res);
                    continue;
                }
                if (!newton_refine(*scattering, z, 1e-12)) {
                    notes += " no convergence near (" + std::to_string(r.lambda.real()) + ", " +
                             std::to_string(r.lambda.imag()) + ")";
                    gap = INFINITY;
                    continue;
                }
                gap = std::max(gap, std::abs(z - r.lambda));
            } catch (const SolverError& e) {
                notes += std::string(" ") + e.what();
                gap = INFINITY;
            }
        }
        rep.checks.push_back(make_check("backend_agreement", gap, opt.backend_tol, gap <= opt.backend_tol,
                                        notes.empty() ? "max |zero(scattering) - zero(flower)|" : notes));
    } else {
        rep.checks.push_back(skipped("backend_agreement", "scattering backend needs piecewise-constant profiles"));
    }

    polynomial_checks(g, opt, rep);

    std::vector<double> radii = opt.counting_radii;
    if (radii.empty())
        for (int k = 10; k <= 30; ++k) radii.push_back(kTwoPi * (k + 0.5));
    std::sort(radii.begin(), radii.end());
    try {
        std::vector<double> counts;
        double below = 0.5;
        long acc = 0;
        for (double R : radii) {
            acc += count_zeros(flower, {window.re_min, window.re_max, below, R}, ro);
            counts.push_back(static_cast<double>(acc));
            below = R;
        }
        const double n = static_cast<double>(radii.size());
        const double mr = std::accumulate(radii.begin(), radii.end(), 0.0) / n;
        const double mc = std::accumulate(counts.begin(), counts.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < radii.size(); ++i) {
            sxy += (radii[i] - mr) * (counts[i] - mc);
            sxx += (radii[i] - mr) * (radii[i] - mr);
        }
        const double slope = sxy / sxx, expected = g.graph.total_length() / kPi;
        const double err = std::abs(slope - expected) / expected;
        std::ostringstream d;
        d << "slope " << slope << " vs total length / pi = " << expected;
        rep.checks.push_back(make_check("counting", err, opt.counting_tol, err <= opt.counting_tol, d.str()));
    } catch (const SolverError& e) {
        rep.checks.push_back(make_check("counting", INFINITY, opt.counting_tol, false, e.what()));
    }
    return rep;
}

}  // namespace dwg
