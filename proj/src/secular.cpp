#include "dwg/secular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace dwg {

Complex lambda_tilde(Complex lambda, double a, double b) {
    const Complex z = lambda + a;
    const double w = a * a + b;
    if (z == Complex{0.0, 0.0}) return std::sqrt(Complex(-w, 0.0));
    return z * std::sqrt(1.0 - w / (z * z));
}

Complex lambda_tilde_right(Complex lambda, double a, double b) {
    Complex k = std::sqrt(lambda * lambda + 2.0 * a * lambda - b);
    if (k.real() < 0.0 || (k.real() == 0.0 && k.imag() < 0.0)) k = -k;
    return k;
}

const char* to_string(Backend b) { return b == Backend::flower ? "flower" : "scattering"; }

Transfer constant_transfer(Complex k2, double x) {
    Transfer t;
    const Complex kappa = std::sqrt(k2);
    const Complex z = kappa * x;
    if (std::abs(z) < 0.5) {
        // cosh z and sinh z / z by their series in z^2.
        const Complex z2 = z * z;
        Complex term_c{1.0, 0.0}, term_s{1.0, 0.0}, C{1.0, 0.0}, S{1.0, 0.0};
        for (int n = 1; n <= 12; ++n) {
            term_c *= z2 / static_cast<double>((2 * n - 1) * (2 * n));
            term_s *= z2 / static_cast<double>((2 * n) * (2 * n + 1));
            C += term_c;
            S += term_s;
        }
        t.m << C, x * S, k2 * x * S, C;
        return t;
    }
    const double R = std::abs(z.real());
    const Complex ep = std::exp(z - R), em = std::exp(-z - R);
    const Complex C = 0.5 * (ep + em), Sh = 0.5 * (ep - em);
    t.m << C, Sh / kappa, kappa * Sh, C;
    t.log_scale = R;
    return t;
}

namespace {

void renormalize(Transfer& t) {
    const double s = t.m.cwiseAbs().maxCoeff();
    if (s > 0.0 && std::isfinite(s)) {
        t.m /= s;
        t.log_scale += std::log(s);
    }
}

Transfer compose(const Transfer& later, const Transfer& earlier) {
    Transfer t;
    t.m = later.m * earlier.m;
    t.log_scale = later.log_scale + earlier.log_scale;
    renormalize(t);
    return t;
}

// Dormand-Prince 5(4) on Y' = [[0, 1], [q(x), 0]] Y, Y held with a separate
// exponent and renormalized after every accepted step.
class Dopri5 {
public:
    Dopri5(const Edge& e, Complex lambda, const IntegratorOptions& opt) : e_(e), lambda_(lambda), opt_(opt) {}

    void integrate(Transfer& Y, double x0, double x1) {
        if (x1 <= x0) return;
        const double kmag = std::sqrt(std::abs(q(0.5 * (x0 + x1)))) + 1.0;
        double h = std::min(x1 - x0, 0.05 / kmag);
        double x = x0;
        long steps = 0;
        while (x < x1) {
            if (++steps > opt_.max_steps) fail(x, "step budget exhausted");
            if (x + h > x1) h = x1 - x;
            Eigen::Matrix2cd y5, y4;
            step(Y.m, x, h, y5, y4);
            double err = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double sc = opt_.atol + opt_.rtol * std::max(std::abs(Y.m(i)), std::abs(y5(i)));
                err = std::max(err, std::abs(y5(i) - y4(i)) / sc);
            }
            if (!std::isfinite(err)) fail(x, "non-finite state");
            if (err <= 1.0) {
                x = (x1 - (x + h) < 1e-14 * std::max(1.0, x1)) ? x1 : x + h;
                Y.m = y5;
                renormalize(Y);
            }
            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= fac;
            if (err > 1.0 && h < 1e-14 * std::max(1.0, std::abs(x))) fail(x, "step size underflow");
        }
    }

private:
    Complex q(double x) const { return lambda_ * lambda_ + 2.0 * lambda_ * e_.damping(x) - e_.potential(x); }

    Eigen::Matrix2cd f(double x, const Eigen::Matrix2cd& y) const {
        Eigen::Matrix2cd d;
        const Complex qq = q(x);
        d.row(0) = y.row(1);
        d.row(1) = qq * y.row(0);
        return d;
    }

    void step(const Eigen::Matrix2cd& y, double x, double h, Eigen::Matrix2cd& y5, Eigen::Matrix2cd& y4) const {
        const auto k1 = f(x, y);
        const auto k2 = f(x + h / 5.0, y + h * (k1 / 5.0));
        const auto k3 = f(x + 3.0 * h / 10.0, y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
        const auto k4 = f(x + 4.0 * h / 5.0, y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
        const auto k5 = f(x + 8.0 * h / 9.0, y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                                                      64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
        const auto k6 = f(x + h, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                                          49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
        y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                      11.0 / 84.0 * k6);
        const auto k7 = f(x + h, y5);
        y4 = y + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4 -
                      92097.0 / 339200.0 * k5 + 187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
    }

    [[noreturn]] void fail(double x, const char* why) const {
        std::ostringstream msg;
        msg << "integrator failure on edge " << e_.id << " at x = " << x << " (lambda = " << lambda_ << "): " << why;
        throw SolverError(msg.str());
    }

    const Edge& e_;
    Complex lambda_;
    IntegratorOptions opt_;
};

std::vector<double> edge_breakpoints(const Edge& e) {
    std::vector<double> cuts;
    for (const auto* p : {&e.damping, &e.potential})
        if (p->kind() == CoefficientProfile::Kind::piecewise)
            cuts.insert(cuts.end(), p->breakpoints().begin(), p->breakpoints().end());
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

}  // namespace

std::vector<Transfer> edge_transfers(const Edge& e, Complex lambda, const std::vector<double>& xs,
                                     const IntegratorOptions& opt) {
    const bool sampled = e.damping.kind() == CoefficientProfile::Kind::sampled ||
                         e.potential.kind() == CoefficientProfile::Kind::sampled;
    const auto cuts = edge_breakpoints(e);
    std::vector<Transfer> out;
    out.reserve(xs.size());
    Transfer Y;
    double x = 0.0;
    std::size_t c = 0;
    Dopri5 ode(e, lambda, opt);
    auto advance = [&](double target) {
        while (x < target) {
            while (c < cuts.size() && cuts[c] <= x) ++c;
            const double stop = (c < cuts.size() && cuts[c] < target) ? cuts[c] : target;
            if (sampled) {
                ode.integrate(Y, x, stop);
            } else {
                const double mid = 0.5 * (x + stop);
                const Complex k2 = lambda * lambda + 2.0 * lambda * e.damping(mid) - e.potential(mid);
                Y = compose(constant_transfer(k2, stop - x), Y);
            }
            x = stop;
        }
    };
    for (double target : xs) {
        if (target < x - 1e-14 || target > e.length * (1 + 1e-12))
            throw Error("edge_transfers: points must be sorted and inside the edge");
        advance(std::min(target, e.length));
        out.push_back(Y);
    }
    return out;
}

Transfer edge_transfer(const Edge& e, Complex lambda, const IntegratorOptions& opt) {
    return edge_transfers(e, lambda, {e.length}, opt).front();
}

namespace {

std::vector<double> fd_derivative(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    if (n < 5) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k == 0)
                d[k] = (f[1] - f[0]) / h;
            else if (k + 1 == n)
                d[k] = (f[k] - f[k - 1]) / h;
            else
                d[k] = (f[k + 1] - f[k - 1]) / (2 * h);
        }
        return d;
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (k >= 2 && k + 2 < n)
            d[k] = (f[k - 2] - 8 * f[k - 1] + 8 * f[k + 1] - f[k + 2]) / (12 * h);
        else if (k < 2)
            d[k] = (-25 * f[k] + 48 * f[k + 1] - 36 * f[k + 2] + 16 * f[k + 3] - 3 * f[k + 4]) / (12 * h);
        else
            d[k] = (25 * f[k] - 48 * f[k - 1] + 36 * f[k - 2] - 16 * f[k - 3] + 3 * f[k - 4]) / (12 * h);
    }
    return d;
}

}  // namespace

std::vector<std::vector<double>> wkb_phase_coefficients(const Edge& e, int order, int sign, int grid) {
    if (order < 0) throw ValidationError("WKB order must be nonnegative");
    if (sign != 1 && sign != -1) throw ValidationError("WKB sign must be +1 or -1");
    for (const auto* p : {&e.damping, &e.potential})
        if (p->kind() == CoefficientProfile::Kind::sampled && p->grid_points() < 4 * (order + 1))
            throw ValidationError("insufficient grid resolution for WKB order " + std::to_string(order) +
                                  " on edge " + e.id);
    grid = std::max(grid, 5);
    const double h = e.length / (grid - 1);
    std::vector<double> a(grid), da(grid), b(grid);
    for (int k = 0; k < grid; ++k) {
        const double x = std::min(e.length, h * k);
        a[k] = e.damping(x);
        da[k] = e.damping.derivative(x);
        b[k] = e.potential(x);
    }
    const double s = static_cast<double>(sign);
    std::vector<std::vector<double>> phi;
    phi.push_back(a);
    if (order >= 1) {
        std::vector<double> p1(grid);
        for (int k = 0; k < grid; ++k) p1[k] = -0.5 * (s * da[k] + a[k] * a[k] + b[k]);
        phi.push_back(p1);
    }
    for (int i = 2; i <= order; ++i) {
        const auto d = fd_derivative(phi[i - 1], h);
        std::vector<double> pi(grid);
        for (int k = 0; k < grid; ++k) {
            double conv = 0.0;
            for (int t = 0; t <= i - 1; ++t) conv += phi[t][k] * phi[i - 1 - t][k];
            pi[k] = -0.5 * (s * d[k] + conv);
        }
        phi.push_back(pi);
    }
    return phi;
}

namespace {

Complex phase_series_at(const std::vector<std::vector<double>>& phi, std::size_t k, Complex lambda) {
    Complex acc{0.0, 0.0}, pw{1.0, 0.0};
    for (const auto& p : phi) {
        acc += p[k] / pw;
        pw *= lambda;
    }
    return acc;
}

}  // namespace

EdgeWave fundamental_solution_data(const Edge& e, Complex lambda, int wkb_order, const IntegratorOptions& opt) {
    EdgeWave w;
    if (e.damping.is_constant() && e.potential.is_constant()) {
        w.kappa_plus = w.kappa_minus = lambda_tilde(lambda, e.damping(0.0), e.potential(0.0));
    } else {
        const auto pp = wkb_phase_coefficients(e, wkb_order, +1);
        const auto pm = wkb_phase_coefficients(e, wkb_order, -1);
        w.kappa_plus = lambda + phase_series_at(pp, 0, lambda);
        w.kappa_minus = lambda + phase_series_at(pm, 0, lambda);
    }
    const Transfer T = edge_transfer(e, lambda, opt);
    w.log_scale = T.log_scale;
    w.u_plus = T.m(0, 0) + w.kappa_plus * T.m(0, 1);
    w.du_plus = T.m(1, 0) + w.kappa_plus * T.m(1, 1);
    w.u_minus = T.m(0, 0) - w.kappa_minus * T.m(0, 1);
    w.du_minus = T.m(1, 0) - w.kappa_minus * T.m(1, 1);
    return w;
}

EdgeWave wkb_edge_wave(const Edge& e, Complex lambda, int order, int grid) {
    if (grid % 2 == 0) ++grid;
    const double h = e.length / (grid - 1);
    EdgeWave w;
    for (int sign : {+1, -1}) {
        const auto phi = wkb_phase_coefficients(e, order, sign, grid);
        // Simpson integral of the phase series over the edge.
        Complex integral{0.0, 0.0};
        for (int k = 0; k < grid; ++k) {
            const double wt = (k == 0 || k == grid - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            integral += wt * phase_series_at(phi, static_cast<std::size_t>(k), lambda);
        }
        integral *= h / 3.0;
        const double s = sign;
        const Complex u = std::exp(s * (lambda * e.length + integral));
        const Complex du = s * (lambda + phase_series_at(phi, static_cast<std::size_t>(grid - 1), lambda)) * u;
        const Complex k0 = lambda + phase_series_at(phi, 0, lambda);
        if (sign > 0) {
            w.kappa_plus = k0;
            w.u_plus = u;
            w.du_plus = du;
        } else {
            w.kappa_minus = k0;
            w.u_minus = u;
            w.du_minus = du;
        }
    }
    return w;
}

SecularSystem::SecularSystem(CoupledGraph graph, Backend backend, SecularOptions opt)
    : graph_(std::move(graph)), backend_(backend), opt_(std::move(opt)) {
    require_valid(graph_);
    if (backend_ == Backend::flower) {
        work_ = graph_;
        flower_ = assemble_flower(work_);
    } else {
        for (const auto& e : graph_.graph.edges())
            if (!e.damping.is_piecewise_constant() || !e.potential.is_piecewise_constant())
                throw ValidationError("scattering backend requires piecewise-constant profiles (edge " + e.id + ")");
        work_ = split_piecewise(graph_);
        if (!opt_.flipped_edges.empty() && work_.graph.edge_count() != graph_.graph.edge_count())
            throw ValidationError("branch flips are only supported on unsplit graphs");
    }
    double_ = directed_double(work_.graph);
}

std::vector<Transfer> SecularSystem::transfers(Complex lambda) const {
    std::vector<Transfer> out;
    for (const auto& e : work_.graph.edges()) out.push_back(edge_transfer(e, lambda, opt_.integrator));
    return out;
}

CMatrix SecularSystem::flower_matrix(Complex lambda) const {
    const auto n = static_cast<Eigen::Index>(dimension());
    CMatrix vals = CMatrix::Zero(n, n), ders = CMatrix::Zero(n, n);
    const auto T = transfers(lambda);
    for (std::size_t j = 0; j < T.size(); ++j) {
        if (T[j].log_scale > 600.0)
            throw SolverError("flower matrix overflow at lambda = (" + std::to_string(lambda.real()) + ", " +
                              std::to_string(lambda.imag()) + ")");
        const Eigen::Matrix2cd v = T[j].value();
        const auto t = static_cast<Eigen::Index>(2 * j), h = t + 1;
        vals(t, t) = 1.0;
        vals(h, t) = v(0, 0);
        vals(h, h) = v(0, 1);
        ders(t, h) = 1.0;
        ders(h, t) = -v(1, 0);
        ders(h, h) = -v(1, 1);
    }
    const CMatrix I = CMatrix::Identity(n, n);
    return (flower_.U - I) * vals + kI * (flower_.U + I) * ders;
}

CMatrix SecularSystem::scattering_matrix(Complex lambda) const {
    const auto& g = work_.graph;
    const std::size_t ne = g.edge_count();
    std::vector<Complex> kappa(ne);
    for (std::size_t j = 0; j < ne; ++j) {
        const auto& e = g.edge(j);
        kappa[j] = lambda_tilde(lambda, e.damping(0.5 * e.length), e.potential(0.5 * e.length));
        if (opt_.flipped_edges.count(j)) kappa[j] = -kappa[j];
    }
    const auto n = static_cast<Eigen::Index>(2 * ne);
    CMatrix M = CMatrix::Zero(n, n);
    for (std::size_t w = 0; w < g.vertex_count(); ++w) {
        const auto& slots = g.slots_at(w);
        CVector lam(static_cast<Eigen::Index>(slots.size()));
        for (std::size_t k = 0; k < slots.size(); ++k) lam(static_cast<Eigen::Index>(k)) = kappa[slots[k].edge];
        CMatrix sigma;
        try {
            sigma = scattering_exact(work_.couplings[w].matrix(), lam);
        } catch (const ResonanceError&) {
            throw ResonanceError("vertex scattering system is singular at vertex " + g.vertices()[w], lambda);
        }
        for (auto bout : double_.outgoing[w]) {
            const auto& bo = double_.bonds[bout];
            const auto k = static_cast<Eigen::Index>(g.local_index(bo.departure()));
            const Complex phase = std::exp(-kappa[bo.edge] * bo.length);
            for (auto bin : double_.incoming[w]) {
                const auto i = static_cast<Eigen::Index>(g.local_index(double_.bonds[bin].arrival()));
                M(static_cast<Eigen::Index>(bout), static_cast<Eigen::Index>(bin)) = phase * sigma(k, i);
            }
        }
    }
    return CMatrix::Identity(n, n) - M;
}

CMatrix SecularSystem::matrix(Complex lambda) const {
    return backend_ == Backend::flower ? flower_matrix(lambda) : scattering_matrix(lambda);
}

ScaledComplex SecularSystem::determinant(Complex lambda) const { return log_determinant(matrix(lambda)); }

double SecularSystem::residual(Complex lambda) const { return normalized_singular_ratio(matrix(lambda)); }

ScaledComplex star_secular_closed_form(const std::vector<double>& lengths, const std::vector<double>& dampings,
                                       const std::vector<double>& potentials, Complex lambda) {
    const std::size_t n = lengths.size();
    if (dampings.size() != n || potentials.size() != n) throw ValidationError("star data size mismatch");
    std::vector<ScaledComplex> c(n), s(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Complex k2 = lambda * lambda + 2.0 * dampings[j] * lambda - potentials[j];
        const Transfer t = constant_transfer(k2, lengths[j]);
        c[j] = ScaledComplex(t.m(0, 0), t.log_scale);
        s[j] = ScaledComplex(t.m(0, 1), t.log_scale);
    }
    ScaledComplex total;
    for (std::size_t j = 0; j < n; ++j) {
        ScaledComplex term = c[j];
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) term = term * s[i];
        total = total + term;
    }
    return total;
}

}  // namespace dwg
