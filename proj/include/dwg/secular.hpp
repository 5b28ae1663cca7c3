#pragma once

#include <set>
#include <vector>

#include "dwg/coupling.hpp"
#include "dwg/graph.hpp"
#include "dwg/linalg.hpp"
#include "dwg/types.hpp"

namespace dwg {

/// lambda~ = sqrt(lambda^2 + 2 a lambda - b) on the branch asymptotic to
/// lambda + a: (lambda + a) sqrt(1 - (a^2 + b) / (lambda + a)^2) with the
/// principal root. Its cut is the bounded segment where (lambda + a)^2 lies
/// in [0, a^2 + b].
Complex lambda_tilde(Complex lambda, double a, double b);
/// The same root normalized to Re >= 0 (ties: Im >= 0).
Complex lambda_tilde_right(Complex lambda, double a, double b);

/// 2x2 fundamental matrix T(x) = [[c, s], [c', s']] * exp(log_scale), where
/// c, s solve u'' = (lambda^2 + 2 lambda a - b) u with T(0) = I. det T = 1.
struct Transfer {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
    double log_scale = 0.0;
    Eigen::Matrix2cd value() const { return m * std::exp(log_scale); }
    Complex det() const { return m.determinant() * std::exp(2.0 * log_scale); }
};

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    long max_steps = 2'000'000;
};

/// Transfer matrices of edge `e` at the sorted points `xs` in [0, length].
/// Constant pieces use closed forms; sampled pieces use an adaptive
/// Dormand-Prince 5(4) integrator renormalized every step.
std::vector<Transfer> edge_transfers(const Edge& e, Complex lambda, const std::vector<double>& xs,
                                     const IntegratorOptions& opt = {});
Transfer edge_transfer(const Edge& e, Complex lambda, const IntegratorOptions& opt = {});

/// Constant-coefficient transfer over length x for kappa^2 = k2.
Transfer constant_transfer(Complex k2, double x);

/// WKB phase coefficients phi_0..phi_m of one sign on a uniform grid of
/// `grid` points over the edge. Throws ValidationError when a sampled
/// profile has fewer than 4 (m + 1) points.
std::vector<std::vector<double>> wkb_phase_coefficients(const Edge& e, int order, int sign, int grid = 129);

/// Values u(l), u'(l) of the fundamental solutions u_+ and u_- with
/// u(0) = 1, u_+'(0) = kappa_+, u_-'(0) = -kappa_-; kappa_+- = lambda~ for
/// constant coefficients and lambda + sum_i phi^{+-}_i(0) / lambda^i otherwise. Stored as mantissas
/// times exp(log_scale).
struct EdgeWave {
    Complex kappa_plus, kappa_minus;  // u_+'(0) = kappa_plus, u_-'(0) = -kappa_minus
    Complex u_plus, du_plus, u_minus, du_minus;
    double log_scale = 0.0;
    /// u_+ u_-' - u_- u_+' at x = l; constant in x by Abel's identity.
    Complex wronskian() const { return (u_plus * du_minus - u_minus * du_plus) * std::exp(2.0 * log_scale); }
    Complex initial_wronskian() const { return -(kappa_plus + kappa_minus); }
};

EdgeWave fundamental_solution_data(const Edge& e, Complex lambda, int wkb_order = 2,
                                   const IntegratorOptions& opt = {});

/// Leading WKB approximation of u_+-(l) and u_+-'(l) from the phase series.
EdgeWave wkb_edge_wave(const Edge& e, Complex lambda, int order = 2, int grid = 257);

enum class Backend { flower, scattering };

const char* to_string(Backend b);

struct SecularOptions {
    IntegratorOptions integrator;
    std::set<std::size_t> flipped_edges;  // scattering: use -lambda~ on these edges
};

/// Evaluator of the secular determinant of a coupled graph.
///
/// flower: det[(U - I) Vals + i (U + I) Ders] in the entire basis (c, s) of
///   each edge; an entire function of lambda whose zeros are the eigenvalues.
/// scattering: det(I - M(lambda)), M = L J Sigma on the directed double with
///   exact vertex scattering matrices; piecewise-constant edges are split into
///   constant pieces. Sampled profiles are rejected.
class SecularSystem {
public:
    SecularSystem(CoupledGraph graph, Backend backend, SecularOptions opt = {});

    Backend backend() const { return backend_; }
    const CoupledGraph& graph() const { return graph_; }
    /// The graph the matrices are built on (piecewise edges split for scattering).
    const CoupledGraph& working_graph() const { return work_; }
    std::size_t dimension() const { return 2 * work_.graph.edge_count(); }

    /// Matrix whose determinant is the secular function.
    CMatrix matrix(Complex lambda) const;
    ScaledComplex determinant(Complex lambda) const;
    /// sigma_min / sigma_max of the row-normalized secular matrix.
    double residual(Complex lambda) const;

    /// Flower only: per-edge transfers at lambda (edge order of the graph).
    std::vector<Transfer> transfers(Complex lambda) const;

private:
    CMatrix flower_matrix(Complex lambda) const;
    CMatrix scattering_matrix(Complex lambda) const;

    CoupledGraph graph_;
    CoupledGraph work_;
    Backend backend_;
    SecularOptions opt_;
    FlowerAssembly flower_;
    DirectedDouble double_;
};

/// Star graph, Dirichlet leaves, standard centre:
/// sum_j cosh(k_j l_j) prod_{i != j} sinh(k_i l_i) / k_i, i.e. the classical
/// sum-product secular function divided by prod_i k_i (entire in lambda).
ScaledComplex star_secular_closed_form(const std::vector<double>& lengths, const std::vector<double>& dampings,
                                       const std::vector<double>& potentials, Complex lambda);

}  // namespace dwg
