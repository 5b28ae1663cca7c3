#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dwg/coupling.hpp"

namespace dwg {

/// Irreducible pseudo orbit on the directed double: disjoint periodic orbits,
/// each bond used at most once.
struct PseudoOrbit {
    std::vector<std::vector<std::size_t>> orbits;  // each starts at its smallest bond
    int m = 0;                                     // number of periodic orbits
    int length = 0;                                // number of bonds (units of l0)
    Complex amplitude{1.0, 0.0};                   // product of sigma0 entries along transitions
};

/// Leading-order bond matrices of an equilateral coupled graph with edge length l0:
/// S0[b', b] = sigma0_w(departure of b', arrival of b) where b ends at w = start of b';
/// D = diag(exp(-mean(a_b) l0)).
struct BondData {
    CMatrix S0;
    Eigen::VectorXd decay;
    double l0 = 1.0;
    std::size_t two_n = 0;
};

/// Throws ValidationError unless the graph is equilateral.
BondData bond_data(const CoupledGraph& g);

/// Visits every irreducible pseudo orbit including the empty one. Throws
/// ValidationError when 2N exceeds max_bonds.
void for_each_pseudo_orbit(const CoupledGraph& g, const std::function<void(const PseudoOrbit&)>& visit,
                           std::size_t max_bonds = 24);
std::vector<PseudoOrbit> enumerate_pseudo_orbits(const CoupledGraph& g, std::size_t max_bonds = 24);

/// P(y) = sum_k coeffs[k] y^k with leading coefficient 1 for y^{2N}; its
/// roots are y = exp(c0 l0) for the high-frequency constants c0.
struct AbscissaPolynomial {
    std::vector<Complex> coeffs;  // ascending powers of y, size 2N + 1
    std::size_t two_n = 0;
    double l0 = 1.0;
    std::string method;  // "orbit" or "characteristic"
};

/// sum over pseudo orbits of (-1)^m A exp(-sum of mean dampings * l0) y^{2N - L}.
AbscissaPolynomial orbit_polynomial(const CoupledGraph& g, std::size_t max_bonds = 24);
/// det(y I - D S0) from values on circles of several radii.
AbscissaPolynomial characteristic_polynomial(const CoupledGraph& g);

struct PolynomialComparison {
    double max_relative = 0.0;  // over coefficients above the zero threshold
    double max_absolute_zero = 0.0;  // largest |c| where the other method has 0
    bool agree = false;
};

PolynomialComparison compare_polynomials(const AbscissaPolynomial& a, const AbscissaPolynomial& b,
                                         double rel_tol = 1e-9);

struct AbscissaCluster {
    double re = 0.0;  // mean real part of the c0 in the cluster
    int multiplicity = 0;
    std::string mu;  // "m/2N", unreduced
    std::vector<Complex> c0;
};

struct AbscissaReport {
    AbscissaPolynomial polynomial;
    std::vector<Complex> roots;  // y_s, multiple roots averaged and repeated
    std::vector<Complex> c0;     // log(y_s) / l0, Im in (-pi/l0, pi/l0]
    std::vector<AbscissaCluster> clusters;  // by increasing real part
    double cluster_tol = 1e-6;
    std::vector<std::pair<double, int>> sensitivity;  // (tolerance, cluster count)
    int total_multiplicity() const;
};

AbscissaReport abscissa_report(const AbscissaPolynomial& poly, double cluster_tol = 1e-6);

/// Single-linkage clusters of real parts.
std::vector<AbscissaCluster> cluster_real_parts(const std::vector<Complex>& c0, double tol, std::size_t two_n);

/// Closed-form local factor of a standard vertex of degree d traversed by v
/// pseudo-orbit bonds: -(s2 - s1)^{v-1} [(v - 1) s2 + s1], s1 = 2/d - 1, s2 = 2/d.
double vertex_coefficient(int d, int v);

/// Assigns dampings a_j = (N + 1 - j) * separation to the edges in order (all
/// other data kept). Throws ValidationError unless the graph is a tree with
/// every vertex of odd degree.
CoupledGraph tree_max_abscissas_damping(const CoupledGraph& tree, double separation = 5.0);

/// For an even polynomial written in x = y^2 with coefficients C_0..C_N,
/// the well-separated-root estimates c0_j = log(-C_{j-1} / C_j) / (2 l0), j = 1..N.
std::vector<Complex> predicted_tree_abscissas(const AbscissaPolynomial& poly);

}  // namespace dwg
