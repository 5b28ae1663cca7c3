#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dwg/orbits.hpp"
#include "dwg/rootfinding.hpp"

namespace dwg {

/// Samples of one edge component u_j. Consecutive points are grouped into
/// Simpson segments (odd point counts); a breakpoint of a piecewise profile
/// closes one segment and opens the next, so it appears twice in `x`.
struct EdgeSamples {
    std::vector<double> x;
    std::vector<Complex> u;
    std::vector<Complex> du;
    std::vector<std::size_t> segment_ends;  // one past the last index of each segment
};

/// Eigenfunction reconstructed from a null vector of the flower matrix. The
/// flower unknowns are (u_j(0), u_j'(0)) per edge; they fix u_j through the
/// transfer matrices.
struct Eigenfunction {
    Complex lambda;
    std::vector<std::pair<Complex, Complex>> initial;  // (u_j(0), u_j'(0))
    std::vector<EdgeSamples> edges;
    int near_null_dimension = 1;     // singular values below the null tolerance
    double singular_ratio = 0.0;     // sigma_min / sigma_max of the equilibrated matrix
    double coupling_residual = 0.0;  // max over vertices, relative to max(|Psi| + |Psi'| / s)
    double ode_residual = 0.0;       // local transfer mismatch between grid neighbours, same scale
};

struct Eigenspace {
    std::vector<Eigenfunction> basis;
    std::vector<double> singular_values;  // equilibrated, ascending
};

/// Eigenfunction for a root of a flower-backend system, normalized to
/// sum_j ||u_j||^2 = 1 with the largest sample real and positive. Each
/// constant piece carries at least max(min_points, 60 |lambda~| l) points.
Eigenfunction eigenfunction_at(const SecularSystem& flower, Complex lambda, int min_points = 65);
/// Basis of the near-null space (singular values below null_tol times the largest).
Eigenspace eigenspace_at(const SecularSystem& flower, Complex lambda, double null_tol = 1e-6,
                         int min_points = 65);

/// Composite Simpson integrals over all edges.
double squared_norm(const Eigenfunction& f);
double derivative_squared_norm(const Eigenfunction& f);
/// sum_j int a_j |u_j|^2 / sum_j ||u_j||^2.
double damping_expectation(const Eigenfunction& f, const CoupledGraph& g);
/// |Re lambda + damping_expectation|; throws ValidationError when |Im lambda| <= 1e-6.
double rayleigh_identity_residual(const Eigenfunction& f, const CoupledGraph& g);
/// sum ||u'||^2 / sum ||u||^2 (reported, not gated).
double gradient_ratio(const Eigenfunction& f);

/// Pointwise range [min a, max a] of the damping over the whole graph.
std::pair<double, double> damping_range(const CoupledGraph& g);

struct MuDistribution {
    double lo = 0.0;
    double hi = 0.0;
    double R = 0.0;
    long numerator = 0;    // eigenvalues with Re in (lo, hi), |Im| < R, with multiplicity
    long denominator = 0;  // all eigenvalues with |Im| < R
    double value() const { return denominator ? static_cast<double>(numerator) / denominator : 0.0; }
    std::string rational() const;
};

/// mu_R at each R together with the count increments between successive
/// R, whose ratio is the exact rational estimate of the R -> infinity limit.
struct MuSweep {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<MuDistribution> table;
    std::vector<std::pair<long, long>> increments;  // (d numerator, d denominator) per consecutive pair
    std::string limit;                              // reduced increment ratio of the last pair
    bool stabilized = false;                        // every increment ratio is the same rational
    std::optional<int> predicted_weight;            // m_I from the abscissa polynomial
    std::size_t two_n = 0;
    std::string prediction() const;                 // "m_I/2N", empty without a prediction
};

/// Throws SolverError when the set's window does not cover |Im| < R.
MuDistribution mu_measure(const EigenvalueSet& set, double lo, double hi, double R);
MuSweep mu_sweep(const EigenvalueSet& set, double lo, double hi, const std::vector<double>& radii);
/// Fills the prediction from the clusters with real part in (lo, hi).
void attach_prediction(MuSweep& sweep, const AbscissaReport& report);
/// (p, q) reduced; q > 0.
std::pair<long, long> reduce_fraction(long p, long q);

/// Window containing every eigenvalue with |Im| < R: nonreal eigenvalues obey
/// the damping bound, real ones are enclosed by widening the real range until
/// the zero count stops changing.
ComplexWindow spectrum_window(const SecularSystem& flower, double R, const RootOptions& opt = {});

/// Least-squares slope of #{roots of a cluster with 0 < Im < R} against R,
/// divided by the cluster multiplicity; the expected value is l0 / (2 pi).
struct CountingFit {
    double re = 0.0;
    int multiplicity = 0;
    std::vector<double> radii;
    std::vector<long> counts;
    double slope_per_sequence = 0.0;
    double expected = 0.0;
    double relative_error() const { return std::abs(slope_per_sequence - expected) / expected; }
};

std::vector<CountingFit> counting_slopes(const EigenvalueSet& set, const AbscissaReport& report,
                                         const std::vector<double>& radii, double assign_tol = 0.05);

struct CrosscheckEntry {
    Complex c0_guess;
    SequenceFit original;
    SequenceFit averaged;
    double difference = 0.0;
};

struct AbscissaCrosscheck {
    std::vector<CrosscheckEntry> entries;
    double max_difference = 0.0;
    double tolerance = 5e-3;
    bool agree = false;
};

/// Fits c0 along every sequence predicted by the averaged graph, once with
/// the true profiles and once with their averages. Throws IncommensurateError
/// for incommensurate lengths.
AbscissaCrosscheck abscissa_crosscheck(const CoupledGraph& g, const std::vector<int>& n_values,
                                       double tolerance = 5e-3);

/// Equilateral subdivision of a commensurate graph; nullopt otherwise.
std::optional<CoupledGraph> equilateral_version(const CoupledGraph& g);

struct CheckResult {
    std::string name;
    bool passed = false;
    bool skipped = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerifyOptions {
    int strips = 3;                 // nonreal window Im in (0.5, 0.5 + 2 pi strips)
    double tol = 1e-8;
    int workers = 1;
    double rayleigh_tol = 1e-6;
    double backend_tol = 1e-6;
    double polynomial_tol = 1e-9;
    std::size_t max_polynomial_degree = 64;  // larger 2N skips the polynomial checks
    std::vector<double> counting_radii;      // empty: 2 pi (k + 1/2), k = 10, 15, ..., 30
    double counting_tol = 1e-2;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    EigenvalueSet roots;
    std::vector<double> rayleigh;        // per root
    std::vector<double> gradient_ratios;  // per root
    std::optional<AbscissaReport> abscissas;
    bool passed() const;
};

/// Runs the invariant suite on one graph. Coupling and solver failures are
/// reported as failed checks.
VerificationReport verify_graph(const CoupledGraph& g, const VerifyOptions& opt = {});

}  // namespace dwg
