#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dwg/graph.hpp"
#include "dwg/types.hpp"

namespace dwg {

enum class CouplingKind { standard, dirichlet, neumann, delta, delta_prime_s, robin, custom };

std::string to_string(CouplingKind kind);
CouplingKind coupling_kind_from_string(const std::string& name);

/// U = V^H diag(-I_{n_minus}, I_{n_plus}, diag(D)) V.
struct Eigensplit {
    int n_minus = 0;
    int n_plus = 0;
    CVector D;  // unimodular, none within the snap threshold of +-1
    CMatrix V;  // unitary
};

/// Unitary vertex coupling (U - I) Psi + i (U + I) Psi' = 0 with Psi' the
/// outgoing derivatives. Rows and columns follow the vertex slot order of
/// MetricGraph::slots_at.
class UnitaryCoupling {
public:
    UnitaryCoupling() = default;

    /// Throws ValidationError for robin with degree != 1 or degree < 1.
    static UnitaryCoupling named(CouplingKind kind, int degree, double parameter = 0.0);
    /// Any square matrix; unitarity is not enforced here (see unitarity_defect).
    static UnitaryCoupling custom(CMatrix U);

    CouplingKind kind() const { return kind_; }
    double parameter() const { return parameter_; }
    int degree() const { return static_cast<int>(U_.rows()); }
    const CMatrix& matrix() const { return U_; }
    const Eigensplit& split() const { return split_; }
    /// Leading-order scattering matrix V^H diag(-I, I, I) V; an involution.
    const CMatrix& sigma0() const { return sigma0_; }
    /// max |U^H U - I|.
    double unitarity_defect() const;

    /// Coupling seen through a reordering of slots: new slot i is old slot perm[i].
    UnitaryCoupling permuted(const std::vector<std::size_t>& perm) const;

    static constexpr double snap_threshold = 1e-9;

private:
    explicit UnitaryCoupling(CMatrix U, CouplingKind kind, double parameter);

    CMatrix U_;
    CouplingKind kind_ = CouplingKind::custom;
    double parameter_ = 0.0;
    Eigensplit split_;
    CMatrix sigma0_;
};

Eigensplit eigensplit(const CMatrix& U, double snap = UnitaryCoupling::snap_threshold);

/// sigma = -[(U - I) - i (U + I) L]^{-1} [(U - I) + i (U + I) L], L = diag(lambdas).
/// Throws ResonanceError when the system is numerically singular.
CMatrix scattering_exact(const CMatrix& U, const CVector& lambdas);
inline CMatrix scattering_exact(const UnitaryCoupling& c, const CVector& lambdas) {
    return scattering_exact(c.matrix(), lambdas);
}
inline const CMatrix& scattering_leading_term(const UnitaryCoupling& c) { return c.sigma0(); }

/// A metric graph together with one coupling per vertex.
struct CoupledGraph {
    MetricGraph graph;
    std::vector<UnitaryCoupling> couplings;
};

/// Graph errors plus coupling degree mismatches and unitarity violations.
std::vector<std::string> coupling_errors(const CoupledGraph& g, double unitarity_tol = 1e-12);
void require_valid(const CoupledGraph& g);

/// Standard coupling at every vertex; at a leaf this is the Neumann condition.
CoupledGraph with_default_couplings(MetricGraph graph);

/// Global 2N x 2N block-diagonal coupling in slot order (2j: tail of edge j,
/// 2j+1: head of edge j).
struct FlowerAssembly {
    CMatrix U;
    std::vector<std::size_t> slot_vertex;  // vertex owning each global slot
};

FlowerAssembly assemble_flower(const CoupledGraph& g);

/// Rebuilds couplings for a graph whose slots are the images of the old
/// ones under `slot_map`; vertices absent from `old` get standard coupling.
CoupledGraph transfer_couplings(const CoupledGraph& old, MetricGraph graph,
                                const std::function<Slot(Slot)>& slot_map);

/// Subdivision with couplings carried over; inserted vertices are standard.
CoupledGraph subdivide(const CoupledGraph& g, double l0);

/// Lengths times l0, damping / l0, potential / l0^2 and the Mobius map
/// U -> [(l0-1)U + (l0+1)I]^{-1} [(l0+1)U + (l0-1)I].
CoupledGraph scale_graph(const CoupledGraph& g, double l0);
CMatrix scale_coupling_matrix(const CMatrix& U, double l0);

/// Same operator with the coordinate on edge j reversed.
CoupledGraph flip_edge(const CoupledGraph& g, std::size_t j);

/// Every profile replaced by the constant with the same average.
CoupledGraph averaged(const CoupledGraph& g);

/// Splits piecewise-constant edges at their breakpoints, joining pieces by
/// standard degree-2 vertices. Sampled profiles are left untouched.
CoupledGraph split_piecewise(const CoupledGraph& g);

}  // namespace dwg
