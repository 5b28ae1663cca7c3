#include "dwg/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace dwg {

std::string to_string(CouplingKind kind) {
    switch (kind) {
        case CouplingKind::standard: return "standard";
        case CouplingKind::dirichlet: return "dirichlet";
        case CouplingKind::neumann: return "neumann";
        case CouplingKind::delta: return "delta";
        case CouplingKind::delta_prime_s: return "delta_prime_s";
        case CouplingKind::robin: return "robin";
        case CouplingKind::custom: return "custom";
    }
    return "custom";
}

CouplingKind coupling_kind_from_string(const std::string& name) {
    for (auto k : {CouplingKind::standard, CouplingKind::dirichlet, CouplingKind::neumann, CouplingKind::delta,
                   CouplingKind::delta_prime_s, CouplingKind::robin, CouplingKind::custom})
        if (to_string(k) == name) return k;
    throw ValidationError("unknown coupling kind '" + name + "'");
}

namespace {

void snap_entries(CMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double re = m(i, j).real(), im = m(i, j).imag();
            if (std::abs(re) < 1e-14) re = 0.0;
            if (std::abs(im) < 1e-14) im = 0.0;
            m(i, j) = {re, im};
        }
}

}  // namespace

Eigensplit eigensplit(const CMatrix& U, double snap) {
    const auto d = U.rows();
    Eigensplit s;
    s.V = CMatrix::Zero(d, d);
    s.D.resize(0);
    if (d == 0) return s;
    Eigen::ComplexSchur<CMatrix> schur(U);
    const CMatrix& T = schur.matrixT();
    const CMatrix& Q = schur.matrixU();

    std::vector<Eigen::Index> minus, plus, rest;
    for (Eigen::Index i = 0; i < d; ++i) {
        const Complex z = T(i, i);
        if (std::abs(z + 1.0) <= snap)
            minus.push_back(i);
        else if (std::abs(z - 1.0) <= snap)
            plus.push_back(i);
        else
            rest.push_back(i);
    }
    std::stable_sort(rest.begin(), rest.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::arg(T(a, a)) < std::arg(T(b, b)); });
    s.n_minus = static_cast<int>(minus.size());
    s.n_plus = static_cast<int>(plus.size());
    s.D.resize(static_cast<Eigen::Index>(rest.size()));
    Eigen::Index row = 0;
    for (auto i : minus) s.V.row(row++) = Q.col(i).adjoint();
    for (auto i : plus) s.V.row(row++) = Q.col(i).adjoint();
    for (std::size_t k = 0; k < rest.size(); ++k) {
        s.V.row(row++) = Q.col(rest[k]).adjoint();
        s.D(static_cast<Eigen::Index>(k)) = T(rest[k], rest[k]) / std::abs(T(rest[k], rest[k]));
    }
    return s;
}

UnitaryCoupling::UnitaryCoupling(CMatrix U, CouplingKind kind, double parameter)
    : U_(std::move(U)), kind_(kind), parameter_(parameter) {
    if (U_.rows() != U_.cols()) throw ValidationError("coupling matrix must be square");
    if (U_.rows() < 1) throw ValidationError("coupling matrix must have degree >= 1");
    split_ = eigensplit(U_);
    const auto d = U_.rows();
    CVector diag = CVector::Ones(d);
    diag.head(split_.n_minus).setConstant(-1.0);
    sigma0_ = split_.V.adjoint() * diag.asDiagonal() * split_.V;
    snap_entries(sigma0_);
}

UnitaryCoupling UnitaryCoupling::named(CouplingKind kind, int degree, double parameter) {
    if (degree < 1) throw ValidationError("coupling degree must be >= 1");
    const Eigen::Index d = degree;
    const CMatrix I = CMatrix::Identity(d, d);
    const CMatrix J = CMatrix::Ones(d, d);
    const double dd = static_cast<double>(degree);
    switch (kind) {
        case CouplingKind::standard: return UnitaryCoupling((2.0 / dd) * J - I, kind, 0.0);
        case CouplingKind::dirichlet: return UnitaryCoupling(-I, kind, 0.0);
        case CouplingKind::neumann: return UnitaryCoupling(I, kind, 0.0);
        case CouplingKind::delta:
            return UnitaryCoupling((2.0 / Complex(dd, parameter)) * J - I, kind, parameter);
        case CouplingKind::delta_prime_s:
            return UnitaryCoupling(I - (2.0 / Complex(dd, -parameter)) * J, kind, parameter);
        case CouplingKind::robin:
            if (degree != 1) throw ValidationError("robin coupling requires a vertex of degree 1");
            return UnitaryCoupling(CMatrix::Constant(1, 1, std::exp(kI * parameter)), kind, parameter);
        case CouplingKind::custom: break;
    }
    throw ValidationError("custom coupling needs an explicit matrix");
}

UnitaryCoupling UnitaryCoupling::custom(CMatrix U) { return UnitaryCoupling(std::move(U), CouplingKind::custom, 0.0); }

double UnitaryCoupling::unitarity_defect() const {
    const CMatrix E = U_.adjoint() * U_ - CMatrix::Identity(U_.rows(), U_.cols());
    return E.cwiseAbs().maxCoeff();
}

UnitaryCoupling UnitaryCoupling::permuted(const std::vector<std::size_t>& perm) const {
    const auto d = U_.rows();
    if (static_cast<Eigen::Index>(perm.size()) != d) throw ValidationError("permutation size mismatch");
    CMatrix P(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            P(i, k) = U_(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]),
                         static_cast<Eigen::Index>(perm[static_cast<std::size_t>(k)]));
    return UnitaryCoupling(std::move(P), kind_, parameter_);
}

CMatrix scattering_exact(const CMatrix& U, const CVector& lambdas) {
    const auto d = U.rows();
    const CMatrix I = CMatrix::Identity(d, d);
    const CMatrix UpI_L = kI * (U + I) * lambdas.asDiagonal();
    const CMatrix A = (U - I) - UpI_L;
    const CMatrix B = (U - I) + UpI_L;
    Eigen::FullPivLU<CMatrix> lu(A);
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot > 1e-13 * scale)) {
        const Complex lam = lambdas.size() > 0 ? lambdas(0) : Complex{};
        throw ResonanceError("vertex scattering system is singular", lam);
    }
    return -lu.solve(B);
}

std::vector<std::string> coupling_errors(const CoupledGraph& g, double unitarity_tol) {
    auto errors = validate(g.graph).errors;
    if (g.couplings.size() != g.graph.vertex_count()) {
        errors.push_back("expected one coupling per vertex");
        return errors;
    }
    for (std::size_t v = 0; v < g.couplings.size(); ++v) {
        const auto& name = g.graph.vertices()[v];
        const auto deg = g.graph.degree(v);
        if (static_cast<std::size_t>(g.couplings[v].degree()) != deg) {
            errors.push_back("degree mismatch at vertex " + name + ": coupling " +
                             std::to_string(g.couplings[v].degree()) + ", vertex " + std::to_string(deg));
            continue;
        }
        const double defect = g.couplings[v].unitarity_defect();
        if (!(defect <= unitarity_tol)) {
            std::ostringstream msg;
            msg << "unitarity violation at vertex " << name << ": max|U^H U - I| = " << defect;
            errors.push_back(msg.str());
        }
    }
    return errors;
}

void require_valid(const CoupledGraph& g) {
    const auto errors = coupling_errors(g);
    if (errors.empty()) return;
    std::ostringstream msg;
    msg << "invalid graph:";
    for (const auto& e : errors) msg << ' ' << e << ';';
    throw ValidationError(msg.str());
}

CoupledGraph with_default_couplings(MetricGraph graph) {
    CoupledGraph g{std::move(graph), {}};
    for (std::size_t v = 0; v < g.graph.vertex_count(); ++v)
        g.couplings.push_back(UnitaryCoupling::named(CouplingKind::standard,
                                                     static_cast<int>(std::max<std::size_t>(1, g.graph.degree(v)))));
    return g;
}

FlowerAssembly assemble_flower(const CoupledGraph& g) {
    const auto& graph = g.graph;
    const auto n = static_cast<Eigen::Index>(2 * graph.edge_count());
    FlowerAssembly f;
    f.U = CMatrix::Zero(n, n);
    f.slot_vertex.assign(static_cast<std::size_t>(n), 0);
    if (g.couplings.size() != graph.vertex_count()) throw ValidationError("expected one coupling per vertex");
    for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
        const auto& slots = graph.slots_at(v);
        const auto& U = g.couplings[v].matrix();
        if (static_cast<std::size_t>(U.rows()) != slots.size())
            throw ValidationError("degree mismatch at vertex " + graph.vertices()[v]);
        for (std::size_t a = 0; a < slots.size(); ++a) {
            const auto ga = static_cast<Eigen::Index>(2 * slots[a].edge + static_cast<std::size_t>(slots[a].end));
            f.slot_vertex[static_cast<std::size_t>(ga)] = v;
            for (std::size_t b = 0; b < slots.size(); ++b) {
                const auto gb = static_cast<Eigen::Index>(2 * slots[b].edge + static_cast<std::size_t>(slots[b].end));
                f.U(ga, gb) = U(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
        }
    }
    return f;
}

CoupledGraph transfer_couplings(const CoupledGraph& old, MetricGraph graph,
                                const std::function<Slot(Slot)>& slot_map) {
    CoupledGraph out{std::move(graph), {}};
    for (std::size_t v = 0; v < out.graph.vertex_count(); ++v) {
        const auto deg = out.graph.degree(v);
        const auto ov = old.graph.vertex_index(out.graph.vertices()[v]);
        if (!ov) {
            out.couplings.push_back(
                UnitaryCoupling::named(CouplingKind::standard, static_cast<int>(std::max<std::size_t>(1, deg))));
            continue;
        }
        const auto& old_slots = old.graph.slots_at(*ov);
        if (old_slots.size() != deg) throw ValidationError("slot map changes degree of " + out.graph.vertices()[v]);
        std::vector<std::size_t> perm(deg);
        for (std::size_t k = 0; k < deg; ++k) perm[out.graph.local_index(slot_map(old_slots[k]))] = k;
        out.couplings.push_back(old.couplings.at(*ov).permuted(perm));
    }
    return out;
}

CoupledGraph subdivide(const CoupledGraph& g, double l0) {
    MetricGraph sub = subdivide_to_equilateral(g.graph, l0);
    std::vector<std::size_t> first(g.graph.edge_count()), last(g.graph.edge_count());
    for (std::size_t j = 0; j < g.graph.edge_count(); ++j) {
        const auto& e = g.graph.edge(j);
        const long m = std::lround(e.length / l0);
        const auto a = sub.edge_index(m == 1 ? e.id : e.id + ".1");
        const auto b = sub.edge_index(m == 1 ? e.id : e.id + "." + std::to_string(m));
        if (!a || !b) throw ValidationError("edge id collision while subdividing " + e.id);
        first[j] = *a;
        last[j] = *b;
    }
    return transfer_couplings(g, std::move(sub), [&](Slot s) {
        return Slot{s.end == 0 ? first[s.edge] : last[s.edge], s.end};
    });
}

CMatrix scale_coupling_matrix(const CMatrix& U, double l0) {
    const CMatrix I = CMatrix::Identity(U.rows(), U.cols());
    const CMatrix A = (l0 - 1.0) * U + (l0 + 1.0) * I;
    const CMatrix B = (l0 + 1.0) * U + (l0 - 1.0) * I;
    return A.partialPivLu().solve(B);
}

CoupledGraph scale_graph(const CoupledGraph& g, double l0) {
    if (!(l0 > 0.0)) throw ValidationError("scale factor must be positive");
    std::vector<Edge> edges = g.graph.edges();
    for (auto& e : edges) {
        e.length *= l0;
        e.damping = e.damping.transformed(1.0 / l0, l0);
        e.potential = e.potential.transformed(1.0 / (l0 * l0), l0);
    }
    CoupledGraph out{MetricGraph(g.graph.vertices(), std::move(edges)), {}};
    for (const auto& c : g.couplings) {
        // The Mobius map fixes +-1, so standard, Dirichlet and Neumann keep their tag.
        const bool fixed = c.kind() == CouplingKind::standard || c.kind() == CouplingKind::dirichlet ||
                           c.kind() == CouplingKind::neumann || l0 == 1.0;
        out.couplings.push_back(fixed ? c : UnitaryCoupling::custom(scale_coupling_matrix(c.matrix(), l0)));
    }
    return out;
}

CoupledGraph flip_edge(const CoupledGraph& g, std::size_t j) {
    std::vector<Edge> edges = g.graph.edges();
    auto& e = edges.at(j);
    std::swap(e.tail, e.head);
    e.damping = e.damping.reversed();
    e.potential = e.potential.reversed();
    return transfer_couplings(g, MetricGraph(g.graph.vertices(), std::move(edges)), [j](Slot s) {
        return s.edge == j ? Slot{s.edge, 1 - s.end} : s;
    });
}

CoupledGraph averaged(const CoupledGraph& g) {
    std::vector<Edge> edges = g.graph.edges();
    for (auto& e : edges) {
        e.damping = CoefficientProfile::constant(e.damping.average(), e.length);
        e.potential = CoefficientProfile::constant(e.potential.average(), e.length);
    }
    return CoupledGraph{MetricGraph(g.graph.vertices(), std::move(edges)), g.couplings};
}

CoupledGraph split_piecewise(const CoupledGraph& g) {
    std::vector<std::string> vertices = g.graph.vertices();
    std::vector<Edge> edges;
    std::vector<std::pair<std::string, std::string>> ends;  // new ids of first and last piece
    bool changed = false;
    for (const auto& e : g.graph.edges()) {
        std::vector<double> cuts;
        for (const auto* p : {&e.damping, &e.potential})
            if (p->kind() == CoefficientProfile::Kind::piecewise)
                cuts.insert(cuts.end(), p->breakpoints().begin(), p->breakpoints().end());
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end(),
                               [&](double a, double b) { return std::abs(a - b) <= 1e-12 * e.length; }),
                   cuts.end());
        if (cuts.empty()) {
            edges.push_back(e);
            ends.emplace_back(e.id, e.id);
            continue;
        }
        changed = true;
        cuts.insert(cuts.begin(), 0.0);
        cuts.push_back(e.length);
        std::string prev = e.tail;
        const std::size_t m = cuts.size() - 1;
        for (std::size_t k = 0; k < m; ++k) {
            const std::string next = (k + 1 == m) ? e.head : e.id + ":v" + std::to_string(k + 1);
            if (k + 1 < m) vertices.push_back(next);
            const double x0 = cuts[k], x1 = cuts[k + 1];
            const double mid = 0.5 * (x0 + x1);
            Edge piece;
            piece.id = e.id + ":" + std::to_string(k + 1);
            piece.tail = prev;
            piece.head = next;
            piece.length = x1 - x0;
            piece.damping = CoefficientProfile::constant(e.damping(mid), piece.length);
            piece.potential = CoefficientProfile::constant(e.potential(mid), piece.length);
            edges.push_back(std::move(piece));
            prev = next;
        }
        ends.emplace_back(e.id + ":1", e.id + ":" + std::to_string(m));
    }
    if (!changed) return g;
    MetricGraph split(std::move(vertices), std::move(edges));
    std::vector<std::size_t> first, last;
    for (const auto& [a, b] : ends) {
        first.push_back(*split.edge_index(a));
        last.push_back(*split.edge_index(b));
    }
    return transfer_couplings(g, std::move(split), [&](Slot s) {
        return Slot{s.end == 0 ? first[s.edge] : last[s.edge], s.end};
    });
}

}  // namespace dwg
