#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dwg/profile.hpp"

namespace dwg {

/// An edge of a metric graph. The coordinate x runs from the tail (x = 0)
/// to the head (x = length).
struct Edge {
    std::string id;
    std::string tail;
    std::string head;
    double length = 1.0;
    CoefficientProfile damping;
    CoefficientProfile potential;
};

/// One end of an edge as seen from a vertex.
struct Slot {
    std::size_t edge;
    int end;  // 0: tail (x = 0), 1: head (x = length)
    bool operator==(const Slot&) const = default;
};

/// Natural ordering of identifiers: digit runs compare numerically, so
/// "e2" < "e10".
bool natural_less(const std::string& a, const std::string& b);

/// A finite metric graph. Edges are kept sorted by id in natural order;
/// every vertex-local ordering (slots, coupling matrices) derives from it.
class MetricGraph {
public:
    MetricGraph() = default;
    MetricGraph(std::vector<std::string> vertices, std::vector<Edge> edges);

    const std::vector<std::string>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const Edge& edge(std::size_t j) const { return edges_.at(j); }

    std::optional<std::size_t> vertex_index(const std::string& name) const;
    std::optional<std::size_t> edge_index(const std::string& id) const;
    /// Throws ValidationError for an endpoint naming no vertex.
    std::size_t tail_index(std::size_t edge) const;
    std::size_t head_index(std::size_t edge) const;
    std::size_t endpoint(Slot s) const { return s.end == 0 ? tail_index(s.edge) : head_index(s.edge); }

    /// Incident edge ends at vertex v: edges in order, tail before head.
    const std::vector<Slot>& slots_at(std::size_t v) const { return slots_.at(v); }
    /// Position of `s` in slots_at(endpoint(s)).
    std::size_t local_index(Slot s) const;
    std::size_t degree(std::size_t v) const { return slots_.at(v).size(); }
    double total_length() const;

private:
    std::vector<std::string> vertices_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, std::size_t> vertex_lookup_;
    std::vector<std::vector<Slot>> slots_;
    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> ends_;  // -1: dangling
};

struct ValidationReport {
    bool valid = false;
    bool connected = false;
    std::vector<std::string> errors;
    std::vector<std::size_t> degrees;
    std::vector<std::string> boundary_vertices;  // degree one
    double total_length = 0.0;
};

ValidationReport validate(const MetricGraph& graph);
/// Throws ValidationError listing every problem found by validate().
void require_valid(const MetricGraph& graph);

/// A directed edge of the doubled graph. Bond 2j runs tail -> head of edge j,
/// bond 2j+1 runs head -> tail; reverse(b) == b ^ 1.
struct Bond {
    std::size_t edge;
    bool forward;
    std::size_t from;
    std::size_t to;
    double length;
    Slot departure() const { return {edge, forward ? 0 : 1}; }
    Slot arrival() const { return {edge, forward ? 1 : 0}; }
};

struct DirectedDouble {
    std::vector<Bond> bonds;
    std::vector<std::vector<std::size_t>> incoming;  // per vertex
    std::vector<std::vector<std::size_t>> outgoing;
    static std::size_t reverse(std::size_t bond) { return bond ^ 1u; }
    std::size_t size() const { return bonds.size(); }
};

DirectedDouble directed_double(const MetricGraph& graph);

/// Largest l0 such that every edge length is an integer multiple of it, found
/// by continued-fraction rationalization of the length ratios. Returns
/// nullopt for incommensurate lengths.
std::optional<double> commensurate_unit(const std::vector<double>& lengths,
                                        double rel_tol = 1e-9, long max_denominator = 10000);

/// Replaces each edge of length m * l0 by a path of m edges of length l0.
/// New vertices are named "<edge id>~k" and new edges "<edge id>.k".
/// Throws IncommensurateError if some length is not a multiple of l0.
MetricGraph subdivide_to_equilateral(const MetricGraph& graph, double l0);

/// Two-colourability of the combinatorial graph (a self-loop is an odd cycle).
bool is_bipartite(const MetricGraph& graph);

/// (min_j mean(a_j), max_j mean(a_j)).
std::pair<double, double> average_damping_bounds(const MetricGraph& graph);

/// True if every edge has the same length within relative tolerance.
bool is_equilateral(const MetricGraph& graph, double rel_tol = 1e-9);

/// True if every damping and potential profile is (piecewise) constant.
bool has_piecewise_constant_profiles(const MetricGraph& graph);

}  // namespace dwg
