#pragma once
// Small graph builders shared by the unit tests.

#include <string>
#include <vector>

#include <json.hpp>

#include "dwg/graph_io.hpp"
#include "oracles.hpp"

namespace fixture {

using nlohmann::json;

inline json constant(double v) { return json{{"type", "constant"}, {"value", v}}; }

inline json edge(const std::string& id, const std::string& tail, const std::string& head, double length,
                 double a, double b = 0.0) {
    json e{{"id", id}, {"tail", tail}, {"head", head}, {"length", length}, {"damping", constant(a)}};
    if (b != 0.0) e["potential"] = constant(b);
    return e;
}

inline dwg::CoupledGraph build(const std::vector<std::string>& vertices, const std::vector<json>& edges,
                               const json& couplings = json::object()) {
    return dwg::graph_from_json(json{{"vertices", vertices}, {"edges", edges}, {"couplings", couplings}});
}

inline json dirichlet() { return json{{"type", "dirichlet"}}; }

inline dwg::CoupledGraph dirichlet_edge(double a = 0.0, double b = 0.0, double l = 1.0) {
    return build({"A", "B"}, {edge("e1", "A", "B", l, a, b)}, {{"A", dirichlet()}, {"B", dirichlet()}});
}

/// Star with centre O (standard) and Dirichlet leaves L1..Ln.
inline dwg::CoupledGraph star(const std::vector<double>& lengths, const std::vector<double>& dampings,
                              const std::vector<double>& potentials = {}) {
    std::vector<std::string> vertices{"O"};
    std::vector<json> edges;
    json couplings = json::object();
    for (std::size_t j = 0; j < lengths.size(); ++j) {
        const std::string leaf = "L" + std::to_string(j + 1);
        vertices.push_back(leaf);
        edges.push_back(edge("e" + std::to_string(j + 1), "O", leaf, lengths[j], dampings[j],
                             potentials.empty() ? 0.0 : potentials[j]));
        couplings[leaf] = dirichlet();
    }
    return build(vertices, edges, couplings);
}

/// Cycle of n unit edges V1 -> V2 -> ... -> V1, standard coupling.
inline dwg::CoupledGraph loop(int n, double a) {
    std::vector<std::string> vertices;
    std::vector<json> edges;
    for (int k = 1; k <= n; ++k) vertices.push_back("V" + std::to_string(k));
    for (int k = 1; k <= n; ++k)
        edges.push_back(edge("e" + std::to_string(k), "V" + std::to_string(k), "V" + std::to_string(k % n + 1), 1.0, a));
    return build(vertices, edges);
}

inline dwg::CoupledGraph corpus(const std::string& name) { return dwg::load_graph(oracle::corpus(name)); }

}  // namespace fixture
