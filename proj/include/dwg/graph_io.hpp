#pragma once

#include <string>

#include <json.hpp>

#include "dwg/coupling.hpp"

namespace dwg {

/// Parses a graph definition (vertices, edges, couplings). Vertices without a
/// coupling entry get standard coupling. Throws ValidationError on malformed
/// input; structural checks are left to require_valid.
CoupledGraph graph_from_json(const nlohmann::json& doc);
CoupledGraph load_graph(const std::string& path);

nlohmann::json profile_to_json(const CoefficientProfile& p);
CoefficientProfile profile_from_json(const nlohmann::json& j, double length);
nlohmann::json coupling_to_json(const UnitaryCoupling& c);
nlohmann::json graph_to_json(const CoupledGraph& g);

}  // namespace dwg
