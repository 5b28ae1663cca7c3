#include "dwg/graph_io.hpp"

#include <fstream>

namespace dwg {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
    return obj.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ValidationError(where + ": expected a number");
    return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ValidationError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number(x, where));
    return out;
}

Complex complex_entry(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_object()) return {j.value("re", 0.0), j.value("im", 0.0)};
    if (j.is_array() && j.size() == 2) return {number(j[0], where), number(j[1], where)};
    throw ValidationError(where + ": matrix entries must be numbers, {re, im} or [re, im]");
}

UnitaryCoupling coupling_from_json(const json& spec, int degree, const std::string& where) {
    const std::string type = require(spec, "type", where).get<std::string>();
    const CouplingKind kind = coupling_kind_from_string(type);
    switch (kind) {
        case CouplingKind::delta: return UnitaryCoupling::named(kind, degree, number(require(spec, "alpha", where), where));
        case CouplingKind::delta_prime_s:
            return UnitaryCoupling::named(kind, degree, number(require(spec, "beta", where), where));
        case CouplingKind::robin: return UnitaryCoupling::named(kind, degree, number(require(spec, "theta", where), where));
        case CouplingKind::custom: {
            const json& rows = require(spec, "matrix", where);
            if (!rows.is_array() || rows.empty()) throw ValidationError(where + ": custom matrix must be a nonempty array");
            const auto d = static_cast<Eigen::Index>(rows.size());
            CMatrix U(d, d);
            for (Eigen::Index i = 0; i < d; ++i) {
                const json& row = rows[static_cast<std::size_t>(i)];
                if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
                    throw ValidationError(where + ": custom matrix must be square");
                for (Eigen::Index k = 0; k < d; ++k) U(i, k) = complex_entry(row[static_cast<std::size_t>(k)], where);
            }
            return UnitaryCoupling::custom(std::move(U));
        }
        default: return UnitaryCoupling::named(kind, degree);
    }
}

}  // namespace

CoefficientProfile profile_from_json(const json& j, double length) {
    const std::string where = "profile";
    const std::string type = require(j, "type", where).get<std::string>();
    if (type == "constant") return CoefficientProfile::constant(number(require(j, "value", where), where), length);
    if (type == "piecewise")
        return CoefficientProfile::piecewise(numbers(require(j, "breakpoints", where), where),
                                             numbers(require(j, "values", where), where), length);
    if (type == "sampled") return CoefficientProfile::sampled(numbers(require(j, "values", where), where), length);
    throw ValidationError("unknown profile type '" + type + "'");
}

json profile_to_json(const CoefficientProfile& p) {
    switch (p.kind()) {
        case CoefficientProfile::Kind::constant: return {{"type", "constant"}, {"value", p.values().front()}};
        case CoefficientProfile::Kind::piecewise:
            return {{"type", "piecewise"}, {"breakpoints", p.breakpoints()}, {"values", p.values()}};
        case CoefficientProfile::Kind::sampled: {
            const int n = p.grid_points();
            std::vector<double> v;
            for (int k = 0; k < n; ++k) v.push_back(p(p.length() * k / (n - 1)));
            return {{"type", "sampled"}, {"values", v}};
        }
    }
    return {};
}

json coupling_to_json(const UnitaryCoupling& c) {
    switch (c.kind()) {
        case CouplingKind::delta: return {{"type", "delta"}, {"alpha", c.parameter()}};
        case CouplingKind::delta_prime_s: return {{"type", "delta_prime_s"}, {"beta", c.parameter()}};
        case CouplingKind::robin: return {{"type", "robin"}, {"theta", c.parameter()}};
        case CouplingKind::custom: {
            json rows = json::array();
            for (Eigen::Index i = 0; i < c.matrix().rows(); ++i) {
                json row = json::array();
                for (Eigen::Index k = 0; k < c.matrix().cols(); ++k)
                    row.push_back({{"re", c.matrix()(i, k).real()}, {"im", c.matrix()(i, k).imag()}});
                rows.push_back(row);
            }
            return {{"type", "custom"}, {"matrix", rows}};
        }
        default: return {{"type", to_string(c.kind())}};
    }
}

CoupledGraph graph_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("graph file must contain an object");
    std::vector<std::string> vertices;
    for (const auto& v : require(doc, "vertices", "graph")) {
        if (!v.is_string()) throw ValidationError("vertex ids must be strings");
        vertices.push_back(v.get<std::string>());
    }
    std::vector<Edge> edges;
    for (const auto& e : require(doc, "edges", "graph")) {
        Edge edge;
        edge.id = require(e, "id", "edge").get<std::string>();
        const std::string where = "edge " + edge.id;
        edge.tail = require(e, "tail", where).get<std::string>();
        edge.head = require(e, "head", where).get<std::string>();
        edge.length = number(require(e, "length", where), where);
        if (!(edge.length > 0.0)) throw ValidationError("nonpositive length: " + where);
        edge.damping = profile_from_json(require(e, "damping", where), edge.length);
        edge.potential = e.contains("potential") ? profile_from_json(e.at("potential"), edge.length)
                                                 : CoefficientProfile::constant(0.0, edge.length);
        edges.push_back(std::move(edge));
    }
    MetricGraph graph(std::move(vertices), std::move(edges));
    const json couplings = doc.value("couplings", json::object());
    if (!couplings.is_object()) throw ValidationError("'couplings' must be an object");
    for (const auto& [name, spec] : couplings.items())
        if (!graph.vertex_index(name)) throw ValidationError("coupling for unknown vertex '" + name + "'");
    CoupledGraph g{std::move(graph), {}};
    for (std::size_t v = 0; v < g.graph.vertex_count(); ++v) {
        const auto& name = g.graph.vertices()[v];
        const int deg = static_cast<int>(std::max<std::size_t>(1, g.graph.degree(v)));
        if (couplings.contains(name))
            g.couplings.push_back(coupling_from_json(couplings.at(name), deg, "coupling " + name));
        else
            g.couplings.push_back(UnitaryCoupling::named(CouplingKind::standard, deg));
    }
    return g;
}

CoupledGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open graph file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("malformed graph file '" + path + "': " + e.what());
    }
    try {
        return graph_from_json(doc);
    } catch (const json::exception& e) {
        throw ValidationError("malformed graph file '" + path + "': " + e.what());
    }
}

json graph_to_json(const CoupledGraph& g) {
    json edges = json::array();
    for (const auto& e : g.graph.edges())
        edges.push_back({{"id", e.id},
                         {"tail", e.tail},
                         {"head", e.head},
                         {"length", e.length},
                         {"damping", profile_to_json(e.damping)},
                         {"potential", profile_to_json(e.potential)}});
    json couplings = json::object();
    for (std::size_t v = 0; v < g.couplings.size(); ++v) couplings[g.graph.vertices()[v]] = coupling_to_json(g.couplings[v]);
    return {{"vertices", g.graph.vertices()}, {"edges", edges}, {"couplings", couplings}};
}

}  // namespace dwg
