#include "dwg/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "dwg/types.hpp"

namespace dwg {

bool natural_less(const std::string& a, const std::string& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
        const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
        if (da && db) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
            while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
            // Compare digit runs by value: strip leading zeros, then length, then lexically.
            std::size_t is = i, js = j;
            while (is + 1 < ie && a[is] == '0') ++is;
            while (js + 1 < je && b[js] == '0') ++js;
            if (ie - is != je - js) return ie - is < je - js;
            const int c = a.compare(is, ie - is, b, js, je - js);
            if (c != 0) return c < 0;
            if (ie - i != je - j) return ie - i < je - j;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

MetricGraph::MetricGraph(std::vector<std::string> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    std::stable_sort(edges_.begin(), edges_.end(),
                     [](const Edge& a, const Edge& b) { return natural_less(a.id, b.id); });
    // Constant profiles do not depend on their domain; give them the edge's.
    for (auto& e : edges_) {
        if (e.damping.kind() == CoefficientProfile::Kind::constant && e.damping.length() != e.length && e.length > 0.0)
            e.damping = CoefficientProfile::constant(e.damping.values().front(), e.length);
        if (e.potential.kind() == CoefficientProfile::Kind::constant && e.potential.length() != e.length && e.length > 0.0)
            e.potential = CoefficientProfile::constant(e.potential.values().front(), e.length);
    }
    for (std::size_t v = 0; v < vertices_.size(); ++v) vertex_lookup_.emplace(vertices_[v], v);
    slots_.assign(vertices_.size(), {});
    ends_.reserve(edges_.size());
    for (std::size_t j = 0; j < edges_.size(); ++j) {
        auto find = [&](const std::string& name) -> std::ptrdiff_t {
            const auto it = vertex_lookup_.find(name);
            return it == vertex_lookup_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
        };
        const auto t = find(edges_[j].tail), h = find(edges_[j].head);
        ends_.emplace_back(t, h);
        if (t >= 0) slots_[static_cast<std::size_t>(t)].push_back({j, 0});
        if (h >= 0) slots_[static_cast<std::size_t>(h)].push_back({j, 1});
    }
}

std::optional<std::size_t> MetricGraph::vertex_index(const std::string& name) const {
    const auto it = vertex_lookup_.find(name);
    if (it == vertex_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> MetricGraph::edge_index(const std::string& id) const {
    for (std::size_t j = 0; j < edges_.size(); ++j)
        if (edges_[j].id == id) return j;
    return std::nullopt;
}

std::size_t MetricGraph::tail_index(std::size_t edge) const {
    const auto t = ends_.at(edge).first;
    if (t < 0) throw ValidationError("dangling endpoint: edge " + edges_[edge].id);
    return static_cast<std::size_t>(t);
}

std::size_t MetricGraph::head_index(std::size_t edge) const {
    const auto h = ends_.at(edge).second;
    if (h < 0) throw ValidationError("dangling endpoint: edge " + edges_[edge].id);
    return static_cast<std::size_t>(h);
}

std::size_t MetricGraph::local_index(Slot s) const {
    const auto& list = slots_.at(endpoint(s));
    const auto it = std::find(list.begin(), list.end(), s);
    return static_cast<std::size_t>(it - list.begin());
}

double MetricGraph::total_length() const {
    double acc = 0.0;
    for (const auto& e : edges_) acc += e.length;
    return acc;
}

ValidationReport validate(const MetricGraph& graph) {
    ValidationReport r;
    const std::size_t nv = graph.vertex_count();
    r.degrees.assign(nv, 0);
    if (graph.edge_count() == 0) r.errors.push_back("graph has no edges");

    std::vector<std::string> seen_vertices = graph.vertices();
    std::sort(seen_vertices.begin(), seen_vertices.end());
    if (std::adjacent_find(seen_vertices.begin(), seen_vertices.end()) != seen_vertices.end())
        r.errors.push_back("duplicate vertex id");
    std::vector<std::string> ids;
    for (const auto& e : graph.edges()) ids.push_back(e.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        r.errors.push_back("duplicate edge id");

    bool dangling = false;
    for (std::size_t j = 0; j < graph.edge_count(); ++j) {
        const Edge& e = graph.edge(j);
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            r.errors.push_back("nonpositive length: edge " + e.id);
        else
            r.total_length += e.length;
        for (const auto* name : {&e.tail, &e.head})
            if (!graph.vertex_index(*name)) {
                r.errors.push_back("dangling endpoint: edge " + e.id + " references '" + *name + "'");
                dangling = true;
            }
        const double tol = 1e-9 * std::max(1.0, e.length);
        if (std::abs(e.damping.length() - e.length) > tol || std::abs(e.potential.length() - e.length) > tol)
            r.errors.push_back("profile domain does not match length: edge " + e.id);
    }
    for (std::size_t v = 0; v < nv; ++v) {
        r.degrees[v] = graph.degree(v);
        if (r.degrees[v] == 1) r.boundary_vertices.push_back(graph.vertices()[v]);
    }

    if (!dangling && nv > 0) {
        std::vector<std::vector<std::size_t>> adj(nv);
        for (std::size_t j = 0; j < graph.edge_count(); ++j) {
            const auto t = graph.tail_index(j), h = graph.head_index(j);
            adj[t].push_back(h);
            adj[h].push_back(t);
        }
        std::vector<char> seen(nv, 0);
        std::queue<std::size_t> q;
        q.push(0);
        seen[0] = 1;
        std::size_t reached = 1;
        while (!q.empty()) {
            const auto v = q.front();
            q.pop();
            for (auto w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++reached;
                    q.push(w);
                }
        }
        r.connected = reached == nv;
        if (!r.connected) r.errors.push_back("disconnected graph");
    }
    r.valid = r.errors.empty();
    return r;
}

void require_valid(const MetricGraph& graph) {
    const auto r = validate(graph);
    if (r.valid) return;
    std::ostringstream msg;
    msg << "invalid graph:";
    for (const auto& e : r.errors) msg << ' ' << e << ';';
    throw ValidationError(msg.str());
}

DirectedDouble directed_double(const MetricGraph& graph) {
    DirectedDouble d;
    d.incoming.assign(graph.vertex_count(), {});
    d.outgoing.assign(graph.vertex_count(), {});
    for (std::size_t j = 0; j < graph.edge_count(); ++j) {
        const auto t = graph.tail_index(j), h = graph.head_index(j);
        const double l = graph.edge(j).length;
        d.bonds.push_back({j, true, t, h, l});
        d.bonds.push_back({j, false, h, t, l});
    }
    for (std::size_t b = 0; b < d.bonds.size(); ++b) {
        d.outgoing[d.bonds[b].from].push_back(b);
        d.incoming[d.bonds[b].to].push_back(b);
    }
    return d;
}

namespace {

// Best rational approximation p/q of x with q <= max_den, by continued fractions.
std::pair<long, long> rationalize(double x, double tol, long max_den) {
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        const double a = std::floor(r);
        if (a > 1e15) break;
        const long ai = static_cast<long>(a);
        const long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <= tol * std::abs(x)) break;
        const double frac = r - a;
        if (frac <= 0.0) break;
        r = 1.0 / frac;
    }
    return {p1, q1};
}

}  // namespace

std::optional<double> commensurate_unit(const std::vector<double>& lengths, double rel_tol,
                                        long max_denominator) {
    if (lengths.empty()) return std::nullopt;
    const double ref = lengths.front();
    long common = 1;
    for (double l : lengths) {
        const double ratio = l / ref;
        const auto [p, q] = rationalize(ratio, rel_tol, max_denominator);
        if (q == 0 || std::abs(ratio - static_cast<double>(p) / static_cast<double>(q)) > rel_tol * ratio)
            return std::nullopt;
        common = std::lcm(common, q);
        if (common > max_denominator) return std::nullopt;
    }
    const double unit = ref / static_cast<double>(common);
    long g = 0;
    for (double l : lengths) g = std::gcd(g, std::lround(l / unit));
    return unit * static_cast<double>(g);
}

MetricGraph subdivide_to_equilateral(const MetricGraph& graph, double l0) {
    if (!(l0 > 0.0)) throw ValidationError("subdivision unit must be positive");
    std::vector<std::string> vertices = graph.vertices();
    std::vector<Edge> edges;
    for (const auto& e : graph.edges()) {
        const double ratio = e.length / l0;
        const long m = std::lround(ratio);
        if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * std::max(1.0, ratio))
            throw IncommensurateError("edge " + e.id + " of length " + std::to_string(e.length) +
                                      " is not a multiple of " + std::to_string(l0));
        if (m == 1) {
            Edge copy = e;
            copy.length = l0;
            copy.damping = e.damping.restricted(0.0, e.damping.length());
            copy.potential = e.potential.restricted(0.0, e.potential.length());
            edges.push_back(std::move(copy));
            continue;
        }
        const double piece = e.length / static_cast<double>(m);
        std::string prev = e.tail;
        for (long k = 1; k <= m; ++k) {
            const std::string next = (k == m) ? e.head : e.id + "~" + std::to_string(k);
            if (k < m) vertices.push_back(next);
            const double x0 = piece * static_cast<double>(k - 1);
            const double x1 = (k == m) ? e.length : piece * static_cast<double>(k);
            Edge sub;
            sub.id = e.id + "." + std::to_string(k);
            sub.tail = prev;
            sub.head = next;
            sub.length = l0;
            sub.damping = e.damping.restricted(x0, x1).transformed(1.0, l0 / (x1 - x0));
            sub.potential = e.potential.restricted(x0, x1).transformed(1.0, l0 / (x1 - x0));
            edges.push_back(std::move(sub));
            prev = next;
        }
    }
    return MetricGraph(std::move(vertices), std::move(edges));
}

bool is_bipartite(const MetricGraph& graph) {
    const std::size_t nv = graph.vertex_count();
    std::vector<std::vector<std::size_t>> adj(nv);
    for (std::size_t j = 0; j < graph.edge_count(); ++j) {
        const auto t = graph.tail_index(j), h = graph.head_index(j);
        if (t == h) return false;
        adj[t].push_back(h);
        adj[h].push_back(t);
    }
    std::vector<int> colour(nv, -1);
    for (std::size_t s = 0; s < nv; ++s) {
        if (colour[s] >= 0) continue;
        colour[s] = 0;
        std::queue<std::size_t> q;
        q.push(s);
        while (!q.empty()) {
            const auto v = q.front();
            q.pop();
            for (auto w : adj[v]) {
                if (colour[w] < 0) {
                    colour[w] = 1 - colour[v];
                    q.push(w);
                } else if (colour[w] == colour[v]) {
                    return false;
                }
            }
        }
    }
    return true;
}

std::pair<double, double> average_damping_bounds(const MetricGraph& graph) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& e : graph.edges()) {
        lo = std::min(lo, e.damping.average());
        hi = std::max(hi, e.damping.average());
    }
    return {lo, hi};
}

bool is_equilateral(const MetricGraph& graph, double rel_tol) {
    if (graph.edge_count() == 0) return true;
    const double l = graph.edge(0).length;
    return std::all_of(graph.edges().begin(), graph.edges().end(),
                       [&](const Edge& e) { return std::abs(e.length - l) <= rel_tol * l; });
}

bool has_piecewise_constant_profiles(const MetricGraph& graph) {
    return std::all_of(graph.edges().begin(), graph.edges().end(), [](const Edge& e) {
        return e.damping.is_piecewise_constant() && e.potential.is_piecewise_constant();
    });
}

}  // namespace dwg
