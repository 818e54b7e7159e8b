#include "graphwave/graph.hpp"

#include "graphwave/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_map>

namespace graphwave {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[b] = a;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

const char* to_string(GraphMode mode) noexcept {
    return mode == GraphMode::tree ? "tree" : "graph";
}

MetricGraph build_graph(const GraphSpec& spec) {
    if (spec.vertices.empty()) throw Error(Errc::invalid_spec, "network has no vertices");
    if (spec.edges.empty()) throw Error(Errc::invalid_spec, "network has no edges");

    MetricGraph g;
    g.mode_ = spec.mode;

    std::unordered_map<std::string, std::size_t> index;
    for (const auto& decl : spec.vertices) {
        if (!index.emplace(decl.label, g.vertices_.size()).second)
            throw Error(Errc::invalid_spec, "duplicate vertex id '" + decl.label + "'");
        g.vertices_.push_back({VertexId{g.vertices_.size()}, decl.label, decl.dirichlet, decl.root});
    }

    std::unordered_map<std::string, std::size_t> edge_labels;
    for (const auto& decl : spec.edges) {
        if (!edge_labels.emplace(decl.label, g.edges_.size()).second)
            throw Error(Errc::invalid_spec, "duplicate edge id '" + decl.label + "'");
        auto from = index.find(decl.from);
        auto to = index.find(decl.to);
        if (from == index.end() || to == index.end())
            throw Error(Errc::invalid_spec,
                        "edge '" + decl.label + "' references an undeclared vertex");
        if (!(decl.length > 0.0) || !std::isfinite(decl.length))
            throw Error(Errc::nonpositive_length, "edge '" + decl.label + "' has length " +
                                                      std::to_string(decl.length));
        if (from->second == to->second)
            throw Error(Errc::self_loop, "edge '" + decl.label + "' is a self-loop");
        g.edges_.push_back({EdgeId{g.edges_.size()}, VertexId{from->second}, VertexId{to->second},
                            decl.length, decl.label, false});
    }

    const std::size_t nv = g.vertices_.size();
    DisjointSets components(nv);
    for (const auto& e : g.edges_) components.unite(e.tail.value, e.head.value);
    for (std::size_t v = 1; v < nv; ++v)
        if (components.find(v) != components.find(0))
            throw Error(Errc::disconnected_graph,
                        "vertex '" + g.vertices_[v].label + "' is not connected to '" +
                            g.vertices_[0].label + "'");

    if (spec.mode == GraphMode::tree) {
        if (g.edges_.size() != nv - 1)
            throw Error(Errc::cycle_in_tree_mode,
                        std::to_string(g.edges_.size()) + " edges on " + std::to_string(nv) +
                            " vertices cannot form a tree");
        std::vector<std::size_t> roots;
        for (const auto& v : g.vertices_)
            if (v.root) roots.push_back(v.id.value);
        if (roots.size() != 1)
            throw Error(Errc::invalid_spec, "tree mode needs exactly one root vertex, found " +
                                                std::to_string(roots.size()));
        g.root_ = VertexId{roots.front()};

        // Orient every edge away from the root.
        std::vector<std::vector<std::size_t>> touching(nv);
        for (const auto& e : g.edges_) {
            touching[e.tail.value].push_back(e.id.value);
            touching[e.head.value].push_back(e.id.value);
        }
        std::vector<bool> seen(nv, false);
        std::queue<std::size_t> frontier;
        frontier.push(roots.front());
        seen[roots.front()] = true;
        while (!frontier.empty()) {
            const std::size_t v = frontier.front();
            frontier.pop();
            for (std::size_t ei : touching[v]) {
                Edge& e = g.edges_[ei];
                const std::size_t other = e.tail.value == v ? e.head.value : e.tail.value;
                if (seen[other]) continue;
                if (e.tail.value != v) {
                    std::swap(e.tail, e.head);
                    e.reoriented = true;
                }
                seen[other] = true;
                frontier.push(other);
            }
        }
    }

    g.adjacency_.assign(nv, {});
    for (const auto& e : g.edges_) {
        g.adjacency_[e.tail.value].push_back({e.id, -1});
        g.adjacency_[e.head.value].push_back({e.id, +1});
    }

    bool any_dirichlet = false;
    for (const auto& v : g.vertices_) {
        const std::size_t deg = g.adjacency_[v.id.value].size();
        any_dirichlet = any_dirichlet || v.dirichlet;
        if (deg == 1 && !v.dirichlet)
            throw Error(Errc::invalid_dirichlet,
                        "exterior vertex '" + v.label + "' must carry a Dirichlet condition");
        if (spec.mode == GraphMode::tree) {
            if (v.root && deg != 1)
                throw Error(Errc::bad_root_degree, "root '" + v.label + "' has degree " +
                                                       std::to_string(deg) + ", expected 1");
            if (v.dirichlet && deg != 1)
                throw Error(Errc::invalid_dirichlet,
                            "tree mode clamps exterior vertices only; '" + v.label +
                                "' has degree " + std::to_string(deg));
        }
    }
    if (!any_dirichlet)
        throw Error(Errc::invalid_dirichlet, "at least one Dirichlet vertex is required");

    return g;
}

const Vertex& MetricGraph::vertex(VertexId v) const {
    if (v.value >= vertices_.size())
        throw Error(Errc::unknown_vertex, "vertex index " + std::to_string(v.value));
    return vertices_[v.value];
}

const Edge& MetricGraph::edge(EdgeId e) const {
    if (e.value >= edges_.size())
        throw Error(Errc::invalid_argument, "edge index " + std::to_string(e.value));
    return edges_[e.value];
}

std::optional<VertexId> MetricGraph::find_vertex(const std::string& label) const {
    for (const auto& v : vertices_)
        if (v.label == label) return v.id;
    return std::nullopt;
}

const std::vector<Incidence>& MetricGraph::adjacent_edges(VertexId v) const {
    if (v.value >= adjacency_.size())
        throw Error(Errc::unknown_vertex, "vertex index " + std::to_string(v.value));
    return adjacency_[v.value];
}

std::vector<VertexId> MetricGraph::interior_vertices() const {
    std::vector<VertexId> out;
    for (const auto& v : vertices_)
        if (!v.dirichlet) out.push_back(v.id);
    return out;
}

std::vector<VertexId> MetricGraph::dirichlet_vertices() const {
    std::vector<VertexId> out;
    for (const auto& v : vertices_)
        if (v.dirichlet) out.push_back(v.id);
    return out;
}

IncidenceMatrix incidence_matrix(const MetricGraph& g) {
    IncidenceMatrix d{Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(g.vertex_count()),
                                            static_cast<Eigen::Index>(g.edge_count()))};
    for (const auto& e : g.edges()) {
        const auto j = static_cast<Eigen::Index>(e.id.value);
        d.entries(static_cast<Eigen::Index>(e.tail.value), j) = -1;
        d.entries(static_cast<Eigen::Index>(e.head.value), j) = +1;
    }
    return d;
}

ValidationReport validate_structure(const MetricGraph& g, const DampingAssignment& damping,
                                    bool strict_leaves) {
    if (damping.size() != g.edge_count())
        throw Error(Errc::invalid_argument, "damping assignment does not cover every edge");

    ValidationReport report;
    const std::size_t nv = g.vertex_count();

    std::vector<bool> elastic(g.edge_count());
    for (const auto& e : g.edges()) {
        elastic[e.id.value] = damping[e.id.value].is_zero();
        report.has_kv_edge = report.has_kv_edge || !elastic[e.id.value];
    }
    if (!report.has_kv_edge) report.messages.emplace_back("no Kelvin-Voigt edge in the network");

    DisjointSets sets(nv);
    for (const auto& e : g.edges())
        if (elastic[e.id.value]) sets.unite(e.tail.value, e.head.value);

    std::vector<std::ptrdiff_t> slot(nv, -1);
    std::vector<std::size_t> elastic_degree(nv, 0);
    for (const auto& e : g.edges()) {
        if (!elastic[e.id.value]) continue;
        const std::size_t r = sets.find(e.tail.value);
        if (slot[r] < 0) {
            slot[r] = static_cast<std::ptrdiff_t>(report.elastic_components.size());
            report.elastic_components.emplace_back();
        }
        report.elastic_components[static_cast<std::size_t>(slot[r])].edges.push_back(e.id);
        ++elastic_degree[e.tail.value];
        ++elastic_degree[e.head.value];
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (elastic_degree[v] == 0) continue;
        report.elastic_components[static_cast<std::size_t>(slot[sets.find(v)])].vertices.push_back(
            VertexId{v});
    }

    bool all_ok = true;
    for (std::size_t c = 0; c < report.elastic_components.size(); ++c) {
        auto& comp = report.elastic_components[c];
        comp.is_tree = comp.edges.size() + 1 == comp.vertices.size();
        if (!comp.is_tree)
            report.messages.push_back("elastic component " + std::to_string(c) +
                                      " contains a cycle");
        comp.leaf_attachment_ok = true;
        for (VertexId v : comp.vertices) {
            if (elastic_degree[v.value] != 1) continue;
            bool touches_kv = false;
            for (const auto& inc : g.adjacent_edges(v))
                touches_kv = touches_kv || !elastic[inc.edge.value];
            const bool ok = touches_kv || (!strict_leaves && g.is_dirichlet(v));
            if (!ok) {
                comp.leaf_attachment_ok = false;
                report.messages.push_back("leaf '" + g.vertex(v).label + "' of elastic component " +
                                          std::to_string(c) + " is not attached to a K-V edge");
            }
        }
        all_ok = all_ok && comp.is_tree && comp.leaf_attachment_ok;
    }
    report.pass = report.has_kv_edge && all_ok;
    return report;
}

}  // namespace graphwave
