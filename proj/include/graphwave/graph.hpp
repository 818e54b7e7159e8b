#pragma once

#include "graphwave/profile.hpp"

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace graphwave {

struct VertexId {
    std::size_t value = 0;
    friend auto operator<=>(VertexId, VertexId) = default;
};

struct EdgeId {
    std::size_t value = 0;
    friend auto operator<=>(EdgeId, EdgeId) = default;
};

enum class GraphMode { tree, graph };

[[nodiscard]] const char* to_string(GraphMode mode) noexcept;

/// Edge parametrized on [0, length]: x = 0 sits at `tail`, x = length at `head`.
struct Edge {
    EdgeId id;
    VertexId tail;
    VertexId head;
    double length = 1.0;
    std::string label;
    /// Set when tree-mode ingestion flipped the declared direction so that the
    /// tail is the endpoint nearer the root.
    bool reoriented = false;
};

struct Vertex {
    VertexId id;
    std::string label;
    bool dirichlet = false;
    bool root = false;
};

/// An edge seen from one of its endpoints; sign is the incidence entry d_kj.
struct Incidence {
    EdgeId edge;
    int sign = 0;
};

struct VertexDecl {
    std::string label;
    bool dirichlet = false;
    bool root = false;
};

struct EdgeDecl {
    std::string label;
    std::string from;
    std::string to;
    double length = 1.0;
};

struct GraphSpec {
    GraphMode mode = GraphMode::tree;
    std::vector<VertexDecl> vertices;
    std::vector<EdgeDecl> edges;
};

class MetricGraph;

/// Validates topology and Dirichlet data and freezes the graph. In tree mode
/// every edge is oriented away from the root; edges declared the other way are
/// flipped and flagged with Edge::reoriented.
[[nodiscard]] MetricGraph build_graph(const GraphSpec& spec);

class MetricGraph {
public:
    [[nodiscard]] GraphMode mode() const noexcept { return mode_; }
    [[nodiscard]] std::size_t vertex_count() const noexcept { return vertices_.size(); }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
    [[nodiscard]] const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const Vertex& vertex(VertexId v) const;
    [[nodiscard]] const Edge& edge(EdgeId e) const;

    [[nodiscard]] std::optional<VertexId> root() const noexcept { return root_; }
    [[nodiscard]] std::optional<VertexId> find_vertex(const std::string& label) const;
    [[nodiscard]] bool is_dirichlet(VertexId v) const { return vertex(v).dirichlet; }
    [[nodiscard]] std::size_t degree(VertexId v) const { return adjacent_edges(v).size(); }

    /// J_k with incidence signs. Throws Errc::unknown_vertex.
    [[nodiscard]] const std::vector<Incidence>& adjacent_edges(VertexId v) const;
    /// Vertices carrying transmission conditions (every non-Dirichlet vertex).
    [[nodiscard]] std::vector<VertexId> interior_vertices() const;
    [[nodiscard]] std::vector<VertexId> dirichlet_vertices() const;

private:
    friend MetricGraph build_graph(const GraphSpec& spec);
    MetricGraph() = default;

    GraphMode mode_ = GraphMode::tree;
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Incidence>> adjacency_;
    std::optional<VertexId> root_;
};

/// d[k][j] = +1 if edge j ends (x = length) at vertex k, -1 if it starts there.
struct IncidenceMatrix {
    Eigen::MatrixXi entries;

    [[nodiscard]] int operator()(VertexId k, EdgeId j) const {
        return entries(static_cast<Eigen::Index>(k.value), static_cast<Eigen::Index>(j.value));
    }
};

[[nodiscard]] IncidenceMatrix incidence_matrix(const MetricGraph& g);

struct ElasticComponent {
    std::vector<EdgeId> edges;
    std::vector<VertexId> vertices;
    bool is_tree = false;
    bool leaf_attachment_ok = false;
};

struct ValidationReport {
    std::vector<ElasticComponent> elastic_components;
    bool has_kv_edge = false;
    bool pass = false;
    std::vector<std::string> messages;
};

/// Checks the structural hypotheses on the damping layout: at least one K-V
/// edge, and every maximal purely elastic subgraph is a tree whose leaves
/// touch a K-V edge. A leaf that is a Dirichlet vertex of the whole graph is
/// accepted unless strict_leaves is set.
[[nodiscard]] ValidationReport validate_structure(const MetricGraph& g,
                                                  const DampingAssignment& damping,
                                                  bool strict_leaves = false);

}  // namespace graphwave
