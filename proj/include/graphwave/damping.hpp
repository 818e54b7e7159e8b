#pragma once

#include "graphwave/graph.hpp"
#include "graphwave/profile.hpp"

#include <string>
#include <vector>

namespace graphwave {

/// Default node tolerance, relative to the largest |a| in the network.
inline constexpr double default_node_tolerance = 1e-12;

struct EdgeDerivativeBounds {
    double sup_a = 0.0;
    double sup_da = 0.0;
    bool da_bounded = true;   // false when a jumps inside the edge
    double sup_d2a = 0.0;
    bool d2a_bounded = true;  // false when a or a' jumps inside the edge
};

struct NodeInequality {
    VertexId vertex;
    /// sum over J_k of d_kj a'_j(s_k): on a tree oriented away from the root this
    /// is a'_parent(l) - sum over children of a'_child(0).
    double node_value = 0.0;
    bool satisfied = true;
};

struct PropertyReport {
    GraphMode form = GraphMode::tree;
    std::vector<EdgeDerivativeBounds> edges;
    std::vector<NodeInequality> nodes;
    bool overall = true;
    std::vector<std::string> messages;
};

/// Regularity of a', a'' on every edge plus the signed node inequality at every
/// interior vertex. A node passes when node_value <= tol * max|a|.
[[nodiscard]] PropertyReport check_property_P(const MetricGraph& g, const DampingAssignment& damping,
                                              double tol = default_node_tolerance);

enum class ContinuityCase { I, II };

struct NodeContinuity {
    VertexId vertex;
    std::vector<double> values;  // a_j(s_k), one per incident edge, in J_k order
    bool continuous = true;
};

struct ContinuityReport {
    std::vector<NodeContinuity> nodes;
    ContinuityCase kind = ContinuityCase::I;
};

[[nodiscard]] ContinuityReport classify_continuity(const MetricGraph& g,
                                                   const DampingAssignment& damping,
                                                   double tol = default_node_tolerance);

/// a_j and a'_j at the endpoint of edge j that touches the vertex with the given sign.
[[nodiscard]] double endpoint_value(const DampingProfile& a, int sign);
[[nodiscard]] double endpoint_slope(const DampingProfile& a, int sign);

}  // namespace graphwave
