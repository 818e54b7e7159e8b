#include "graphwave/damping.hpp"

#include "graphwave/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graphwave {

namespace {

double absolute_tolerance(const DampingAssignment& damping, double tol) {
    double scale = 0.0;
    for (const auto& a : damping) scale = std::max(scale, a.sup_abs(0));
    return tol * (scale > 0.0 ? scale : 1.0);
}

void require_total(const MetricGraph& g, const DampingAssignment& damping) {
    if (damping.size() != g.edge_count())
        throw Error(Errc::invalid_argument, "damping assignment does not cover every edge");
}

}  // namespace

double endpoint_value(const DampingProfile& a, int sign) {
    return sign > 0 ? a.value_at_head() : a.value_at_tail();
}

double endpoint_slope(const DampingProfile& a, int sign) {
    return sign > 0 ? a.d1_at_head() : a.d1_at_tail();
}

PropertyReport check_property_P(const MetricGraph& g, const DampingAssignment& damping, double tol) {
    require_total(g, damping);
    PropertyReport report;
    report.form = g.mode();
    const double atol = absolute_tolerance(damping, tol);

    for (const auto& e : g.edges()) {
        const auto& a = damping[e.id.value];
        EdgeDerivativeBounds b;
        b.sup_a = a.sup_abs(0);
        const double jump0 = a.max_jump(0);
        const double jump1 = a.max_jump(1);
        b.da_bounded = jump0 <= atol;
        b.d2a_bounded = b.da_bounded && jump1 <= tol * std::max(1.0, a.sup_abs(1));
        b.sup_da = b.da_bounded ? a.sup_abs(1) : std::numeric_limits<double>::infinity();
        b.sup_d2a = b.d2a_bounded ? a.sup_abs(2) : std::numeric_limits<double>::infinity();
        if (!b.da_bounded)
            report.messages.push_back("edge '" + e.label + "': a jumps inside the edge, a' not in L-infinity");
        else if (!b.d2a_bounded)
            report.messages.push_back("edge '" + e.label + "': a' has a kink inside the edge, a'' not in L-infinity");
        report.overall = report.overall && b.da_bounded && b.d2a_bounded;
        report.edges.push_back(b);
    }

    for (VertexId k : g.interior_vertices()) {
        NodeInequality node{k, 0.0, true};
        for (const auto& inc : g.adjacent_edges(k))
            node.node_value += inc.sign * endpoint_slope(damping[inc.edge.value], inc.sign);
        node.satisfied = node.node_value <= atol;
        if (!node.satisfied)
            report.messages.push_back("node '" + g.vertex(k).label + "': signed slope sum " +
                                      std::to_string(node.node_value) + " > 0");
        report.overall = report.overall && node.satisfied;
        report.nodes.push_back(node);
    }
    return report;
}

ContinuityReport classify_continuity(const MetricGraph& g, const DampingAssignment& damping,
                                     double tol) {
    require_total(g, damping);
    ContinuityReport report;
    const double atol = absolute_tolerance(damping, tol);
    for (VertexId k : g.interior_vertices()) {
        NodeContinuity node{k, {}, true};
        for (const auto& inc : g.adjacent_edges(k))
            node.values.push_back(endpoint_value(damping[inc.edge.value], inc.sign));
        const auto [lo, hi] = std::minmax_element(node.values.begin(), node.values.end());
        node.continuous = node.values.empty() || (*hi - *lo) <= atol;
        if (!node.continuous) report.kind = ContinuityCase::II;
        report.nodes.push_back(std::move(node));
    }
    return report;
}

}  // namespace graphwave
