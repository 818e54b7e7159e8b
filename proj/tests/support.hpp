#pragma once

#include "graphwave/error.hpp"
#include "graphwave/network.hpp"
#include "graphwave/spectral.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace graphwave::test {

inline NetworkSpec spec_from(const char* text) { return parse_network(nlohmann::json::parse(text)); }

inline NetworkSpec single_kv_string(double a = 1.0) {
    auto doc = nlohmann::json::parse(R"({
      "mode": "tree",
      "vertices": [{"id": "R", "dirichlet": true, "root": true}, {"id": "E", "dirichlet": true}],
      "edges": [{"id": "s", "from": "R", "to": "E", "length": 1.0, "damping": {"kind": "constant", "value": 1.0}}]
    })");
    doc["edges"][0]["damping"]["value"] = a;
    if (a == 0.0) doc["edges"][0]["damping"] = {{"kind", "zero"}};
    return parse_network(doc);
}

inline NetworkSpec undamped_string() { return single_kv_string(0.0); }

/// Elastic edge R-O followed by a constant K-V edge O-E: a jumps at O.
inline NetworkSpec elastic_kv_chain() {
    return spec_from(R"({
      "mode": "tree",
      "vertices": [{"id": "R", "dirichlet": true, "root": true}, {"id": "O", "dirichlet": false},
                   {"id": "E", "dirichlet": true}],
      "edges": [{"id": "elastic", "from": "R", "to": "O", "length": 1.0, "damping": {"kind": "zero"}},
                {"id": "kv", "from": "O", "to": "E", "length": 1.0, "damping": {"kind": "constant", "value": 1.0}}]
    })");
}

/// Same chain with a(x) = x on the K-V edge, so a is continuous at O.
inline NetworkSpec elastic_kv_chain_continuous() {
    return spec_from(R"({
      "mode": "tree",
      "vertices": [{"id": "R", "dirichlet": true, "root": true}, {"id": "O", "dirichlet": false},
                   {"id": "E", "dirichlet": true}],
      "edges": [{"id": "elastic", "from": "R", "to": "O", "length": 1.0, "damping": {"kind": "zero"}},
                {"id": "kv", "from": "O", "to": "E", "length": 1.0,
                 "damping": {"kind": "pp", "breaks": [0, 1], "coeffs": [[0, 1]]}}]
    })");
}

/// Root edge elastic, two K-V legs.
inline NetworkSpec three_edge_star() {
    return spec_from(R"({
      "mode": "tree",
      "vertices": [{"id": "R", "dirichlet": true, "root": true}, {"id": "C", "dirichlet": false},
                   {"id": "L1", "dirichlet": true}, {"id": "L2", "dirichlet": true}],
      "edges": [{"id": "stem", "from": "R", "to": "C", "length": 1.0, "damping": {"kind": "zero"}},
                {"id": "leg1", "from": "C", "to": "L1", "length": 1.0, "damping": {"kind": "constant", "value": 1.0}},
                {"id": "leg2", "from": "C", "to": "L2", "length": 0.8, "damping": {"kind": "constant", "value": 0.5}}]
    })");
}

/// Five-edge tree R-O, O-O1, O-O2, O1-O11, O1-O12 with two elastic edges.
inline NetworkSpec two_level_tree() {
    return spec_from(R"({
      "mode": "tree",
      "vertices": [{"id": "R", "dirichlet": true, "root": true}, {"id": "O", "dirichlet": false},
                   {"id": "O1", "dirichlet": false}, {"id": "O2", "dirichlet": true},
                   {"id": "O11", "dirichlet": true}, {"id": "O12", "dirichlet": true}],
      "edges": [{"id": "RO", "from": "R", "to": "O", "length": 1.0, "damping": {"kind": "constant", "value": 1.0}},
                {"id": "OO1", "from": "O", "to": "O1", "length": 0.8, "damping": {"kind": "zero"}},
                {"id": "OO2", "from": "O", "to": "O2", "length": 0.6, "damping": {"kind": "constant", "value": 0.5}},
                {"id": "O1O11", "from": "O1", "to": "O11", "length": 0.7,
                 "damping": {"kind": "pp", "breaks": [0, 0.7], "coeffs": [[1, 0.5]]}},
                {"id": "O1O12", "from": "O1", "to": "O12", "length": 0.5, "damping": {"kind": "zero"}}]
    })");
}

/// Triangle A-B-C with a pendant Dirichlet edge C-D, graph mode.
inline NetworkSpec triangle_pendant() {
    return spec_from(R"({
      "mode": "graph",
      "vertices": [{"id": "A", "dirichlet": false}, {"id": "B", "dirichlet": false},
                   {"id": "C", "dirichlet": false}, {"id": "D", "dirichlet": true}],
      "edges": [{"id": "AB", "from": "A", "to": "B", "length": 1.0, "damping": {"kind": "constant", "value": 1.0}},
                {"id": "BC", "from": "B", "to": "C", "length": 1.0, "damping": {"kind": "zero"}},
                {"id": "CA", "from": "C", "to": "A", "length": 1.0, "damping": {"kind": "constant", "value": 0.5}},
                {"id": "CD", "from": "C", "to": "D", "length": 0.7, "damping": {"kind": "zero"}}]
    })");
}

/// All-K-V star with a continuous at the centre: a = (1 + x)/4 on the stem,
/// a = 1/2 + x/4 on both legs.
inline NetworkSpec kv_star_continuous() {
    return spec_from(R"({
      "mode": "tree",
      "vertices": [{"id": "R", "dirichlet": true, "root": true}, {"id": "C", "dirichlet": false},
                   {"id": "L1", "dirichlet": true}, {"id": "L2", "dirichlet": true}],
      "edges": [{"id": "stem", "from": "R", "to": "C", "length": 1.0,
                 "damping": {"kind": "pp", "breaks": [0, 1], "coeffs": [[0.25, 0.25]]}},
                {"id": "leg1", "from": "C", "to": "L1", "length": 1.0,
                 "damping": {"kind": "pp", "breaks": [0, 1], "coeffs": [[0.5, 0.25]]}},
                {"id": "leg2", "from": "C", "to": "L2", "length": 1.0,
                 "damping": {"kind": "pp", "breaks": [0, 1], "coeffs": [[0.5, 0.25]]}}]
    })");
}

inline std::vector<std::pair<std::string, NetworkSpec>> canonical_networks() {
    return {{"single K-V string", single_kv_string()},
            {"elastic + K-V chain", elastic_kv_chain()},
            {"three-edge star", three_edge_star()},
            {"two-level tree", two_level_tree()},
            {"triangle + pendant", triangle_pendant()}};
}

inline DiscreteSystem system_for(const NetworkSpec& spec, int cells, Execution exec = Execution::parallel) {
    const Network net = build_network(spec);
    MeshResolution res;
    res.cells_per_edge = cells;
    auto mesh = std::make_shared<const Mesh>(build_mesh(net.graph, res, net.damping));
    return assemble(mesh, net.damping, exec);
}

}  // namespace graphwave::test

namespace graphwave::test {

/// Runs f and reports the Errc it threw; nullopt if it returned normally.
template <class F>
std::optional<Errc> error_code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

}  // namespace graphwave::test

namespace graphwave::test {

/// DOF map between two meshes of the same network whose edges may be stored in
/// opposite directions: result[i] is the DOF of `other` at the physical point
/// of DOF i of `base`. Returns an empty vector when some point has no partner.
inline std::vector<Eigen::Index> dof_permutation(const Mesh& base, const Mesh& other) {
    std::vector<Eigen::Index> perm(base.dof_count(), -1);
    for (std::size_t i = 0; i < base.dof_count(); ++i) {
        const DofLocation& loc = base.location(i);
        if (loc.vertex) {
            perm[i] = other.vertex_dof(*loc.vertex);
            continue;
        }
        const Edge& eb = base.graph().edge(loc.edge);
        const Edge& eo = other.graph().edge(loc.edge);
        const bool flipped = eb.tail != eo.tail;
        const double x = flipped ? eb.length - loc.x : loc.x;
        const EdgeMesh& em = other.edge(loc.edge);
        for (std::size_t k = 0; k < em.nodes.size(); ++k)
            if (std::abs(em.nodes[k] - x) <= 1e-12 * eb.length) perm[i] = em.dofs[k];
    }
    for (auto p : perm)
        if (p < 0) return {};
    return perm;
}

/// max |A(i, j) - B(p[i], p[j])| over the union of both sparsity patterns.
inline double permuted_difference(const SparseMatrix& A, const SparseMatrix& B, const std::vector<Eigen::Index>& p) {
    const Eigen::MatrixXd a(A);
    const Eigen::MatrixXd b(B);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            worst = std::max(worst, std::abs(a(i, j) - b(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)])));
    return worst;
}

}  // namespace graphwave::test
