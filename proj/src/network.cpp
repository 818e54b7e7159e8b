#include "graphwave/network.hpp"

#include "graphwave/error.hpp"

#include <fstream>
#include <set>

namespace graphwave {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw Error(Errc::invalid_spec, where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) schema_error(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
    return *it;
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) schema_error(where, "expected a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) schema_error(where, "expected a string");
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) schema_error(where, "expected true or false");
    return v.get<bool>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.contains(it.key())) schema_error(where, "unknown field '" + it.key() + "'");
}

}  // namespace

DampingProfile parse_profile(const json& doc, double length, const std::string& where) {
    const std::string kind = as_string(require(doc, "kind", where), where + ".kind");
    if (kind == "zero") {
        reject_unknown(doc, {"kind"}, where);
        return DampingProfile::zero(length);
    }
    if (kind == "constant") {
        reject_unknown(doc, {"kind", "value"}, where);
        return DampingProfile::constant(as_number(require(doc, "value", where), where + ".value"), length);
    }
    if (kind == "pp") {
        reject_unknown(doc, {"kind", "breaks", "coeffs"}, where);
        const json& b = require(doc, "breaks", where);
        const json& c = require(doc, "coeffs", where);
        if (!b.is_array() || !c.is_array()) schema_error(where, "breaks and coeffs must be arrays");
        std::vector<double> breaks;
        for (std::size_t i = 0; i < b.size(); ++i)
            breaks.push_back(as_number(b[i], where + ".breaks[" + std::to_string(i) + "]"));
        std::vector<std::vector<double>> coeffs;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!c[i].is_array()) schema_error(where + ".coeffs[" + std::to_string(i) + "]", "expected an array");
            std::vector<double> piece;
            for (std::size_t k = 0; k < c[i].size(); ++k)
                piece.push_back(
                    as_number(c[i][k], where + ".coeffs[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
            coeffs.push_back(std::move(piece));
        }
        if (breaks.empty() || std::abs(breaks.back() - length) > 1e-12 * std::max(1.0, length))
            throw Error(Errc::invalid_profile, where + ": breaks must end at the edge length " + std::to_string(length));
        return DampingProfile::piecewise(std::move(breaks), std::move(coeffs));
    }
    schema_error(where + ".kind", "unknown profile kind '" + kind + "'");
}

json profile_to_json(const DampingProfile& a) {
    switch (a.kind()) {
        case ProfileKind::zero: return json{{"kind", "zero"}};
        case ProfileKind::constant: return json{{"kind", "constant"}, {"value", a.eval(0.0)}};
        case ProfileKind::piecewise: {
            json coeffs = json::array();
            for (std::size_t i = 0; i < a.piece_count(); ++i) coeffs.push_back(a.piece(i));
            return json{{"kind", "pp"}, {"breaks", a.breaks()}, {"coeffs", coeffs}};
        }
    }
    return json{{"kind", "zero"}};
}

NetworkSpec parse_network(const json& doc) {
    if (!doc.is_object()) schema_error("$", "expected an object");
    reject_unknown(doc, {"mode", "vertices", "edges", "tolerances", "strict_leaves", "resolution", "name"}, "$");

    NetworkSpec spec;
    const std::string mode = as_string(require(doc, "mode", "$"), "$.mode");
    if (mode == "tree")
        spec.graph.mode = GraphMode::tree;
    else if (mode == "graph")
        spec.graph.mode = GraphMode::graph;
    else
        schema_error("$.mode", "expected \"tree\" or \"graph\", got \"" + mode + "\"");

    const json& vertices = require(doc, "vertices", "$");
    if (!vertices.is_array()) schema_error("$.vertices", "expected an array");
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const std::string where = "$.vertices[" + std::to_string(i) + "]";
        const json& v = vertices[i];
        if (!v.is_object()) schema_error(where, "expected an object");
        reject_unknown(v, {"id", "dirichlet", "root"}, where);
        VertexDecl decl;
        decl.label = as_string(require(v, "id", where), where + ".id");
        decl.dirichlet = as_bool(require(v, "dirichlet", where), where + ".dirichlet");
        if (v.contains("root")) decl.root = as_bool(v["root"], where + ".root");
        spec.graph.vertices.push_back(decl);
    }

    const json& edges = require(doc, "edges", "$");
    if (!edges.is_array()) schema_error("$.edges", "expected an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string where = "$.edges[" + std::to_string(i) + "]";
        const json& e = edges[i];
        if (!e.is_object()) schema_error(where, "expected an object");
        reject_unknown(e, {"id", "from", "to", "length", "cells", "damping"}, where);
        EdgeDecl decl;
        decl.label = as_string(require(e, "id", where), where + ".id");
        decl.from = as_string(require(e, "from", where), where + ".from");
        decl.to = as_string(require(e, "to", where), where + ".to");
        decl.length = as_number(require(e, "length", where), where + ".length");
        if (!(decl.length > 0.0))
            throw Error(Errc::nonpositive_length, where + ": edge '" + decl.label + "' has length " +
                                                       std::to_string(decl.length));
        std::optional<int> cells;
        if (e.contains("cells")) {
            if (!e["cells"].is_number_integer()) schema_error(where + ".cells", "expected an integer");
            cells = e["cells"].get<int>();
        }
        spec.resolution.per_edge.push_back(cells);
        spec.damping.push_back(e.contains("damping") ? parse_profile(e["damping"], decl.length, where + ".damping")
                                                     : DampingProfile::zero(decl.length));
        spec.graph.edges.push_back(decl);
    }

    if (doc.contains("resolution")) {
        const json& r = doc["resolution"];
        reject_unknown(r, {"cells_per_edge", "cells_per_unit_length"}, "$.resolution");
        if (r.contains("cells_per_edge")) {
            if (!r["cells_per_edge"].is_number_integer())
                schema_error("$.resolution.cells_per_edge", "expected an integer");
            spec.resolution.cells_per_edge = r["cells_per_edge"].get<int>();
        }
        if (r.contains("cells_per_unit_length"))
            spec.resolution.cells_per_unit_length =
                as_number(r["cells_per_unit_length"], "$.resolution.cells_per_unit_length");
    }

    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        reject_unknown(t, {"node", "continuity", "dissipation", "exponential_max_slope", "polynomial_min_slope",
                           "polynomial_max_slope"},
                       "$.tolerances");
        auto read = [&](const char* key, double& target) {
            if (t.contains(key)) target = as_number(t[key], std::string("$.tolerances.") + key);
        };
        read("node", spec.tolerances.node);
        read("continuity", spec.tolerances.continuity);
        read("dissipation", spec.tolerances.dissipation);
        read("exponential_max_slope", spec.tolerances.thresholds.exponential_max_slope);
        read("polynomial_min_slope", spec.tolerances.thresholds.polynomial_min_slope);
        read("polynomial_max_slope", spec.tolerances.thresholds.polynomial_max_slope);
    }
    if (doc.contains("strict_leaves")) spec.strict_leaves = as_bool(doc["strict_leaves"], "$.strict_leaves");
    return spec;
}

NetworkSpec load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_spec, "cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::invalid_spec, path + ": " + e.what());
    }
    return parse_network(doc);
}

Network build_network(const NetworkSpec& spec) {
    Network net{build_graph(spec.graph), {}, spec.resolution, spec.tolerances, spec.strict_leaves};
    net.damping.reserve(spec.damping.size());
    for (const auto& e : net.graph.edges()) {
        const DampingProfile& a = spec.damping.at(e.id.value);
        net.damping.push_back(e.reoriented ? a.reflected() : a);
    }
    return net;
}

json network_to_json(const NetworkSpec& spec) {
    json doc;
    doc["mode"] = to_string(spec.graph.mode);
    json vertices = json::array();
    for (const auto& v : spec.graph.vertices) {
        json jv{{"id", v.label}, {"dirichlet", v.dirichlet}};
        if (v.root) jv["root"] = true;
        vertices.push_back(jv);
    }
    doc["vertices"] = vertices;
    json edges = json::array();
    for (std::size_t i = 0; i < spec.graph.edges.size(); ++i) {
        const auto& e = spec.graph.edges[i];
        json je{{"id", e.label}, {"from", e.from}, {"to", e.to}, {"length", e.length}};
        if (i < spec.resolution.per_edge.size() && spec.resolution.per_edge[i]) je["cells"] = *spec.resolution.per_edge[i];
        je["damping"] = profile_to_json(spec.damping[i]);
        edges.push_back(je);
    }
    doc["edges"] = edges;
    json res{{"cells_per_unit_length", spec.resolution.cells_per_unit_length}};
    if (spec.resolution.cells_per_edge) res["cells_per_edge"] = *spec.resolution.cells_per_edge;
    doc["resolution"] = res;
    doc["tolerances"] = json{{"node", spec.tolerances.node},
                             {"continuity", spec.tolerances.continuity},
                             {"dissipation", spec.tolerances.dissipation},
                             {"exponential_max_slope", spec.tolerances.thresholds.exponential_max_slope},
                             {"polynomial_min_slope", spec.tolerances.thresholds.polynomial_min_slope},
                             {"polynomial_max_slope", spec.tolerances.thresholds.polynomial_max_slope}};
    doc["strict_leaves"] = spec.strict_leaves;
    return doc;
}

}  // namespace graphwave
