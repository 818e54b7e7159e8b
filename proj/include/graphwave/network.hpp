#pragma once

#include "graphwave/damping.hpp"
#include "graphwave/discretize.hpp"
#include "graphwave/graph.hpp"
#include "graphwave/profile.hpp"
#include "graphwave/spectral.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace graphwave {

struct Tolerances {
    double node = default_node_tolerance;        // (P) node inequality, relative to max|a|
    double continuity = default_node_tolerance;  // spread of a at a vertex for case I
    double dissipation = 1e-8;
    StabilityThresholds thresholds;
};

/// A network description as read from JSON, before validation. Damping
/// profiles are stored in the declared edge direction.
struct NetworkSpec {
    GraphSpec graph;
    std::vector<DampingProfile> damping;
    MeshResolution resolution;
    Tolerances tolerances;
    bool strict_leaves = false;
};

/// A validated network: profiles follow the stored edge orientation.
struct Network {
    MetricGraph graph;
    DampingAssignment damping;
    MeshResolution resolution;
    Tolerances tolerances;
    bool strict_leaves = false;
};

/// Schema errors throw Errc::invalid_spec with the offending JSON path.
[[nodiscard]] NetworkSpec parse_network(const nlohmann::json& doc);
[[nodiscard]] NetworkSpec load_network(const std::string& path);

[[nodiscard]] DampingProfile parse_profile(const nlohmann::json& doc, double length, const std::string& where);
[[nodiscard]] nlohmann::json profile_to_json(const DampingProfile& a);

/// Builds the graph and reflects the profile of every edge that tree-mode
/// orientation flipped.
[[nodiscard]] Network build_network(const NetworkSpec& spec);

/// Canonical JSON form of a spec; fixes key order and number formatting so
/// that it can be embedded in manifests.
[[nodiscard]] nlohmann::json network_to_json(const NetworkSpec& spec);

}  // namespace graphwave
