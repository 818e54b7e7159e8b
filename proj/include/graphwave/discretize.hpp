#pragma once

#include "graphwave/graph.hpp"
#include "graphwave/profile.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace graphwave {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Execution { serial, parallel };

/// How many cells each edge gets. Priority: per-edge override, then a uniform
/// count, then ceil(cells_per_unit_length * length).
struct MeshResolution {
    std::optional<int> cells_per_edge;
    double cells_per_unit_length = 32.0;
    std::vector<std::optional<int>> per_edge;  // indexed by EdgeId; may be shorter

    [[nodiscard]] int cells_for(const Edge& e) const;
};

struct EdgeMesh {
    EdgeId edge;
    std::vector<double> nodes;            // coordinates, nodes.front() = 0, nodes.back() = length
    std::vector<std::int64_t> dofs;       // global DOF per node, -1 if clamped
};

struct DofLocation {
    EdgeId edge;
    double x = 0.0;
    std::optional<VertexId> vertex;  // set for DOFs shared at a vertex
};

/// P1 grid on every edge with one shared DOF per non-Dirichlet vertex and the
/// Dirichlet nodes eliminated.
class Mesh {
public:
    [[nodiscard]] const MetricGraph& graph() const noexcept { return graph_; }
    [[nodiscard]] std::size_t dof_count() const noexcept { return locations_.size(); }
    [[nodiscard]] const std::vector<EdgeMesh>& edges() const noexcept { return edges_; }
    [[nodiscard]] const EdgeMesh& edge(EdgeId e) const { return edges_.at(e.value); }
    [[nodiscard]] const DofLocation& location(std::size_t dof) const { return locations_.at(dof); }
    [[nodiscard]] std::int64_t vertex_dof(VertexId v) const { return vertex_dofs_.at(v.value); }
    [[nodiscard]] double min_cell_width() const noexcept;
    [[nodiscard]] double max_cell_width() const noexcept;

private:
    friend Mesh build_mesh(const MetricGraph&, const MeshResolution&, const DampingAssignment&);
    explicit Mesh(MetricGraph g) : graph_(std::move(g)) {}

    MetricGraph graph_;
    std::vector<EdgeMesh> edges_;
    std::vector<DofLocation> locations_;
    std::vector<std::int64_t> vertex_dofs_;
};

/// Uniform cells per edge; interior damping breakpoints are snapped onto the
/// nearest grid node (or inserted when that node is already taken).
[[nodiscard]] Mesh build_mesh(const MetricGraph& g, const MeshResolution& resolution,
                              const DampingAssignment& damping = {});

/// Highest damping degree accepted by assembly.
inline constexpr int max_damping_degree = 20;

struct DiscreteSystem {
    std::shared_ptr<const Mesh> mesh;
    SparseMatrix M;   // consistent mass
    SparseMatrix K;   // stiffness
    SparseMatrix Ka;  // damped stiffness, entries int a phi_i' phi_j'

    [[nodiscard]] Eigen::Index n() const noexcept { return M.rows(); }
    [[nodiscard]] bool undamped() const noexcept { return Ka.nonZeros() == 0; }
};

[[nodiscard]] DiscreteSystem assemble(std::shared_ptr<const Mesh> mesh, const DampingAssignment& damping,
                                      Execution exec = Execution::parallel);

/// Throws Errc::singular_mass / Errc::linear_solve_failure if M or K is not SPD.
void check_positive_definite(const DiscreteSystem& sys);

/// (u, v) -> (v, -M^{-1}(K u + Ka v)) with M factorized once.
class GeneratorAction {
public:
    explicit GeneratorAction(const DiscreteSystem& sys);

    [[nodiscard]] Eigen::Index n() const noexcept { return n_; }
    /// z = [u; v] of length 2n.
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& z) const;

private:
    const DiscreteSystem* sys_;
    Eigen::Index n_;
    Eigen::SimplicialLLT<SparseMatrix> mass_;
};

[[nodiscard]] GeneratorAction generator(const DiscreteSystem& sys);

/// Explicit 2n x 2n generator; small systems only (test and diagnostics).
[[nodiscard]] Eigen::MatrixXd dense_generator(const DiscreteSystem& sys);

/// Energy inner product u1^T K u2 + v1^T M v2 of two stacked states.
[[nodiscard]] double energy_inner(const DiscreteSystem& sys, const Eigen::VectorXd& z1,
                                  const Eigen::VectorXd& z2);

/// Generator in energy-orthonormal coordinates: with K = L_K L_K^T and
/// M = L_M L_M^T, B = L^T A L^{-T} = [[0, C], [-C^T, -D]] where
/// C = L_K^T L_M^{-T} and D = L_M^{-1} Ka L_M^{-T}. Euclidean norms of B-based
/// quantities equal energy norms of the original ones.
[[nodiscard]] Eigen::MatrixXd energy_frame_generator(const DiscreteSystem& sys);

struct WellPosedness {
    bool zero_in_resolvent = false;
    bool one_in_resolvent = false;
    bool dissipative = false;
    double condition_zero = 0.0;   // cond of A in the energy norm
    double condition_one = 0.0;    // cond of I - A in the energy norm
    double max_defect = 0.0;       // max |Re<Az,z>_E + v^T Ka v| / scale over samples
    double max_dissipation = 0.0;  // max Re<Az,z>_E / ||z||_E^2 over samples (must be <= 0)
    std::string method;
};

struct WellPosednessOptions {
    int samples = 100;
    std::uint64_t seed = 20240611;
    double condition_limit = 1e12;
    Eigen::Index dense_threshold = 4000;
};

[[nodiscard]] WellPosedness check_generator_wellposed(const DiscreteSystem& sys,
                                                      const WellPosednessOptions& opts = {});

/// MatrixMarket coordinate dump (general real), for cross-checks with other tools.
void write_matrix_market(const SparseMatrix& m, const std::string& path);

}  // namespace graphwave
