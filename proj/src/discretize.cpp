#include "graphwave/discretize.hpp"

#include "graphwave/error.hpp"
#include "graphwave/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace graphwave {

using Triplet = Eigen::Triplet<double>;

int MeshResolution::cells_for(const Edge& e) const {
    int cells = 0;
    if (e.id.value < per_edge.size() && per_edge[e.id.value]) {
        cells = *per_edge[e.id.value];
    } else if (cells_per_edge) {
        cells = *cells_per_edge;
    } else {
        cells = static_cast<int>(std::ceil(cells_per_unit_length * e.length - 1e-9));
    }
    if (cells < 2)
        throw Error(Errc::resolution_too_coarse,
                    "edge '" + e.label + "' would get " + std::to_string(cells) + " cells (need >= 2)");
    return cells;
}

double Mesh::min_cell_width() const noexcept {
    double h = std::numeric_limits<double>::infinity();
    for (const auto& em : edges_)
        for (std::size_t i = 1; i < em.nodes.size(); ++i) h = std::min(h, em.nodes[i] - em.nodes[i - 1]);
    return h;
}

double Mesh::max_cell_width() const noexcept {
    double h = 0.0;
    for (const auto& em : edges_)
        for (std::size_t i = 1; i < em.nodes.size(); ++i) h = std::max(h, em.nodes[i] - em.nodes[i - 1]);
    return h;
}

namespace {

std::vector<double> edge_nodes(double length, int cells, const DampingProfile* profile) {
    const double h = length / cells;
    std::vector<double> nodes(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i) nodes[static_cast<std::size_t>(i)] = length * i / cells;
    nodes.back() = length;
    if (profile == nullptr || profile->piece_count() < 2) return nodes;

    std::vector<bool> snapped(nodes.size(), false);
    std::vector<double> inserted;
    const auto& breaks = profile->breaks();
    for (std::size_t b = 1; b + 1 < breaks.size(); ++b) {
        const double bp = breaks[b] * (length / profile->length());
        auto i = static_cast<std::size_t>(std::clamp<long>(std::lround(bp / h), 1, cells - 1));
        if (std::abs(nodes[i] - bp) <= 1e-12 * length) {
            nodes[i] = bp;
            snapped[i] = true;
        } else if (!snapped[i] && std::abs(nodes[i] - bp) <= 0.5 * h) {
            nodes[i] = bp;
            snapped[i] = true;
        } else {
            inserted.push_back(bp);
        }
    }
    nodes.insert(nodes.end(), inserted.begin(), inserted.end());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [&](double a, double b) { return std::abs(a - b) <= 1e-12 * length; }),
                nodes.end());
    return nodes;
}

}  // namespace

Mesh build_mesh(const MetricGraph& g, const MeshResolution& resolution, const DampingAssignment& damping) {
    if (!damping.empty() && damping.size() != g.edge_count())
        throw Error(Errc::invalid_argument, "damping assignment does not cover every edge");

    Mesh mesh(g);
    mesh.vertex_dofs_.assign(g.vertex_count(), -1);
    std::int64_t next = 0;
    for (const auto& v : g.vertices()) {
        if (v.dirichlet) continue;
        mesh.vertex_dofs_[v.id.value] = next++;
        // The location is filled when the first incident edge is meshed.
        mesh.locations_.push_back({EdgeId{}, 0.0, v.id});
    }
    std::vector<bool> vertex_located(g.vertex_count(), false);

    for (const auto& e : g.edges()) {
        const int cells = resolution.cells_for(e);
        const DampingProfile* profile = damping.empty() ? nullptr : &damping[e.id.value];
        EdgeMesh em{e.id, edge_nodes(e.length, cells, profile), {}};
        em.dofs.resize(em.nodes.size());
        em.dofs.front() = mesh.vertex_dofs_[e.tail.value];
        em.dofs.back() = mesh.vertex_dofs_[e.head.value];
        for (std::size_t i = 1; i + 1 < em.nodes.size(); ++i) {
            em.dofs[i] = next++;
            mesh.locations_.push_back({e.id, em.nodes[i], std::nullopt});
        }
        for (auto [v, x] : {std::pair{e.tail, 0.0}, std::pair{e.head, e.length}}) {
            const auto dof = mesh.vertex_dofs_[v.value];
            if (dof >= 0 && !vertex_located[v.value]) {
                mesh.locations_[static_cast<std::size_t>(dof)] = {e.id, x, v};
                vertex_located[v.value] = true;
            }
        }
        mesh.edges_.push_back(std::move(em));
    }
    return mesh;
}

namespace {

struct EdgeContribution {
    std::vector<Triplet> mass;
    std::vector<Triplet> stiffness;
    std::vector<Triplet> damped;
};

EdgeContribution assemble_edge(const EdgeMesh& em, const DampingProfile& a) {
    EdgeContribution out;
    const int deg = a.degree();
    const QuadratureRule rule = gauss_legendre(std::max(1, (deg + 2 + 1) / 2));
    const double scale = a.length();
    for (std::size_t c = 0; c + 1 < em.nodes.size(); ++c) {
        const double x0 = em.nodes[c];
        const double x1 = em.nodes[c + 1];
        const double h = x1 - x0;
        double integral = 0.0;
        if (!a.is_zero()) {
            // Cells never straddle a breakpoint after snapping, so one piece covers the cell.
            const std::size_t piece = a.piece_at(std::min(0.5 * (x0 + x1), scale));
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double x = x0 + 0.5 * h * (rule.nodes[q] + 1.0);
                integral += 0.5 * h * rule.weights[q] * a.eval_piece(piece, x);
            }
        }
        const std::int64_t dof[2] = {em.dofs[c], em.dofs[c + 1]};
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                if (dof[i] < 0 || dof[j] < 0) continue;
                const auto r = static_cast<Eigen::Index>(dof[i]);
                const auto s = static_cast<Eigen::Index>(dof[j]);
                const double sign = (i == j) ? 1.0 : -1.0;
                out.mass.emplace_back(r, s, h * ((i == j) ? 2.0 : 1.0) / 6.0);
                out.stiffness.emplace_back(r, s, sign / h);
                if (!a.is_zero()) out.damped.emplace_back(r, s, sign * integral / (h * h));
            }
        }
    }
    return out;
}

SparseMatrix from_triplets(Eigen::Index n, const std::vector<EdgeContribution>& parts,
                           std::vector<Triplet> EdgeContribution::*member) {
    std::size_t total = 0;
    for (const auto& p : parts) total += (p.*member).size();
    std::vector<Triplet> all;
    all.reserve(total);
    for (const auto& p : parts) all.insert(all.end(), (p.*member).begin(), (p.*member).end());
    SparseMatrix m(n, n);
    m.setFromTriplets(all.begin(), all.end());
    m.makeCompressed();
    return m;
}

}  // namespace

DiscreteSystem assemble(std::shared_ptr<const Mesh> mesh, const DampingAssignment& damping, Execution exec) {
    const MetricGraph& g = mesh->graph();
    if (damping.size() != g.edge_count())
        throw Error(Errc::invalid_argument, "damping assignment does not cover every edge");
    for (const auto& e : g.edges()) {
        const auto& a = damping[e.id.value];
        if (a.degree() > max_damping_degree)
            throw Error(Errc::quadrature_degree_overflow,
                        "edge '" + e.label + "' damping degree " + std::to_string(a.degree()) + " > " +
                            std::to_string(max_damping_degree));
        if (std::abs(a.length() - e.length) > 1e-12 * e.length)
            throw Error(Errc::invalid_argument, "edge '" + e.label + "' damping length mismatch");
    }

    const auto edge_count = static_cast<std::ptrdiff_t>(g.edge_count());
    std::vector<EdgeContribution> parts(g.edge_count());
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t e = 0; e < edge_count; ++e) {
            const auto ue = static_cast<std::size_t>(e);
            parts[ue] = assemble_edge(mesh->edges()[ue], damping[ue]);
        }
    } else {
        for (std::size_t e = 0; e < g.edge_count(); ++e) parts[e] = assemble_edge(mesh->edges()[e], damping[e]);
    }

    const auto n = static_cast<Eigen::Index>(mesh->dof_count());
    DiscreteSystem sys;
    sys.M = from_triplets(n, parts, &EdgeContribution::mass);
    sys.K = from_triplets(n, parts, &EdgeContribution::stiffness);
    sys.Ka = from_triplets(n, parts, &EdgeContribution::damped);
    sys.mesh = std::move(mesh);
    return sys;
}

void check_positive_definite(const DiscreteSystem& sys) {
    Eigen::SimplicialLLT<SparseMatrix> llt(sys.M);
    if (llt.info() != Eigen::Success) throw Error(Errc::singular_mass, "mass matrix is not SPD");
    llt.compute(sys.K);
    if (llt.info() != Eigen::Success)
        throw Error(Errc::linear_solve_failure, "stiffness matrix is not SPD (missing Dirichlet vertex?)");
}

GeneratorAction::GeneratorAction(const DiscreteSystem& sys) : sys_(&sys), n_(sys.n()), mass_(sys.M) {
    if (mass_.info() != Eigen::Success) throw Error(Errc::singular_mass, "mass matrix factorization failed");
}

Eigen::VectorXd GeneratorAction::apply(const Eigen::VectorXd& z) const {
    if (z.size() != 2 * n_) throw Error(Errc::invalid_argument, "state length must be 2n");
    Eigen::VectorXd out(2 * n_);
    const auto u = z.head(n_);
    const auto v = z.tail(n_);
    out.head(n_) = v;
    Eigen::VectorXd rhs = sys_->K * u + sys_->Ka * v;
    out.tail(n_) = -mass_.solve(rhs);
    return out;
}

GeneratorAction generator(const DiscreteSystem& sys) { return GeneratorAction(sys); }

Eigen::MatrixXd dense_generator(const DiscreteSystem& sys) {
    const Eigen::Index n = sys.n();
    const Eigen::MatrixXd M = Eigen::MatrixXd(sys.M);
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw Error(Errc::singular_mass, "mass matrix is not SPD");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    A.topRightCorner(n, n).setIdentity();
    A.bottomLeftCorner(n, n) = -llt.solve(Eigen::MatrixXd(sys.K));
    A.bottomRightCorner(n, n) = -llt.solve(Eigen::MatrixXd(sys.Ka));
    return A;
}

double energy_inner(const DiscreteSystem& sys, const Eigen::VectorXd& z1, const Eigen::VectorXd& z2) {
    const Eigen::Index n = sys.n();
    return z1.head(n).dot(sys.K * z2.head(n)) + z1.tail(n).dot(sys.M * z2.tail(n));
}

Eigen::MatrixXd energy_frame_generator(const DiscreteSystem& sys) {
    const Eigen::Index n = sys.n();
    Eigen::LLT<Eigen::MatrixXd> lk{Eigen::MatrixXd(sys.K)};
    Eigen::LLT<Eigen::MatrixXd> lm{Eigen::MatrixXd(sys.M)};
    if (lm.info() != Eigen::Success) throw Error(Errc::singular_mass, "mass matrix is not SPD");
    if (lk.info() != Eigen::Success) throw Error(Errc::linear_solve_failure, "stiffness matrix is not SPD");
    const Eigen::MatrixXd LK = lk.matrixL();
    const Eigen::MatrixXd LM = lm.matrixL();

    // C = L_K^T L_M^{-T}  <=>  C L_M^T = L_K^T  <=>  L_M C^T = L_K.
    const Eigen::MatrixXd Ct = LM.triangularView<Eigen::Lower>().solve(LK);
    // D = L_M^{-1} Ka L_M^{-T}.
    Eigen::MatrixXd D = LM.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(sys.Ka));
    D = LM.triangularView<Eigen::Lower>().solve(D.transpose()).eval();
    D = 0.5 * (D + D.transpose()).eval();

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    B.topRightCorner(n, n) = Ct.transpose();
    B.bottomLeftCorner(n, n) = -Ct;
    B.bottomRightCorner(n, n) = -D;
    return B;
}

namespace {

/// Largest singular value of a linear map in the energy norm, by power
/// iteration on T^# T where T^# is the energy-adjoint.
template <class Apply, class Adjoint>
double energy_norm_estimate(const DiscreteSystem& sys, Apply&& apply, Adjoint&& adjoint, int iterations,
                            std::uint64_t seed) {
    const Eigen::Index n = sys.n();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(2 * n);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        z /= std::sqrt(energy_inner(sys, z, z));
        Eigen::VectorXd w = adjoint(apply(z));
        lambda = energy_inner(sys, z, w);
        z = w;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace

WellPosedness check_generator_wellposed(const DiscreteSystem& sys, const WellPosednessOptions& opts) {
    WellPosedness out;
    const Eigen::Index n = sys.n();

    if (n <= opts.dense_threshold) {
        const Eigen::MatrixXd B = energy_frame_generator(sys);
        Eigen::BDCSVD<Eigen::MatrixXd> svd_a(B);
        const auto& sa = svd_a.singularValues();
        out.condition_zero = sa[sa.size() - 1] > 0.0 ? sa[0] / sa[sa.size() - 1]
                                                     : std::numeric_limits<double>::infinity();
        const Eigen::MatrixXd IB = Eigen::MatrixXd::Identity(2 * n, 2 * n) - B;
        Eigen::BDCSVD<Eigen::MatrixXd> svd_b(IB);
        const auto& sb = svd_b.singularValues();
        out.condition_one = sb[sb.size() - 1] > 0.0 ? sb[0] / sb[sb.size() - 1]
                                                    : std::numeric_limits<double>::infinity();
        out.method = "dense-svd";
    } else {
        Eigen::SimplicialLDLT<SparseMatrix> kfact(sys.K);
        Eigen::SimplicialLDLT<SparseMatrix> mfact(sys.M);
        if (kfact.info() != Eigen::Success || mfact.info() != Eigen::Success) {
            out.condition_zero = std::numeric_limits<double>::infinity();
        } else {
            // A^# = W^{-1} A^T W = [[0, -I], [M^{-1}K, -M^{-1}Ka]].
            auto apply_a = [&](const Eigen::VectorXd& z) {
                Eigen::VectorXd out_z(2 * n);
                out_z.head(n) = z.tail(n);
                out_z.tail(n) = -mfact.solve(Eigen::VectorXd(sys.K * z.head(n) + sys.Ka * z.tail(n)));
                return out_z;
            };
            auto adjoint_a = [&](const Eigen::VectorXd& z) {
                Eigen::VectorXd out_z(2 * n);
                out_z.head(n) = -z.tail(n);
                out_z.tail(n) = mfact.solve(Eigen::VectorXd(sys.K * z.head(n) - sys.Ka * z.tail(n)));
                return out_z;
            };
            auto apply_inv = [&](const Eigen::VectorXd& z) {
                Eigen::VectorXd out_z(2 * n);
                out_z.tail(n) = z.head(n);
                out_z.head(n) = -kfact.solve(Eigen::VectorXd(sys.M * z.tail(n) + sys.Ka * z.head(n)));
                return out_z;
            };
            auto adjoint_inv = [&](const Eigen::VectorXd& z) {
                Eigen::VectorXd out_z(2 * n);
                out_z.tail(n) = -z.head(n);
                out_z.head(n) = kfact.solve(Eigen::VectorXd(sys.M * z.tail(n) - sys.Ka * z.head(n)));
                return out_z;
            };
            const double norm_a = energy_norm_estimate(sys, apply_a, adjoint_a, 200, opts.seed);
            const double norm_inv = energy_norm_estimate(sys, apply_inv, adjoint_inv, 200, opts.seed + 1);
            out.condition_zero = norm_a * norm_inv;
            // Dissipativity gives ||(I - A) z|| >= ||z||, so cond(I - A) <= 1 + ||A||.
            out.condition_one = 1.0 + norm_a;
        }
        out.method = "power-iteration-estimate";
    }
    out.zero_in_resolvent = std::isfinite(out.condition_zero) && out.condition_zero < opts.condition_limit;
    out.one_in_resolvent = std::isfinite(out.condition_one) && out.condition_one < opts.condition_limit;

    const GeneratorAction action(sys);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    out.dissipative = true;
    for (int s = 0; s < opts.samples; ++s) {
        Eigen::VectorXd z(2 * n);
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
        const Eigen::VectorXd az = action.apply(z);
        const double form = energy_inner(sys, az, z);
        const auto v = z.tail(n);
        const double damping_term = v.dot(sys.Ka * v);
        const Eigen::VectorXd ku = sys.K * z.head(n);
        const double scale = std::abs(v.dot(ku)) + damping_term + std::abs(az.tail(n).dot(sys.M * v)) +
                             std::numeric_limits<double>::min();
        out.max_defect = std::max(out.max_defect, std::abs(form + damping_term) / scale);
        const double normalized = form / energy_inner(sys, z, z);
        out.max_dissipation = s == 0 ? normalized : std::max(out.max_dissipation, normalized);
        if (form > 1e-12 * scale) out.dissipative = false;
    }
    return out;
}

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error(Errc::invalid_argument, "cannot open '" + path + "' for writing");
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    os << std::setprecision(17);
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace graphwave
