#pragma once

#include "graphwave/discretize.hpp"
#include "graphwave/profile.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include <string>
#include <vector>

namespace graphwave {

struct State {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double t = 0.0;
};

/// Per-edge initial function. Polynomial pieces reuse the damping profile
/// layout (ascending powers, local coordinate), except that negative values
/// are allowed; sine terms are amplitude * sin(mode * pi * x / length).
struct EdgeFunction {
    enum class Kind { zero, sine, polynomial };
    Kind kind = Kind::zero;
    double amplitude = 0.0;
    double mode = 1.0;
    std::vector<double> breaks;
    std::vector<std::vector<double>> coeffs;
    bool reflected = false;  // evaluate at length - x (edge stored against its declared direction)

    [[nodiscard]] double operator()(double x, double length) const;
};

/// One EdgeFunction per edge (indexed by EdgeId).
using FieldSpec = std::vector<EdgeFunction>;

/// Nodal interpolation of u0, v0. Both must vanish at Dirichlet vertices and
/// agree at interior vertices (tolerance 1e-10), otherwise
/// Errc::incompatible_initial_data.
[[nodiscard]] State initial_state(const Mesh& mesh, const FieldSpec& u0, const FieldSpec& v0);

/// Sum of the lowest `count` undamped modes (K phi = mu M phi), each scaled to
/// unit energy phi^T K phi = 1, zero velocity.
[[nodiscard]] State undamped_modes_state(const DiscreteSystem& sys, int count);

[[nodiscard]] double energy(const DiscreteSystem& sys, const State& s);
[[nodiscard]] double dissipation_rate(const DiscreteSystem& sys, const Eigen::VectorXd& v);

/// Crank–Nicolson for z' = A z, reduced to one symmetric n x n solve per step:
///   (M + dt/2 Ka + dt^2/4 K) v1 = M v0 - dt/2 Ka v0 - dt K u0 - dt^2/4 K v0,
///   u1 = u0 + dt/2 (v0 + v1).
/// The step matrix is factorized once. Negative dt runs the scheme backwards.
class CrankNicolson {
public:
    CrankNicolson(const DiscreteSystem& sys, double dt);

    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] State step(const State& s) const;

private:
    const DiscreteSystem* sys_;
    double dt_;
    Eigen::SimplicialLDLT<SparseMatrix> solver_;
};

[[nodiscard]] State step(const DiscreteSystem& sys, const State& s, double dt);

struct EnergySample {
    double t = 0.0;
    double E = 0.0;                // 1/2 (u^T K u + v^T M v)
    double D = 0.0;                // v^T Ka v at the sample
    double D_mid = 0.0;            // v_mid^T Ka v_mid of the step ending here
    double diss_residual = 0.0;    // max |dE/dt + D_mid| over the steps since the previous sample
};

struct EnergyTrace {
    std::vector<EnergySample> samples;
    double dt = 0.0;
    int sample_every = 1;
    double generator_norm = 0.0;   // energy-norm estimate of A, used by check_dissipation
    std::string scheme = "crank-nicolson";
};

/// Default time step: half the smallest cell width.
[[nodiscard]] double default_time_step(const Mesh& mesh);

[[nodiscard]] EnergyTrace run(const DiscreteSystem& sys, const State& initial, double dt, double T,
                              int sample_every = 1);

/// Energy-norm estimate of the generator by power iteration.
[[nodiscard]] double generator_norm_estimate(const DiscreteSystem& sys, int iterations = 60);

/// Discrete dissipation identity, recomputed from consecutive samples:
/// |(E_{n+1} - E_n)/dt + D_mid| <= tol * E_0 * max(1, ||A|| dt) for every step.
/// Requires sample_every = 1.
[[nodiscard]] bool check_dissipation(const EnergyTrace& trace, double tol = 1e-8);

/// Largest |(E_{n+1} - E_n)/dt + D_mid| / E_0 over consecutive samples.
[[nodiscard]] double max_dissipation_residual(const EnergyTrace& trace);

enum class DecayModel { exponential, power };

struct DecayFit {
    DecayModel model = DecayModel::exponential;
    double t0 = 0.0;
    double t1 = 0.0;
    /// omega for E ~ E0 exp(-2 omega t), or p for E ~ C t^-p.
    double rate = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t samples_used = 0;
    double max_abs_residual = 0.0;  // in log E
};

/// Least squares on (t, log E). Window needs >= 20 samples with E above
/// 1e2 * eps * E(0); only those samples are fitted.
[[nodiscard]] DecayFit fit_exponential(const EnergyTrace& trace, double t0, double t1);
/// Least squares on (log t, log E); the window must exclude t = 0.
[[nodiscard]] DecayFit fit_power(const EnergyTrace& trace, double t0, double t1);

void write_trace_csv(const EnergyTrace& trace, const std::string& path);

}  // namespace graphwave
