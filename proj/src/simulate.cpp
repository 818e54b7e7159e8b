#include "graphwave/simulate.hpp"

#include "graphwave/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

namespace graphwave {

double EdgeFunction::operator()(double x, double length) const {
    if (reflected) x = length - x;
    switch (kind) {
        case Kind::zero:
            return 0.0;
        case Kind::sine:
            return amplitude * std::sin(mode * std::numbers::pi * x / length);
        case Kind::polynomial: {
            if (coeffs.empty()) return 0.0;
            auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
            auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(std::distance(breaks.begin(), it) - 1, 0));
            i = std::min(i, coeffs.size() - 1);
            return poly::eval(coeffs[i], x - breaks[i]);
        }
    }
    return 0.0;
}

namespace {

void check_compatible(const MetricGraph& g, const FieldSpec& f, const char* name) {
    if (f.size() != g.edge_count())
        throw Error(Errc::invalid_argument, std::string(name) + " must give one function per edge");
    for (const auto& v : g.vertices()) {
        std::vector<double> values;
        for (const auto& inc : g.adjacent_edges(v.id)) {
            const Edge& e = g.edge(inc.edge);
            values.push_back(f[e.id.value](inc.sign > 0 ? e.length : 0.0, e.length));
        }
        double scale = 1.0;
        for (double x : values) scale = std::max(scale, std::abs(x));
        const double tol = 1e-10 * scale;
        if (v.dirichlet) {
            for (double x : values)
                if (std::abs(x) > tol)
                    throw Error(Errc::incompatible_initial_data,
                                std::string(name) + " does not vanish at Dirichlet vertex '" + v.label + "'");
        } else {
            const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
            if (*hi - *lo > tol)
                throw Error(Errc::incompatible_initial_data,
                            std::string(name) + " is discontinuous at vertex '" + v.label + "'");
        }
    }
}

Eigen::VectorXd interpolate(const Mesh& mesh, const FieldSpec& f) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
    for (const auto& em : mesh.edges()) {
        const double length = mesh.graph().edge(em.edge).length;
        for (std::size_t i = 0; i < em.nodes.size(); ++i)
            if (em.dofs[i] >= 0) out[em.dofs[i]] = f[em.edge.value](em.nodes[i], length);
    }
    return out;
}

}  // namespace

State initial_state(const Mesh& mesh, const FieldSpec& u0, const FieldSpec& v0) {
    check_compatible(mesh.graph(), u0, "u0");
    check_compatible(mesh.graph(), v0, "v0");
    return State{interpolate(mesh, u0), interpolate(mesh, v0), 0.0};
}

State undamped_modes_state(const DiscreteSystem& sys, int count) {
    const Eigen::Index n = sys.n();
    if (count < 1 || count > n) throw Error(Errc::invalid_argument, "mode count out of range");

    // Subspace iteration on K^{-1} M with Rayleigh–Ritz.
    Eigen::SimplicialLDLT<SparseMatrix> kfact(sys.K);
    if (kfact.info() != Eigen::Success) throw Error(Errc::linear_solve_failure, "stiffness factorization failed");
    const Eigen::Index block = std::min<Eigen::Index>(n, count + 6);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd X(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
        for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);

    Eigen::VectorXd previous = Eigen::VectorXd::Constant(count, std::numeric_limits<double>::infinity());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz;
    for (int it = 0; it < 500; ++it) {
        Eigen::MatrixXd Y = kfact.solve(Eigen::MatrixXd(sys.M * X));
        const Eigen::MatrixXd Kr = Y.transpose() * (sys.K * Y);
        const Eigen::MatrixXd Mr = Y.transpose() * (sys.M * Y);
        ritz.compute(0.5 * (Kr + Kr.transpose()), 0.5 * (Mr + Mr.transpose()));
        if (ritz.info() != Eigen::Success) throw Error(Errc::eigensolver_failure, "Rayleigh-Ritz failed");
        X = Y * ritz.eigenvectors();
        const Eigen::VectorXd mu = ritz.eigenvalues().head(count);
        if (((mu - previous).array().abs() <= 1e-14 * mu.array().abs()).all()) break;
        previous = mu;
    }

    State s{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0.0};
    for (int j = 0; j < count; ++j) {
        Eigen::VectorXd phi = X.col(j);
        phi /= std::sqrt(phi.dot(sys.K * phi));
        Eigen::Index imax = 0;
        phi.cwiseAbs().maxCoeff(&imax);
        if (phi[imax] < 0) phi = -phi;
        s.u += phi;
    }
    return s;
}

double energy(const DiscreteSystem& sys, const State& s) {
    return 0.5 * (s.u.dot(sys.K * s.u) + s.v.dot(sys.M * s.v));
}

double dissipation_rate(const DiscreteSystem& sys, const Eigen::VectorXd& v) { return v.dot(sys.Ka * v); }

CrankNicolson::CrankNicolson(const DiscreteSystem& sys, double dt) : sys_(&sys), dt_(dt) {
    if (dt == 0.0 || !std::isfinite(dt)) throw Error(Errc::invalid_argument, "time step must be nonzero");
    SparseMatrix S = sys.M + (0.5 * dt) * sys.Ka + (0.25 * dt * dt) * sys.K;
    solver_.compute(S);
    if (solver_.info() != Eigen::Success)
        throw Error(Errc::linear_solve_failure, "Crank-Nicolson step matrix factorization failed");
}

State CrankNicolson::step(const State& s) const {
    const double dt = dt_;
    const Eigen::VectorXd rhs = sys_->M * s.v - (0.5 * dt) * (sys_->Ka * s.v) -
                                dt * (sys_->K * (s.u + (0.25 * dt) * s.v));
    State next;
    next.v = solver_.solve(rhs);
    if (solver_.info() != Eigen::Success) throw Error(Errc::linear_solve_failure, "Crank-Nicolson solve failed");
    next.u = s.u + (0.5 * dt) * (s.v + next.v);
    next.t = s.t + dt;
    return next;
}

State step(const DiscreteSystem& sys, const State& s, double dt) {
    if (!(dt > 0.0) && !(dt < 0.0)) throw Error(Errc::invalid_argument, "time step must be nonzero");
    return CrankNicolson(sys, dt).step(s);
}

double default_time_step(const Mesh& mesh) { return 0.5 * mesh.min_cell_width(); }

double generator_norm_estimate(const DiscreteSystem& sys, int iterations) {
    // ||A||_E <= sqrt(mu_max(K, M)) + mu_max(Ka, M); each term by power iteration on M^{-1}(.).
    Eigen::SimplicialLLT<SparseMatrix> mfact(sys.M);
    if (mfact.info() != Eigen::Success) throw Error(Errc::singular_mass, "mass matrix is not SPD");
    auto top = [&](const SparseMatrix& A) {
        Eigen::VectorXd x = Eigen::VectorXd::Ones(sys.n());
        double mu = 0.0;
        for (int it = 0; it < iterations; ++it) {
            x /= std::sqrt(x.dot(sys.M * x));
            Eigen::VectorXd y = mfact.solve(Eigen::VectorXd(A * x));
            mu = x.dot(A * x);
            x = y;
            if (x.squaredNorm() == 0.0) return 0.0;
        }
        return mu;
    };
    return std::sqrt(std::max(top(sys.K), 0.0)) + std::max(top(sys.Ka), 0.0);
}

EnergyTrace run(const DiscreteSystem& sys, const State& initial, double dt, double T, int sample_every) {
    if (!(T > 0.0)) throw Error(Errc::invalid_argument, "final time must be positive");
    if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "time step must be positive");
    if (sample_every < 1) throw Error(Errc::invalid_argument, "sample_every must be >= 1");

    const CrankNicolson cn(sys, dt);
    EnergyTrace trace;
    trace.dt = dt;
    trace.sample_every = sample_every;
    trace.generator_norm = generator_norm_estimate(sys);

    const auto steps = static_cast<long>(std::llround(T / dt));
    State s = initial;
    double E = energy(sys, s);
    trace.samples.push_back({s.t, E, dissipation_rate(sys, s.v), 0.0, 0.0});
    double worst = 0.0;
    for (long k = 1; k <= std::max(steps, 1L); ++k) {
        State next = cn.step(s);
        const double E_next = energy(sys, next);
        const Eigen::VectorXd v_mid = 0.5 * (s.v + next.v);
        const double D_mid = dissipation_rate(sys, v_mid);
        worst = std::max(worst, std::abs((E_next - E) / dt + D_mid));
        s = std::move(next);
        s.t = static_cast<double>(k) * dt;  // avoid drift from repeated addition
        E = E_next;
        if (k % sample_every == 0 || k == steps) {
            trace.samples.push_back({s.t, E, dissipation_rate(sys, s.v), D_mid, worst});
            worst = 0.0;
        }
    }
    return trace;
}

double max_dissipation_residual(const EnergyTrace& trace) {
    if (trace.samples.empty()) return 0.0;
    const double E0 = trace.samples.front().E;
    double worst = 0.0;
    for (std::size_t k = 1; k < trace.samples.size(); ++k) {
        const auto& a = trace.samples[k - 1];
        const auto& b = trace.samples[k];
        const double dt = b.t - a.t;
        worst = std::max(worst, std::abs((b.E - a.E) / dt + b.D_mid));
    }
    return E0 > 0.0 ? worst / E0 : worst;
}

bool check_dissipation(const EnergyTrace& trace, double tol) {
    if (trace.sample_every != 1)
        throw Error(Errc::invalid_argument, "dissipation check needs every step sampled");
    if (trace.samples.empty()) return true;
    const double E0 = trace.samples.front().E;
    const double bound = tol * E0 * std::max(1.0, trace.generator_norm * trace.dt);
    for (std::size_t k = 1; k < trace.samples.size(); ++k) {
        const auto& a = trace.samples[k - 1];
        const auto& b = trace.samples[k];
        const double dt = b.t - a.t;
        if (!(std::abs((b.E - a.E) / dt + b.D_mid) <= bound)) return false;
    }
    return true;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double max_abs_residual = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
    }
    fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

DecayFit fit_decay(const EnergyTrace& trace, double t0, double t1, DecayModel model) {
    if (!(t1 > t0)) throw Error(Errc::invalid_argument, "empty fit window");
    if (model == DecayModel::power && !(t0 > 0.0))
        throw Error(Errc::invalid_argument, "power-law window must exclude t = 0");
    if (trace.samples.empty()) throw Error(Errc::window_too_short, "empty trace");
    const double E0 = trace.samples.front().E;
    const double floor = 1e2 * std::numeric_limits<double>::epsilon() * E0;

    std::vector<double> x;
    std::vector<double> y;
    std::size_t in_window = 0;
    for (const auto& s : trace.samples) {
        if (s.t < t0 || s.t > t1) continue;
        ++in_window;
        if (!(s.E > floor)) continue;
        x.push_back(model == DecayModel::power ? std::log(s.t) : s.t);
        y.push_back(std::log(s.E));
    }
    if (in_window < 20)
        throw Error(Errc::window_too_short,
                    "window [" + std::to_string(t0) + ", " + std::to_string(t1) + "] holds " +
                        std::to_string(in_window) + " samples (need 20)");
    if (x.size() < 20)
        throw Error(Errc::energy_underflow, "fewer than 20 samples above the round-off floor");

    const LineFit line = least_squares(x, y);
    DecayFit fit;
    fit.model = model;
    fit.t0 = t0;
    fit.t1 = t1;
    fit.rate = model == DecayModel::power ? -line.slope : -0.5 * line.slope;
    fit.intercept = line.intercept;
    fit.r2 = line.r2;
    fit.samples_used = x.size();
    fit.max_abs_residual = line.max_abs_residual;
    return fit;
}

}  // namespace

DecayFit fit_exponential(const EnergyTrace& trace, double t0, double t1) {
    return fit_decay(trace, t0, t1, DecayModel::exponential);
}

DecayFit fit_power(const EnergyTrace& trace, double t0, double t1) {
    return fit_decay(trace, t0, t1, DecayModel::power);
}

void write_trace_csv(const EnergyTrace& trace, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw Error(Errc::invalid_argument, "cannot open '" + path + "' for writing");
    std::fputs("t,E,D,diss_residual\n", f);
    for (const auto& s : trace.samples)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", s.t, s.E, s.D, s.diss_residual);
    std::fclose(f);
}

}  // namespace graphwave
