#include "graphwave/spectral.hpp"

#include "graphwave/error.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace graphwave {

namespace {

using ComplexVector = Eigen::VectorXcd;
using ComplexSparse = Eigen::SparseMatrix<Complex>;

double one_norm(const SparseMatrix& m) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
        double col = 0.0;
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) col += std::abs(it.value());
        best = std::max(best, col);
    }
    return best;
}

}  // namespace

double SpectrumResult::max_real_part() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& l : eigenvalues) best = std::max(best, l.real());
    return best;
}

double SpectrumResult::max_residual() const {
    double best = 0.0;
    for (double r : residuals) best = std::max(best, r);
    return best;
}

SpectrumResult eigenvalues(const DiscreteSystem& sys, Eigen::Index dense_threshold) {
    const Eigen::Index n = sys.n();
    if (n > dense_threshold)
        throw Error(Errc::dense_threshold_exceeded,
                    std::to_string(n) + " DOFs exceed the dense threshold " + std::to_string(dense_threshold));

    const Eigen::MatrixXd B = energy_frame_generator(sys);
    Eigen::EigenSolver<Eigen::MatrixXd> es(B, true);
    if (es.info() != Eigen::Success) throw Error(Errc::eigensolver_failure, "QR iteration did not converge");

    // Map energy-frame eigenvectors back: u = L_K^{-T} y_u.
    Eigen::LLT<Eigen::MatrixXd> lk{Eigen::MatrixXd(sys.K)};
    const Eigen::MatrixXcd LKt = Eigen::MatrixXd(lk.matrixU()).cast<Complex>();
    const Eigen::MatrixXcd Y = es.eigenvectors();
    const Eigen::MatrixXcd U = LKt.triangularView<Eigen::Upper>().solve(Y.topRows(n));

    const ComplexSparse Mc = sys.M.cast<Complex>();
    const ComplexSparse Kc = sys.K.cast<Complex>();
    const ComplexSparse Kac = sys.Ka.cast<Complex>();
    const double nM = one_norm(sys.M);
    const double nK = one_norm(sys.K);
    const double nKa = one_norm(sys.Ka);

    struct Pair {
        Complex lambda;
        double residual;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(2 * n));
    for (Eigen::Index j = 0; j < 2 * n; ++j) {
        const Complex lambda = es.eigenvalues()[j];
        const ComplexVector x = U.col(j);
        const ComplexVector r = (lambda * lambda) * (Mc * x) + lambda * (Kac * x) + Kc * x;
        const double scale = (std::norm(lambda) * nM + std::abs(lambda) * nKa + nK) * x.lpNorm<1>();
        pairs.push_back({lambda, scale > 0.0 ? r.lpNorm<1>() / scale : 0.0});
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        const double ia = std::abs(a.lambda.imag());
        const double ib = std::abs(b.lambda.imag());
        if (ia != ib) return ia < ib;
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });

    SpectrumResult out;
    out.method = "dense companion (energy frame), real QR";
    for (const auto& p : pairs) {
        out.eigenvalues.push_back(p.lambda);
        out.residuals.push_back(p.residual);
    }
    return out;
}

ResolventEvaluator::ResolventEvaluator(const DiscreteSystem& sys, ResolventMethod method,
                                       Eigen::Index dense_threshold)
    : sys_(&sys), method_(method) {
    if (method_ == ResolventMethod::automatic)
        method_ = sys.n() <= dense_threshold ? ResolventMethod::dense : ResolventMethod::iterative;
    if (method_ == ResolventMethod::dense) frame_ = energy_frame_generator(sys);
}

double ResolventEvaluator::norm(double beta) const {
    return method_ == ResolventMethod::dense ? dense_norm(beta) : iterative_norm(beta);
}

double ResolventEvaluator::dense_norm(double beta) const {
    const Eigen::Index m = frame_.rows();
    Eigen::MatrixXcd shifted = -frame_.cast<Complex>();
    shifted.diagonal().array() += Complex(0.0, beta);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(shifted);
    const auto& s = svd.singularValues();
    const double smin = s[m - 1];
    if (!(smin > std::numeric_limits<double>::epsilon() * s[0]))
        throw Error(Errc::singular_shift, "i*beta is numerically an eigenvalue (beta = " + std::to_string(beta) + ")");
    return 1.0 / smin;
}

double ResolventEvaluator::iterative_norm(double beta) const {
    const DiscreteSystem& sys = *sys_;
    const Eigen::Index n = sys.n();
    const Complex ib(0.0, beta);

    ComplexSparse Q = sys.K.cast<Complex>() - (beta * beta) * sys.M.cast<Complex>() + ib * sys.Ka.cast<Complex>();
    Q.makeCompressed();
    Eigen::SparseLU<ComplexSparse> lu;
    lu.compute(Q);
    if (lu.info() != Eigen::Success)
        throw Error(Errc::singular_shift, "shifted pencil is singular (beta = " + std::to_string(beta) + ")");

    const ComplexSparse Mc = sys.M.cast<Complex>();
    const ComplexSparse Kc = sys.K.cast<Complex>();
    const ComplexSparse Kac = sys.Ka.cast<Complex>();

    // R (f, g): u = Q^{-1}(M g + (i beta M + Ka) f), v = i beta u - f.
    auto apply_r = [&](const ComplexVector& z) {
        const auto f = z.head(n);
        const auto g = z.tail(n);
        ComplexVector rhs = Mc * g + ib * (Mc * f) + Kac * f;
        ComplexVector out(2 * n);
        out.head(n) = lu.solve(rhs);
        out.tail(n) = ib * out.head(n) - f;
        return out;
    };
    // R^# (f, g): u = conj(Q)^{-1}((Ka - i beta M) f - M g), v = f + i beta u.
    auto apply_r_adjoint = [&](const ComplexVector& z) {
        const auto f = z.head(n);
        const auto g = z.tail(n);
        ComplexVector rhs = Kac * f - ib * (Mc * f) - Mc * g;
        ComplexVector out(2 * n);
        out.head(n) = lu.solve(ComplexVector(rhs.conjugate())).conjugate();
        out.tail(n) = f + ib * out.head(n);
        return out;
    };
    auto inner = [&](const ComplexVector& x, const ComplexVector& y) {
        return x.head(n).dot(Kc * y.head(n)) + x.tail(n).dot(Mc * y.tail(n));
    };

    // Lanczos with full reorthogonalization in the energy inner product.
    const int max_steps = static_cast<int>(std::min<Eigen::Index>(2 * n, 300));
    std::vector<ComplexVector> basis;
    std::vector<double> alpha;
    std::vector<double> offdiag;
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    ComplexVector q(2 * n);
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = Complex(normal(rng), normal(rng));
    q /= std::sqrt(inner(q, q).real());

    double theta = 0.0;
    for (int j = 0; j < max_steps; ++j) {
        basis.push_back(q);
        ComplexVector w = apply_r_adjoint(apply_r(q));
        alpha.push_back(inner(q, w).real());
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) w -= inner(b, w) * b;
        const double next = std::sqrt(std::max(inner(w, w).real(), 0.0));

        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(alpha.size()),
                                                  static_cast<Eigen::Index>(alpha.size()));
        for (std::size_t k = 0; k < alpha.size(); ++k) {
            T(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = alpha[k];
            if (k + 1 < alpha.size()) {
                T(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k + 1)) = offdiag[k];
                T(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k)) = offdiag[k];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(T, Eigen::EigenvaluesOnly);
        const double theta_new = tri.eigenvalues().maxCoeff();
        const bool converged = j >= 4 && std::abs(theta_new - theta) <= 1e-13 * theta_new;
        theta = theta_new;
        if (converged || next <= 1e-14 * theta) break;
        offdiag.push_back(next);
        q = w / next;
    }
    // Same cut as the dense route: sigma_min <= eps * sigma_max, with
    // sigma_max estimated from below by max(|beta|, 1).
    const double norm = std::sqrt(theta);
    if (norm * std::numeric_limits<double>::epsilon() * std::max(std::abs(beta), 1.0) >= 1e-2)
        throw Error(Errc::singular_shift, "shifted pencil is numerically singular (beta = " + std::to_string(beta) + ")");
    return norm;
}

double resolvent_norm(const DiscreteSystem& sys, double beta) { return ResolventEvaluator(sys).norm(beta); }

double resolved_band_limit(const Mesh& mesh, double factor) {
    return factor * std::numbers::pi / mesh.max_cell_width();
}

namespace {

double golden_maximize(const ResolventEvaluator& eval, double lo, double hi, double* best_value) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval.norm(c);
    double fd = eval.norm(d);
    while ((b - a) > 1e-5 * b) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval.norm(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval.norm(d);
        }
    }
    if (fc > fd) {
        *best_value = fc;
        return c;
    }
    *best_value = fd;
    return d;
}

struct SlopeFit {
    double slope = 0.0;
    std::size_t points = 0;
};

SlopeFit log_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo || x[i] > hi) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    SlopeFit fit;
    fit.points = lx.size();
    if (lx.size() < 2) return fit;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return fit;
}

ResolventScan scan_impl(const DiscreteSystem& sys, double beta_min, double beta_max, int points,
                        const ScanOptions& opts) {
    if (!(beta_min > 0.0) || !(beta_max > beta_min))
        throw Error(Errc::invalid_argument, "need 0 < beta_min < beta_max");
    if (beta_max < 10.0 * beta_min * (1.0 - 1e-12))
        throw Error(Errc::band_too_narrow, "band [" + std::to_string(beta_min) + ", " + std::to_string(beta_max) +
                                               "] is narrower than one decade");
    if (points < 4) throw Error(Errc::invalid_argument, "scan needs at least 4 points");
    const double limit = resolved_band_limit(*sys.mesh, opts.band_factor);
    if (beta_max > limit * (1.0 + 1e-12))
        throw Error(Errc::invalid_argument, "beta_max " + std::to_string(beta_max) +
                                                " exceeds the resolved band limit " + std::to_string(limit));

    const ResolventEvaluator eval(sys, opts.method);
    ResolventScan scan;
    scan.grid.resize(static_cast<std::size_t>(points));
    scan.norms.resize(static_cast<std::size_t>(points));
    const double ratio = std::log(beta_max / beta_min);
    for (int i = 0; i < points; ++i)
        scan.grid[static_cast<std::size_t>(i)] = beta_min * std::exp(ratio * i / (points - 1));
    scan.grid.back() = beta_max;

    const bool parallel = opts.exec == Execution::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < points; ++i) scan.norms[static_cast<std::size_t>(i)] = eval.norm(scan.grid[static_cast<std::size_t>(i)]);

    if (opts.refine_peaks) {
        std::vector<std::size_t> local_max;
        for (std::size_t i = 1; i + 1 < scan.norms.size(); ++i)
            if (scan.norms[i] > scan.norms[i - 1] && scan.norms[i] >= scan.norms[i + 1]) local_max.push_back(i);
        scan.peak_betas.resize(local_max.size());
        scan.peak_norms.resize(local_max.size());
        const auto peaks = static_cast<std::ptrdiff_t>(local_max.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (std::ptrdiff_t p = 0; p < peaks; ++p) {
            const std::size_t i = local_max[static_cast<std::size_t>(p)];
            double value = 0.0;
            const double beta = golden_maximize(eval, scan.grid[i - 1], scan.grid[i + 1], &value);
            const auto up = static_cast<std::size_t>(p);
            if (value >= scan.norms[i]) {
                scan.peak_betas[up] = beta;
                scan.peak_norms[up] = value;
            } else {
                scan.peak_betas[up] = scan.grid[i];
                scan.peak_norms[up] = scan.norms[i];
            }
        }
    }

    scan.fit_lo = std::sqrt(beta_min * beta_max);
    scan.fit_hi = beta_max;
    const SlopeFit peak_fit = log_slope(scan.peak_betas, scan.peak_norms, scan.fit_lo, scan.fit_hi);
    if (peak_fit.points >= 3) {
        scan.slope = peak_fit.slope;
        scan.fit_points = peak_fit.points;
        scan.slope_source = "peaks";
    } else {
        const SlopeFit grid_fit = log_slope(scan.grid, scan.norms, scan.fit_lo, scan.fit_hi);
        scan.slope = grid_fit.slope;
        scan.fit_points = grid_fit.points;
        scan.slope_source = "grid";
    }
    return scan;
}

}  // namespace

ResolventScan resolvent_scan(const DiscreteSystem& sys, double beta_min, double beta_max, int points,
                             const ScanOptions& opts) {
    return scan_impl(sys, beta_min, beta_max, points, opts);
}

ResolventScan resolvent_scan_serial(const DiscreteSystem& sys, double beta_min, double beta_max, int points) {
    ScanOptions opts;
    opts.exec = Execution::serial;
    return scan_impl(sys, beta_min, beta_max, points, opts);
}

const char* to_string(Regime r) noexcept {
    switch (r) {
        case Regime::not_asymptotically_stable: return "not-asymptotically-stable";
        case Regime::exponential: return "exponential-consistent";
        case Regime::polynomial: return "polynomial-consistent";
        case Regime::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

StabilityVerdict classify_stability(const SpectrumResult& spectrum, const ResolventScan& scan,
                                    const StabilityThresholds& thresholds) {
    StabilityVerdict v;
    v.max_real_part = spectrum.max_real_part();
    v.spectral_gap = -v.max_real_part;
    double radius = 0.0;
    for (const auto& l : spectrum.eigenvalues) radius = std::max(radius, std::abs(l));
    v.asymptotically_stable = v.max_real_part < -1e-10 * std::max(radius, 1.0);
    v.slope = scan.slope;

    if (!v.asymptotically_stable) {
        v.classification = Regime::not_asymptotically_stable;
        v.messages.emplace_back("eigenvalues on the imaginary axis: no decay regime");
    } else if (scan.slope <= thresholds.exponential_max_slope) {
        v.classification = Regime::exponential;
    } else if (scan.slope >= thresholds.polynomial_min_slope && scan.slope <= thresholds.polynomial_max_slope) {
        v.classification = Regime::polynomial;
        v.alpha_estimate = scan.slope;
    } else {
        v.classification = Regime::inconclusive;
        v.messages.push_back("resolvent slope " + std::to_string(scan.slope) + " outside both bands");
    }

    std::size_t matched = 0;
    for (double beta : scan.peak_betas) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& l : spectrum.eigenvalues) best = std::min(best, std::abs(std::abs(l.imag()) - beta));
        if (best <= 0.05 * beta) ++matched;
    }
    v.peak_match_fraction =
        scan.peak_betas.empty() ? 1.0 : static_cast<double>(matched) / static_cast<double>(scan.peak_betas.size());
    return v;
}

void write_spectrum_csv(const SpectrumResult& spectrum, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw Error(Errc::invalid_argument, "cannot open '" + path + "' for writing");
    std::fputs("re,im,residual\n", f);
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", spectrum.eigenvalues[i].real(), spectrum.eigenvalues[i].imag(),
                     spectrum.residuals[i]);
    std::fclose(f);
}

void write_scan_csv(const ResolventScan& scan, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw Error(Errc::invalid_argument, "cannot open '" + path + "' for writing");
    std::fputs("beta,resolvent_norm\n", f);
    for (std::size_t i = 0; i < scan.grid.size(); ++i) std::fprintf(f, "%.17g,%.17g\n", scan.grid[i], scan.norms[i]);
    std::fclose(f);
}

}  // namespace graphwave
