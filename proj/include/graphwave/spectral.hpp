#pragma once

#include "graphwave/discretize.hpp"

#include <Eigen/Core>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace graphwave {

using Complex = std::complex<double>;

inline constexpr Eigen::Index default_dense_threshold = 4000;

struct SpectrumResult {
    /// All 2n roots of det(lambda^2 M + lambda Ka + K) = 0, sorted by |Im|, then Re.
    std::vector<Complex> eigenvalues;
    /// ||(lambda^2 M + lambda Ka + K) x|| / ((|lambda|^2 ||M|| + |lambda| ||Ka|| + ||K||) ||x||).
    std::vector<double> residuals;
    std::string method;

    [[nodiscard]] double max_real_part() const;
    [[nodiscard]] double max_residual() const;
};

/// Companion linearization of the quadratic pencil, solved densely in the
/// energy-orthonormal frame. Throws Errc::dense_threshold_exceeded above the
/// threshold.
[[nodiscard]] SpectrumResult eigenvalues(const DiscreteSystem& sys,
                                         Eigen::Index dense_threshold = default_dense_threshold);

enum class ResolventMethod { automatic, dense, iterative };

/// ||(i beta - A)^{-1}|| in the energy norm. The dense route takes the smallest
/// singular value of i beta - B; the iterative route runs Lanczos on R^# R
/// with one sparse LU of K - beta^2 M + i beta Ka per shift.
class ResolventEvaluator {
public:
    explicit ResolventEvaluator(const DiscreteSystem& sys, ResolventMethod method = ResolventMethod::automatic,
                                Eigen::Index dense_threshold = default_dense_threshold);

    [[nodiscard]] double norm(double beta) const;
    [[nodiscard]] ResolventMethod method() const noexcept { return method_; }

private:
    [[nodiscard]] double dense_norm(double beta) const;
    [[nodiscard]] double iterative_norm(double beta) const;

    const DiscreteSystem* sys_;
    ResolventMethod method_;
    Eigen::MatrixXd frame_;  // energy-frame generator, dense route only
};

[[nodiscard]] double resolvent_norm(const DiscreteSystem& sys, double beta);

/// Largest beta the mesh resolves: factor * pi / h_max.
[[nodiscard]] double resolved_band_limit(const Mesh& mesh, double factor = 0.25);

struct ScanOptions {
    bool refine_peaks = true;
    Execution exec = Execution::parallel;
    ResolventMethod method = ResolventMethod::automatic;
    double band_factor = 0.25;
};

struct ResolventScan {
    std::vector<double> grid;
    std::vector<double> norms;
    std::vector<double> peak_betas;  // refined local maxima of the norm
    std::vector<double> peak_norms;
    double slope = 0.0;
    double fit_lo = 0.0;  // band used for the slope (upper half of the grid, log scale)
    double fit_hi = 0.0;
    std::string slope_source;  // "peaks" or "grid"
    std::size_t fit_points = 0;
};

/// Log-spaced scan of the resolvent norm on [beta_min, beta_max]. The slope of
/// log ||R|| against log beta is fitted over the upper half of the band, on
/// the refined resonance peaks when at least three fall there and on the grid
/// values otherwise. Throws Errc::band_too_narrow below one decade.
[[nodiscard]] ResolventScan resolvent_scan(const DiscreteSystem& sys, double beta_min, double beta_max,
                                           int points, const ScanOptions& opts = {});

/// Serial reference of the scan, kept for tests and the benchmark.
[[nodiscard]] ResolventScan resolvent_scan_serial(const DiscreteSystem& sys, double beta_min,
                                                  double beta_max, int points);

struct StabilityThresholds {
    double exponential_max_slope = 0.1;
    double polynomial_min_slope = 0.3;
    double polynomial_max_slope = 0.7;
};

enum class Regime { not_asymptotically_stable, exponential, polynomial, inconclusive };

[[nodiscard]] const char* to_string(Regime r) noexcept;

struct StabilityVerdict {
    bool asymptotically_stable = false;
    double max_real_part = 0.0;
    double spectral_gap = 0.0;  // -max Re lambda
    Regime classification = Regime::inconclusive;
    std::optional<double> alpha_estimate;
    double slope = 0.0;
    /// Fraction of scan peaks lying within 5% of Im lambda of some eigenvalue.
    double peak_match_fraction = 1.0;
    std::vector<std::string> messages;
};

[[nodiscard]] StabilityVerdict classify_stability(const SpectrumResult& spectrum, const ResolventScan& scan,
                                                  const StabilityThresholds& thresholds = {});

void write_spectrum_csv(const SpectrumResult& spectrum, const std::string& path);
void write_scan_csv(const ResolventScan& scan, const std::string& path);

}  // namespace graphwave
