#include "graphwave/profile.hpp"

#include "graphwave/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <string>
#include <cmath>
#include <sstream>

namespace graphwave {

namespace poly {

double eval(const std::vector<double>& c, double s, int order) {
    // Horner on the order-th derivative: coefficient k contributes
    // k!/(k-order)! * c_k * s^(k-order).
    double acc = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= order; --k) {
        double factor = 1.0;
        for (int j = 0; j < order; ++j) factor *= static_cast<double>(k - j);
        acc = acc * s + factor * c[static_cast<std::size_t>(k)];
    }
    return acc;
}

std::vector<double> differentiate(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
    return d;
}

std::vector<double> real_roots_in(const std::vector<double>& c, double lo, double hi) {
    double scale = 0.0;
    for (double v : c) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return {};
    std::size_t deg = c.size() - 1;
    while (deg > 0 && std::abs(c[deg]) <= 1e-14 * scale) --deg;
    if (deg == 0) return {};

    std::vector<double> roots;
    if (deg == 1) {
        roots.push_back(-c[0] / c[1]);
    } else {
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg),
                                                          static_cast<Eigen::Index>(deg));
        for (std::size_t i = 1; i < deg; ++i)
            companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
        for (std::size_t i = 0; i < deg; ++i)
            companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) =
                -c[i] / c[deg];
        Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
        const auto& ev = es.eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            const double re = ev[i].real();
            if (std::abs(ev[i].imag()) <= 1e-7 * std::max(1.0, std::abs(re))) roots.push_back(re);
        }
    }
    std::vector<double> inside;
    for (double r : roots)
        if (r > lo && r < hi) inside.push_back(r);
    std::sort(inside.begin(), inside.end());
    return inside;
}

}  // namespace poly

namespace {

double local_min(const std::vector<double>& c, double width, bool* interior_nonpositive) {
    // Minimum over [0, width] from endpoints, critical points and a sampling pass.
    double mn = std::min(poly::eval(c, 0.0), poly::eval(c, width));
    double interior_min = std::numeric_limits<double>::infinity();
    for (double s : poly::real_roots_in(poly::differentiate(c), 0.0, width))
        interior_min = std::min(interior_min, poly::eval(c, s));
    constexpr int samples = 64;
    for (int i = 1; i < samples; ++i)
        interior_min = std::min(interior_min, poly::eval(c, width * i / samples));
    *interior_nonpositive = interior_min <= 0.0;
    return std::min(mn, interior_min);
}

bool all_zero(const std::vector<double>& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

}  // namespace

DampingProfile::DampingProfile(ProfileKind kind, std::vector<double> breaks,
                               std::vector<std::vector<double>> coeffs)
    : kind_(kind), breaks_(std::move(breaks)), coeffs_(std::move(coeffs)) {}

DampingProfile DampingProfile::zero(double length) {
    if (!(length > 0.0) || !std::isfinite(length))
        throw Error(Errc::invalid_profile, "profile length must be positive");
    return DampingProfile(ProfileKind::zero, {0.0, length}, {{0.0}});
}

DampingProfile DampingProfile::constant(double value, double length) {
    if (!std::isfinite(value) || value < 0.0)
        throw Error(Errc::invalid_profile, "constant damping must be finite and nonnegative");
    if (value == 0.0) return zero(length);
    if (!(length > 0.0) || !std::isfinite(length))
        throw Error(Errc::invalid_profile, "profile length must be positive");
    return DampingProfile(ProfileKind::constant, {0.0, length}, {{value}});
}

DampingProfile DampingProfile::piecewise(std::vector<double> breaks,
                                         std::vector<std::vector<double>> coeffs) {
    if (breaks.size() < 2 || coeffs.size() + 1 != breaks.size())
        throw Error(Errc::invalid_profile, "need n+1 breakpoints for n coefficient rows");
    if (breaks.front() != 0.0)
        throw Error(Errc::invalid_profile, "first breakpoint must be 0");
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (!(breaks[i + 1] > breaks[i]) || !std::isfinite(breaks[i + 1]))
            throw Error(Errc::invalid_profile, "breakpoints must be strictly increasing");
    for (auto& row : coeffs) {
        if (row.empty()) row.push_back(0.0);
        for (double v : row)
            if (!std::isfinite(v)) throw Error(Errc::invalid_profile, "non-finite coefficient");
    }

    if (std::all_of(coeffs.begin(), coeffs.end(), all_zero)) return zero(breaks.back());

    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const double width = breaks[i + 1] - breaks[i];
        std::ostringstream where;
        where << "piece " << i << " on [" << breaks[i] << ", " << breaks[i + 1] << "]";
        if (all_zero(coeffs[i]))
            throw Error(Errc::invalid_profile,
                        where.str() + " vanishes identically; split the edge into an elastic edge");
        bool interior_nonpositive = false;
        const double mn = local_min(coeffs[i], width, &interior_nonpositive);
        if (mn < 0.0) throw Error(Errc::invalid_profile, where.str() + " takes negative values");
        if (interior_nonpositive)
            throw Error(Errc::invalid_profile, where.str() + " is not positive on its interior");
    }
    return DampingProfile(ProfileKind::piecewise, std::move(breaks), std::move(coeffs));
}

int DampingProfile::degree() const noexcept {
    int deg = 0;
    for (const auto& row : coeffs_) {
        int d = static_cast<int>(row.size()) - 1;
        while (d > 0 && row[static_cast<std::size_t>(d)] == 0.0) --d;
        deg = std::max(deg, d);
    }
    return deg;
}

std::size_t DampingProfile::piece_at(double x) const {
    if (!(x >= 0.0 && x <= length()))
        throw Error(Errc::out_of_domain, "x = " + std::to_string(x) + " outside [0, " +
                                             std::to_string(length()) + "]");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    auto idx = static_cast<std::size_t>(std::distance(breaks_.begin(), it));
    // idx is the first break > x; the piece starting at or before x is idx - 1.
    return std::min(idx - 1, coeffs_.size() - 1);
}

double DampingProfile::eval_piece(std::size_t i, double x, int order) const {
    return poly::eval(coeffs_.at(i), x - breaks_[i], order);
}

double DampingProfile::derivative(double x, int order) const {
    return eval_piece(piece_at(x), x, order);
}

double DampingProfile::sup_abs(int order) const {
    double sup = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const double width = breaks_[i + 1] - breaks_[i];
        std::vector<double> c = coeffs_[i];
        for (int k = 0; k < order; ++k) c = poly::differentiate(c);
        sup = std::max({sup, std::abs(poly::eval(c, 0.0)), std::abs(poly::eval(c, width))});
        for (double s : poly::real_roots_in(poly::differentiate(c), 0.0, width))
            sup = std::max(sup, std::abs(poly::eval(c, s)));
    }
    return sup;
}

double DampingProfile::max_jump(int order) const {
    double jump = 0.0;
    for (std::size_t i = 1; i < coeffs_.size(); ++i) {
        const double left = eval_piece(i - 1, breaks_[i], order);
        const double right = eval_piece(i, breaks_[i], order);
        jump = std::max(jump, std::abs(right - left));
    }
    return jump;
}

DampingProfile DampingProfile::reflected() const {
    const double len = length();
    const std::size_t n = coeffs_.size();
    std::vector<double> breaks(n + 1);
    std::vector<std::vector<double>> coeffs(n);
    for (std::size_t k = 0; k <= n; ++k) breaks[k] = len - breaks_[n - k];
    breaks.front() = 0.0;
    breaks.back() = len;
    for (std::size_t j = 0; j < n; ++j) {
        // New piece j is old piece i = n-1-j traversed backwards:
        // q(s') = p(w - s') = sum_k c_k (w - s')^k.
        const std::size_t i = n - 1 - j;
        const double w = breaks_[i + 1] - breaks_[i];
        const auto& c = coeffs_[i];
        std::vector<double> q(c.size(), 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            double binom = 1.0;
            for (std::size_t m = 0; m <= k; ++m) {
                // term C(k,m) w^(k-m) (-s')^m
                const double term = c[k] * binom * std::pow(w, static_cast<double>(k - m)) *
                                    ((m % 2 == 0) ? 1.0 : -1.0);
                q[m] += term;
                binom = binom * static_cast<double>(k - m) / static_cast<double>(m + 1);
            }
        }
        coeffs[j] = std::move(q);
    }
    return DampingProfile(kind_, std::move(breaks), std::move(coeffs));
}

}  // namespace graphwave
