#pragma once

#include <cstddef>
#include <vector>

namespace graphwave {

enum class ProfileKind { zero, constant, piecewise };

/// Kelvin–Voigt coefficient a(x) on one edge [0, length], stored as a
/// piecewise polynomial. Each piece holds ascending-power coefficients in the
/// local coordinate measured from the piece's left breakpoint.
///
/// Admissibility is enforced at construction: breakpoints strictly increase
/// from 0 to the edge length, a >= 0 everywhere, a > 0 on the interior of
/// every piece of a nonzero profile. A profile whose pieces are all zero is
/// normalized to ProfileKind::zero.
class DampingProfile {
public:
    DampingProfile() = default;  // zero profile on a unit edge

    static DampingProfile zero(double length);
    static DampingProfile constant(double value, double length);
    static DampingProfile piecewise(std::vector<double> breaks,
                                    std::vector<std::vector<double>> coeffs);

    [[nodiscard]] ProfileKind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_zero() const noexcept { return kind_ == ProfileKind::zero; }
    [[nodiscard]] double length() const noexcept { return breaks_.back(); }
    [[nodiscard]] std::size_t piece_count() const noexcept { return coeffs_.size(); }
    [[nodiscard]] const std::vector<double>& breaks() const noexcept { return breaks_; }
    [[nodiscard]] const std::vector<double>& piece(std::size_t i) const { return coeffs_.at(i); }
    /// Highest polynomial degree over all pieces (0 for zero/constant).
    [[nodiscard]] int degree() const noexcept;

    // One-sided convention: interior breakpoints use the right piece, x = length
    // uses the last piece. Throws Errc::out_of_domain outside [0, length].
    [[nodiscard]] double eval(double x) const { return derivative(x, 0); }
    [[nodiscard]] double eval_d1(double x) const { return derivative(x, 1); }
    [[nodiscard]] double eval_d2(double x) const { return derivative(x, 2); }
    [[nodiscard]] double derivative(double x, int order) const;

    [[nodiscard]] std::size_t piece_at(double x) const;
    /// Evaluate the given derivative of piece i at global coordinate x, without
    /// the right-piece convention (x may sit on either breakpoint of the piece).
    [[nodiscard]] double eval_piece(std::size_t i, double x, int order = 0) const;

    /// Values at the edge ends: x = 0 uses the first piece, x = length the last.
    [[nodiscard]] double value_at_tail() const { return eval_piece(0, 0.0); }
    [[nodiscard]] double value_at_head() const { return eval_piece(piece_count() - 1, length()); }
    [[nodiscard]] double d1_at_tail() const { return eval_piece(0, 0.0, 1); }
    [[nodiscard]] double d1_at_head() const { return eval_piece(piece_count() - 1, length(), 1); }

    /// sup over [0, length] of |a^(order)|, taken piece by piece from endpoint
    /// values and the real critical points of each piece.
    [[nodiscard]] double sup_abs(int order) const;

    /// Largest jump of a^(order) across interior breakpoints (0 for a single piece).
    [[nodiscard]] double max_jump(int order) const;

    /// The same physical coefficient seen from the other end: x -> length - x.
    [[nodiscard]] DampingProfile reflected() const;

private:
    DampingProfile(ProfileKind kind, std::vector<double> breaks,
                   std::vector<std::vector<double>> coeffs);

    ProfileKind kind_ = ProfileKind::zero;
    std::vector<double> breaks_{0.0, 1.0};
    std::vector<std::vector<double>> coeffs_{{0.0}};
};

/// One profile per edge, indexed by EdgeId.
using DampingAssignment = std::vector<DampingProfile>;

namespace poly {

/// p^(order)(s) for ascending-power coefficients.
[[nodiscard]] double eval(const std::vector<double>& c, double s, int order = 0);
[[nodiscard]] std::vector<double> differentiate(const std::vector<double>& c);
/// Real roots of p strictly inside (lo, hi).
[[nodiscard]] std::vector<double> real_roots_in(const std::vector<double>& c, double lo, double hi);

}  // namespace poly

}  // namespace graphwave
