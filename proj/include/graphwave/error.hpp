#pragma once

#include <stdexcept>
#include <string>

namespace graphwave {

enum class Errc {
    invalid_spec,
    disconnected_graph,
    cycle_in_tree_mode,
    bad_root_degree,
    self_loop,
    nonpositive_length,
    invalid_dirichlet,
    unknown_vertex,
    invalid_profile,
    out_of_domain,
    resolution_too_coarse,
    quadrature_degree_overflow,
    singular_mass,
    incompatible_initial_data,
    linear_solve_failure,
    window_too_short,
    energy_underflow,
    dense_threshold_exceeded,
    eigensolver_failure,
    singular_shift,
    band_too_narrow,
    invalid_argument,
};

[[nodiscard]] const char* to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code contract) can branch on the kind.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace graphwave
